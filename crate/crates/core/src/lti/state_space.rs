use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LtiError, RationalTf};

/// Relative pivot threshold for the complex LU used in frequency evaluation.
const PIVOT_TOL: f64 = 1e-12;

/// Continuous-time state-space model `x' = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self, LtiError> {
        let n = a.nrows();
        let ok = a.ncols() == n
            && b.nrows() == n
            && c.ncols() == n
            && d.nrows() == c.nrows()
            && d.ncols() == b.ncols();
        if !ok {
            return Err(LtiError::DimensionMismatch(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        let finite = [&a, &b, &c, &d]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(LtiError::NonFinite);
        }
        Ok(Self { a, b, c, d })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Controllable canonical realization of a proper SISO transfer function.
    pub fn from_tf(tf: &RationalTf) -> Result<Self, LtiError> {
        if !tf.is_proper() {
            return Err(LtiError::Improper);
        }
        let lead = tf.den().leading();
        let den: Vec<f64> = tf.den().coeffs().iter().map(|c| c / lead).collect();
        let n = den.len() - 1;
        let mut num: Vec<f64> = tf.num().coeffs().iter().map(|c| c / lead).collect();
        num.resize(n + 1, 0.0);

        // Biproper part: D = b_n, remainder num - D * den.
        let d0 = num[n];
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -den[j];
            }
        }
        let mut b = DMatrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = 1.0;
        }
        let c = DMatrix::from_fn(1, n, |_, j| num[j] - d0 * den[j]);
        let d = DMatrix::from_element(1, 1, d0);
        Self::new(a, b, c, d)
    }

    /// `C (jwI - A)^-1 B + D`, via LU with partial pivoting.
    pub fn freq_response(&self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        let n = self.states();
        let m = self.inputs();
        let p = self.outputs();
        let mut out = self.d.map(|v| Complex64::new(v, 0.0));
        if n == 0 {
            return Ok(out);
        }

        let mut mat: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let diag = if i == j { omega } else { 0.0 };
                Complex64::new(-self.a[(i, j)], diag)
            })
            .collect();
        let mut rhs: Vec<Complex64> = (0..n * m)
            .map(|k| Complex64::new(self.b[(k / m, k % m)], 0.0))
            .collect();
        lu_solve_in_place(&mut mat, &mut rhs, n, m)
            .map_err(|_| LtiError::SingularAtFrequency { omega })?;

        for i in 0..p {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += rhs[k * m + j] * self.c[(i, k)];
                }
                out[(i, j)] += acc;
            }
        }
        Ok(out)
    }

    /// Eigenvalues of `A` after diagonal balancing.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.states() == 0 {
            return Vec::new();
        }
        balanced(&self.a).complex_eigenvalues().iter().copied().collect()
    }
}

/// Parlett-Reinsch balancing: a similarity by powers of two that equalizes
/// row and column norms, improving eigenvalue accuracy for badly scaled
/// matrices such as companion forms.
pub fn balanced(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let radix = 2.0f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c: f64 = 0.0;
            let mut r: f64 = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` matrix,
/// solving for `m` right-hand-side columns in place.
///
/// Fails if a pivot falls below `PIVOT_TOL` times the infinity norm.
fn lu_solve_in_place(
    mat: &mut [Complex64],
    rhs: &mut [Complex64],
    n: usize,
    m: usize,
) -> Result<(), ()> {
    let norm_inf = (0..n)
        .map(|i| mat[i * n..(i + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = PIVOT_TOL * norm_inf.max(f64::MIN_POSITIVE);

    for col in 0..n {
        let (piv, piv_mag) = (col..n)
            .map(|r| (r, mat[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_mag < tol {
            return Err(());
        }
        if piv != col {
            for k in 0..n {
                mat.swap(col * n + k, piv * n + k);
            }
            for k in 0..m {
                rhs.swap(col * m + k, piv * m + k);
            }
        }
        let inv = 1.0 / mat[col * n + col];
        for r in col + 1..n {
            let f = mat[r * n + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = mat[col * n + k];
                mat[r * n + k] -= f * v;
            }
            for k in 0..m {
                let v = rhs[col * m + k];
                rhs[r * m + k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = 1.0 / mat[col * n + col];
        for k in 0..m {
            let mut acc = rhs[col * m + k];
            for j in col + 1..n {
                acc -= mat[col * n + j] * rhs[j * m + k];
            }
            rhs[col * m + k] = acc * inv;
        }
    }
    Ok(())
}
