use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{LtiError, StateSpace};

/// Repeated frequency evaluation of a state-space model.
///
/// `A` is reduced once to upper Hessenberg form `H = Q^T A Q`; every
/// evaluation then solves `(jwI - H) X = Q^T B` in `O(n^2)`.
#[derive(Debug, Clone)]
pub struct HessenbergResponse {
    n: usize,
    h: Vec<f64>,
    b: DMatrix<f64>,
    /// `Q^T B` as row-major complex entries, the right-hand side of every solve.
    b_rows: Vec<Complex64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    norm_h: f64,
}

const PIVOT_TOL: f64 = 1e-12;

impl HessenbergResponse {
    pub fn new(ss: &StateSpace) -> Self {
        let n = ss.states();
        if n == 0 {
            return Self {
                n,
                h: Vec::new(),
                b: ss.b.clone(),
                b_rows: Vec::new(),
                c: ss.c.clone(),
                d: ss.d.clone(),
                norm_h: 0.0,
            };
        }
        let (q, h) = ss.a.clone().hessenberg().unpack();
        let b = q.transpose() * &ss.b;
        let c = &ss.c * &q;
        let mut hv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // Entries below the subdiagonal are exactly zero.
                hv[i * n + j] = if i > j + 1 { 0.0 } else { h[(i, j)] };
            }
        }
        let norm_h = (0..n)
            .map(|i| hv[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let b_rows = (0..n)
            .flat_map(|i| (0..b.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| Complex64::new(b[(i, j)], 0.0))
            .collect();
        Self {
            n,
            h: hv,
            b_rows,
            b,
            c,
            d: ss.d.clone(),
            norm_h,
        }
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Row `output` of the response matrix, one entry per input.
    pub fn row(&self, output: usize, omega: f64) -> Result<Vec<Complex64>, LtiError> {
        let m = self.inputs();
        let mut out: Vec<Complex64> = (0..m).map(|j| Complex64::new(self.d[(output, j)], 0.0)).collect();
        if self.n == 0 {
            return Ok(out);
        }
        let x = self.solve(omega)?;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..self.n {
                acc += x[k * m + j] * self.c[(output, k)];
            }
            *o += acc;
        }
        Ok(out)
    }

    pub fn response(&self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        let p = self.outputs();
        let m = self.inputs();
        let mut out = DMatrix::from_fn(p, m, |i, j| Complex64::new(self.d[(i, j)], 0.0));
        if self.n == 0 {
            return Ok(out);
        }
        let x = self.solve(omega)?;
        for i in 0..p {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.n {
                    acc += x[k * m + j] * self.c[(i, k)];
                }
                out[(i, j)] += acc;
            }
        }
        Ok(out)
    }

    /// `(jwI - H)^-1 Q^T B`, row-major `n x m`.
    fn solve(&self, omega: f64) -> Result<Vec<Complex64>, LtiError> {
        let (n, m) = (self.n, self.inputs());
        let mut mat: Vec<Complex64> = self.h.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
        for i in 0..n {
            mat[i * n + i].im = omega;
        }
        let mut rhs = self.b_rows.clone();
        let tol = PIVOT_TOL * (self.norm_h + omega.abs()).max(f64::MIN_POSITIVE);
        for col in 0..n {
            // Only the subdiagonal entry can be eliminated below the pivot.
            if col + 1 < n && mat[(col + 1) * n + col].norm() > mat[col * n + col].norm() {
                for k in col..n {
                    mat.swap(col * n + k, (col + 1) * n + k);
                }
                for k in 0..m {
                    rhs.swap(col * m + k, (col + 1) * m + k);
                }
            }
            let piv = mat[col * n + col];
            if piv.norm() < tol {
                return Err(LtiError::SingularAtFrequency { omega });
            }
            if col + 1 < n {
                let f = mat[(col + 1) * n + col] / piv;
                if f != Complex64::new(0.0, 0.0) {
                    for k in col..n {
                        let v = mat[col * n + k];
                        mat[(col + 1) * n + k] -= f * v;
                    }
                    for k in 0..m {
                        let v = rhs[col * m + k];
                        rhs[(col + 1) * m + k] -= f * v;
                    }
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
        Ok(rhs)
    }
}
