use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{HessenbergResponse, StateSpace};

/// Pole-residue form `D + sum_i r_i / (s - lambda_i)` of one output row.
///
/// Only built for diagonalizable `A` whose pole-residue evaluation agrees
/// with the Hessenberg solve on a check grid; [`ModalRow::new`] returns
/// `None` otherwise and callers keep the Hessenberg path.
#[derive(Debug, Clone)]
pub struct ModalRow {
    poles: Vec<Complex64>,
    /// `residues[i * inputs + j]`
    residues: Vec<Complex64>,
    d: Vec<f64>,
}

/// Relative agreement required with the Hessenberg solve.
const CHECK_TOL: f64 = 1e-10;

fn inverse_iteration(a: &DMatrix<Complex64>, lambda: Complex64) -> Option<Vec<Complex64>> {
    let n = a.nrows();
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let m = a - DMatrix::from_diagonal_element(n, n, shift);
    let lu = m.lu();
    let mut v = DMatrix::from_fn(n, 1, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3));
    for _ in 0..3 {
        v = lu.solve(&v)?;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        v /= Complex64::new(norm, 0.0);
    }
    Some(v.iter().copied().collect())
}

impl ModalRow {
    pub fn new(ss: &StateSpace, output: usize, poles: &[Complex64], check: &HessenbergResponse) -> Option<Self> {
        let n = ss.states();
        let m = ss.inputs();
        if n == 0 || poles.len() != n || output >= ss.outputs() {
            return None;
        }
        let ac = ss.a.map(|v| Complex64::new(v, 0.0));
        let mut vecs = DMatrix::<Complex64>::zeros(n, n);
        for (k, &p) in poles.iter().enumerate() {
            let v = inverse_iteration(&ac, p)?;
            for i in 0..n {
                vecs[(i, k)] = v[i];
            }
        }
        let inv = vecs.clone().try_inverse()?;
        let bc = ss.b.map(|v| Complex64::new(v, 0.0));
        let left = ss.c.row(output).map(|v| Complex64::new(v, 0.0)) * &vecs;
        let right = inv * bc;
        let mut residues = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                residues.push(left[i] * right[(i, j)]);
            }
        }
        let row = Self {
            poles: poles.to_vec(),
            residues,
            d: (0..m).map(|j| ss.d[(output, j)]).collect(),
        };
        row.agrees(output, check).then_some(row)
    }

    fn agrees(&self, output: usize, check: &HessenbergResponse) -> bool {
        let mut omegas: Vec<f64> = (-12..=20).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
        for p in &self.poles {
            let (w, sigma) = (p.im.abs(), p.re.abs());
            if w > 0.0 {
                omegas.extend([w, w + sigma, (w - sigma).max(w * 0.5), w * 1.01, w / 1.01]);
            }
        }
        for w in omegas {
            let Ok(reference) = check.row(output, w) else {
                continue;
            };
            let fast = self.row(w);
            let scale: f64 = reference.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in fast.iter().zip(&reference) {
                if !((a - b).norm() <= CHECK_TOL * (1.0 + scale)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn inputs(&self) -> usize {
        self.d.len()
    }

    /// Response at `s = j omega`, one entry per input.
    pub fn row(&self, omega: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.inputs()];
        self.row_into(omega, &mut out);
        out
    }

    pub fn row_into(&self, omega: f64, out: &mut [Complex64]) {
        let m = self.inputs();
        let s = Complex64::new(0.0, omega);
        for (j, o) in out.iter_mut().enumerate() {
            *o = Complex64::new(self.d[j], 0.0);
        }
        for (i, p) in self.poles.iter().enumerate() {
            let g = (s - p).inv();
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.residues[i * m + j] * g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillators() -> StateSpace {
        // Two damped oscillators driven by both inputs.
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 1.0, 0.0, 0.0, -4.0, -0.04, 0.3, 0.0, 0.0, 0.0, 0.0, 1.0, 0.2, 0.0, -900.0, -0.3],
        );
        let b = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.5, 0.0, 0.0, 0.2, 1.0]);
        let c = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.7]);
        StateSpace::new(a, b, c, DMatrix::from_element(2, 2, 0.1)).unwrap()
    }

    #[test]
    fn matches_hessenberg() {
        let ss = oscillators();
        let h = HessenbergResponse::new(&ss);
        let row = ModalRow::new(&ss, 1, &ss.eigenvalues(), &h).expect("diagonalizable");
        for w in [1e-3, 0.5, 2.0, 2.01, 30.0, 1e3] {
            let a = row.row(w);
            let b = h.row(1, w).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-10 * (1.0 + y.norm()), "{w}");
            }
        }
    }

    #[test]
    fn defective_matrix_is_refused() {
        // Jordan block: a single eigenvector for a double pole.
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let ss = StateSpace::new(
            a,
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let h = HessenbergResponse::new(&ss);
        assert!(ModalRow::new(&ss, 0, &ss.eigenvalues(), &h).is_none());
    }
}
