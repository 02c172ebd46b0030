use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::lti::{Polynomial, RationalTf};

/// What a single entry of the filter parameter vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Quadratic natural frequency or first-order corner, rad/s.
    Frequency,
    /// Quadratic damping ratio.
    Damping,
}

/// Bending filter of order 2..=6 with unity-DC factors.
///
/// The parameter vector is a zero block followed by a pole block. Each block
/// lists its quadratic frequencies, then their damping ratios, then its
/// first-order corners. For order 6 this is
/// `[wz1, wz2, zz1, zz2, z1, z2, wp1, wp2, zp1, zp2, p1, p2]`.
///
/// | order | quadratics | first-order | len |
/// |-------|------------|-------------|-----|
/// | 2     | 1          | 0           | 4   |
/// | 3     | 1          | 1           | 6   |
/// | 4     | 2          | 0           | 8   |
/// | 5     | 2          | 1           | 10  |
/// | 6     | 2          | 2           | 12  |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub order: u8,
    pub x: Vec<f64>,
}

/// `(quadratic pairs, first-order pairs)` for an order.
pub fn structure(order: u8) -> Result<(usize, usize), ControlError> {
    match order {
        2 => Ok((1, 0)),
        3 => Ok((1, 1)),
        4 => Ok((2, 0)),
        5 => Ok((2, 1)),
        6 => Ok((2, 2)),
        _ => Err(ControlError::BadFilterOrder(order)),
    }
}

pub fn param_len(order: u8) -> Result<usize, ControlError> {
    let (q, r) = structure(order)?;
    Ok(2 * (2 * q + r))
}

pub fn param_kinds(order: u8) -> Result<Vec<ParamKind>, ControlError> {
    let (q, r) = structure(order)?;
    let block = std::iter::repeat(ParamKind::Frequency)
        .take(q)
        .chain(std::iter::repeat(ParamKind::Damping).take(q))
        .chain(std::iter::repeat(ParamKind::Frequency).take(r));
    Ok(block.clone().chain(block).collect())
}

/// One side (numerator or denominator) of the filter in factored form.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Side<'a> {
    omegas: &'a [f64],
    zetas: &'a [f64],
    reals: &'a [f64],
}

impl Side<'_> {
    fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (w, z) in self.omegas.iter().zip(self.zetas) {
            let r = s / w;
            acc *= r * r + r * (2.0 * z) + 1.0;
        }
        for c in self.reals {
            acc *= s / c + 1.0;
        }
        acc
    }

    /// `eval(j omega)` with each factor formed in real arithmetic.
    fn eval_jw(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (w, z) in self.omegas.iter().zip(self.zetas) {
            let r = omega / w;
            acc *= Complex64::new(1.0 - r * r, 2.0 * z * r);
        }
        for c in self.reals {
            acc *= Complex64::new(1.0, omega / c);
        }
        acc
    }

    fn polynomial(&self) -> Polynomial {
        let mut p = Polynomial::one();
        for (w, z) in self.omegas.iter().zip(self.zetas) {
            p = &p * &Polynomial::normalized_quadratic(*w, *z);
        }
        for c in self.reals {
            p = &p * &Polynomial::new(vec![1.0, 1.0 / c]).expect("finite");
        }
        p
    }

    /// Leading coefficient of the expanded factor product.
    fn leading(&self) -> f64 {
        let q: f64 = self.omegas.iter().map(|w| 1.0 / (w * w)).product();
        let r: f64 = self.reals.iter().map(|c| 1.0 / c).product();
        q * r
    }
}

impl FilterParams {
    pub fn new(order: u8, x: Vec<f64>) -> Result<Self, ControlError> {
        let f = Self { order, x };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let expected = param_len(self.order)?;
        if self.x.len() != expected {
            return Err(ControlError::FilterLength {
                order: self.order,
                expected,
                got: self.x.len(),
            });
        }
        for (k, (v, kind)) in self.x.iter().zip(param_kinds(self.order)?).enumerate() {
            let ok = match kind {
                ParamKind::Frequency => *v > 0.0 && v.is_finite(),
                ParamKind::Damping => *v > 0.0 && *v <= 1.0,
            };
            if !ok {
                return Err(ControlError::FilterParam { index: k, value: *v });
            }
        }
        Ok(())
    }

    /// Filter that places every pole on its zero: unity at all frequencies.
    pub fn neutral(order: u8, omega: f64, zeta: f64) -> Result<Self, ControlError> {
        let (q, r) = structure(order)?;
        let mut half = vec![omega; q];
        half.extend(std::iter::repeat(zeta).take(q));
        half.extend(std::iter::repeat(omega).take(r));
        let mut x = half.clone();
        x.extend(half);
        Self::new(order, x)
    }

    fn sides(&self) -> (Side<'_>, Side<'_>) {
        let (q, r) = structure(self.order).expect("validated order");
        let half = 2 * q + r;
        let side = |base: usize| Side {
            omegas: &self.x[base..base + q],
            zetas: &self.x[base + q..base + 2 * q],
            reals: &self.x[base + 2 * q..base + half],
        };
        (side(0), side(half))
    }

    /// Factored evaluation, identical in value to the expanded rational form.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let (num, den) = self.sides();
        num.eval(s) / den.eval(s)
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        let (num, den) = self.sides();
        num.eval_jw(omega) / den.eval_jw(omega)
    }

    pub fn to_tf(&self) -> RationalTf {
        let (num, den) = self.sides();
        RationalTf::new(num.polynomial(), den.polynomial()).expect("unity constant term")
    }

    /// `|F(j inf)|`: ratio of leading coefficients, products of
    /// `(w_p / w_z)^2` over quadratic pairs and `p / z` over first-order pairs.
    pub fn hf_gain(&self) -> f64 {
        let (num, den) = self.sides();
        num.leading() / den.leading()
    }

    /// The same transfer function in the order-`order` structure: spare
    /// quadratic and first-order factors become pole/zero pairs that cancel
    /// exactly, placed at `omega` with damping `zeta`.
    pub fn embedded(&self, order: u8, omega: f64, zeta: f64) -> Result<Self, ControlError> {
        let (q0, r0) = structure(self.order)?;
        let (q1, r1) = structure(order)?;
        if q1 < q0 || r1 < r0 {
            return Err(ControlError::NotNested { from: self.order, to: order });
        }
        let (num, den) = self.sides();
        let side = |s: Side<'_>| {
            let mut x = s.omegas.to_vec();
            x.extend(std::iter::repeat(omega).take(q1 - q0));
            x.extend(s.zetas);
            x.extend(std::iter::repeat(zeta).take(q1 - q0));
            x.extend(s.reals);
            x.extend(std::iter::repeat(omega).take(r1 - r0));
            x
        };
        let mut x = side(num);
        x.extend(side(den));
        Self::new(order, x)
    }

    /// Indices and values of the frequency-type entries.
    pub fn frequency_entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        param_kinds(self.order)
            .expect("validated order")
            .into_iter()
            .zip(self.x.iter().copied())
            .enumerate()
            .filter(|(_, (k, _))| *k == ParamKind::Frequency)
            .map(|(i, (_, v))| (i, v))
    }
}

pub fn filter_tf(fp: &FilterParams) -> RationalTf {
    fp.to_tf()
}

pub fn filter_hf_gain(fp: &FilterParams) -> f64 {
    fp.hf_gain()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_keeps_the_response() {
        let f2 = FilterParams::new(2, vec![50.0, 0.05, 45.0, 0.3]).unwrap();
        let f6 = f2.embedded(6, 120.0, 0.5).unwrap();
        assert_eq!(f6.x.len(), 12);
        for w in [1.0, 45.0, 50.0, 120.0, 1e4] {
            let (a, b) = (f2.freq_response(w), f6.freq_response(w));
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0), "{w}");
        }
        assert!((f6.hf_gain() - f2.hf_gain()).abs() < 1e-15);
        let f3 = FilterParams::neutral(3, 10.0, 0.5).unwrap();
        assert!(matches!(f3.embedded(4, 1.0, 1.0), Err(ControlError::NotNested { .. })));
    }

    #[test]
    fn lengths() {
        for (order, n) in [(2, 4), (3, 6), (4, 8), (5, 10), (6, 12)] {
            assert_eq!(param_len(order).unwrap(), n);
        }
        assert!(matches!(structure(7), Err(ControlError::BadFilterOrder(7))));
    }

    #[test]
    fn f2_equal_frequency_ratio() {
        let f = FilterParams::new(2, vec![40.0, 0.05, 40.0, 0.5]).unwrap();
        let m = f.freq_response(40.0).norm();
        assert!((m - 0.1).abs() < 1e-12);
        let m = f.to_tf().freq_response(40.0).unwrap().norm();
        assert!((m - 0.1).abs() < 1e-9);
    }

    #[test]
    fn hf_gain_closed_form() {
        let f2 = FilterParams::new(2, vec![10.0, 0.3, 5.0, 0.7]).unwrap();
        assert!((f2.hf_gain() - 0.25).abs() < 1e-15);
        let f3 = FilterParams::new(3, vec![10.0, 0.3, 20.0, 5.0, 0.7, 10.0]).unwrap();
        assert!((f3.hf_gain() - 0.125).abs() < 1e-15);
        let n = FilterParams::neutral(6, 50.0, 0.4).unwrap();
        assert!((n.hf_gain() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unity_dc() {
        let f = FilterParams::new(5, vec![30.0, 80.0, 0.1, 0.3, 90.0, 35.0, 60.0, 0.5, 0.6, 120.0])
            .unwrap();
        assert!((f.to_tf().dc_gain().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f.eval(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn factored_matches_expanded() {
        let f = FilterParams::new(6, vec![
            30.0, 80.0, 0.1, 0.3, 90.0, 200.0, 35.0, 60.0, 0.5, 0.6, 120.0, 300.0,
        ])
        .unwrap();
        let tf = f.to_tf();
        for w in [1.0, 31.0, 79.0, 500.0] {
            let a = f.freq_response(w);
            let b = tf.freq_response(w).unwrap();
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn invalid_entries() {
        assert!(FilterParams::new(2, vec![10.0, 1.5, 5.0, 0.7]).is_err());
        assert!(FilterParams::new(2, vec![-10.0, 0.5, 5.0, 0.7]).is_err());
        assert!(FilterParams::new(3, vec![10.0, 0.5, 5.0, 0.7]).is_err());
    }
}
