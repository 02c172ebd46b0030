use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LtiError, Polynomial};

/// Below this denominator magnitude an evaluation is treated as a pole hit.
const POLE_HIT: f64 = 1e-300;

/// Continuous-time rational transfer function `num(s) / den(s)`.
///
/// No pole-zero cancellation is ever performed; products keep every factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    /// Convenience constructor from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self, LtiError> {
        Self::new(Polynomial::new(num.to_vec())?, Polynomial::new(den.to_vec())?)
    }

    pub fn unity() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64, LtiError> {
        let d = self.den.eval(s);
        if d.re.abs().max(d.im.abs()) < POLE_HIT {
            return Err(LtiError::PoleHit { s });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Response on the imaginary axis at `omega` rad/s.
    pub fn freq_response(&self, omega: f64) -> Result<Complex64, LtiError> {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Value at `s = 0`; the DC gain of a block with no pole at the origin.
    pub fn dc_gain(&self) -> Result<f64, LtiError> {
        self.eval(Complex64::new(0.0, 0.0)).map(|z| z.re)
    }

    /// Multiply the numerator by `s^k`.
    pub fn times_s_power(&self, k: usize) -> Self {
        Self {
            num: self.num.shift(k),
            den: self.den.clone(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }
}

impl Mul for &RationalTf {
    type Output = RationalTf;

    fn mul(self, rhs: &RationalTf) -> RationalTf {
        RationalTf {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(w: f64) -> Complex64 {
        Complex64::new(0.0, w)
    }

    #[test]
    fn integrator_at_unit_frequency() {
        let tf = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap();
        let v = tf.eval(j(1.0)).unwrap();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_cancellation_is_evaluated_pointwise() {
        let tf = RationalTf::from_coeffs(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let v = tf.eval(j(7.3)).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn second_order_at_natural_frequency() {
        // den(j) = j exactly, so the response is 1/j = -j
        let tf = RationalTf::from_coeffs(&[1.0], &[1.0, 1.0, 1.0]).unwrap();
        let v = tf.eval(j(1.0)).unwrap();
        let by_division = Complex64::new(1.0, 0.0) / Complex64::new(0.0, 1.0);
        assert!((v - by_division).norm() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v.arg().to_degrees() + 90.0).abs() < 1e-12);
    }

    #[test]
    fn pole_hit_is_reported() {
        let tf = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(
            tf.eval(Complex64::new(0.0, 0.0)),
            Err(LtiError::PoleHit { .. })
        ));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            RationalTf::from_coeffs(&[1.0], &[0.0]),
            Err(LtiError::ZeroDenominator)
        ));
    }

    #[test]
    fn multiply_without_cancellation() {
        let inv_s = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap();
        let s = RationalTf::from_coeffs(&[0.0, 1.0], &[1.0]).unwrap();
        let p = &inv_s * &s;
        assert_eq!(p.num().coeffs(), &[0.0, 1.0]);
        assert_eq!(p.den().coeffs(), &[0.0, 1.0]);

        let a = RationalTf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
        let b = RationalTf::from_coeffs(&[1.0], &[2.0, 1.0]).unwrap();
        let ab = &a * &b;
        assert_eq!(ab.num().coeffs(), &[1.0]);
        assert_eq!(ab.den().coeffs(), &[2.0, 3.0, 1.0]);

        assert_eq!(&a * &RationalTf::unity(), a);
    }
}
