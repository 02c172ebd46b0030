use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LtiError;

/// Real polynomial in `s`, coefficients stored in ascending powers.
///
/// `coeffs[k]` multiplies `s^k`. Trailing (highest-order) zeros are trimmed on
/// construction, so the leading coefficient is nonzero unless the polynomial
/// is the zero polynomial `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, LtiError> {
        if coeffs.is_empty() {
            return Err(LtiError::EmptyPolynomial);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LtiError::NonFinite);
        }
        Ok(Self::trimmed(coeffs))
    }

    fn trimmed(mut coeffs: Vec<f64>) -> Self {
        let keep = coeffs.iter().rposition(|c| *c != 0.0).map_or(1, |p| p + 1);
        coeffs.truncate(keep);
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::trimmed(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// `c * s^power`.
    pub fn monomial(c: f64, power: usize) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = c;
        Self::trimmed(coeffs)
    }

    /// Complex roots from the eigenvalues of the companion matrix.
    ///
    /// Factors of `s` are split off first so roots at the origin are exact.
    pub fn roots(&self) -> Vec<Complex64> {
        if self.is_zero() {
            return Vec::new();
        }
        let lowest = self.coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
        let mut roots = vec![Complex64::new(0.0, 0.0); lowest];
        let c = &self.coeffs[lowest..];
        let n = c.len() - 1;
        if n > 0 {
            let lead = c[n];
            let comp = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                if i == 0 {
                    -c[n - 1 - j] / lead
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            roots.extend(super::balanced(&comp).complex_eigenvalues().iter().copied());
        }
        roots
    }

    /// `s^2/w^2 + 2 zeta s / w + 1`, the unity-DC quadratic used by filters.
    pub fn normalized_quadratic(omega: f64, zeta: f64) -> Self {
        Self::trimmed(vec![1.0, 2.0 * zeta / omega, 1.0 / (omega * omega)])
    }

    /// `s^2 + 2 zeta w s + w^2`.
    pub fn monic_quadratic(omega: f64, zeta: f64) -> Self {
        Self::trimmed(vec![omega * omega, 2.0 * zeta * omega, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::trimmed(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by `s^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Self::trimmed(coeffs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::trimmed(out)
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = LtiError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && !self.is_zero() {
                continue;
            }
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("{c}s"),
                _ => format!("{c}s^{k}"),
            });
        }
        write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
    }
}
