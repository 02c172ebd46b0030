//! Linear time-invariant building blocks: real polynomials, rational transfer
//! functions, state-space models and frequency grids.
//!
//! Polynomials store coefficients in ascending powers of `s`. Frequency
//! responses are always evaluated pointwise; nothing here cancels poles
//! against zeros.

mod grid;
mod hessenberg;
mod modal;
mod polynomial;
mod rational;
mod state_space;

pub use grid::FrequencyGrid;
pub use hessenberg::HessenbergResponse;
pub use modal::ModalRow;
pub use polynomial::Polynomial;
pub use rational::RationalTf;
pub use state_space::{balanced, StateSpace};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("polynomial must have at least one coefficient")]
    EmptyPolynomial,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("evaluation on a pole at s = {s}")]
    PoleHit { s: Complex64 },
    #[error("(jwI - A) is singular at w = {omega} rad/s")]
    SingularAtFrequency { omega: f64 },
    #[error("invalid frequency range")]
    BadRange,
    #[error("inconsistent state-space dimensions: {0}")]
    DimensionMismatch(String),
    #[error("transfer function is improper")]
    Improper,
}

/// Evaluate `tf` at complex `s`.
pub fn eval_tf(tf: &RationalTf, s: Complex64) -> Result<Complex64, LtiError> {
    tf.eval(s)
}

/// Complex frequency response matrix of `ss` at `omega` rad/s.
pub fn eval_ss(ss: &StateSpace, omega: f64) -> Result<nalgebra::DMatrix<Complex64>, LtiError> {
    ss.freq_response(omega)
}

/// Series connection `a * b`.
pub fn tf_multiply(a: &RationalTf, b: &RationalTf) -> RationalTf {
    a * b
}

/// Log-spaced grid in rad/s between two frequencies given in Hz.
pub fn log_grid(f_min_hz: f64, f_max_hz: f64, points_per_decade: usize) -> Result<FrequencyGrid, LtiError> {
    FrequencyGrid::log(f_min_hz, f_max_hz, points_per_decade)
}

/// Wrap an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

pub fn to_db(mag: f64) -> f64 {
    20.0 * mag.log10()
}
