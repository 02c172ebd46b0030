//! PD attitude law, rigid-body pole placement, gain schedules and the five
//! bending-filter structures.

mod filter;
mod gains;

pub use filter::{
    filter_hf_gain, filter_tf, param_kinds, param_len, structure, FilterParams, ParamKind,
};
pub use gains::{
    gains_from_rigid_specs, interpolate_gains, pd_tf, rigid_specs_from_gains, GainSchedule,
    PdGains, RigidSpecs,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("M_delta must be positive (got {0})")]
    NonPositiveMDelta(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("k_p and k_D cannot both be zero")]
    BothGainsZero,
    #[error("invalid gain schedule: {0}")]
    Schedule(&'static str),
    #[error("filter order must be 2..=6 (got {0})")]
    BadFilterOrder(u8),
    #[error("order-{order} filter needs {expected} parameters (got {got})")]
    FilterLength { order: u8, expected: usize, got: usize },
    #[error("filter parameter {index} out of range ({value})")]
    FilterParam { index: usize, value: f64 },
    #[error("an order-{from} filter has no exact order-{to} form")]
    NotNested { from: u8, to: u8 },
}
