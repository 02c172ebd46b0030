//! Open-loop frequency response of the pitch loop at a frozen flight node:
//! Bode tables, classical margins, bending peaks and a Nyquist stability
//! certificate.

mod closed_loop;
mod margins;
mod model;
mod sampling;
pub mod serde_inf;

pub use closed_loop::{closed_loop_poles, open_loop_state_space};
pub use margins::{bending_peak, bode, margins, nyquist, AnalysisCache, BodePoint, MarginReport, NyquistReport};
pub use model::{
    classify_poles, open_loop_response, pd_response, LoopFilter, LoopModel, OpenLoop, PlantPath, PoleCensus,
    SharpMode,
};

use thiserror::Error;

use crate::control::ControlError;
use crate::lti::LtiError;
use crate::vehicle::VehicleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error("phase steps over 90 deg near {omega} rad/s; grid too coarse to unwrap")]
    GridTooCoarse { omega: f64 },
    #[error("{0}")]
    BadModel(String),
}
