//! Linearized pitch-plane model of a flexible liquid-propellant rocket.
//!
//! A [`FlightNode`] freezes every plant parameter at one flight time.
//! [`assemble_plant`] turns it into a two-input (`delta`, `delta''`),
//! two-output (`q`, `q_m`) state-space model with rigid, bending and slosh
//! dynamics.

mod physical;
mod plant;
pub mod reference;
mod slosh;

pub use physical::{derivatives_from_physical, PhysicalParams};
pub use plant::{assemble_plant, state_layout, PlantOptions, StateLayout};
pub use reference::{make_reference_vehicle, ReferenceVehicle};
pub use slosh::{slosh_from_tank, SLOSH_ROOT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("{0} must be positive")]
    NonPositiveDivisor(&'static str),
    #[error("{0} must be positive")]
    NonPositiveInput(&'static str),
    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),
    #[error("invalid flight node at t = {t}: {reason}")]
    InvalidNode { t: f64, reason: String },
}

/// Stability derivatives and tail-wags-dog coefficients at one flight time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyDerivatives {
    /// 1/s
    pub z_alpha: f64,
    /// 1/s
    pub z_delta: f64,
    /// 1/s^2
    pub m_alpha: f64,
    /// 1/s
    pub m_q: f64,
    /// 1/s^2
    pub m_delta: f64,
    /// Coefficient of `delta''` in the normal-force equation, s.
    pub z_ddelta: f64,
    /// Coefficient of `delta''` in the pitch-moment equation.
    pub m_ddelta: f64,
}

impl RigidBodyDerivatives {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.z_alpha,
            self.z_delta,
            self.m_alpha,
            self.m_q,
            self.m_delta,
            self.z_ddelta,
            self.m_ddelta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("non-finite stability derivative".into());
        }
        if !(self.m_delta > 0.0) {
            return Err(format!("M_delta must be positive (got {})", self.m_delta));
        }
        Ok(())
    }
}

/// One structural bending mode with its mode-shape and mode-slope values at
/// the stations where forces act or motion is sensed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendingMode {
    /// rad/s
    pub omega: f64,
    pub zeta: f64,
    /// Generalized mass, kg.
    pub generalized_mass: f64,
    /// Mode slope at the gyro, 1/m.
    pub slope_gyro: f64,
    /// Mode slope at the gimbal, 1/m; produces the bending TVC increment.
    pub slope_gimbal: f64,
    /// Mode shape at the thrust point.
    pub shape_gimbal: f64,
    /// Mode shape at the center of pressure.
    pub shape_cp: f64,
    /// Mode slope at the center of pressure, 1/m; produces the bending
    /// angle-of-attack increment.
    pub slope_cp: f64,
    /// Mode shape at each slosh pendulum pivot, one entry per tank.
    pub shape_slosh: Vec<f64>,
}

impl BendingMode {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.omega > 0.0) {
            return Err("bending frequency must be positive".into());
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err("bending damping must lie in (0, 1)".into());
        }
        if !(self.generalized_mass > 0.0) {
            return Err("generalized mass must be positive".into());
        }
        Ok(())
    }
}

/// First lateral slosh mode of one tank as an equivalent pendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SloshMode {
    /// rad/s
    pub omega: f64,
    pub zeta: f64,
    /// Slosh mass, kg.
    pub mass: f64,
    /// Pivot position relative to the dry center of mass, m, positive forward.
    pub pivot: f64,
    /// Pendulum length, m.
    pub length: f64,
}

impl SloshMode {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.omega > 0.0 && self.zeta >= 0.0 && self.mass > 0.0 && self.length > 0.0) {
            return Err("slosh mode needs omega, mass, length > 0 and zeta >= 0".into());
        }
        Ok(())
    }
}

/// Frozen-time plant data at one flight time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightNode {
    /// s
    pub t: f64,
    pub deriv: RigidBodyDerivatives,
    pub bending: Vec<BendingMode>,
    pub slosh: Vec<SloshMode>,
    /// Airspeed, m/s.
    pub speed: f64,
    /// Axial acceleration, m/s^2.
    pub a_x: f64,
    /// kg
    pub mass: f64,
    /// kg m^2
    pub i_yy: f64,
    /// First bending frequency, rad/s.
    pub omega_b1: f64,
}

impl FlightNode {
    pub fn validate(&self) -> Result<(), VehicleError> {
        let fail = |reason: String| VehicleError::InvalidNode { t: self.t, reason };
        if !(self.t >= 0.0) {
            return Err(fail("t must be nonnegative".into()));
        }
        self.deriv.validate().map_err(fail)?;
        for b in &self.bending {
            b.validate().map_err(fail)?;
            if b.shape_slosh.len() != self.slosh.len() {
                return Err(VehicleError::InconsistentDimensions(format!(
                    "bending mode has {} slosh-station shapes for {} tanks",
                    b.shape_slosh.len(),
                    self.slosh.len()
                )));
            }
        }
        for s in &self.slosh {
            s.validate().map_err(fail)?;
        }
        if !(self.speed > 0.0 && self.mass > 0.0 && self.i_yy > 0.0) {
            return Err(fail("speed, mass and I_yy must be positive".into()));
        }
        if let Some(b) = self.bending.first() {
            if (b.omega - self.omega_b1).abs() > 1e-9 * b.omega {
                return Err(fail("omega_b1 differs from the first bending mode".into()));
            }
        }
        Ok(())
    }

    /// Second bending frequency, when present.
    pub fn omega_b2(&self) -> Option<f64> {
        self.bending.get(1).map(|b| b.omega)
    }

    /// Thrust recovered from `Z_delta = T / (m U)`.
    pub fn thrust(&self) -> f64 {
        self.deriv.z_delta * self.mass * self.speed
    }

    /// Normal-force slope `q S C_N_alpha` recovered from `Z_alpha`.
    pub fn normal_force_slope(&self) -> f64 {
        -self.deriv.z_alpha * self.mass * self.speed
    }

    /// Engine `m_E l_E` recovered from `Z_delta''`.
    pub fn engine_moment(&self) -> f64 {
        self.deriv.z_ddelta * self.mass * self.speed
    }
}
