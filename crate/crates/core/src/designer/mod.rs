//! Two-phase baseline and integrated min-max design of the gain schedule and
//! bending filter.
//!
//! Both designs minimize the worst first-bending peak of the open loop over
//! the check nodes, subject to the second-bending cap, gain and phase
//! margins, a certified-stable closed loop, the filter high-frequency gain
//! cap and the rigid-body frequency/damping floor.

mod evaluate;
mod integrated;
pub mod optimizer;
mod two_phase;

pub use evaluate::{constraint_residuals, objective, ConstraintKind, ConstraintResidual, DesignContext};
pub use integrated::{integrated_design, integrated_design_warm};
pub use optimizer::{Evaluation, OptimizerSettings, FEASIBILITY_TOL};
pub use two_phase::{heuristic_filter, phase_one_schedule, two_phase_design, two_phase_design_warm};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{param_kinds, param_len, ControlError, FilterParams, GainSchedule, ParamKind};
use crate::loop_analysis::{serde_inf, LoopError, MarginReport};
use crate::vehicle::VehicleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("invalid design spec: {0}")]
    Spec(String),
    #[error("flight node at t = {t} s has no bending mode")]
    MissingBendingMode { t: f64 },
    #[error("phase 1 infeasible: {0}")]
    InfeasiblePhase1(String),
    #[error("no feasible point found (smallest violation {violation:e})")]
    NoFeasiblePoint { violation: f64 },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
}

/// Requirements, bounds and optimizer settings of one design run.
///
/// Frequencies are rad/s. `None` entries take defaults derived from the
/// vehicle: every node is checked, gain nodes follow the subcase and filter
/// bounds span `[0.5 w1_min, 3 w3_max]` with damping in `[0.02, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSpec {
    /// Required gain margin, dB.
    #[serde(rename = "GM_R")]
    pub gm_r_db: f64,
    /// Required phase margin, deg.
    #[serde(rename = "PM_R")]
    pub pm_r_deg: f64,
    /// Cap on the second-bending peak, dB.
    #[serde(rename = "P2_UL")]
    pub p2_ul_db: f64,
    /// Cap on the filter gain at infinite frequency.
    #[serde(rename = "P_F")]
    pub p_f: f64,
    #[serde(rename = "omega_RB_min")]
    pub omega_rb_min: f64,
    #[serde(rename = "zeta_RB_min")]
    pub zeta_rb_min: f64,
    /// Indices into the flight-node sequence.
    pub check_nodes: Option<Vec<usize>>,
    /// Times of the gain-schedule nodes, s.
    pub gain_nodes: Option<Vec<f64>>,
    #[serde(rename = "x_LB")]
    pub x_lb: Option<Vec<f64>>,
    #[serde(rename = "x_UB")]
    pub x_ub: Option<Vec<f64>>,
    pub subcase: u8,
    pub filter_order: u8,
    /// Relative half-width of the first-bending peak search; 0 evaluates
    /// exactly at the bending frequency.
    pub peak_window: f64,
    pub seed: u64,
    pub optimizer: OptimizerSettings,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self {
            gm_r_db: 6.0,
            pm_r_deg: 30.0,
            p2_ul_db: -6.0,
            p_f: 1.0,
            omega_rb_min: 2.0 * PI * 0.5,
            zeta_rb_min: 0.7,
            check_nodes: None,
            gain_nodes: None,
            x_lb: None,
            x_ub: None,
            subcase: 1,
            filter_order: 4,
            peak_window: 0.0,
            seed: 20_240_601,
            optimizer: OptimizerSettings::default(),
        }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<(), DesignError> {
        let bad = |m: &str| Err(DesignError::Spec(m.into()));
        if !(self.gm_r_db > 0.0 && self.pm_r_deg > 0.0) {
            return bad("GM_R and PM_R must be positive");
        }
        if !(self.p2_ul_db.is_finite() && self.p_f > 0.0) {
            return bad("P2_UL must be finite and P_F positive");
        }
        if !(self.omega_rb_min > 0.0 && self.zeta_rb_min > 0.0) {
            return bad("rigid-body requirements must be positive");
        }
        if !(self.subcase == 1 || self.subcase == 2) {
            return bad("subcase must be 1 or 2");
        }
        let n = param_len(self.filter_order)?;
        if !(self.peak_window >= 0.0 && self.peak_window < 1.0) {
            return bad("peak_window must lie in [0, 1)");
        }
        if let Some(c) = &self.check_nodes {
            if c.is_empty() || c.windows(2).any(|w| w[1] <= w[0]) {
                return bad("check_nodes must be nonempty and strictly increasing");
            }
        }
        if let Some(g) = &self.gain_nodes {
            if g.len() < 2 || g.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("gain_nodes needs at least two strictly increasing times");
            }
        }
        match (&self.x_lb, &self.x_ub) {
            (Some(lb), Some(ub)) => {
                if lb.len() != n || ub.len() != n {
                    return Err(DesignError::Spec(format!("x_LB and x_UB need {n} entries")));
                }
                for ((l, u), k) in lb.iter().zip(ub).zip(param_kinds(self.filter_order)?) {
                    if !(*l > 0.0 && l < u && u.is_finite()) {
                        return bad("filter bounds need 0 < LB < UB");
                    }
                    if k == ParamKind::Damping && *u > 1.0 {
                        return bad("damping bounds must not exceed 1");
                    }
                }
            }
            (None, None) => {}
            _ => return bad("x_LB and x_UB must be given together"),
        }
        self.optimizer.validate().map_err(DesignError::Spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMode {
    TwoPhase,
    Integrated,
}

impl DesignMode {
    pub fn label(&self) -> &'static str {
        match self {
            DesignMode::TwoPhase => "two-phase",
            DesignMode::Integrated => "integrated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub mode: DesignMode,
    /// Gain parameterization of an integrated design.
    pub subcase: Option<u8>,
    pub filter_order: u8,
    pub seed: u64,
    pub schedule: GainSchedule,
    pub filter: FilterParams,
    /// Worst first-bending peak over the check nodes, dB.
    #[serde(rename = "objective_dB", with = "serde_inf")]
    pub objective_db: f64,
    pub check_nodes: Vec<usize>,
    pub node_reports: Vec<MarginReport>,
    pub feasible: bool,
    /// Objective and constraint evaluations spent by the search.
    pub iterations: usize,
    /// Largest normalized residual, clipped at 0.
    #[serde(with = "serde_inf")]
    pub constraint_violation: f64,
}
