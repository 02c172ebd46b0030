//! Command-line surface: project config, the `analyze`, `design` and
//! `compare` commands and their output files.
//!
//! Exit codes: 2 config or usage error, 3 analysis failure, 4 no feasible
//! design.

mod commands;
mod config;

pub use commands::{
    analyze, compare, design, read_design, write_json, AnalyzeOutput, CompareRow, MarginsFile, NodeMargins,
    RunOptions,
};
pub use config::{ActuatorSection, AvionicsSection, GyroSection, ProjectConfig, VehicleSection};

use thiserror::Error;

use crate::designer::DesignError;
use crate::loop_analysis::LoopError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Analysis(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::Spec(_) | DesignError::MissingBendingMode { .. } => CliError::Config(e.to_string()),
            DesignError::InfeasiblePhase1(_) | DesignError::NoFeasiblePoint { .. } => {
                CliError::Infeasible(e.to_string())
            }
            DesignError::Loop(_) | DesignError::Control(_) | DesignError::Vehicle(_) => {
                CliError::Analysis(e.to_string())
            }
        }
    }
}

impl From<LoopError> for CliError {
    fn from(e: LoopError) -> Self {
        CliError::Analysis(e.to_string())
    }
}
