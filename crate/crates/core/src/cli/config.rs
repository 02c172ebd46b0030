use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::avionics::{ActuatorParams, AvionicsParams, FlightComputerParams, GyroParams};
use crate::designer::{DesignContext, DesignSpec};
use crate::vehicle::{FlightNode, ReferenceVehicle};

/// `{"reference": true}` or an explicit flight-node sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VehicleSection {
    Reference { reference: bool },
    Nodes(Vec<FlightNode>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSection {
    pub freq_hz: [f64; 4],
    pub zeta: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GyroSection {
    pub freq_hz: f64,
    pub zeta: f64,
}

/// Avionics as tabulated: frequencies in Hz, time constants in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvionicsSection {
    pub actuator: ActuatorSection,
    pub gyro: GyroSection,
    pub computer: FlightComputerParams,
}

impl AvionicsSection {
    pub fn ksr3() -> Self {
        let a = ActuatorParams::ksr3();
        let g = GyroParams::ksr3();
        let hz = |w: f64| w / (2.0 * std::f64::consts::PI);
        Self {
            actuator: ActuatorSection {
                freq_hz: a.omega.map(hz),
                zeta: a.zeta,
            },
            gyro: GyroSection {
                freq_hz: hz(g.omega),
                zeta: g.zeta,
            },
            computer: FlightComputerParams::ksr3(),
        }
    }

    pub fn params(&self) -> Result<AvionicsParams, CliError> {
        let bad = |e: crate::avionics::AvionicsError| CliError::Config(format!("avionics: {e}"));
        let p = AvionicsParams {
            actuator: ActuatorParams::from_hz(self.actuator.freq_hz, self.actuator.zeta).map_err(bad)?,
            gyro: GyroParams::from_hz(self.gyro.freq_hz, self.gyro.zeta).map_err(bad)?,
            computer: self.computer,
        };
        p.validate().map_err(bad)?;
        Ok(p)
    }
}

/// Project file: top-level keys `vehicle`, `avionics`, `design`, `output`.
///
/// Design frequencies (`omega_RB_min`, `x_LB`, `x_UB`) are rad/s like the
/// flight nodes; only the avionics section is in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub vehicle: Option<VehicleSection>,
    pub avionics: Option<AvionicsSection>,
    #[serde(default)]
    pub design: DesignSpec,
    pub output: Option<PathBuf>,
}

impl ProjectConfig {
    pub fn reference() -> Self {
        Self {
            vehicle: Some(VehicleSection::Reference { reference: true }),
            avionics: Some(AvionicsSection::ksr3()),
            design: DesignSpec::default(),
            output: Some(PathBuf::from("out")),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Every section present and valid.
    pub fn check(&self) -> Result<(), CliError> {
        self.nodes()?;
        self.avionics()?.params()?;
        self.design
            .validate()
            .map_err(|e| CliError::Config(format!("design: {e}")))
    }

    fn avionics(&self) -> Result<&AvionicsSection, CliError> {
        self.avionics
            .as_ref()
            .ok_or_else(|| CliError::Config("config is missing the `avionics` section".into()))
    }

    pub fn nodes(&self) -> Result<Vec<FlightNode>, CliError> {
        let nodes = match &self.vehicle {
            None => return Err(CliError::Config("config is missing the `vehicle` section".into())),
            Some(VehicleSection::Reference { reference: true }) => ReferenceVehicle::default().nodes(),
            Some(VehicleSection::Reference { reference: false }) => {
                return Err(CliError::Config("vehicle: `reference` must be true or a node list given".into()))
            }
            Some(VehicleSection::Nodes(n)) => n.clone(),
        };
        if nodes.is_empty() {
            return Err(CliError::Config("vehicle: no flight nodes".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            n.validate().map_err(|e| CliError::Config(format!("vehicle node {i}: {e}")))?;
        }
        if nodes.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(CliError::Config("vehicle: node times must increase".into()));
        }
        Ok(nodes)
    }

    pub fn context(&self) -> Result<DesignContext, CliError> {
        let blocks = self.avionics()?.params()?.blocks();
        Ok(DesignContext::new(self.nodes()?, blocks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ksr3_section_round_trips_to_params() {
        let p = AvionicsSection::ksr3().params().unwrap();
        let q = AvionicsParams::ksr3();
        for k in 0..4 {
            assert!((p.actuator.omega[k] - q.actuator.omega[k]).abs() < 1e-12);
        }
        assert!((p.gyro.omega - q.gyro.omega).abs() < 1e-12);
    }

    #[test]
    fn missing_avionics_is_named() {
        let err = ProjectConfig::parse(r#"{"vehicle": {"reference": true}}"#).unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("avionics")), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = serde_json::to_value(ProjectConfig::reference()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(ProjectConfig::parse(&v.to_string()).is_err());
    }
}
