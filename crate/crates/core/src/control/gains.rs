use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::lti::{Polynomial, RationalTf};

/// Desired rigid-body closed-loop natural frequency (rad/s) and damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidSpecs {
    pub omega_rb: f64,
    pub zeta_rb: f64,
}

impl RigidSpecs {
    pub fn new(omega_rb: f64, zeta_rb: f64) -> Result<Self, ControlError> {
        if !(omega_rb > 0.0 && zeta_rb > 0.0) {
            return Err(ControlError::NonPositive("rigid-body specs"));
        }
        Ok(Self { omega_rb, zeta_rb })
    }
}

/// Proportional and derivative gain pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

/// Gains placing the rigid poles of `s^2 + M_delta k_D s + M_delta k_p`.
pub fn gains_from_rigid_specs(m_delta: f64, spec: RigidSpecs) -> Result<PdGains, ControlError> {
    if !(m_delta > 0.0) {
        return Err(ControlError::NonPositiveMDelta(m_delta));
    }
    Ok(PdGains {
        kp: spec.omega_rb * spec.omega_rb / m_delta,
        kd: 2.0 * spec.zeta_rb * spec.omega_rb / m_delta,
    })
}

/// Rigid-body frequency and damping produced by a gain pair.
pub fn rigid_specs_from_gains(m_delta: f64, kp: f64, kd: f64) -> Result<RigidSpecs, ControlError> {
    if !(m_delta > 0.0) {
        return Err(ControlError::NonPositiveMDelta(m_delta));
    }
    if !(kp > 0.0) {
        return Err(ControlError::NonPositive("k_p"));
    }
    Ok(RigidSpecs {
        omega_rb: (m_delta * kp).sqrt(),
        zeta_rb: 0.5 * kd * (m_delta / kp).sqrt(),
    })
}

/// Piecewise-linear gain schedule over flight time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub times: Vec<f64>,
    pub kp_values: Vec<f64>,
    pub kd_values: Vec<f64>,
}

impl GainSchedule {
    pub fn new(times: Vec<f64>, kp_values: Vec<f64>, kd_values: Vec<f64>) -> Result<Self, ControlError> {
        let s = Self {
            times,
            kp_values,
            kd_values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let n = self.times.len();
        if n < 2 || self.kp_values.len() != n || self.kd_values.len() != n {
            return Err(ControlError::Schedule("need at least two nodes of equal length"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ControlError::Schedule("times must be strictly increasing"));
        }
        if self
            .kp_values
            .iter()
            .chain(&self.kd_values)
            .any(|k| !(*k >= 0.0) || !k.is_finite())
        {
            return Err(ControlError::Schedule("gains must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Constant-hold outside the node span.
    pub fn interpolate(&self, t: f64) -> PdGains {
        let n = self.times.len();
        if t <= self.times[0] {
            return PdGains {
                kp: self.kp_values[0],
                kd: self.kd_values[0],
            };
        }
        if t >= self.times[n - 1] {
            return PdGains {
                kp: self.kp_values[n - 1],
                kd: self.kd_values[n - 1],
            };
        }
        let j = self.times.partition_point(|&x| x <= t) - 1;
        if self.times[j] == t {
            return PdGains {
                kp: self.kp_values[j],
                kd: self.kd_values[j],
            };
        }
        let w = (t - self.times[j]) / (self.times[j + 1] - self.times[j]);
        PdGains {
            kp: self.kp_values[j] + w * (self.kp_values[j + 1] - self.kp_values[j]),
            kd: self.kd_values[j] + w * (self.kd_values[j + 1] - self.kd_values[j]),
        }
    }

    /// Same gains sampled onto a different set of node times.
    pub fn resampled(&self, times: &[f64]) -> Result<Self, ControlError> {
        let g: Vec<PdGains> = times.iter().map(|&t| self.interpolate(t)).collect();
        Self::new(
            times.to_vec(),
            g.iter().map(|p| p.kp).collect(),
            g.iter().map(|p| p.kd).collect(),
        )
    }
}

pub fn interpolate_gains(sched: &GainSchedule, t: f64) -> PdGains {
    sched.interpolate(t)
}

/// `(k_D s + k_p) / s`: rate error integrated for attitude plus rate feedback.
///
/// Signs of the control law are carried by the negative-feedback junction.
pub fn pd_tf(kp: f64, kd: f64) -> Result<RationalTf, ControlError> {
    if kp < 0.0 || kd < 0.0 {
        return Err(ControlError::NonPositive("PD gains"));
    }
    if kp == 0.0 && kd == 0.0 {
        return Err(ControlError::BothGainsZero);
    }
    Ok(RationalTf::new(
        Polynomial::new(vec![kp, kd]).map_err(|_| ControlError::NonPositive("PD gains"))?,
        Polynomial::monomial(1.0, 1),
    )
    .expect("s is a nonzero denominator"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn table_extremes() {
        let spec = RigidSpecs::new(2.0 * PI * 0.5, 0.7).unwrap();
        let g = gains_from_rigid_specs(15.5, spec).unwrap();
        assert!((g.kp - 0.636_750).abs() < 5e-6, "{}", g.kp);
        assert!((g.kd - 0.283_757).abs() < 5e-6, "{}", g.kd);
        let g = gains_from_rigid_specs(8.1, spec).unwrap();
        assert!((g.kp - 1.218_470).abs() < 5e-6, "{}", g.kp);
    }

    #[test]
    fn inverse_round_trip() {
        let spec = RigidSpecs::new(2.0 * PI * 0.5, 0.7).unwrap();
        for m in [8.1, 12.0, 15.5] {
            let g = gains_from_rigid_specs(m, spec).unwrap();
            let back = rigid_specs_from_gains(m, g.kp, g.kd).unwrap();
            assert!((back.omega_rb - spec.omega_rb).abs() < 1e-12);
            assert!((back.zeta_rb - spec.zeta_rb).abs() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_m_delta() {
        let spec = RigidSpecs::new(1.0, 0.7).unwrap();
        assert!(matches!(
            gains_from_rigid_specs(0.0, spec),
            Err(ControlError::NonPositiveMDelta(_))
        ));
        assert!(rigid_specs_from_gains(10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn schedule_interpolation() {
        let s = GainSchedule::new(vec![5.0, 30.0, 55.0], vec![1.0, 2.0, 0.5], vec![0.1, 0.3, 0.2]).unwrap();
        assert_eq!(s.interpolate(30.0), PdGains { kp: 2.0, kd: 0.3 });
        let mid = s.interpolate(17.5);
        assert!((mid.kp - 1.5).abs() < 1e-15 && (mid.kd - 0.2).abs() < 1e-15);
        assert_eq!(s.interpolate(0.0), PdGains { kp: 1.0, kd: 0.1 });
        assert_eq!(s.interpolate(90.0), PdGains { kp: 0.5, kd: 0.2 });
    }

    #[test]
    fn schedule_validation() {
        assert!(GainSchedule::new(vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(GainSchedule::new(vec![2.0, 1.0], vec![1.0; 2], vec![1.0; 2]).is_err());
        assert!(GainSchedule::new(vec![1.0, 2.0], vec![-1.0, 1.0], vec![1.0; 2]).is_err());
    }

    #[test]
    fn pd_block() {
        let p = pd_tf(1.0, 0.0).unwrap();
        let v = p.freq_response(2.0).unwrap();
        assert!((v - Complex64::new(0.0, -0.5)).norm() < 1e-15);

        let p = pd_tf(0.63675, 0.28375).unwrap();
        let v = p.freq_response(2.0 * PI * 0.5).unwrap();
        assert!((v.re - 0.28375).abs() < 1e-12);
        assert!((v.im + 0.202_682).abs() < 1e-5, "{}", v.im);

        let hf = pd_tf(0.63675, 0.28375).unwrap().freq_response(1e9).unwrap();
        assert!((hf.norm() - 0.28375).abs() < 1e-9);

        assert!(matches!(pd_tf(0.0, 0.0), Err(ControlError::BothGainsZero)));
    }
}
