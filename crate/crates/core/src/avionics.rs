//! Transfer functions of the TVC actuator, rate gyro and flight computer.
//!
//! Parameter records hold angular frequencies in rad/s. Config files carry Hz;
//! the `from_hz` constructors do the one conversion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lti::{Polynomial, RationalTf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AvionicsError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must lie in (0, 1) (got {value})")]
    DampingOutOfRange { name: &'static str, value: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<(), AvionicsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AvionicsError::NonPositive { name, value })
    }
}

fn damping(name: &'static str, value: f64) -> Result<(), AvionicsError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(AvionicsError::DampingOutOfRange { name, value })
    }
}

fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Sixth-order TVC actuator: two low-pass quadratics and a biquad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorParams {
    /// rad/s
    pub omega: [f64; 4],
    pub zeta: [f64; 4],
}

impl ActuatorParams {
    pub fn from_hz(freq_hz: [f64; 4], zeta: [f64; 4]) -> Result<Self, AvionicsError> {
        let p = Self {
            omega: freq_hz.map(hz),
            zeta,
        };
        p.validate()?;
        Ok(p)
    }

    /// KSR-III actuator identification: 5.8, 7.2, 52.6, 15.6 Hz.
    pub fn ksr3() -> Self {
        Self::from_hz([5.8, 7.2, 52.6, 15.6], [0.87, 0.49, 0.15, 0.042])
            .expect("tabulated actuator values are valid")
    }

    pub fn validate(&self) -> Result<(), AvionicsError> {
        const W: [&str; 4] = ["omega_a1", "omega_a2", "omega_a3", "omega_a4"];
        const Z: [&str; 4] = ["zeta_a1", "zeta_a2", "zeta_a3", "zeta_a4"];
        for k in 0..4 {
            positive(W[k], self.omega[k])?;
            damping(Z[k], self.zeta[k])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyroParams {
    /// rad/s
    pub omega: f64,
    pub zeta: f64,
}

impl GyroParams {
    pub fn from_hz(freq_hz: f64, zeta: f64) -> Result<Self, AvionicsError> {
        let p = Self {
            omega: hz(freq_hz),
            zeta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dynamically tuned gyro, 60 Hz / 0.65.
    pub fn ksr3() -> Self {
        Self::from_hz(60.0, 0.65).expect("tabulated gyro values are valid")
    }

    pub fn validate(&self) -> Result<(), AvionicsError> {
        positive("omega_g", self.omega)?;
        damping("zeta_g", self.zeta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightComputerParams {
    /// V/F converter sampling period, s.
    pub tau_vf: f64,
    /// Computation delay, s.
    pub tau_d: f64,
    /// DAC/ZOH time constant, s.
    pub tau_dz: f64,
    /// V/F denominator coefficients `a1..a3`.
    pub vf_den: [f64; 3],
    /// V/F numerator coefficients `b1..b3`.
    pub vf_num: [f64; 3],
}

/// Third-order diagonal Pade coefficients of a unit delay.
pub const PADE3: [f64; 3] = [1.0 / 2.0, 1.0 / 10.0, 1.0 / 120.0];

impl FlightComputerParams {
    pub fn ksr3() -> Self {
        Self {
            tau_vf: 0.01,
            tau_d: 0.003,
            tau_dz: 0.01,
            vf_den: PADE3,
            vf_num: PADE3,
        }
    }

    pub fn validate(&self) -> Result<(), AvionicsError> {
        positive("tau_VF", self.tau_vf)?;
        positive("tau_D", self.tau_d)?;
        positive("tau_DZ", self.tau_dz)?;
        const A: [&str; 3] = ["a1", "a2", "a3"];
        const B: [&str; 3] = ["b1", "b2", "b3"];
        for k in 0..3 {
            positive(A[k], self.vf_den[k])?;
            positive(B[k], self.vf_num[k])?;
        }
        Ok(())
    }
}

/// Complete avionics parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvionicsParams {
    pub actuator: ActuatorParams,
    pub gyro: GyroParams,
    pub computer: FlightComputerParams,
}

impl AvionicsParams {
    pub fn ksr3() -> Self {
        Self {
            actuator: ActuatorParams::ksr3(),
            gyro: GyroParams::ksr3(),
            computer: FlightComputerParams::ksr3(),
        }
    }

    pub fn validate(&self) -> Result<(), AvionicsError> {
        self.actuator.validate()?;
        self.gyro.validate()?;
        self.computer.validate()
    }

    pub fn blocks(&self) -> AvionicsBlocks {
        AvionicsBlocks {
            actuator: actuator_tf(&self.actuator),
            actuator_accel: actuator_accel_tf(&self.actuator),
            gyro: gyro_tf(&self.gyro),
            vf: vf_tf(&self.computer),
            delay: delay_tf(&self.computer),
            dac_zoh: dac_zoh_tf(&self.computer),
        }
    }
}

/// The six rational blocks of the loop outside the plant and controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvionicsBlocks {
    pub actuator: RationalTf,
    pub actuator_accel: RationalTf,
    pub gyro: RationalTf,
    pub vf: RationalTf,
    pub delay: RationalTf,
    pub dac_zoh: RationalTf,
}

impl AvionicsBlocks {
    /// All blocks unity and no acceleration path; isolates plant and controller.
    pub fn ideal() -> Self {
        Self {
            actuator: RationalTf::unity(),
            actuator_accel: RationalTf::gain(0.0),
            gyro: RationalTf::unity(),
            vf: RationalTf::unity(),
            delay: RationalTf::unity(),
            dac_zoh: RationalTf::unity(),
        }
    }
}

fn tf(num: Polynomial, den: Polynomial) -> RationalTf {
    RationalTf::new(num, den).expect("block denominators are nonzero by construction")
}

/// `delta / delta_c`.
pub fn actuator_tf(p: &ActuatorParams) -> RationalTf {
    let [w1, w2, w3, w4] = p.omega;
    let [z1, z2, z3, z4] = p.zeta;
    let lp1 = tf(
        Polynomial::constant(w1 * w1),
        Polynomial::monic_quadratic(w1, z1),
    );
    let lp2 = tf(
        Polynomial::constant(w2 * w2),
        Polynomial::monic_quadratic(w2, z2),
    );
    let biquad = tf(
        Polynomial::monic_quadratic(w4, z4).scale(w3 * w3 / (w4 * w4)),
        Polynomial::monic_quadratic(w3, z3),
    );
    &(&lp1 * &lp2) * &biquad
}

/// `s^2 * delta / delta_c`, the gimbal angular acceleration per unit command.
pub fn actuator_accel_tf(p: &ActuatorParams) -> RationalTf {
    actuator_tf(p).times_s_power(2)
}

pub fn gyro_tf(p: &GyroParams) -> RationalTf {
    let w = p.omega;
    tf(Polynomial::constant(w * w), Polynomial::monic_quadratic(w, p.zeta))
}

/// Third-order rational model of the V/F converter.
pub fn vf_tf(p: &FlightComputerParams) -> RationalTf {
    let t = p.tau_vf;
    let [a1, a2, a3] = p.vf_den;
    let [b1, b2, b3] = p.vf_num;
    tf(
        Polynomial::new(vec![1.0, -b1 * t, b2 * t * t, -b3 * t * t * t]).expect("finite"),
        Polynomial::new(vec![1.0, a1 * t, a2 * t * t, a3 * t * t * t]).expect("finite"),
    )
}

/// Second-order Pade approximation of the computation delay.
pub fn delay_tf(p: &FlightComputerParams) -> RationalTf {
    let t = p.tau_d;
    tf(
        Polynomial::new(vec![1.0, -t / 2.0, t * t / 12.0]).expect("finite"),
        Polynomial::new(vec![1.0, t / 2.0, t * t / 12.0]).expect("finite"),
    )
}

pub fn dac_zoh_tf(p: &FlightComputerParams) -> RationalTf {
    let t = p.tau_dz;
    tf(
        Polynomial::one(),
        Polynomial::new(vec![1.0, t / 2.0, t * t / 12.0]).expect("finite"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn mag(tf: &RationalTf, w: f64) -> f64 {
        tf.freq_response(w).unwrap().norm()
    }

    #[test]
    fn unity_dc_gains() {
        let b = AvionicsParams::ksr3().blocks();
        for blk in [&b.actuator, &b.gyro, &b.vf, &b.delay, &b.dac_zoh] {
            assert!((blk.dc_gain().unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(b.actuator_accel.dc_gain().unwrap(), 0.0);
    }

    #[test]
    fn actuator_regression_at_first_corner() {
        // Independent evaluation of the three factors directly at s = j*2*pi*5.8.
        let p = ActuatorParams::ksr3();
        let s = Complex64::new(0.0, 2.0 * PI * 5.8);
        let quad = |w: f64, z: f64| s * s + s * (2.0 * z * w) + w * w;
        let [w1, w2, w3, w4] = p.omega;
        let [z1, z2, z3, z4] = p.zeta;
        let direct = (w1 * w1) / quad(w1, z1) * (w2 * w2) / quad(w2, z2) * (w3 * w3 / (w4 * w4))
            * quad(w4, z4)
            / quad(w3, z3);
        let m = mag(&actuator_tf(&p), 2.0 * PI * 5.8);
        assert!((m - direct.norm()).abs() < 1e-12);
        assert!((m - 0.5803457109539035).abs() < 1e-9, "{m}");
    }

    #[test]
    fn accel_path_is_strictly_proper() {
        let a = actuator_accel_tf(&ActuatorParams::ksr3());
        assert_eq!(a.num().degree(), 4);
        assert_eq!(a.den().degree(), 6);
        assert!(a.is_strictly_proper());
    }

    #[test]
    fn gyro_resonance_and_rolloff() {
        let g = gyro_tf(&GyroParams::ksr3());
        let wg = 2.0 * PI * 60.0;
        assert!((mag(&g, wg) - 1.0 / (2.0 * 0.65)).abs() < 1e-9);
        let slope = 20.0 * (mag(&g, 100.0 * wg) / mag(&g, 10.0 * wg)).log10();
        assert!((slope + 40.0).abs() < 2.0, "{slope}");
    }

    #[test]
    fn pade_blocks_are_all_pass() {
        let fc = FlightComputerParams::ksr3();
        let d = delay_tf(&fc);
        let vf = vf_tf(&fc);
        for k in 0..=600 {
            let w = 10f64.powf(-2.0 + k as f64 / 100.0);
            assert!((mag(&d, w) - 1.0).abs() < 1e-12);
            assert!((mag(&vf, w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pade_phase_tracks_delay() {
        let fc = FlightComputerParams::ksr3();
        let d = delay_tf(&fc);
        let vf = vf_tf(&fc);
        for k in 1..=50 {
            let x = 0.01 * k as f64;
            let pd = d.freq_response(x / fc.tau_d).unwrap().arg();
            assert!((pd + x).abs() <= 0.01 * x, "delay x={x}");
            let pv = vf.freq_response(x / fc.tau_vf).unwrap().arg();
            assert!((pv + x).abs() <= 0.01 * x, "vf x={x}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(GyroParams::from_hz(60.0, 1.2).is_err());
        assert!(ActuatorParams::from_hz([5.8, -1.0, 52.6, 15.6], [0.5; 4]).is_err());
        let mut fc = FlightComputerParams::ksr3();
        fc.vf_den[1] = 0.0;
        assert!(fc.validate().is_err());
    }
}
