//! Synthetic KSR-III-like reference vehicle.
//!
//! This is an input fixture, not flight data. Stability-derivative extremes
//! follow the published ranges (`Z_alpha` -0.55..-0.1, `M_alpha` -40..-1,
//! `Z_delta` 0.05..0.38, `M_delta` 8.1..15.5); the time profiles between them,
//! the bending and slosh data and every station value below are invented and
//! documented here.
//!
//! Profiles over the 11 nodes `t = 5, 10, ..., 55 s`:
//!
//! * normalized dynamic pressure `h(t) = sin^2(pi (t - 5) / 50)`, peak at 30 s;
//! * `Z_alpha`, `M_alpha` follow `d_min + (d_max - d_min) (1 - h)` and peak in
//!   magnitude at peak dynamic pressure;
//! * `M_delta = 8.1 + 7.4 (1 - f)^2.5` with `f = (t - 5) / 50`, falling from
//!   15.5 at 5 s and levelling out near 8.1 at burnout. The `(1 - h)` shape
//!   would bring it back to 15.5 at burnout, and no straight-line gain
//!   schedule then meets the rigid-body specs without a large uniform
//!   overscale that eats the phase margin. With this shape `1 / M_delta` is
//!   concave, so a straight line fitted to the rigid-spec gains falls short
//!   mid-flight and overshoots at both ends;
//! * `Z_delta = T / (m U)` falls like `1 / U` with `U` proportional to `t`:
//!   `0.05 + 0.33 (5/t - 5/55) / (1 - 5/55)`. A `(1 - h)` shape would bring
//!   `Z_delta` back up while `|M_alpha|` is still large, flipping the sign of
//!   the trim rate gain `(M_alpha Z_delta - M_delta Z_alpha) / (Z_alpha M_q -
//!   M_alpha)` and leaving a real unstable closed-loop root for every positive
//!   PD gain;
//! * `M_q = -(0.05 + 0.25 h)` 1/s;
//! * mass `6100 - 66 t` kg, `I_yy = 1e5 m / 6100` kg m^2, speed `15 t` m/s,
//!   axial acceleration `9.81 (1 + 3 t / 59)` m/s^2;
//! * bending modes rise linearly in time: 8-12, 20-30, 40-55 Hz, damping
//!   0.005, generalized masses 100/80/60 kg;
//! * two tanks (LOX, kerosene) of radius 0.5 m, first slosh mode only,
//!   damping 0.001, propellant draining linearly to empty at 59 s. Pendulum
//!   pivots sit just aft of the dry center of mass (-0.25 m, -0.75 m); pivots
//!   a metre or more forward drive the slosh-frequency crossover unstable;
//! * mode 1 is sensed strongly enough (gyro slope -0.012) that the unfiltered
//!   loop peaks near +7.5 dB at 5 s and must be attenuated; mode 2 sits a few
//!   dB under the -6 dB cap late in flight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{slosh_from_tank, BendingMode, FlightNode, RigidBodyDerivatives};

/// Mode-shape and mode-slope station values of one bending mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStations {
    /// Frequency at the first and last node, Hz.
    pub freq_hz: (f64, f64),
    pub generalized_mass: f64,
    pub slope_gyro: f64,
    pub slope_gimbal: f64,
    pub shape_gimbal: f64,
    pub shape_cp: f64,
    pub slope_cp: f64,
    /// One entry per tank, same order as `ReferenceVehicle::tanks`.
    pub shape_slosh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TankStations {
    pub name: String,
    /// m
    pub radius: f64,
    /// Fill height at liftoff, m.
    pub fill_height: f64,
    /// Propellant mass at liftoff, kg.
    pub propellant_mass: f64,
    /// Pivot position relative to the dry center of mass, m, positive forward.
    pub pivot: f64,
}

/// Every constant that defines the reference dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceVehicle {
    pub node_times: Vec<f64>,
    pub burn_time: f64,
    pub liftoff_mass: f64,
    pub mass_flow: f64,
    pub liftoff_i_yy: f64,
    pub speed_slope: f64,
    pub engine_mass: f64,
    pub engine_arm: f64,
    pub gimbal_arm: f64,
    pub engine_inertia: f64,
    pub bending_zeta: f64,
    pub slosh_zeta: f64,
    pub modes: Vec<ModeStations>,
    pub tanks: Vec<TankStations>,
}

impl Default for ReferenceVehicle {
    fn default() -> Self {
        Self {
            node_times: (1..=11).map(|i| 5.0 * i as f64).collect(),
            burn_time: 59.0,
            liftoff_mass: 6100.0,
            mass_flow: 66.0,
            liftoff_i_yy: 1.0e5,
            speed_slope: 15.0,
            engine_mass: 50.0,
            engine_arm: 0.25,
            gimbal_arm: 5.0,
            engine_inertia: 3.0,
            bending_zeta: 0.005,
            slosh_zeta: 0.001,
            modes: vec![
                ModeStations {
                    freq_hz: (8.0, 12.0),
                    generalized_mass: 100.0,
                    slope_gyro: -0.012,
                    slope_gimbal: 0.01,
                    shape_gimbal: 1.0,
                    shape_cp: -0.3,
                    slope_cp: 0.005,
                    shape_slosh: vec![-0.4, 0.1],
                },
                ModeStations {
                    freq_hz: (20.0, 30.0),
                    generalized_mass: 80.0,
                    slope_gyro: 0.048,
                    slope_gimbal: 0.02,
                    shape_gimbal: 1.0,
                    shape_cp: 0.4,
                    slope_cp: 0.01,
                    shape_slosh: vec![0.3, -0.5],
                },
                ModeStations {
                    freq_hz: (40.0, 55.0),
                    generalized_mass: 60.0,
                    slope_gyro: -0.008,
                    slope_gimbal: 0.03,
                    shape_gimbal: 1.0,
                    shape_cp: -0.5,
                    slope_cp: 0.015,
                    shape_slosh: vec![-0.2, 0.4],
                },
            ],
            tanks: vec![
                TankStations {
                    name: "LOX".into(),
                    radius: 0.5,
                    fill_height: 3.0,
                    propellant_mass: 2600.0,
                    pivot: -0.25,
                },
                TankStations {
                    name: "kerosene".into(),
                    radius: 0.5,
                    fill_height: 2.2,
                    propellant_mass: 1300.0,
                    pivot: -0.75,
                },
            ],
        }
    }
}

/// Table extremes `(min, max)` of the four tabulated derivatives.
pub const Z_ALPHA_RANGE: (f64, f64) = (-0.55, -0.1);
pub const M_ALPHA_RANGE: (f64, f64) = (-40.0, -1.0);
pub const Z_DELTA_RANGE: (f64, f64) = (0.05, 0.38);
pub const M_DELTA_RANGE: (f64, f64) = (8.1, 15.5);

/// Normalized dynamic pressure shape, 0 at 5 s and 55 s, 1 at 30 s.
pub fn dynamic_pressure_shape(t: f64) -> f64 {
    let s = (PI * (t - 5.0) / 50.0).sin();
    s * s
}

fn between(range: (f64, f64), h: f64) -> f64 {
    range.0 + (range.1 - range.0) * (1.0 - h)
}

/// `1 / t` shape normalized to 1 at `t0` and 0 at `t1`.
fn inverse_time_shape(t: f64, t0: f64, t1: f64) -> f64 {
    (t0 / t - t0 / t1) / (1.0 - t0 / t1)
}

impl ReferenceVehicle {
    pub fn node(&self, t: f64) -> FlightNode {
        let h = dynamic_pressure_shape(t);
        let (t0, t1) = (self.node_times[0], self.node_times[self.node_times.len() - 1]);
        let frac = (t - t0) / (t1 - t0);
        let mass = self.liftoff_mass - self.mass_flow * t;
        let i_yy = self.liftoff_i_yy * mass / self.liftoff_mass;
        let speed = self.speed_slope * t;
        let a_x = 9.81 * (1.0 + 3.0 * t / self.burn_time);

        let deriv = RigidBodyDerivatives {
            z_alpha: between(Z_ALPHA_RANGE, h),
            z_delta: Z_DELTA_RANGE.0
                + (Z_DELTA_RANGE.1 - Z_DELTA_RANGE.0) * inverse_time_shape(t, t0, t1),
            m_alpha: between(M_ALPHA_RANGE, h),
            m_q: -(0.05 + 0.25 * h),
            m_delta: M_DELTA_RANGE.0 + (M_DELTA_RANGE.1 - M_DELTA_RANGE.0) * (1.0 - frac).powf(2.5),
            z_ddelta: self.engine_mass * self.engine_arm / (mass * speed),
            m_ddelta: (self.engine_inertia + self.engine_mass * self.engine_arm * self.gimbal_arm)
                / i_yy,
        };

        let bending: Vec<BendingMode> = self
            .modes
            .iter()
            .map(|m| BendingMode {
                omega: 2.0 * PI * (m.freq_hz.0 + (m.freq_hz.1 - m.freq_hz.0) * frac),
                zeta: self.bending_zeta,
                generalized_mass: m.generalized_mass,
                slope_gyro: m.slope_gyro,
                slope_gimbal: m.slope_gimbal,
                shape_gimbal: m.shape_gimbal,
                shape_cp: m.shape_cp,
                slope_cp: m.slope_cp,
                shape_slosh: m.shape_slosh.clone(),
            })
            .collect();

        let remaining = 1.0 - t / self.burn_time;
        let slosh = self
            .tanks
            .iter()
            .map(|tk| {
                slosh_from_tank(
                    a_x,
                    tk.radius,
                    tk.fill_height * remaining,
                    tk.propellant_mass * remaining,
                    self.slosh_zeta,
                    tk.pivot,
                )
                .expect("reference tanks are nonempty before burnout")
            })
            .collect();

        let omega_b1 = bending.first().map_or(0.0, |b| b.omega);
        FlightNode {
            t,
            deriv,
            bending,
            slosh,
            speed,
            a_x,
            mass,
            i_yy,
            omega_b1,
        }
    }

    pub fn nodes(&self) -> Vec<FlightNode> {
        self.node_times.iter().map(|&t| self.node(t)).collect()
    }
}

/// The 11-node synthetic reference dataset.
pub fn make_reference_vehicle() -> Vec<FlightNode> {
    ReferenceVehicle::default().nodes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_valid_nodes() {
        let nodes = make_reference_vehicle();
        assert_eq!(nodes.len(), 11);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.t, 5.0 * (i + 1) as f64);
            n.validate().unwrap();
            assert_eq!(n.bending.len(), 3);
            assert_eq!(n.slosh.len(), 2);
        }
    }

    #[test]
    fn table_extremes_at_extreme_nodes() {
        let nodes = make_reference_vehicle();
        let peak_q = &nodes[5];
        assert_eq!(peak_q.t, 30.0);
        assert_eq!(peak_q.deriv.m_alpha, -40.0);
        assert_eq!(peak_q.deriv.z_alpha, -0.55);
        assert_eq!(nodes[0].deriv.m_delta, 15.5);
        assert_eq!(nodes[0].deriv.z_delta, 0.38);
        assert!((nodes[10].deriv.z_delta - 0.05).abs() < 1e-15);
        let md_min = nodes.iter().map(|n| n.deriv.m_delta).fold(f64::INFINITY, f64::min);
        let md_max = nodes.iter().map(|n| n.deriv.m_delta).fold(0.0, f64::max);
        assert_eq!(md_min, 8.1);
        assert_eq!(md_max, 15.5);
    }

    #[test]
    fn trim_rate_gain_keeps_sign() {
        for n in make_reference_vehicle() {
            let d = n.deriv;
            assert!(d.m_alpha * d.z_delta - d.m_delta * d.z_alpha > 0.0, "t = {}", n.t);
        }
    }

    #[test]
    fn bending_frequencies_span() {
        let nodes = make_reference_vehicle();
        let f = |n: &FlightNode, k: usize| n.bending[k].omega / (2.0 * PI);
        assert!((f(&nodes[0], 0) - 8.0).abs() < 1e-12);
        assert!((f(&nodes[10], 0) - 12.0).abs() < 1e-12);
        assert!((f(&nodes[10], 2) - 55.0).abs() < 1e-12);
    }
}
