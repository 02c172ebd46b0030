use serde::{Deserialize, Serialize};

use super::{RigidBodyDerivatives, VehicleError};

/// Raw mass, aerodynamic and engine properties at one flight condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// kg
    pub mass: f64,
    /// kg m^2
    pub i_yy: f64,
    /// m/s
    pub speed: f64,
    /// kg/m^3
    pub rho: f64,
    /// Pa
    pub q_inf: f64,
    /// m^2
    pub s_ref: f64,
    /// m
    pub l_ref: f64,
    /// Thrust point station, m.
    pub x_thrust: f64,
    /// Center-of-gravity station, m.
    pub x_cg: f64,
    /// Center-of-pressure station, m.
    pub x_cp: f64,
    /// N
    pub thrust: f64,
    /// 1/rad
    pub c_n_alpha: f64,
    /// 1/rad
    pub c_m_alpha: f64,
    pub c_m_q: f64,
    /// m/s^2
    pub a_x: f64,
    /// Engine mass, kg.
    pub engine_mass: f64,
    /// Gimbal pivot to engine center of mass, m.
    pub engine_arm: f64,
    /// Vehicle center of mass to gimbal pivot, m.
    pub gimbal_arm: f64,
    /// Engine moment of inertia about the gimbal, kg m^2.
    pub engine_inertia: f64,
}

pub fn derivatives_from_physical(p: &PhysicalParams) -> Result<RigidBodyDerivatives, VehicleError> {
    if !(p.mass > 0.0) {
        return Err(VehicleError::NonPositiveDivisor("mass"));
    }
    if !(p.speed > 0.0) {
        return Err(VehicleError::NonPositiveDivisor("speed"));
    }
    if !(p.i_yy > 0.0) {
        return Err(VehicleError::NonPositiveDivisor("I_yy"));
    }
    let mu = p.mass * p.speed;
    Ok(RigidBodyDerivatives {
        z_alpha: -p.c_n_alpha * p.q_inf * p.s_ref / mu,
        z_delta: p.thrust / mu,
        m_alpha: p.q_inf * p.c_m_alpha * p.s_ref * p.l_ref / p.i_yy,
        m_q: p.c_m_q * p.l_ref * p.l_ref * p.s_ref * p.rho * p.speed / (4.0 * p.i_yy),
        m_delta: (p.x_thrust - p.x_cg) * p.thrust / p.i_yy,
        z_ddelta: p.engine_mass * p.engine_arm / mu,
        m_ddelta: (p.engine_inertia + p.engine_mass * p.engine_arm * p.gimbal_arm) / p.i_yy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn liftoff() -> PhysicalParams {
        PhysicalParams {
            mass: 6100.0,
            i_yy: 1.0e5,
            speed: 100.0,
            rho: 1.1,
            q_inf: 0.5 * 1.1 * 100.0 * 100.0,
            s_ref: 0.785,
            l_ref: 1.0,
            x_thrust: -6.0,
            x_cg: 0.0,
            x_cp: 1.0,
            thrust: 129e3,
            c_n_alpha: 3.0,
            c_m_alpha: -2.0,
            c_m_q: -10.0,
            a_x: 11.3,
            engine_mass: 50.0,
            engine_arm: 0.25,
            gimbal_arm: 5.0,
            engine_inertia: 3.0,
        }
    }

    #[test]
    fn thrust_derivative_at_liftoff() {
        let d = derivatives_from_physical(&liftoff()).unwrap();
        assert!((d.z_delta - 0.211_475).abs() < 1e-6, "{}", d.z_delta);
    }

    #[test]
    fn each_formula() {
        let p = liftoff();
        let d = derivatives_from_physical(&p).unwrap();
        let mu = p.mass * p.speed;
        assert_eq!(d.z_alpha, -3.0 * p.q_inf * 0.785 / mu);
        assert_eq!(d.m_alpha, p.q_inf * -2.0 * 0.785 * 1.0 / 1e5);
        assert!((d.m_q - (-10.0 * 0.785 * 1.1 * 100.0 / 4e5)).abs() < 1e-15);
        assert!((d.m_delta - (-6.0 * 129e3 / 1e5)).abs() < 1e-12);
        assert!((d.z_ddelta - 12.5 / mu).abs() < 1e-18);
        assert!((d.m_ddelta - (3.0 + 62.5) / 1e5).abs() < 1e-15);
    }

    #[test]
    fn zero_normal_force_slope() {
        let mut p = liftoff();
        p.c_n_alpha = 0.0;
        assert_eq!(derivatives_from_physical(&p).unwrap().z_alpha, 0.0);
    }

    #[test]
    fn zero_moment_arm_fails_downstream_check() {
        let mut p = liftoff();
        p.x_thrust = p.x_cg;
        let d = derivatives_from_physical(&p).unwrap();
        assert_eq!(d.m_delta, 0.0);
        assert!(d.validate().is_err());
    }

    #[test]
    fn divisors() {
        for f in [
            |p: &mut PhysicalParams| p.mass = 0.0,
            |p: &mut PhysicalParams| p.speed = -1.0,
            |p: &mut PhysicalParams| p.i_yy = 0.0,
        ] {
            let mut p = liftoff();
            f(&mut p);
            assert!(matches!(
                derivatives_from_physical(&p),
                Err(VehicleError::NonPositiveDivisor(_))
            ));
        }
    }
}
