use nalgebra::DMatrix;

use super::{FlightNode, VehicleError};
use crate::lti::StateSpace;

/// Plant inputs: gimbal angle and gimbal angular acceleration.
pub const INPUTS: usize = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlantOptions {
    /// Sense bending as `sigma(x_G) * eta` (literal displacement form)
    /// instead of the modal slope rate `sigma(x_G) * eta'`.
    pub strict_eq12: bool,
}

/// Index map of the plant state vector
/// `[alpha, q, eta_1, eta_1', ..., gamma_1, gamma_1', ...]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub bending: usize,
    pub slosh: usize,
}

impl StateLayout {
    pub const ALPHA: usize = 0;
    pub const Q: usize = 1;

    pub fn eta(&self, i: usize) -> usize {
        2 + 2 * i
    }

    pub fn eta_dot(&self, i: usize) -> usize {
        3 + 2 * i
    }

    pub fn gamma(&self, k: usize) -> usize {
        2 + 2 * self.bending + 2 * k
    }

    pub fn gamma_dot(&self, k: usize) -> usize {
        3 + 2 * self.bending + 2 * k
    }

    pub fn len(&self) -> usize {
        2 + 2 * self.bending + 2 * self.slosh
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn state_layout(node: &FlightNode) -> StateLayout {
    StateLayout {
        bending: node.bending.len(),
        slosh: node.slosh.len(),
    }
}

/// Linear combination of states followed by the two inputs.
type Row = Vec<f64>;

/// Two-input, two-output plant: `u = [delta, delta'']`, `y = [q, q_m]`.
///
/// Thrust, normal-force slope and engine `m_E l_E` are recovered from the
/// node's derivatives and mass/speed, so a node alone fully defines the
/// coupling forces. The slosh rows reference `alpha'`, `q'` and `eta''`; those
/// are substituted from the rows already formed, so the result is explicit.
pub fn assemble_plant(node: &FlightNode, opts: PlantOptions) -> Result<StateSpace, VehicleError> {
    node.validate()?;
    let lay = state_layout(node);
    let n = lay.len();
    let width = n + INPUTS;
    let (d_in, dd_in) = (n, n + 1);
    let d = &node.deriv;

    // Slosh force per tank: a_x m_p (Gamma + 2 zeta/omega Gamma').
    let slosh_force: Vec<Row> = node
        .slosh
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut r = vec![0.0; width];
            r[lay.gamma(k)] = node.a_x * s.mass;
            r[lay.gamma_dot(k)] = node.a_x * s.mass * 2.0 * s.zeta / s.omega;
            r
        })
        .collect();

    let mut alpha_dot = vec![0.0; width];
    alpha_dot[StateLayout::ALPHA] = d.z_alpha;
    alpha_dot[StateLayout::Q] = 1.0;
    alpha_dot[d_in] = d.z_delta;
    alpha_dot[dd_in] = d.z_ddelta;

    let mut q_dot = vec![0.0; width];
    q_dot[StateLayout::ALPHA] = d.m_alpha;
    q_dot[StateLayout::Q] = d.m_q;
    q_dot[d_in] = d.m_delta;
    q_dot[dd_in] = d.m_ddelta;

    let mu = node.mass * node.speed;
    for (k, s) in node.slosh.iter().enumerate() {
        axpy(&mut alpha_dot, 1.0 / mu, &slosh_force[k]);
        axpy(&mut q_dot, -s.pivot / node.i_yy, &slosh_force[k]);
    }

    let thrust = node.thrust();
    let aero = node.normal_force_slope();
    let engine = node.engine_moment();

    let mut eta_ddot: Vec<Row> = Vec::with_capacity(lay.bending);
    for (i, b) in node.bending.iter().enumerate() {
        // Generalized force F_G,i as a row.
        let mut force = vec![0.0; width];
        force[d_in] += b.shape_gimbal * thrust;
        force[StateLayout::ALPHA] -= aero * b.shape_cp;
        for (j, bj) in node.bending.iter().enumerate() {
            force[lay.eta(j)] += b.shape_gimbal * thrust * bj.slope_gimbal;
            force[lay.eta(j)] -= aero * b.shape_cp * bj.slope_cp;
        }
        for (k, sf) in slosh_force.iter().enumerate() {
            axpy(&mut force, b.shape_slosh[k], sf);
        }
        force[dd_in] += engine * b.shape_gimbal;

        let mut r = vec![0.0; width];
        axpy(&mut r, -1.0 / b.generalized_mass, &force);
        r[lay.eta(i)] -= b.omega * b.omega;
        r[lay.eta_dot(i)] -= 2.0 * b.zeta * b.omega;
        eta_ddot.push(r);
    }

    let mut gamma_ddot: Vec<Row> = Vec::with_capacity(lay.slosh);
    for (k, s) in node.slosh.iter().enumerate() {
        // U alpha' - U q - q' (l_p - L_p) + sum eta_j'' phi_j(l_p)
        let mut bracket = vec![0.0; width];
        axpy(&mut bracket, node.speed, &alpha_dot);
        bracket[StateLayout::Q] -= node.speed;
        axpy(&mut bracket, -(s.pivot - s.length), &q_dot);
        for (j, b) in node.bending.iter().enumerate() {
            axpy(&mut bracket, b.shape_slosh[k], &eta_ddot[j]);
        }
        let mut r = vec![0.0; width];
        axpy(&mut r, -1.0 / s.length, &bracket);
        r[lay.gamma(k)] -= s.omega * s.omega;
        r[lay.gamma_dot(k)] -= 2.0 * s.zeta * s.omega;
        gamma_ddot.push(r);
    }

    let mut a = DMatrix::zeros(n, n);
    let mut bm = DMatrix::zeros(n, INPUTS);
    let mut put = |state: usize, row: &Row| {
        for c in 0..n {
            a[(state, c)] = row[c];
        }
        bm[(state, 0)] = row[d_in];
        bm[(state, 1)] = row[dd_in];
    };
    put(StateLayout::ALPHA, &alpha_dot);
    put(StateLayout::Q, &q_dot);
    for i in 0..lay.bending {
        let mut kin = vec![0.0; width];
        kin[lay.eta_dot(i)] = 1.0;
        put(lay.eta(i), &kin);
        put(lay.eta_dot(i), &eta_ddot[i]);
    }
    for k in 0..lay.slosh {
        let mut kin = vec![0.0; width];
        kin[lay.gamma_dot(k)] = 1.0;
        put(lay.gamma(k), &kin);
        put(lay.gamma_dot(k), &gamma_ddot[k]);
    }

    let mut c = DMatrix::zeros(2, n);
    c[(0, StateLayout::Q)] = 1.0;
    c[(1, StateLayout::Q)] = 1.0;
    for (i, b) in node.bending.iter().enumerate() {
        let col = if opts.strict_eq12 { lay.eta(i) } else { lay.eta_dot(i) };
        c[(1, col)] += b.slope_gyro;
    }
    let dm = DMatrix::zeros(2, INPUTS);

    StateSpace::new(a, bm, c, dm).map_err(|e| VehicleError::InconsistentDimensions(e.to_string()))
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{BendingMode, RigidBodyDerivatives, SloshMode};
    use num_complex::Complex64;

    pub(crate) fn rigid_node(m_alpha: f64, m_delta: f64) -> FlightNode {
        FlightNode {
            t: 10.0,
            deriv: RigidBodyDerivatives {
                z_alpha: 0.0,
                z_delta: 0.0,
                m_alpha,
                m_q: 0.0,
                m_delta,
                z_ddelta: 0.0,
                m_ddelta: 0.0,
            },
            bending: vec![],
            slosh: vec![],
            speed: 100.0,
            a_x: 10.0,
            mass: 5000.0,
            i_yy: 1e5,
            omega_b1: 0.0,
        }
    }

    #[test]
    fn rigid_example_response() {
        let ss = assemble_plant(&rigid_node(-1.0, 8.1), PlantOptions::default()).unwrap();
        let h = ss.freq_response(2.0).unwrap();
        assert!((h[(0, 0)] - Complex64::new(0.0, -5.4)).norm() < 1e-12);
        assert!((h[(0, 0)].norm() - 5.4).abs() < 1e-12);
        assert_eq!(h[(0, 0)], h[(1, 0)]);
    }

    #[test]
    fn decoupled_mode_stays_at_rest() {
        let mut node = rigid_node(-1.0, 8.1);
        node.bending.push(BendingMode {
            omega: 60.0,
            zeta: 0.005,
            generalized_mass: 100.0,
            slope_gyro: 1.0,
            slope_gimbal: 0.0,
            shape_gimbal: 0.0,
            shape_cp: 0.0,
            slope_cp: 0.0,
            shape_slosh: vec![],
        });
        node.omega_b1 = 60.0;
        let ss = assemble_plant(&node, PlantOptions::default()).unwrap();
        for w in [0.5, 2.0, 59.0, 300.0] {
            let h = ss.freq_response(w).unwrap();
            assert_eq!(h[(0, 0)], h[(1, 0)]);
            assert_eq!(h[(0, 1)], h[(1, 1)]);
        }
    }

    #[test]
    fn slosh_shape_count_must_match() {
        let mut node = rigid_node(-1.0, 8.1);
        node.slosh.push(SloshMode {
            omega: 6.0,
            zeta: 0.001,
            mass: 100.0,
            pivot: 1.0,
            length: 0.3,
        });
        node.bending.push(BendingMode {
            omega: 60.0,
            zeta: 0.005,
            generalized_mass: 100.0,
            slope_gyro: 0.1,
            slope_gimbal: 0.0,
            shape_gimbal: 1.0,
            shape_cp: 0.0,
            slope_cp: 0.0,
            shape_slosh: vec![],
        });
        node.omega_b1 = 60.0;
        assert!(matches!(
            assemble_plant(&node, PlantOptions::default()),
            Err(VehicleError::InconsistentDimensions(_))
        ));
    }

    #[test]
    fn strict_sensing_uses_displacement() {
        let mut node = rigid_node(-1.0, 8.1);
        node.deriv.z_delta = 0.2;
        node.bending.push(BendingMode {
            omega: 60.0,
            zeta: 0.005,
            generalized_mass: 100.0,
            slope_gyro: 0.1,
            slope_gimbal: 0.0,
            shape_gimbal: 1.0,
            shape_cp: 0.0,
            slope_cp: 0.0,
            shape_slosh: vec![],
        });
        node.omega_b1 = 60.0;
        let rate = assemble_plant(&node, PlantOptions::default()).unwrap();
        let disp = assemble_plant(&node, PlantOptions { strict_eq12: true }).unwrap();
        let lay = state_layout(&node);
        assert_eq!(rate.c[(1, lay.eta_dot(0))], 0.1);
        assert_eq!(disp.c[(1, lay.eta(0))], 0.1);
        // eta' = j w eta, so the bending contributions differ by j w.
        let w = 20.0;
        let hr = rate.freq_response(w).unwrap();
        let hd = disp.freq_response(w).unwrap();
        let br = hr[(1, 0)] - hr[(0, 0)];
        let bd = hd[(1, 0)] - hd[(0, 0)];
        assert!((br - bd * Complex64::new(0.0, w)).norm() < 1e-9 * br.norm());
    }
}
