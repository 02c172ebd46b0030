use num_complex::Complex64;

use flexacs::vehicle::{
    assemble_plant, slosh_from_tank, BendingMode, FlightNode, PlantOptions, ReferenceVehicle, RigidBodyDerivatives,
    SloshMode,
};

fn rigid(deriv: RigidBodyDerivatives) -> FlightNode {
    FlightNode {
        t: 20.0,
        deriv,
        bending: vec![],
        slosh: vec![],
        speed: 250.0,
        a_x: 15.0,
        mass: 8000.0,
        i_yy: 2e5,
        omega_b1: 0.0,
    }
}

fn derivs() -> RigidBodyDerivatives {
    RigidBodyDerivatives {
        z_alpha: -0.12,
        z_delta: 0.05,
        m_alpha: 1.8,
        m_q: -0.03,
        m_delta: 9.0,
        z_ddelta: 0.0,
        m_ddelta: 0.0,
    }
}

/// `q / delta` of the two-state rigid plant, derived by hand.
fn rigid_tf(d: &RigidBodyDerivatives, s: Complex64) -> Complex64 {
    let num = s * d.m_delta + (d.m_alpha * d.z_delta - d.z_alpha * d.m_delta);
    let den = s * s - s * (d.z_alpha + d.m_q) + (d.z_alpha * d.m_q - d.m_alpha);
    num / den
}

fn mode(omega: f64, zeta: f64, slope_gyro: f64) -> BendingMode {
    BendingMode {
        omega,
        zeta,
        generalized_mass: 150.0,
        slope_gyro,
        slope_gimbal: 0.0,
        shape_gimbal: 0.0,
        shape_cp: 0.0,
        slope_cp: 0.0,
        shape_slosh: vec![],
    }
}

#[test]
fn rigid_plant_matches_hand_transfer_function() {
    let d = derivs();
    let ss = assemble_plant(&rigid(d), PlantOptions::default()).unwrap();
    for k in 0..=80 {
        let w = 0.01 * 10f64.powf(k as f64 / 20.0);
        let h = ss.freq_response(w).unwrap();
        let want = rigid_tf(&d, Complex64::new(0.0, w));
        assert!((h[(0, 0)] - want).norm() <= 1e-9 * want.norm(), "w = {w}");
        assert_eq!(h[(0, 0)], h[(1, 0)]);
    }
}

#[test]
fn uncoupled_bending_leaves_sensed_rate_alone() {
    let mut node = rigid(derivs());
    node.bending.push(mode(45.0, 0.01, 0.8));
    node.omega_b1 = 45.0;
    for strict in [false, true] {
        let ss = assemble_plant(&node, PlantOptions { strict_eq12: strict }).unwrap();
        for w in [0.1, 3.0, 44.9, 45.0, 500.0] {
            let h = ss.freq_response(w).unwrap();
            assert_eq!(h[(1, 0)], h[(0, 0)]);
            assert_eq!(h[(1, 1)], h[(0, 1)]);
        }
    }
}

#[test]
fn uncoupled_modes_keep_their_own_poles() {
    let mut node = rigid(derivs());
    node.bending.push(mode(45.0, 0.01, 0.8));
    node.bending.push(mode(110.0, 0.015, -0.4));
    node.omega_b1 = 45.0;
    let slosh = slosh_from_tank(node.a_x, 1.2, 3.0, 9000.0, 0.002, 1.5).unwrap();
    node.slosh.push(SloshMode { mass: 1e-9, ..slosh });
    for b in &mut node.bending {
        b.shape_slosh = vec![0.0];
    }
    let poles = assemble_plant(&node, PlantOptions::default()).unwrap().eigenvalues();
    for (w, z) in [(45.0, 0.01), (110.0, 0.015)] {
        let want = Complex64::new(-z * w, w * (1.0 - z * z).sqrt());
        let got = poles.iter().map(|p| (p - want).norm()).fold(f64::INFINITY, f64::min);
        assert!(got < 1e-8 * w, "{w}: {got}");
    }
    for p in &poles {
        if p.im.abs() > 1.0 {
            assert!(p.re < 0.0, "{p}");
        }
    }
}

#[test]
fn slosh_mass_is_a_fraction_of_the_propellant() {
    for h in [0.05, 0.3, 1.0, 2.0, 6.0] {
        let s = slosh_from_tank(20.0, 1.0, h, 5000.0, 0.001, 0.0).unwrap();
        assert!(s.mass > 0.0 && s.mass < 5000.0, "h = {h}: {}", s.mass);
        assert!(s.omega > 0.0 && s.length > 0.0);
    }
}

#[test]
fn worked_tank_example() {
    let s = slosh_from_tank(29.4, 0.5, 1.0, 1000.0, 0.0, 0.0).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    assert!(rel(s.omega, 10.394) < 1e-3, "{}", s.omega);
    assert!(rel(s.length, 0.27213) < 1e-3, "{}", s.length);
    assert!(rel(s.mass, 227.50) < 1e-3, "{}", s.mass);
}

#[test]
fn reference_plants_assemble_at_every_node() {
    let nodes = ReferenceVehicle::default().nodes();
    assert_eq!(nodes.len(), 11);
    for n in &nodes {
        let ss = assemble_plant(n, PlantOptions::default()).unwrap();
        assert_eq!(ss.states(), 2 + 2 * n.bending.len() + 2 * n.slosh.len());
        let h = ss.freq_response(n.omega_b1).unwrap();
        assert!(h.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn flight_nodes_round_trip_through_json() {
    let nodes = ReferenceVehicle::default().nodes();
    let text = serde_json::to_string(&nodes).unwrap();
    let back: Vec<FlightNode> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, nodes);
}
