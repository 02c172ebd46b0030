use num_complex::Complex64;
use proptest::prelude::*;

use flexacs::avionics::{ActuatorParams, AvionicsParams, FlightComputerParams, GyroParams};
use flexacs::control::{
    filter_hf_gain, filter_tf, gains_from_rigid_specs, interpolate_gains, param_kinds, FilterParams, GainSchedule,
    ParamKind, RigidSpecs,
};
use flexacs::designer::DesignSpec;
use flexacs::lti::{eval_ss, eval_tf, tf_multiply, to_db, wrap_degrees, FrequencyGrid, Polynomial, RationalTf, StateSpace};
use flexacs::loop_analysis::{bode, margins, OpenLoop};
use flexacs::vehicle::{assemble_plant, slosh_from_tank, PlantOptions, ReferenceVehicle};

fn jw(w: f64) -> Complex64 {
    Complex64::new(0.0, w)
}

/// Stable polynomial from real roots and damped pairs, ascending coefficients.
fn stable_poly(real: &[f64], pairs: &[(f64, f64)]) -> Polynomial {
    let mut p = Polynomial::one();
    for &r in real {
        p = &p * &Polynomial::new(vec![r, 1.0]).unwrap();
    }
    for &(w, z) in pairs {
        p = &p * &Polynomial::monic_quadratic(w, z);
    }
    p
}

prop_compose! {
    fn stable_tf()(
        k in 0.1f64..10.0,
        zr in prop::collection::vec(0.1f64..50.0, 0..2),
        pr in prop::collection::vec(0.1f64..50.0, 1..3),
        pp in prop::collection::vec((0.5f64..40.0, 0.05f64..0.9), 0..2),
    ) -> RationalTf {
        let num = stable_poly(&zr, &[]).scale(k);
        RationalTf::new(num, stable_poly(&pr, &pp)).unwrap()
    }
}

fn filter_strategy() -> impl Strategy<Value = FilterParams> {
    (2u8..=6).prop_flat_map(|order| {
        let kinds = param_kinds(order).unwrap();
        let entries: Vec<BoxedStrategy<f64>> = kinds
            .into_iter()
            .map(|k| match k {
                ParamKind::Frequency => (1.0f64..500.0).boxed(),
                ParamKind::Damping => (0.02f64..1.0).boxed(),
            })
            .collect();
        entries.prop_map(move |x| FilterParams::new(order, x).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_realization_matches_transfer_function(tf in stable_tf()) {
        let ss = StateSpace::from_tf(&tf).unwrap();
        for k in 0..=40 {
            let w = 0.01 * 10f64.powf(k as f64 / 10.0);
            let a = eval_ss(&ss, w).unwrap()[(0, 0)];
            let b = eval_tf(&tf, jw(w)).unwrap();
            prop_assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn product_evaluates_as_product(a in stable_tf(), b in stable_tf(), w in 1e-3f64..1e3) {
        let ab = eval_tf(&tf_multiply(&a, &b), jw(w)).unwrap();
        let want = eval_tf(&a, jw(w)).unwrap() * eval_tf(&b, jw(w)).unwrap();
        prop_assert!((ab - want).norm() <= 1e-12 * want.norm().max(1e-300) * 10.0);
    }

    #[test]
    fn degrees_add(p in prop::collection::vec(-5.0f64..5.0, 1..6), q in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let (p, q) = (Polynomial::new(p).unwrap(), Polynomial::new(q).unwrap());
        prop_assume!(!p.is_zero() && !q.is_zero());
        prop_assert_eq!((&p * &q).degree(), p.degree() + q.degree());
    }

    #[test]
    fn plant_is_continuous_in_its_parameters(node_ix in 0usize..11, which in 0usize..6, sign in prop::bool::ANY) {
        let mut node = ReferenceVehicle::default().nodes()[node_ix].clone();
        let base = assemble_plant(&node, PlantOptions::default()).unwrap();
        let f = 1.0 + if sign { 1e-8 } else { -1e-8 };
        match which {
            0 => node.deriv.m_alpha *= f,
            1 => node.deriv.m_delta *= f,
            2 => node.deriv.z_alpha *= f,
            3 => { node.bending[0].omega *= f; node.omega_b1 = node.bending[0].omega; }
            4 => node.bending[0].slope_gyro *= f,
            _ => node.slosh[0].omega *= f,
        }
        let moved = assemble_plant(&node, PlantOptions::default()).unwrap();
        let grid = FrequencyGrid::log(0.01, 200.0, 50).unwrap();
        for &w in grid.omegas() {
            let (a, b) = (base.freq_response(w).unwrap(), moved.freq_response(w).unwrap());
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x.norm() - y.norm()).abs() <= 1e-4 * x.norm().max(1e-12));
            }
        }
    }

    #[test]
    fn slosh_mass_stays_below_propellant(ratio in 0.1f64..20.0, r in 0.2f64..3.0, m in 10.0f64..1e5, ax in 1.0f64..60.0) {
        let s = slosh_from_tank(ax, r, ratio * r, m, 0.001, 0.0).unwrap();
        prop_assert!(s.mass > 0.0 && s.mass < m);
    }

    #[test]
    fn decoupled_modes_decay(w in 1.0f64..300.0, z in 1e-4f64..0.5, ws in 1.0f64..20.0, zs in 1e-4f64..0.1) {
        let mut node = ReferenceVehicle::default().nodes()[5].clone();
        for b in &mut node.bending {
            b.shape_gimbal = 0.0;
            b.slope_gimbal = 0.0;
            b.shape_cp = 0.0;
            b.slope_cp = 0.0;
            b.shape_slosh.iter_mut().for_each(|v| *v = 0.0);
        }
        node.bending[0].omega = w;
        node.bending[0].zeta = z;
        node.omega_b1 = w;
        for s in &mut node.slosh {
            s.omega = ws;
            s.zeta = zs;
            s.mass = 1e-12;
        }
        let poles = assemble_plant(&node, PlantOptions::default()).unwrap().eigenvalues();
        let want = Complex64::new(-z * w, w * (1.0 - z * z).sqrt());
        let hit = poles.iter().map(|p| (p - want).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(hit < 1e-6 * w);
        let below = poles.iter().filter(|p| p.im > 0.5 && p.re < 0.0).count();
        prop_assert!(below >= node.bending.len() + node.slosh.len());
    }

    #[test]
    fn avionics_blocks_are_proper_with_unit_dc(
        fa in prop::array::uniform4(2.0f64..80.0),
        za in prop::array::uniform4(0.02f64..1.0),
        fg in 10.0f64..150.0,
        zg in 0.1f64..1.0,
        tau in 1e-3f64..0.05,
    ) {
        let p = AvionicsParams {
            actuator: ActuatorParams::from_hz(fa, za).unwrap(),
            gyro: GyroParams::from_hz(fg, zg).unwrap(),
            computer: FlightComputerParams { tau_d: tau, ..FlightComputerParams::ksr3() },
        };
        let b = p.blocks();
        for blk in [&b.actuator, &b.gyro, &b.vf, &b.delay, &b.dac_zoh] {
            prop_assert!(blk.is_proper());
            prop_assert!((blk.dc_gain().unwrap() - 1.0).abs() < 1e-12);
        }
        prop_assert!(b.actuator_accel.is_proper());
        prop_assert_eq!(b.actuator_accel.dc_gain().unwrap(), 0.0);
        for k in 0..=60 {
            let w = 0.01 * 10f64.powf(k as f64 / 10.0);
            prop_assert!((b.delay.freq_response(w).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_gains_place_the_roots(m_delta in 0.1f64..50.0, w in 0.5f64..20.0, z in 0.1f64..2.0) {
        let g = gains_from_rigid_specs(m_delta, RigidSpecs::new(w, z).unwrap()).unwrap();
        let roots = Polynomial::new(vec![m_delta * g.kp, m_delta * g.kd, 1.0]).unwrap().roots();
        let wn = (roots[0] * roots[1]).re.sqrt();
        let zeta = -(roots[0] + roots[1]).re / (2.0 * wn);
        prop_assert!((wn - w).abs() < 1e-10 * w.max(1.0));
        prop_assert!((zeta - z).abs() < 1e-10 * z.max(1.0));
    }

    #[test]
    fn filters_are_stable_minimum_phase_with_known_hf_gain(fp in filter_strategy()) {
        let tf = filter_tf(&fp);
        let hf = eval_tf(&tf, jw(1e12)).unwrap().norm();
        prop_assert!((filter_hf_gain(&fp) - hf).abs() <= 1e-6 * hf);
        prop_assert!((tf.dc_gain().unwrap() - 1.0).abs() < 1e-12);
        for r in tf.num().roots().iter().chain(tf.den().roots().iter()) {
            prop_assert!(r.re < 0.0, "{}", r);
        }
    }

    #[test]
    fn schedule_interpolation_is_continuous_and_monotone(
        kp in prop::collection::vec(0.1f64..5.0, 3),
        kd in prop::collection::vec(0.1f64..5.0, 3),
        t in 0.0f64..1.0,
    ) {
        let times = vec![5.0, 30.0, 55.0];
        let s = GainSchedule::new(times.clone(), kp.clone(), kd.clone()).unwrap();
        let t = 5.0 + 50.0 * t;
        let (a, b) = (interpolate_gains(&s, t), interpolate_gains(&s, t + 1e-9));
        prop_assert!((a.kp - b.kp).abs() < 1e-8 && (a.kd - b.kd).abs() < 1e-8);
        let seg = if t < 30.0 { 0 } else { 1 };
        let (lo, hi) = (kp[seg].min(kp[seg + 1]), kp[seg].max(kp[seg + 1]));
        prop_assert!(a.kp >= lo - 1e-12 && a.kp <= hi + 1e-12);
        let u = interpolate_gains(&s, (t + 0.5).min(times[seg + 1]));
        if kp[seg + 1] >= kp[seg] { prop_assert!(u.kp >= a.kp - 1e-12) } else { prop_assert!(u.kp <= a.kp + 1e-12) }
    }

    #[test]
    fn all_pass_keeps_magnitude_and_costs_phase_margin(tf in stable_tf(), tau in 0.01f64..0.5) {
        let integ = RationalTf::new(tf.num().clone(), tf.den().shift(1)).unwrap();
        let pade = RationalTf::from_coeffs(&[1.0, -tau / 2.0], &[1.0, tau / 2.0]).unwrap();
        let delayed = tf_multiply(&integ, &pade);
        let grid = FrequencyGrid::log(1e-3, 1e3, 100).unwrap();
        for &w in grid.omegas() {
            let (a, b) = (integ.response(w).unwrap().norm(), delayed.response(w).unwrap().norm());
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
        let (m0, m1) = (margins(&integ, &grid).unwrap(), margins(&delayed, &grid).unwrap());
        if let (Some(w0), Some(w1)) = (m0.pm_freq, m1.pm_freq) {
            prop_assert!((w0 - w1).abs() < 1e-6 * w0);
            let p0 = wrap_degrees(integ.response(w0).unwrap().arg().to_degrees() + 180.0);
            let p1 = wrap_degrees(delayed.response(w1).unwrap().arg().to_degrees() + 180.0);
            prop_assert!(p1 < p0);
        }
    }

    #[test]
    fn design_spec_round_trips(order in 2u8..=6, gm in 1.0f64..20.0, seed in any::<u64>(), window in 0.0f64..0.5) {
        let spec = DesignSpec { filter_order: order, gm_r_db: gm, seed, peak_window: window, ..DesignSpec::default() };
        let back: DesignSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        prop_assert_eq!(back, spec);
    }
}

/// Brute-force margins on an `n`-point log grid with linear interpolation.
fn dense_margins<L: OpenLoop>(l: &L, w0: f64, w1: f64, n: usize) -> (f64, f64) {
    let step = (w1 / w0).ln() / (n - 1) as f64;
    let (mut gm, mut pm) = (f64::INFINITY, f64::INFINITY);
    let mut prev = l.response(w0).unwrap();
    for k in 1..n {
        let cur = l.response(w0 * (step * k as f64).exp()).unwrap();
        let (ma, mb) = (to_db(prev.norm()), to_db(cur.norm()));
        if (ma < 0.0) != (mb < 0.0) {
            let f = ma / (ma - mb);
            pm = pm.min(wrap_degrees((prev + (cur - prev) * f).arg().to_degrees() + 180.0).abs());
        }
        if (prev.im < 0.0) != (cur.im < 0.0) && prev.re + cur.re < 0.0 {
            let f = prev.im / (prev.im - cur.im);
            gm = gm.min((ma + f * (mb - ma)).abs());
        }
        prev = cur;
    }
    (gm, pm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn margins_match_a_million_point_scan(tf in stable_tf(), gain in 0.3f64..30.0, integrators in 0usize..2) {
        let l = RationalTf::new(tf.num().scale(gain), tf.den().shift(integrators)).unwrap();
        let grid = FrequencyGrid::log(1e-3 / (2.0 * std::f64::consts::PI), 1e3 / (2.0 * std::f64::consts::PI), 200).unwrap();
        let r = margins(&l, &grid).unwrap();
        let (gm, pm) = dense_margins(&l, grid.first(), grid.last(), 1_000_000);
        prop_assert!((r.gm_db - gm).abs() <= 0.02 || (r.gm_db.is_infinite() && gm.is_infinite()), "{} vs {}", r.gm_db, gm);
        prop_assert!((r.pm_deg - pm).abs() <= 0.05 || (r.pm_deg.is_infinite() && pm.is_infinite()), "{} vs {}", r.pm_deg, pm);
        let pts = bode(&l, &grid).unwrap();
        for p in pts.windows(2) {
            prop_assert!((p[1].phase_deg - p[0].phase_deg).abs() < 90.0);
        }
    }
}
