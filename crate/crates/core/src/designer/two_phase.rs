use super::evaluate::{
    assess, build_caches, finalize, node_setups, resolve, Analyzer, DesignContext, Layout, Resolved,
};
use super::optimizer::{best_outcome, latin_hypercube, multi_start, seeded_rng, Evaluation};
use super::{DesignError, DesignMode, DesignResult, DesignSpec};
use crate::control::{
    gains_from_rigid_specs, param_kinds, rigid_specs_from_gains, structure, FilterParams, GainSchedule, ParamKind,
    RigidSpecs,
};

/// Straight-line least-squares fit `a + b t`.
fn line_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let b = sxy / sxx;
    (my - b * mt, b)
}

/// Phase 1: straight-line gain schedule fitted to the per-node rigid-spec
/// gains, scaled up uniformly until every check node meets the rigid-body
/// frequency and damping floor.
pub fn phase_one_schedule(ctx: &DesignContext, spec: &DesignSpec) -> Result<GainSchedule, DesignError> {
    let r = resolve(ctx, spec)?;
    phase_one(ctx, spec, &r)
}

fn phase_one(ctx: &DesignContext, spec: &DesignSpec, r: &Resolved) -> Result<GainSchedule, DesignError> {
    let rs = RigidSpecs::new(spec.omega_rb_min, spec.zeta_rb_min)?;
    let nodes: Vec<_> = r.check.iter().map(|&i| &ctx.nodes[i]).collect();
    let t: Vec<f64> = nodes.iter().map(|n| n.t).collect();
    let g = nodes
        .iter()
        .map(|n| gains_from_rigid_specs(n.deriv.m_delta, rs))
        .collect::<Result<Vec<_>, _>>()?;
    let (kp_fit, kd_fit) = if t.len() < 2 {
        ((g[0].kp, 0.0), (g[0].kd, 0.0))
    } else {
        (
            line_fit(&t, &g.iter().map(|p| p.kp).collect::<Vec<_>>()),
            line_fit(&t, &g.iter().map(|p| p.kd).collect::<Vec<_>>()),
        )
    };
    let kp = |t: f64| kp_fit.0 + kp_fit.1 * t;
    let kd = |t: f64| kd_fit.0 + kd_fit.1 * t;

    // omega_RB and zeta_RB both grow as sqrt(c) under k -> c k.
    let mut scale = 1.0f64;
    for n in &nodes {
        let (p, d) = (kp(n.t), kd(n.t));
        if !(p > 0.0 && d > 0.0) {
            return Err(DesignError::InfeasiblePhase1(format!(
                "fitted gains are not positive at t = {} s (k_p = {p}, k_D = {d})",
                n.t
            )));
        }
        let got = rigid_specs_from_gains(n.deriv.m_delta, p, d)?;
        scale = scale
            .max((spec.omega_rb_min / got.omega_rb).powi(2))
            .max((spec.zeta_rb_min / got.zeta_rb).powi(2));
    }
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let times = if t1 > t0 { vec![t0, t1] } else { vec![t0, t0 + 1.0] };
    Ok(GainSchedule::new(
        times.clone(),
        times.iter().map(|&x| scale * kp(x)).collect(),
        times.iter().map(|&x| scale * kd(x)).collect(),
    )?)
}

/// Starting filter for the filter-only search: notches spread over the
/// first-bending band, first-order pairs neutral at the band center.
pub fn heuristic_filter(order: u8, w1_min: f64, w1_max: f64, lb: &[f64], ub: &[f64]) -> Result<FilterParams, DesignError> {
    let (q, p) = structure(order)?;
    let span = w1_max / w1_min;
    let centers: Vec<f64> = (0..q)
        .map(|k| w1_min * span.powf((2 * k + 1) as f64 / (2 * q) as f64))
        .collect();
    let mid = (w1_min * w1_max).sqrt();
    let mut x = Vec::with_capacity(2 * (2 * q + p));
    x.extend(&centers);
    x.extend(std::iter::repeat(0.05).take(q));
    x.extend(std::iter::repeat(2.0 * mid).take(p));
    x.extend(&centers);
    x.extend(std::iter::repeat(0.25).take(q));
    x.extend(std::iter::repeat(2.0 * mid).take(p));
    for (v, (l, u)) in x.iter_mut().zip(lb.iter().zip(ub)) {
        *v = v.clamp(*l, *u);
    }
    Ok(FilterParams::new(order, x)?)
}

/// Frequency and damping for cancelling pairs: mid-box, so that the box
/// projection leaves them intact.
pub(crate) fn spare_factor(order: u8, lb: &[f64], ub: &[f64]) -> Result<(f64, f64), DesignError> {
    let kinds = param_kinds(order)?;
    let first = |k: ParamKind| kinds.iter().position(|&x| x == k);
    let omega = first(ParamKind::Frequency).map_or(1.0, |i| (lb[i] * ub[i]).sqrt());
    let zeta = first(ParamKind::Damping).map_or(0.5, |i| 0.5f64.clamp(lb[i], ub[i]));
    Ok((omega, zeta))
}

/// Sequential baseline: rigid-spec gain schedule first, then the filter
/// alone is optimized with the gains frozen.
pub fn two_phase_design(ctx: &DesignContext, spec: &DesignSpec) -> Result<DesignResult, DesignError> {
    two_phase_design_warm(ctx, spec, None)
}

/// [`two_phase_design`] with an extra start (start 1) at `warm`, a filter
/// of this or any nested lower order. A lower-order filter is embedded with
/// cancelling pole/zero pairs, so the search starts from its exact response.
pub fn two_phase_design_warm(
    ctx: &DesignContext,
    spec: &DesignSpec,
    warm: Option<&FilterParams>,
) -> Result<DesignResult, DesignError> {
    let r = resolve(ctx, spec)?;
    let sched = phase_one(ctx, spec, &r)?;
    let layout = Layout::new(ctx, spec, &r, sched.times.clone(), Some(sched.clone()))?;
    let setups = node_setups(ctx, &r.check)?;
    let caches = build_caches(&setups, &ctx.grid)?;

    let w1 = r.check.iter().map(|&i| ctx.nodes[i].bending[0].omega);
    let (w1_min, w1_max) = w1.fold((f64::INFINITY, 0.0f64), |(a, b), w| (a.min(w), b.max(w)));
    let first = heuristic_filter(spec.filter_order, w1_min, w1_max, &r.lb, &r.ub)?;
    let mut starts = vec![layout.encode(&sched, &first)?];
    if let Some(w) = warm {
        let (omega, zeta) = spare_factor(spec.filter_order, &r.lb, &r.ub)?;
        starts.push(layout.encode(&sched, &w.embedded(spec.filter_order, omega, zeta)?)?);
    }
    let mut rng = seeded_rng(spec.seed);
    let n_lhs = spec.optimizer.starts.saturating_sub(starts.len());
    starts.extend(latin_hypercube(n_lhs, layout.dims(), &mut rng).iter().map(|u| layout.from_unit(u)));

    let f = |v: &[f64]| -> Evaluation {
        let Ok((s, flt)) = layout.decode(v) else {
            return Evaluation::failed();
        };
        match assess(&setups, &Analyzer::Cached(&caches), spec, &r.lb, &r.ub, &s, &flt) {
            Ok(a) => a.evaluation(),
            Err(_) => Evaluation::failed(),
        }
    };
    let outcomes = multi_start(&f, &starts, &layout.bounds(), &spec.optimizer);
    let used = outcomes.iter().map(|o| o.evaluations).sum();
    let best = best_outcome(&outcomes).expect("at least one start");
    if !best.best.eval.is_feasible() {
        return Err(DesignError::NoFeasiblePoint {
            violation: best.best.eval.violation,
        });
    }
    let (s, flt) = layout.decode(&best.best.x)?;
    finalize(ctx, spec, &r, DesignMode::TwoPhase, s, flt, used)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_is_exact_on_lines() {
        let t = [5.0, 10.0, 20.0];
        let (a, b) = line_fit(&t, &[1.0 + 2.0 * 5.0, 1.0 + 2.0 * 10.0, 1.0 + 2.0 * 20.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heuristic_filter_has_unit_hf_gain() {
        for order in 2..=6 {
            let lb = vec![1e-3; crate::control::param_len(order).unwrap()];
            let ub = vec![1e6; lb.len()];
            let f = heuristic_filter(order, 50.0, 75.0, &lb, &ub).unwrap();
            assert!((f.hf_gain() - 1.0).abs() < 1e-12);
            assert!(f.freq_response(60.0).norm() < 1.0);
        }
    }
}
