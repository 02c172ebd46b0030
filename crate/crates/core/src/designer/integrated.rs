use super::evaluate::{
    assess, build_caches, finalize, gain_times, node_setups, resolve, Analyzer, DesignContext, Layout,
};
use super::optimizer::{best_outcome, latin_hypercube, multi_start, seeded_rng, Evaluation};
use super::two_phase::{spare_factor, two_phase_design};
use super::{DesignError, DesignMode, DesignResult, DesignSpec};

/// Joint optimization of the gain schedule and the filter, started from the
/// two-phase design (computed here) and seeded Latin-hypercube points.
pub fn integrated_design(ctx: &DesignContext, spec: &DesignSpec) -> Result<DesignResult, DesignError> {
    let baseline = two_phase_design(ctx, spec)?;
    integrated_design_warm(ctx, spec, &baseline, None)
}

/// Integrated design from a given two-phase result (start 0) and an optional
/// extra warm start (start 1), such as the Subcase 1 optimum for Subcase 2.
/// A warm start with a nested lower-order filter is embedded with
/// cancelling pole/zero pairs.
pub fn integrated_design_warm(
    ctx: &DesignContext,
    spec: &DesignSpec,
    two_phase: &DesignResult,
    warm: Option<&DesignResult>,
) -> Result<DesignResult, DesignError> {
    let r = resolve(ctx, spec)?;
    let times = gain_times(ctx, spec, &r.check);
    let layout = Layout::new(ctx, spec, &r, times, None)?;
    let setups = node_setups(ctx, &r.check)?;
    let caches = build_caches(&setups, &ctx.grid)?;

    let mut starts = vec![layout.encode(&two_phase.schedule, &two_phase.filter)?];
    if let Some(w) = warm {
        let (omega, zeta) = spare_factor(spec.filter_order, &r.lb, &r.ub)?;
        let filter = w.filter.embedded(spec.filter_order, omega, zeta)?;
        starts.push(layout.encode(&w.schedule, &filter)?);
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
    finalize(ctx, spec, &r, DesignMode::Integrated, s, flt, used)
}
