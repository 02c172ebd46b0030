use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DesignError, DesignMode, DesignResult, DesignSpec, Evaluation};
use crate::avionics::AvionicsBlocks;
use crate::control::{
    gains_from_rigid_specs, param_kinds, FilterParams, GainSchedule, ParamKind, PdGains, RigidSpecs,
};
use crate::lti::FrequencyGrid;
use crate::loop_analysis::{
    bending_peak, margins, AnalysisCache, LoopError, LoopFilter, LoopModel, MarginReport, PlantPath,
};
use crate::vehicle::{assemble_plant, FlightNode, PlantOptions};

/// Vehicle, avionics and analysis settings shared by every design run.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignContext {
    pub nodes: Vec<FlightNode>,
    pub blocks: AvionicsBlocks,
    pub plant: PlantOptions,
    pub grid: FrequencyGrid,
}

impl DesignContext {
    /// Default analysis grid: 0.01-200 Hz at 200 points per decade.
    pub fn new(nodes: Vec<FlightNode>, blocks: AvionicsBlocks) -> Self {
        Self {
            nodes,
            blocks,
            plant: PlantOptions::default(),
            grid: FrequencyGrid::log(0.01, 200.0, 200).expect("valid default grid"),
        }
    }

    fn m_delta_at(&self, t: f64) -> f64 {
        let n = &self.nodes;
        if t <= n[0].t {
            return n[0].deriv.m_delta;
        }
        for w in n.windows(2) {
            if t <= w[1].t {
                let a = (t - w[0].t) / (w[1].t - w[0].t);
                return w[0].deriv.m_delta + a * (w[1].deriv.m_delta - w[0].deriv.m_delta);
            }
        }
        n[n.len() - 1].deriv.m_delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    SecondBendingPeak,
    GainMargin,
    PhaseMargin,
    ClosedLoopStability,
    FilterHfGain,
    RigidFrequency,
    RigidDamping,
    GainNonnegative,
    FilterLowerBound,
    FilterUpperBound,
}

/// One normalized constraint residual; `value <= 0` means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResidual {
    pub kind: ConstraintKind,
    /// Check-node index, gain entry or filter entry the residual belongs to.
    pub index: usize,
    pub value: f64,
}

/// Spec with every default filled in against a context.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Resolved {
    pub check: Vec<usize>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

pub(crate) fn resolve(ctx: &DesignContext, spec: &DesignSpec) -> Result<Resolved, DesignError> {
    spec.validate()?;
    if ctx.nodes.is_empty() {
        return Err(DesignError::Spec("no flight nodes".into()));
    }
    let check = spec.check_nodes.clone().unwrap_or_else(|| (0..ctx.nodes.len()).collect());
    if check.iter().any(|&i| i >= ctx.nodes.len()) {
        return Err(DesignError::Spec(format!(
            "check node index out of range (have {} nodes)",
            ctx.nodes.len()
        )));
    }
    for &i in &check {
        let n = &ctx.nodes[i];
        n.validate()?;
        if n.bending.is_empty() {
            return Err(DesignError::MissingBendingMode { t: n.t });
        }
    }
    let (lb, ub) = match (&spec.x_lb, &spec.x_ub) {
        (Some(l), Some(u)) => (l.clone(), u.clone()),
        _ => default_bounds(ctx, &check, spec.filter_order)?,
    };
    if let Some(g) = &spec.gain_nodes {
        let (t0, t1) = (ctx.nodes[0].t, ctx.nodes[ctx.nodes.len() - 1].t);
        if g.iter().any(|&t| t < t0 || t > t1) {
            return Err(DesignError::Spec("gain_nodes must lie within the flight span".into()));
        }
    }
    Ok(Resolved { check, lb, ub })
}

fn default_bounds(ctx: &DesignContext, check: &[usize], order: u8) -> Result<(Vec<f64>, Vec<f64>), DesignError> {
    let w1 = check.iter().map(|&i| ctx.nodes[i].bending[0].omega).fold(f64::INFINITY, f64::min);
    let w_top = check
        .iter()
        .map(|&i| ctx.nodes[i].bending.iter().take(3).map(|b| b.omega).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let kinds = param_kinds(order)?;
    let lb = kinds
        .iter()
        .map(|k| match k {
            ParamKind::Frequency => 0.5 * w1,
            ParamKind::Damping => 0.02,
        })
        .collect();
    let ub = kinds
        .iter()
        .map(|k| match k {
            ParamKind::Frequency => 3.0 * w_top,
            ParamKind::Damping => 1.0,
        })
        .collect();
    Ok((lb, ub))
}

/// Gain-schedule node times for a subcase: first and last check node, or
/// every check node.
pub(crate) fn gain_times(ctx: &DesignContext, spec: &DesignSpec, check: &[usize]) -> Vec<f64> {
    if let Some(g) = &spec.gain_nodes {
        return g.clone();
    }
    let times: Vec<f64> = check.iter().map(|&i| ctx.nodes[i].t).collect();
    if spec.subcase == 1 || times.len() < 2 {
        vec![times[0], times[times.len() - 1]]
    } else {
        times
    }
}

/// Plant path and frozen data of one check node.
#[derive(Debug, Clone)]
pub(crate) struct NodeSetup {
    pub index: usize,
    pub t: f64,
    pub m_delta: f64,
    pub path: Arc<PlantPath>,
    pub omega_b1: f64,
    pub omega_b2: Option<f64>,
}

pub(crate) fn node_setups(ctx: &DesignContext, check: &[usize]) -> Result<Vec<NodeSetup>, DesignError> {
    check
        .par_iter()
        .map(|&i| {
            let n = &ctx.nodes[i];
            let plant = assemble_plant(n, ctx.plant)?;
            Ok(NodeSetup {
                index: i,
                t: n.t,
                m_delta: n.deriv.m_delta,
                path: Arc::new(PlantPath::new(plant, ctx.blocks.clone())?),
                omega_b1: n.bending[0].omega,
                omega_b2: n.omega_b2(),
            })
        })
        .collect()
}

pub(crate) enum Analyzer<'a> {
    Fresh(&'a FrequencyGrid),
    Cached(&'a [AnalysisCache]),
}

pub(crate) fn build_caches(setups: &[NodeSetup], grid: &FrequencyGrid) -> Result<Vec<AnalysisCache>, DesignError> {
    setups
        .par_iter()
        .map(|s| Ok(AnalysisCache::new(&s.path, grid, Some(s.omega_b1), s.omega_b2)?))
        .collect()
}

/// Objective, residuals and per-node reports of one candidate.
#[derive(Debug, Clone)]
pub(crate) struct Assessment {
    pub objective: f64,
    pub residuals: Vec<ConstraintResidual>,
    pub reports: Vec<MarginReport>,
}

impl Assessment {
    pub fn evaluation(&self) -> Evaluation {
        Evaluation::new(self.objective, self.residuals.iter().map(|r| r.value))
    }

    pub fn violation(&self) -> f64 {
        self.evaluation().violation
    }
}

fn loop_at(s: &NodeSetup, g: PdGains, filter: &FilterParams) -> Result<LoopModel, LoopError> {
    let mut m = LoopModel::from_path(Arc::clone(&s.path), g.kp, g.kd, LoopFilter::Params(filter.clone()))?;
    m.omega_b1 = Some(s.omega_b1);
    m.omega_b2 = s.omega_b2;
    Ok(m)
}

fn ratio(excess: f64, scale: f64) -> f64 {
    excess / if scale == 0.0 { 1.0 } else { scale.abs() }
}

/// Margin residual `(required - actual) / required`; no crossover counts as
/// a full requirement of slack.
fn margin_residual(required: f64, actual: f64) -> f64 {
    if actual.is_finite() {
        (required - actual) / required
    } else if actual > 0.0 {
        -1.0
    } else {
        f64::INFINITY
    }
}

fn rigid_residuals(spec: &DesignSpec, m_delta: f64, g: PdGains) -> (f64, f64) {
    let omega = (m_delta * g.kp).sqrt();
    let zeta = if g.kp > 0.0 { 0.5 * g.kd * (m_delta / g.kp).sqrt() } else { f64::INFINITY };
    (
        (spec.omega_rb_min - omega) / spec.omega_rb_min,
        (spec.zeta_rb_min - zeta) / spec.zeta_rb_min,
    )
}

type NodeOutcome = (f64, Vec<ConstraintResidual>, MarginReport);

fn analyze_node(
    s: &NodeSetup,
    analyzer: &Analyzer<'_>,
    k: usize,
    spec: &DesignSpec,
    sched: &GainSchedule,
    filter: &FilterParams,
) -> Result<NodeOutcome, LoopError> {
    let g = sched.interpolate(s.t);
    let m = loop_at(s, g, filter)?;
    let rep = match analyzer {
        Analyzer::Fresh(grid) => margins(&m, grid)?,
        Analyzer::Cached(c) => c[k].margins(&m)?,
    };
    let peak1 = if spec.peak_window == 0.0 {
        rep.peak1_db.expect("bending frequency is set")
    } else {
        bending_peak(&m, s.omega_b1, spec.peak_window)?
    };
    let mut res = Vec::with_capacity(6);
    let mut push = |kind, value| {
        res.push(ConstraintResidual {
            kind,
            index: s.index,
            value,
        })
    };
    if let Some(p2) = rep.peak2_db {
        push(ConstraintKind::SecondBendingPeak, ratio(p2 - spec.p2_ul_db, spec.p2_ul_db));
    }
    push(ConstraintKind::GainMargin, margin_residual(spec.gm_r_db, rep.gm_db));
    push(ConstraintKind::PhaseMargin, margin_residual(spec.pm_r_deg, rep.pm_deg));
    push(ConstraintKind::ClosedLoopStability, if rep.stable_closed_loop { 0.0 } else { 1.0 });
    let (rw, rz) = rigid_residuals(spec, s.m_delta, g);
    push(ConstraintKind::RigidFrequency, rw);
    push(ConstraintKind::RigidDamping, rz);
    Ok((peak1, res, rep))
}

pub(crate) fn assess(
    setups: &[NodeSetup],
    analyzer: &Analyzer<'_>,
    spec: &DesignSpec,
    lb: &[f64],
    ub: &[f64],
    sched: &GainSchedule,
    filter: &FilterParams,
) -> Result<Assessment, LoopError> {
    let mut residuals = Vec::with_capacity(6 * setups.len() + 3 * lb.len());
    let mut reports = Vec::with_capacity(setups.len());
    let mut worst = f64::NEG_INFINITY;
    for (k, s) in setups.iter().enumerate() {
        let (peak1, res, rep) = analyze_node(s, analyzer, k, spec, sched, filter)?;
        worst = worst.max(peak1);
        residuals.extend(res);
        reports.push(rep);
    }
    static_residuals(&mut residuals, spec, lb, ub, sched, filter);
    Ok(Assessment {
        objective: worst,
        residuals,
        reports,
    })
}

fn static_residuals(
    res: &mut Vec<ConstraintResidual>,
    spec: &DesignSpec,
    lb: &[f64],
    ub: &[f64],
    sched: &GainSchedule,
    filter: &FilterParams,
) {
    res.push(ConstraintResidual {
        kind: ConstraintKind::FilterHfGain,
        index: 0,
        value: (filter.hf_gain() - spec.p_f) / spec.p_f,
    });
    for (j, k) in sched.kp_values.iter().chain(&sched.kd_values).enumerate() {
        res.push(ConstraintResidual {
            kind: ConstraintKind::GainNonnegative,
            index: j,
            value: -k,
        });
    }
    for (j, x) in filter.x.iter().enumerate() {
        res.push(ConstraintResidual {
            kind: ConstraintKind::FilterLowerBound,
            index: j,
            value: (lb[j] - x) / lb[j],
        });
        res.push(ConstraintResidual {
            kind: ConstraintKind::FilterUpperBound,
            index: j,
            value: (x - ub[j]) / ub[j],
        });
    }
}

/// Worst first-bending peak over the check nodes, dB, from freshly
/// assembled plants; `+inf` when any node cannot be analyzed.
pub fn objective(sched: &GainSchedule, filter: &FilterParams, ctx: &DesignContext, spec: &DesignSpec) -> f64 {
    let run = || -> Result<f64, DesignError> {
        let r = resolve(ctx, spec)?;
        let setups = node_setups(ctx, &r.check)?;
        let mut worst = f64::NEG_INFINITY;
        for s in &setups {
            let m = loop_at(s, sched.interpolate(s.t), filter)?;
            worst = worst.max(bending_peak(&m, s.omega_b1, spec.peak_window)?);
        }
        Ok(worst)
    };
    run().unwrap_or(f64::INFINITY)
}

/// Every normalized constraint residual of a candidate, from freshly
/// assembled plants. Nodes that cannot be analyzed get `+inf` margin and
/// stability residuals.
pub fn constraint_residuals(
    sched: &GainSchedule,
    filter: &FilterParams,
    ctx: &DesignContext,
    spec: &DesignSpec,
) -> Result<Vec<ConstraintResidual>, DesignError> {
    let r = resolve(ctx, spec)?;
    let setups = node_setups(ctx, &r.check)?;
    let mut out = Vec::new();
    for s in &setups {
        match analyze_node(s, &Analyzer::Fresh(&ctx.grid), 0, spec, sched, filter) {
            Ok((_, res, _)) => out.extend(res),
            Err(_) => {
                for kind in [
                    ConstraintKind::GainMargin,
                    ConstraintKind::PhaseMargin,
                    ConstraintKind::ClosedLoopStability,
                ] {
                    out.push(ConstraintResidual {
                        kind,
                        index: s.index,
                        value: f64::INFINITY,
                    });
                }
            }
        }
    }
    static_residuals(&mut out, spec, &r.lb, &r.ub, sched, filter);
    Ok(out)
}

/// Maps the optimizer's normalized vector to a schedule and a filter.
///
/// Gains are `k = k_ref exp(y)` around the rigid-spec gains at each
/// schedule node; filter entries are `u` in `[0, 1]` on a log scale
/// between their bounds.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub order: u8,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub times: Vec<f64>,
    pub kp_ref: Vec<f64>,
    pub kd_ref: Vec<f64>,
    /// Gains held fixed instead of optimized.
    pub frozen: Option<GainSchedule>,
}

/// Gain box of the Latin-hypercube starts, as multiples of the rigid-spec gains.
pub(crate) const GAIN_BOX: (f64, f64) = (0.3, 1.5);
/// Projection box of the log-gain variables.
const LOG_GAIN_LIMIT: f64 = 7.0;

impl Layout {
    pub fn new(
        ctx: &DesignContext,
        spec: &DesignSpec,
        r: &Resolved,
        times: Vec<f64>,
        frozen: Option<GainSchedule>,
    ) -> Result<Self, DesignError> {
        let rs = RigidSpecs::new(spec.omega_rb_min, spec.zeta_rb_min)?;
        let refs: Vec<PdGains> = times
            .iter()
            .map(|&t| gains_from_rigid_specs(ctx.m_delta_at(t), rs))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            order: spec.filter_order,
            lb: r.lb.clone(),
            ub: r.ub.clone(),
            kp_ref: refs.iter().map(|g| g.kp).collect(),
            kd_ref: refs.iter().map(|g| g.kd).collect(),
            times,
            frozen,
        })
    }

    fn gain_dims(&self) -> usize {
        if self.frozen.is_some() {
            0
        } else {
            2 * self.times.len()
        }
    }

    pub fn dims(&self) -> usize {
        self.gain_dims() + self.lb.len()
    }

    pub fn bounds(&self) -> super::optimizer::Bounds {
        let g = self.gain_dims();
        let mut lo = vec![-LOG_GAIN_LIMIT; g];
        let mut hi = vec![LOG_GAIN_LIMIT; g];
        lo.extend(std::iter::repeat(0.0).take(self.lb.len()));
        hi.extend(std::iter::repeat(1.0).take(self.lb.len()));
        super::optimizer::Bounds { lo, hi }
    }

    /// Latin-hypercube cell in `[0, 1]^dims` mapped onto the start box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        let g = self.gain_dims();
        let (a, b) = (GAIN_BOX.0.ln(), GAIN_BOX.1.ln());
        u.iter()
            .enumerate()
            .map(|(k, v)| if k < g { a + v * (b - a) } else { *v })
            .collect()
    }

    pub fn decode(&self, v: &[f64]) -> Result<(GainSchedule, FilterParams), DesignError> {
        let g = self.gain_dims();
        let sched = match &self.frozen {
            Some(s) => s.clone(),
            None => {
                let r = self.times.len();
                let kp = (0..r).map(|j| self.kp_ref[j] * v[j].exp()).collect();
                let kd = (0..r).map(|j| self.kd_ref[j] * v[r + j].exp()).collect();
                GainSchedule::new(self.times.clone(), kp, kd)?
            }
        };
        let x = v[g..]
            .iter()
            .zip(self.lb.iter().zip(&self.ub))
            .map(|(u, (l, h))| (l.ln() + u.clamp(0.0, 1.0) * (h.ln() - l.ln())).exp().clamp(*l, *h))
            .collect();
        Ok((sched, FilterParams::new(self.order, x)?))
    }

    pub fn encode(&self, sched: &GainSchedule, filter: &FilterParams) -> Result<Vec<f64>, DesignError> {
        if filter.order != self.order {
            return Err(DesignError::Spec(format!(
                "warm start has a filter of order {} (need {})",
                filter.order, self.order
            )));
        }
        let mut v = Vec::with_capacity(self.dims());
        if self.frozen.is_none() {
            let s = sched.resampled(&self.times)?;
            let y = |k: f64, r: f64| (k.max(1e-300) / r).ln().clamp(-LOG_GAIN_LIMIT, LOG_GAIN_LIMIT);
            v.extend(s.kp_values.iter().zip(&self.kp_ref).map(|(k, r)| y(*k, *r)));
            v.extend(s.kd_values.iter().zip(&self.kd_ref).map(|(k, r)| y(*k, *r)));
        }
        v.extend(
            filter
                .x
                .iter()
                .zip(self.lb.iter().zip(&self.ub))
                .map(|(x, (l, h))| ((x.ln() - l.ln()) / (h.ln() - l.ln())).clamp(0.0, 1.0)),
        );
        Ok(v)
    }
}

/// Re-analyzes a candidate from scratch and packages it.
pub(crate) fn finalize(
    ctx: &DesignContext,
    spec: &DesignSpec,
    r: &Resolved,
    mode: DesignMode,
    sched: GainSchedule,
    filter: FilterParams,
    iterations: usize,
) -> Result<DesignResult, DesignError> {
    let setups = node_setups(ctx, &r.check)?;
    let a = assess(&setups, &Analyzer::Fresh(&ctx.grid), spec, &r.lb, &r.ub, &sched, &filter)?;
    let violation = a.violation();
    Ok(DesignResult {
        mode,
        subcase: (mode == DesignMode::Integrated).then_some(spec.subcase),
        filter_order: spec.filter_order,
        seed: spec.seed,
        schedule: sched,
        filter,
        objective_db: a.objective,
        check_nodes: r.check.clone(),
        node_reports: a.reports,
        feasible: violation <= super::FEASIBILITY_TOL,
        iterations,
        constraint_violation: violation,
    })
}
