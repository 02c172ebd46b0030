use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest constraint residual still counted as satisfied.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Objective value and constraint violation of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    /// `max(0, max residual)`.
    pub violation: f64,
    /// `sum max(0, residual)^2`.
    pub squared: f64,
}

impl Evaluation {
    pub fn new(objective: f64, residuals: impl IntoIterator<Item = f64>) -> Self {
        let mut violation = 0.0f64;
        let mut squared = 0.0;
        for r in residuals {
            let r = if r.is_nan() { f64::INFINITY } else { r };
            let v = r.max(0.0);
            violation = violation.max(v);
            squared += v * v;
        }
        if objective.is_nan() {
            return Self::failed();
        }
        Self {
            objective,
            violation,
            squared,
        }
    }

    /// A candidate that could not be analyzed.
    pub fn failed() -> Self {
        Self {
            objective: f64::INFINITY,
            violation: f64::INFINITY,
            squared: f64::INFINITY,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation <= FEASIBILITY_TOL && self.objective.is_finite()
    }

    /// Exterior quadratic penalty `objective + mu * sum max(0, r)^2`.
    pub fn penalized(&self, mu: f64) -> f64 {
        let p = self.objective + mu * self.squared;
        if p.is_nan() {
            f64::INFINITY
        } else {
            p
        }
    }

    /// Incumbent order: smaller violation first (anything within tolerance
    /// counts as zero), then smaller objective.
    /// Violation with anything inside the feasibility tolerance set to 0.
    pub fn clipped_violation(&self) -> f64 {
        if self.violation <= FEASIBILITY_TOL { 0.0 } else { self.violation }
    }

    pub fn better_than(&self, other: &Self) -> bool {
        let (va, vb) = (self.clipped_violation(), other.clipped_violation());
        if va != vb {
            return va < vb;
        }
        self.objective < other.objective
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// Number of multi-start points.
    pub starts: usize,
    /// Evaluation budget of each start across all penalty levels.
    pub max_evals_per_start: usize,
    /// Number of best starts continued after the first pass.
    pub polish_starts: usize,
    /// Evaluation budget of each continued start.
    pub polish_evals: usize,
    /// First penalty weight of the continuation.
    pub polish_mu_initial: f64,
    /// Initial simplex edge of the polish stage, normalized.
    pub polish_step: f64,
    pub mu_initial: f64,
    pub mu_final: f64,
    pub mu_factor: f64,
    /// Initial simplex edge in the normalized variables.
    pub initial_step: f64,
    /// Simplex restarts per penalty level after convergence.
    pub max_restarts: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 16,
            max_evals_per_start: 300,
            polish_starts: 4,
            polish_evals: 2400,
            polish_mu_initial: 1e4,
            polish_step: 0.005,
            mu_initial: 1e2,
            mu_final: 1e8,
            mu_factor: 10.0,
            initial_step: 0.05,
            max_restarts: 2,
            x_tol: 1e-7,
            f_tol: 1e-10,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<(), String> {
        if self.starts == 0 || self.max_evals_per_start == 0 {
            return Err("optimizer needs at least one start and one evaluation".into());
        }
        if !(self.polish_mu_initial > 0.0 && self.polish_mu_initial <= self.mu_final) {
            return Err("polish_mu_initial must lie in (0, mu_final]".into());
        }
        if !(self.mu_initial > 0.0 && self.mu_final >= self.mu_initial && self.mu_factor > 1.0) {
            return Err("penalty schedule needs 0 < mu_initial <= mu_final and mu_factor > 1".into());
        }
        if !(self.initial_step > 0.0 && self.polish_step > 0.0 && self.x_tol > 0.0 && self.f_tol >= 0.0) {
            return Err("simplex step and tolerances must be positive".into());
        }
        Ok(())
    }

    pub fn penalty_levels(&self) -> Vec<f64> {
        self.levels_from(self.mu_initial)
    }

    fn levels_from(&self, first: f64) -> Vec<f64> {
        let mut out = vec![first];
        let mut mu = first;
        while mu * (1.0 + 1e-12) < self.mu_final {
            mu = (mu * self.mu_factor).min(self.mu_final);
            out.push(mu);
        }
        out
    }
}

/// Box used to project trial points; infinite entries leave a coordinate free.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    fn project(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// Result of one start.
#[derive(Debug, Clone)]
pub struct StartOutcome {
    /// Best point under [`Evaluation::better_than`] among everything evaluated.
    pub best: Point,
    pub evaluations: usize,
    /// Clipped violation of the incumbent at the end of each penalty level.
    pub violation_history: Vec<f64>,
}

/// Counts evaluations and keeps the incumbent.
struct Tracker<'a, F> {
    f: &'a F,
    bounds: &'a Bounds,
    used: usize,
    best: Option<Point>,
}

impl<F: Fn(&[f64]) -> Evaluation> Tracker<'_, F> {
    fn eval(&mut self, x: &mut Vec<f64>) -> Evaluation {
        self.bounds.project(x);
        let e = (self.f)(x);
        self.used += 1;
        if self.best.as_ref().is_none_or(|b| e.better_than(&b.eval)) {
            self.best = Some(Point { x: x.clone(), eval: e });
        }
        e
    }
}

fn score(e: &Evaluation, mu: f64) -> f64 {
    e.penalized(mu)
}

/// Adaptive Nelder-Mead on `penalized(mu)` from a given start, stopping on
/// convergence or when `budget` evaluations are spent.
fn nelder_mead<F: Fn(&[f64]) -> Evaluation>(
    tr: &mut Tracker<'_, F>,
    start: &Point,
    mu: f64,
    step: f64,
    budget: usize,
    s: &OptimizerSettings,
) -> Point {
    let n = start.x.len();
    let limit = tr.used + budget;
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, Evaluation)> = vec![(start.x.clone(), start.eval)];
    for i in 0..n {
        if tr.used >= limit {
            break;
        }
        let mut x = start.x.clone();
        x[i] += step;
        // Keep the initial edge inside the box when the start sits on its top.
        if x[i] > tr.bounds.hi[i] {
            x[i] = start.x[i] - step;
        }
        let e = tr.eval(&mut x);
        simplex.push((x, e));
    }
    if simplex.len() < n + 1 {
        return best_vertex(&simplex, mu);
    }

    loop {
        simplex.sort_by(|a, b| score(&a.1, mu).total_cmp(&score(&b.1, mu)));
        let f_best = score(&simplex[0].1, mu);
        let f_worst = score(&simplex[n].1, mu);
        let spread = if f_worst.is_finite() { f_worst - f_best } else { f64::INFINITY };
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if tr.used >= limit || (spread <= s.f_tol * (1.0 + f_best.abs()) && size <= s.x_tol) || size == 0.0 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64, towards: &[f64]| -> Vec<f64> {
            centroid.iter().zip(towards).map(|(c, w)| c + t * (w - c)).collect()
        };
        let worst = simplex[n].0.clone();
        let f_second = score(&simplex[n - 1].1, mu);

        let mut xr = along(-alpha, &worst);
        let er = tr.eval(&mut xr);
        let fr = score(&er, mu);
        if fr < f_best {
            let mut xe = along(beta, &xr);
            let ee = tr.eval(&mut xe);
            simplex[n] = if score(&ee, mu) < fr { (xe, ee) } else { (xr, er) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, er);
            continue;
        }
        let accepted = if fr < f_worst {
            let mut xc = along(gamma, &xr);
            let ec = tr.eval(&mut xc);
            (score(&ec, mu) <= fr).then_some((xc, ec))
        } else {
            let mut xc = along(gamma, &worst);
            let ec = tr.eval(&mut xc);
            (score(&ec, mu) < f_worst).then_some((xc, ec))
        };
        if let Some(v) = accepted {
            simplex[n] = v;
            continue;
        }
        let x0 = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if tr.used >= limit {
                break;
            }
            let mut x: Vec<f64> = x0.iter().zip(&v.0).map(|(a, b)| a + delta * (b - a)).collect();
            let e = tr.eval(&mut x);
            *v = (x, e);
        }
    }
    best_vertex(&simplex, mu)
}

fn best_vertex(simplex: &[(Vec<f64>, Evaluation)], mu: f64) -> Point {
    let mut best = &simplex[0];
    for v in &simplex[1..] {
        if score(&v.1, mu) < score(&best.1, mu) {
            best = v;
        }
    }
    Point {
        x: best.0.clone(),
        eval: best.1,
    }
}

/// Penalty continuation from one start: for each `mu` level, Nelder-Mead
/// with restarts from the current best point of the penalized function.
pub fn penalty_solve<F>(f: &F, x0: &[f64], bounds: &Bounds, s: &OptimizerSettings) -> StartOutcome
where
    F: Fn(&[f64]) -> Evaluation,
{
    continuation(f, x0, bounds, s, s.initial_step, &s.penalty_levels(), s.max_evals_per_start)
}

fn continuation<F>(
    f: &F,
    x0: &[f64],
    bounds: &Bounds,
    s: &OptimizerSettings,
    step: f64,
    levels: &[f64],
    evals: usize,
) -> StartOutcome
where
    F: Fn(&[f64]) -> Evaluation,
{
    let mut tr = Tracker {
        f,
        bounds,
        used: 0,
        best: None,
    };
    let mut x = x0.to_vec();
    let e = tr.eval(&mut x);
    let mut current = Point { x, eval: e };
    let mut history = Vec::with_capacity(levels.len());
    for (k, &mu) in levels.iter().enumerate() {
        let remaining = evals.saturating_sub(tr.used);
        let budget = remaining / (levels.len() - k);
        let stop = tr.used + budget;
        // The penalized minimum moves as mu grows; restart from it.
        let mut restarts = 0;
        while tr.used < stop {
            let before = current.eval.penalized(mu);
            let room = stop - tr.used;
            let next = nelder_mead(&mut tr, &current, mu, step, room, s);
            let improved = next.eval.penalized(mu) < before - s.f_tol * (1.0 + before.abs());
            if next.eval.penalized(mu) <= before {
                current = next;
            }
            if !improved || restarts >= s.max_restarts {
                break;
            }
            restarts += 1;
        }
        history.push(tr.best.as_ref().map_or(f64::INFINITY, |b| b.eval.clipped_violation()));
    }
    StartOutcome {
        best: tr.best.expect("at least one evaluation"),
        evaluations: tr.used,
        violation_history: history,
    }
}

/// `count` Latin-hypercube points in `[0, 1]^dims`.
pub fn latin_hypercube(count: usize, dims: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dims]; count];
    for d in 0..dims {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        for (p, k) in pts.iter_mut().zip(strata) {
            p[d] = (k as f64 + rng.gen::<f64>()) / count as f64;
        }
    }
    pts
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs every start (in parallel), then continues the `polish_starts` best
/// incumbents over the upper penalty levels with a smaller simplex. Outcomes are in start order;
/// a continued start reports the better of its two incumbents and the
/// evaluations of both passes.
pub fn multi_start<F>(f: &F, starts: &[Vec<f64>], bounds: &Bounds, s: &OptimizerSettings) -> Vec<StartOutcome>
where
    F: Fn(&[f64]) -> Evaluation + Sync,
{
    let mut outcomes: Vec<StartOutcome> = starts.par_iter().map(|x0| penalty_solve(f, x0, bounds, s)).collect();
    if s.polish_starts == 0 || s.polish_evals == 0 {
        return outcomes;
    }
    let mut rank: Vec<usize> = (0..outcomes.len()).collect();
    // Stable sort keeps the earlier start first on ties.
    rank.sort_by(|&a, &b| {
        let (ea, eb) = (&outcomes[a].best.eval, &outcomes[b].best.eval);
        if ea.better_than(eb) {
            std::cmp::Ordering::Less
        } else if eb.better_than(ea) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    rank.truncate(s.polish_starts);
    let levels = s.levels_from(s.polish_mu_initial);
    let polished: Vec<(usize, StartOutcome)> = rank
        .par_iter()
        .map(|&i| (i, continuation(f, &outcomes[i].best.x, bounds, s, s.polish_step, &levels, s.polish_evals)))
        .collect();
    for (i, p) in polished {
        let o = &mut outcomes[i];
        o.evaluations += p.evaluations;
        if p.best.eval.better_than(&o.best.eval) {
            o.best = p.best;
        }
        // The continuation starts at this incumbent, so the history stays monotone.
        o.violation_history.extend(p.violation_history);
    }
    outcomes
}

/// Best outcome in start order; ties keep the earlier start.
pub fn best_outcome(outcomes: &[StartOutcome]) -> Option<&StartOutcome> {
    let mut best: Option<&StartOutcome> = None;
    for o in outcomes {
        if best.is_none_or(|b| o.best.eval.better_than(&b.best.eval)) {
            best = Some(o);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constrained(x: &[f64]) -> Evaluation {
        let obj = (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2);
        Evaluation::new(obj, [x[0] + x[1] - 1.0])
    }

    #[test]
    fn penalty_reaches_kkt_point() {
        let s = OptimizerSettings {
            max_evals_per_start: 4000,
            ..Default::default()
        };
        let out = penalty_solve(&constrained, &[0.0, 0.0], &Bounds::unbounded(2), &s);
        let x = &out.best.x;
        assert!((x[0] - 2.5).abs() < 1e-4 && (x[1] + 1.5).abs() < 1e-4, "{x:?}");
        assert!(out.best.eval.is_feasible());
    }

    #[test]
    fn incumbent_violation_never_grows() {
        let s = OptimizerSettings {
            max_evals_per_start: 2000,
            ..Default::default()
        };
        let out = penalty_solve(&constrained, &[5.0, 5.0], &Bounds::unbounded(2), &s);
        assert!(out.violation_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn unconstrained_rosenbrock() {
        let f = |x: &[f64]| Evaluation::new((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), []);
        let s = OptimizerSettings {
            max_evals_per_start: 6000,
            initial_step: 0.5,
            max_restarts: 10,
            ..Default::default()
        };
        let out = penalty_solve(&f, &[-1.2, 1.0], &Bounds::unbounded(2), &s);
        assert!(out.best.eval.objective < 1e-10, "{:?}", out.best);
    }

    #[test]
    fn projection_keeps_points_in_box() {
        let f = |x: &[f64]| {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            Evaluation::new(-(x[0] + x[1]), [])
        };
        let b = Bounds {
            lo: vec![0.0; 2],
            hi: vec![1.0; 2],
        };
        let out = penalty_solve(&f, &[0.5, 0.5], &b, &OptimizerSettings::default());
        assert_eq!(out.best.x, vec![1.0, 1.0]);
    }

    #[test]
    fn latin_hypercube_strata() {
        let pts = latin_hypercube(16, 3, &mut seeded_rng(7));
        for d in 0..3 {
            let mut cells: Vec<usize> = pts.iter().map(|p| (p[d] * 16.0) as usize).collect();
            cells.sort();
            assert_eq!(cells, (0..16).collect::<Vec<_>>());
        }
        assert_eq!(pts, latin_hypercube(16, 3, &mut seeded_rng(7)));
    }

    #[test]
    fn multi_start_is_ordered_and_deterministic() {
        let starts = vec![vec![4.0, 0.0], vec![0.0, -4.0], vec![1.0, 1.0]];
        let s = OptimizerSettings {
            max_evals_per_start: 800,
            ..Default::default()
        };
        let b = Bounds::unbounded(2);
        let a = multi_start(&constrained, &starts, &b, &s);
        let c = multi_start(&constrained, &starts, &b, &s);
        for (p, q) in a.iter().zip(&c) {
            assert_eq!(p.best, q.best);
        }
        assert!(best_outcome(&a).unwrap().best.eval.is_feasible());
    }

    #[test]
    fn failed_points_rank_last() {
        let ok = Evaluation::new(10.0, [0.5]);
        assert!(ok.better_than(&Evaluation::failed()));
        assert!(!Evaluation::failed().better_than(&ok));
        assert_eq!(Evaluation::new(f64::NAN, []).penalized(1.0), f64::INFINITY);
    }
}
