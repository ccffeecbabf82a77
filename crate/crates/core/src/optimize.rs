//! Random search over dodecahedron parameters for a larger range of motion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{build_dodecahedron, DodecParams};
use crate::flex::{embedded_segment, range_from_trajectory, continue_flex, FlexOptions, RangeMetric};
use crate::geom::Tolerance;
use crate::mesh::min_clearance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub feasible: bool,
    /// Range of motion under `metric`; zero when infeasible.
    pub range: f64,
    pub metric: RangeMetric,
    /// Smallest distance between non-adjacent faces at the reference.
    pub min_clearance: f64,
    /// Smallest triangle quality over the embedded part of the flex.
    pub min_triangle_quality: f64,
    pub samples: usize,
    /// Stage that failed, when infeasible.
    pub stage: Option<String>,
    pub message: Option<String>,
}

impl EvalResult {
    fn failed(metric: RangeMetric, stage: &str, message: String) -> Self {
        EvalResult {
            feasible: false,
            range: 0.0,
            metric,
            min_clearance: 0.0,
            min_triangle_quality: 0.0,
            samples: 0,
            stage: Some(stage.to_string()),
            message: Some(message),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub metric: RangeMetric,
    pub flex: FlexOptions,
    pub tol: Tolerance,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { metric: RangeMetric::default(), flex: FlexOptions::default(), tol: Tolerance::default() }
    }
}

pub fn evaluate(params: &DodecParams) -> EvalResult {
    evaluate_with(params, &EvalOptions::default())
}

/// Build, trace and measure. Never fails; errors become `feasible = false`.
pub fn evaluate_with(params: &DodecParams, opts: &EvalOptions) -> EvalResult {
    let d = match build_dodecahedron(params, &opts.tol) {
        Ok(d) => d,
        Err(e) => return EvalResult::failed(opts.metric, e.stage(), e.to_string()),
    };
    let traj = match continue_flex(&d.mesh, &d.config, &opts.flex) {
        Ok(t) => t,
        Err(e) => return EvalResult::failed(opts.metric, "flex", e.to_string()),
    };
    let report = range_from_trajectory(&traj, opts.metric, opts.flex.quality_floor);
    let seg = embedded_segment(&traj, opts.flex.quality_floor);
    let quality = traj.samples[seg].iter().map(|s| s.min_quality).fold(f64::INFINITY, f64::min);
    let clearance = min_clearance(&d.mesh, &d.config).unwrap_or(0.0);
    if !(report.value > 0.0) {
        let mut r = EvalResult::failed(opts.metric, "range", "no embedded motion".into());
        r.min_clearance = clearance;
        return r;
    }
    EvalResult {
        feasible: true,
        range: report.value,
        metric: opts.metric,
        min_clearance: clearance,
        min_triangle_quality: quality,
        samples: report.samples,
        stage: None,
        message: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    pub seed: u64,
    pub quality_floor: f64,
    /// Standard deviation of the log step.
    pub sigma: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 500, seed: 0, quality_floor: 1e-3, sigma: 0.05 }
    }
}

/// One proposal of the search, as written to the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub params: DodecParams,
    pub result: EvalResult,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub params: DodecParams,
    pub result: EvalResult,
    pub seed_result: EvalResult,
    pub accepted: usize,
    pub trials: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("no feasible parameters above the quality floor in {trials} trials (last failure: {last:?})")]
    NoFeasible { trials: usize, best_attempt: Box<Option<TrialRecord>>, last: Option<String> },
}

fn admissible(r: &EvalResult, floor: f64) -> bool {
    r.feasible && r.min_triangle_quality >= floor
}

fn better(a: &EvalResult, b: &EvalResult) -> bool {
    a.range > b.range || (a.range == b.range && a.min_clearance > b.min_clearance)
}

/// Indices into `l ++ h` that the search moves; `l3` stays at 1.
const FREE: [usize; 7] = [0, 1, 3, 4, 5, 6, 7];

fn gauge(p: &DodecParams) -> DodecParams {
    let s = 1.0 / p.l[2];
    DodecParams { l: p.l.map(|x| x * s), h: p.h.map(|x| x * s), base_shape: None }
}

fn perturb(p: &DodecParams, rng: &mut ChaCha8Rng, sigma: f64) -> DodecParams {
    let mut q = p.clone();
    let k = FREE[rng.random_range(0..FREE.len())];
    let z: f64 = StandardNormal.sample(rng);
    let f = (sigma * z).exp();
    if k < 5 {
        q.l[k] *= f;
    } else {
        q.h[k - 5] *= f;
    }
    q
}

pub fn search(seed: &DodecParams, opts: &SearchOptions) -> Result<SearchOutcome, SearchError> {
    search_logged(seed, opts, &EvalOptions::default(), |_| {})
}

/// Accept-if-better coordinate search with log-normal steps. `log` sees
/// every proposal in trial order.
pub fn search_logged(
    seed: &DodecParams,
    opts: &SearchOptions,
    eval: &EvalOptions,
    mut log: impl FnMut(&TrialRecord),
) -> Result<SearchOutcome, SearchError> {
    if opts.budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = gauge(seed);
    let seed_result = evaluate_with(&start, eval);
    let mut best: Option<(DodecParams, EvalResult)> =
        admissible(&seed_result, opts.quality_floor).then(|| (start.clone(), seed_result.clone()));
    let mut closest: Option<TrialRecord> = None;
    let mut last_failure = seed_result.stage.clone();
    let mut accepted = 0;
    for trial in 1..=opts.budget {
        let base = best.as_ref().map_or(&start, |(p, _)| p);
        let cand = perturb(base, &mut rng, opts.sigma);
        let r = evaluate_with(&cand, eval);
        let ok = admissible(&r, opts.quality_floor) && best.as_ref().map_or(true, |(_, b)| better(&r, b));
        let rec = TrialRecord { trial, params: cand.clone(), result: r.clone(), accepted: ok };
        log(&rec);
        if ok {
            accepted += 1;
            best = Some((cand, r));
        } else {
            if r.stage.is_some() {
                last_failure = r.stage.clone();
            }
            if best.is_none() && r.feasible && closest.as_ref().map_or(true, |c| r.min_triangle_quality > c.result.min_triangle_quality) {
                closest = Some(rec);
            }
        }
    }
    match best {
        Some((params, result)) => Ok(SearchOutcome { params, result, seed_result, accepted, trials: opts.budget }),
        None => Err(SearchError::NoFeasible { trials: opts.budget, best_attempt: Box::new(closest), last: last_failure }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infeasible_lengths_are_folded_into_result() {
        let p = DodecParams { l: [1.0, 5.0, 1.0, 1.0, 1.0], h: [6.5, 6.5, 6.1], base_shape: None };
        let r = evaluate(&p);
        assert!(!r.feasible);
        assert_eq!(r.range, 0.0);
        assert_eq!(r.stage.as_deref(), Some("derive_xy"));
    }

    #[test]
    fn zero_budget() {
        let opts = SearchOptions { budget: 0, ..Default::default() };
        assert_eq!(search(&DodecParams::standard(), &opts).unwrap_err(), SearchError::ZeroBudget);
    }

    #[test]
    fn gauge_fixes_l3() {
        let p = DodecParams { l: [7.2, 7.8, 2.0, 7.8, 5.8], h: [13.0, 13.0, 12.2], base_shape: Some(3.0) };
        let g = gauge(&p);
        assert_eq!(g.l[2], 1.0);
        assert!((g.l[0] - 3.6).abs() < 1e-12);
        assert_eq!(g.base_shape, None);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(perturb(&g, &mut rng, 0.1).l[2], 1.0);
        }
    }
}
