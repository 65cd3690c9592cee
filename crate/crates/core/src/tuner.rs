//! Pattern search over the control-law parameters.
//!
//! Each poll evaluates `x ± step` along every free coordinate. Polls run in
//! parallel but the outcome depends only on the candidate order, so results
//! are reproducible.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::control::Controls;
use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::scenario::{compute_metrics, RecoveryMetrics, ScenarioSpec, Thresholds};
use crate::sim::{simulate, SimConfig, Trace};

/// Added to the objective when the simulation left the model's validity envelope.
pub const FAILURE_PENALTY: f64 = 1.0e6;

/// Initial poll step as a fraction of each parameter's bound range.
pub const INITIAL_STEP_FRACTION: f64 = 0.1;

/// The search stops once every step is below this fraction of its range.
pub const MIN_STEP_FRACTION: f64 = 1.0e-4;

/// A scalar field of [`Controls`] that the tuner may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlParam {
    A1,
    A2,
    KDir,
    Tau0,
    Tau1,
    Tau2,
    Tau3,
    FInitial,
    AC,
    TauC1,
    TauC2,
}

impl ControlParam {
    pub const ALL: [ControlParam; 11] = [
        ControlParam::A1,
        ControlParam::A2,
        ControlParam::KDir,
        ControlParam::Tau0,
        ControlParam::Tau1,
        ControlParam::Tau2,
        ControlParam::Tau3,
        ControlParam::FInitial,
        ControlParam::AC,
        ControlParam::TauC1,
        ControlParam::TauC2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlParam::A1 => "a1",
            ControlParam::A2 => "a2",
            ControlParam::KDir => "k_dir",
            ControlParam::Tau0 => "tau0",
            ControlParam::Tau1 => "tau1",
            ControlParam::Tau2 => "tau2",
            ControlParam::Tau3 => "tau3",
            ControlParam::FInitial => "f_initial",
            ControlParam::AC => "a_c",
            ControlParam::TauC1 => "tau_c1",
            ControlParam::TauC2 => "tau_c2",
        }
    }

    pub fn get(self, c: &Controls) -> f64 {
        match self {
            ControlParam::A1 => c.steering.a1,
            ControlParam::A2 => c.steering.a2,
            ControlParam::KDir => c.steering.k_dir,
            ControlParam::Tau0 => c.steering.tau0,
            ControlParam::Tau1 => c.steering.tau1,
            ControlParam::Tau2 => c.steering.tau2,
            ControlParam::Tau3 => c.steering.tau3,
            ControlParam::FInitial => c.force.f_initial,
            ControlParam::AC => c.force.a_c,
            ControlParam::TauC1 => c.force.tau_c1,
            ControlParam::TauC2 => c.force.tau_c2,
        }
    }

    pub fn set(self, c: &mut Controls, v: f64) {
        let slot = match self {
            ControlParam::A1 => &mut c.steering.a1,
            ControlParam::A2 => &mut c.steering.a2,
            ControlParam::KDir => &mut c.steering.k_dir,
            ControlParam::Tau0 => &mut c.steering.tau0,
            ControlParam::Tau1 => &mut c.steering.tau1,
            ControlParam::Tau2 => &mut c.steering.tau2,
            ControlParam::Tau3 => &mut c.steering.tau3,
            ControlParam::FInitial => &mut c.force.f_initial,
            ControlParam::AC => &mut c.force.a_c,
            ControlParam::TauC1 => &mut c.force.tau_c1,
            ControlParam::TauC2 => &mut c.force.tau_c2,
        };
        *slot = v;
    }
}

impl fmt::Display for ControlParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ControlParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown control parameter `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub param: ControlParam,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParam {
    pub fn new(param: ControlParam, lower: f64, upper: f64) -> Self {
        Self {
            param,
            lower,
            upper,
        }
    }

    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// How the final lateral and heading errors enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// `w_y |y| + w_psi |psi|`
    Absolute,
    /// `w_y y^2 + w_psi psi^2`. Smooth at the target, and far from it the
    /// lateral term dominates, which keeps the search out of spin-out basins.
    #[default]
    Squared,
}

impl ErrorNorm {
    pub fn name(self) -> &'static str {
        match self {
            ErrorNorm::Absolute => "absolute",
            ErrorNorm::Squared => "squared",
        }
    }

    #[inline]
    fn apply(self, e: f64) -> f64 {
        match self {
            ErrorNorm::Absolute => e.abs(),
            ErrorNorm::Squared => e * e,
        }
    }
}

impl fmt::Display for ErrorNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(ErrorNorm::Absolute),
            "squared" => Ok(ErrorNorm::Squared),
            other => Err(format!(
                "unknown error norm `{other}` (expected `absolute` or `squared`)"
            )),
        }
    }
}

/// Objective weights. `w_time` charges the recovery time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w_y: f64,
    pub w_psi: f64,
    pub w_time: f64,
    pub norm: ErrorNorm,
}

impl Weights {
    /// A 0.02 rad heading error costs about as much as a 1.1 m lateral error.
    pub const DEFAULT: Weights = Weights {
        w_y: 1.0,
        w_psi: 3000.0,
        w_time: 0.1,
        norm: ErrorNorm::Squared,
    };
}

impl Default for Weights {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneSpec {
    pub free: Vec<FreeParam>,
    pub weights: Weights,
    /// Maximum number of simulations.
    pub budget: usize,
    pub seed: Controls,
    pub thresholds: Thresholds,
}

impl TuneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |param: &str, reason: &str| Error::InfeasibleBounds {
            param: param.to_string(),
            reason: reason.to_string(),
        };
        if self.free.is_empty() {
            return Err(bad("-", "no free parameters"));
        }
        for (i, fp) in self.free.iter().enumerate() {
            let name = fp.param.name();
            if !(fp.lower.is_finite() && fp.upper.is_finite() && fp.lower < fp.upper) {
                return Err(bad(name, "bounds must be finite with lower < upper"));
            }
            if self.free[..i].iter().any(|o| o.param == fp.param) {
                return Err(bad(name, "listed more than once"));
            }
            let v = fp.param.get(&self.seed);
            if !fp.contains(v) {
                return Err(bad(
                    name,
                    &format!("seed value {v} lies outside [{}, {}]", fp.lower, fp.upper),
                ));
            }
        }
        self.seed.validate()?;
        self.thresholds.validate()?;
        let w = &self.weights;
        let ws = [w.w_y, w.w_psi, w.w_time];
        if ws.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || ws.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid(
                "tuning weights",
                "weights >= 0 with at least one positive",
            ));
        }
        if self.budget < 1 {
            return Err(Error::invalid("tuning budget", "budget >= 1"));
        }
        Ok(())
    }

    /// Seed controls with the free parameters replaced by `values`.
    pub fn controls_with(&self, values: &[f64]) -> Controls {
        let mut c = self.seed;
        for (fp, &v) in self.free.iter().zip(values) {
            fp.param.set(&mut c, v);
        }
        c
    }

    fn seed_values(&self) -> Vec<f64> {
        self.free
            .iter()
            .map(|fp| fp.param.get(&self.seed))
            .collect()
    }
}

/// One simulated candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// 0-based evaluation index.
    pub iter: usize,
    pub objective: f64,
    /// Free-parameter values in [`TuneSpec::free`] order.
    pub values: Vec<f64>,
    /// Best objective seen up to and including this evaluation.
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: Controls,
    pub best_objective: f64,
    pub evaluations: usize,
    pub history: Vec<Evaluation>,
}

/// Scalar recovery cost of a simulated trace. Lower is better.
pub fn objective(trace: &Trace, metrics: &RecoveryMetrics, weights: &Weights) -> f64 {
    let time = match metrics.time_to_recovery {
        Some(t) if metrics.recovered => t,
        _ => trace.config.horizon,
    };
    let penalty = if trace.failed() { FAILURE_PENALTY } else { 0.0 };
    weights.w_y * weights.norm.apply(metrics.final_lateral_error)
        + weights.w_psi * weights.norm.apply(metrics.final_heading_error)
        + weights.w_time * time
        + penalty
}

/// Simulates one parameter set and returns its objective.
pub fn evaluate(
    controls: &Controls,
    scenario: &ScenarioSpec,
    sim: &SimConfig,
    params: &VehicleParams,
    thresholds: &Thresholds,
    weights: &Weights,
) -> f64 {
    let trace = simulate(scenario, sim, controls, params);
    match compute_metrics(&trace, thresholds) {
        Ok(m) => objective(&trace, &m, weights),
        // Unreachable: a trace always holds its initial sample.
        Err(_) => f64::INFINITY,
    }
}

/// Lowest-scoring entry strictly below `threshold`; ties go to the earlier entry.
fn best_below(scored: Vec<(Vec<f64>, f64)>, threshold: f64) -> Option<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (cand, f) in scored {
        if f < best.as_ref().map_or(threshold, |b| b.1) {
            best = Some((cand, f));
        }
    }
    best
}

struct Search<'a, F> {
    spec: &'a TuneSpec,
    eval: F,
    history: Vec<Evaluation>,
    steps: Vec<f64>,
}

impl<F> Search<'_, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn remaining(&self) -> usize {
        self.spec.budget - self.history.len()
    }

    fn converged(&self) -> bool {
        self.spec
            .free
            .iter()
            .zip(&self.steps)
            .all(|(fp, &s)| s < MIN_STEP_FRACTION * fp.range())
    }

    fn admissible(&self, values: &[f64]) -> bool {
        self.spec.controls_with(values).validate().is_ok()
    }

    /// Compass neighbours of `center`, clamped to the bounds, inadmissible ones dropped.
    fn neighbours(&self, center: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * center.len());
        for (i, fp) in self.spec.free.iter().enumerate() {
            for dir in [1.0, -1.0] {
                let v = (center[i] + dir * self.steps[i]).clamp(fp.lower, fp.upper);
                if v == center[i] {
                    continue;
                }
                let mut cand = center.to_vec();
                cand[i] = v;
                if self.admissible(&cand) {
                    out.push(cand);
                }
            }
        }
        out
    }

    /// Evaluates candidates in parallel and appends them to the history in order.
    fn evaluate_batch(&mut self, mut batch: Vec<Vec<f64>>) -> Vec<(Vec<f64>, f64)> {
        batch.truncate(self.remaining());
        let eval = &self.eval;
        let scores: Vec<f64> = batch.par_iter().map(|c| eval(c)).collect();
        for (cand, &f) in batch.iter().zip(&scores) {
            let best_so_far = self.history.last().map_or(f, |e| e.best_so_far.min(f));
            self.history.push(Evaluation {
                iter: self.history.len(),
                objective: f,
                values: cand.clone(),
                best_so_far,
            });
        }
        batch.into_iter().zip(scores).collect()
    }

    /// Pattern moves: keep extrapolating along the last successful displacement
    /// while the extrapolated point, or one of its neighbours, improves.
    fn extrapolate(
        &mut self,
        mut prev: Vec<f64>,
        mut cur: Vec<f64>,
        mut f_cur: f64,
    ) -> (Vec<f64>, f64) {
        while self.remaining() > 0 {
            let pattern: Vec<f64> = self
                .spec
                .free
                .iter()
                .enumerate()
                .map(|(i, fp)| (2.0 * cur[i] - prev[i]).clamp(fp.lower, fp.upper))
                .collect();
            if pattern == cur || !self.admissible(&pattern) {
                break;
            }
            let mut batch = vec![pattern.clone()];
            batch.extend(self.neighbours(&pattern));
            let scored = self.evaluate_batch(batch);
            match best_below(scored, f_cur) {
                Some((next, f_next)) => {
                    prev = std::mem::replace(&mut cur, next);
                    f_cur = f_next;
                }
                None => break,
            }
        }
        (cur, f_cur)
    }
}

/// Runs the pattern search from `spec.seed`.
///
/// Each iteration polls `x ± step` along every free coordinate and moves to
/// the best improving neighbour, then extrapolates along that move while it
/// keeps paying off. An iteration without improvement halves every step. The
/// search stops when the budget is spent or every step falls below
/// [`MIN_STEP_FRACTION`] of its bound range.
pub fn tune(
    spec: &TuneSpec,
    scenario: &ScenarioSpec,
    sim: &SimConfig,
    params: &VehicleParams,
) -> Result<TuneResult> {
    spec.validate()?;
    scenario.validate()?;
    sim.validate()?;
    params.validate()?;

    let eval = |values: &[f64]| {
        evaluate(
            &spec.controls_with(values),
            scenario,
            sim,
            params,
            &spec.thresholds,
            &spec.weights,
        )
    };
    let mut search = Search {
        spec,
        eval,
        history: Vec::with_capacity(spec.budget.min(4096)),
        steps: spec
            .free
            .iter()
            .map(|fp| INITIAL_STEP_FRACTION * fp.range())
            .collect(),
    };

    let (mut x, mut fx) = search
        .evaluate_batch(vec![spec.seed_values()])
        .pop()
        .expect("budget >= 1");

    while search.remaining() > 0 && !search.converged() {
        let scored = search.evaluate_batch(search.neighbours(&x));
        match best_below(scored, fx) {
            Some((next, f_next)) => {
                let (cur, f_cur) = search.extrapolate(x, next, f_next);
                x = cur;
                fx = f_cur;
            }
            None => search.steps.iter_mut().for_each(|s| *s *= 0.5),
        }
    }

    Ok(TuneResult {
        best: spec.controls_with(&x),
        best_objective: fx,
        evaluations: search.history.len(),
        history: search.history,
    })
}
