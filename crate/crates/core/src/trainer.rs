//! Sequential training: the horizon is split into `Q` segments of `R` steps
//! and one network is trained per segment.
//!
//! Every network reads the original input function. What links segments is
//! the anchor: segment `q` is scored against the snapshot that segment
//! `q - 1` predicts at its last step, evaluated once after training and then
//! frozen. The first segment's anchors are the coefficients of the true
//! initial data. Each segment warm-starts from the previous one's parameters.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::net::{forward, NetworkParams};
use crate::objective::Objective;
use crate::optim::{minimize_adam, minimize_lbfgs, AdamConfig, LbfgsConfig, OptimResult, StopReason};
use crate::problem::{InputSample, PdeProblem, Trajectory};
use crate::solvers::initial_coefficients;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSchedule {
    pub q: usize,
    pub r: usize,
    pub dt: f64,
}

impl SegmentSchedule {
    pub fn new(problem: &PdeProblem) -> Self {
        Self { q: problem.q, r: problem.r, dt: problem.dt }
    }

    /// `t_q = q R Δt` for `q = 0..=Q`.
    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.q).map(|q| (q * self.r) as f64 * self.dt).collect()
    }

    pub fn t_final(&self) -> f64 {
        (self.q * self.r) as f64 * self.dt
    }

    /// Global step indices (`1..=QR`) covered by segment `q` (0-based).
    pub fn steps_of(&self, q: usize) -> core::ops::RangeInclusive<usize> {
        q * self.r + 1..=(q + 1) * self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerChoice {
    Lbfgs(LbfgsConfig),
    Adam(AdamConfig),
}

impl Default for OptimizerChoice {
    fn default() -> Self {
        OptimizerChoice::Lbfgs(LbfgsConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub params: Vec<f64>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    /// Next segment to train (0-based).
    pub segment: usize,
    /// Current parameters: the last trained segment's, or the initial ones.
    pub params: NetworkParams,
    /// Per-sample anchors for `segment`.
    pub anchors: Vec<Vec<f64>>,
    pub segments: Vec<SegmentRecord>,
    pub seed: u64,
}

impl TrainState {
    /// Fresh state with anchors from the true initial data.
    pub fn new(problem: &PdeProblem, params: NetworkParams, inputs: &[InputSample], seed: u64) -> Result<Self> {
        let anchors = inputs.iter().map(|s| initial_coefficients(problem, s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { segment: 0, params, anchors, segments: Vec::new(), seed })
    }

    pub fn is_finished(&self, problem: &PdeProblem) -> bool {
        self.segment >= problem.q
    }
}

/// Trains the next segment and advances the state.
pub fn train_segment(
    problem: &PdeProblem,
    state: TrainState,
    inputs: &[InputSample],
    optimizer: &OptimizerChoice,
) -> Result<TrainState> {
    if state.is_finished(problem) {
        return Err(Error::InvalidParameter(alloc::format!("all {} segments are trained", problem.q)));
    }
    let objective = Objective::new(problem, &state.params, inputs, state.anchors.clone())?;
    let f = |x: &[f64]| objective.loss_and_grad(x);
    let result: OptimResult = match optimizer {
        OptimizerChoice::Lbfgs(cfg) => minimize_lbfgs(f, &state.params.flat, cfg)?,
        OptimizerChoice::Adam(cfg) => minimize_adam(f, &state.params.flat, cfg)?,
    };
    let preds = objective.predictions(&result.x)?;
    let anchors = preds.into_iter().map(|mut p| p.pop().expect("R > 0")).collect();
    let mut params = state.params;
    params.flat = result.x.clone();
    let mut segments = state.segments;
    segments.push(SegmentRecord {
        params: result.x,
        history: result.history,
        iterations: result.iterations,
        evaluations: result.evaluations,
        stop: result.stop,
    });
    Ok(TrainState { segment: state.segment + 1, params, anchors, segments, seed: state.seed })
}

/// Trains all remaining segments, calling `on_segment` after each.
pub fn train_all(
    problem: &PdeProblem,
    mut state: TrainState,
    inputs: &[InputSample],
    optimizer: &OptimizerChoice,
    mut on_segment: impl FnMut(&TrainState) -> Result<()>,
) -> Result<TrainState> {
    while !state.is_finished(problem) {
        state = train_segment(problem, state, inputs, optimizer)?;
        on_segment(&state)?;
    }
    Ok(state)
}

/// Chains the trained segment networks over the full horizon. The result has
/// `1 + Q R` snapshots, starting with the initial coefficients.
pub fn predict(problem: &PdeProblem, template: &NetworkParams, segments: &[Vec<f64>], input: &InputSample) -> Result<Trajectory> {
    let disc = problem.discretization()?;
    let mut anchor = initial_coefficients(problem, input)?;
    let mut snapshots = Vec::with_capacity(1 + segments.len() * problem.r);
    snapshots.push(anchor.clone());
    for flat in segments {
        let net = NetworkParams::from_flat(template.arch.clone(), flat.clone())?;
        let grid = template.arch.anchor_input.then(|| disc.reconstruct(&anchor));
        let out = forward(&net, &input.values, Some(&anchor), grid.as_deref())?;
        anchor = out.last().expect("R > 0").clone();
        snapshots.extend(out);
    }
    Trajectory::new(problem.representation(), snapshots)
}
