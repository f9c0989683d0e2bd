//! Test-error metrics and the benchmark harness.
//!
//! All three metrics compare grid values: Gauss–Lobatto nodes for Legendre
//! families, the Fourier grid otherwise. Steps `1..=R` are compared; the
//! initial snapshot is input data, not a prediction.
//!
//! MAE divides by the number of compared values, so a uniform offset `c`
//! gives exactly `|c|` whatever the grid.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::net::NetworkParams;
use crate::problem::{Discretization, InputSample, PdeProblem, Trajectory};
use crate::solvers::solve;
use crate::trainer::predict;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorTriple {
    pub mae: f64,
    pub rel_l2: f64,
    pub l_inf: f64,
}

/// Column order of the result tables.
pub const TABLE_COLUMNS: [&str; 6] = ["equation", "random_input", "method", "mae", "rel_l2", "l_inf"];

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub triple: ErrorTriple,
    /// The same metrics for each sample on its own.
    pub per_instance: Vec<ErrorTriple>,
    /// Samples left out of Rel.L² because the reference is identically zero.
    pub excluded: Vec<usize>,
}

/// Metrics on grid values shaped `P × R × points`.
pub fn error_triple_values(pred: &[Vec<Vec<f64>>], reference: &[Vec<Vec<f64>>]) -> Result<ErrorReport> {
    let shape_err = || Error::Shape("prediction and reference shapes differ".into());
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(shape_err());
    }
    let mut abs_sum = 0.0;
    let mut count = 0usize;
    let mut max_sum = 0.0;
    let mut max_count = 0usize;
    let mut rel_sum = 0.0;
    let mut rel_count = 0usize;
    let mut excluded = Vec::new();
    let mut per_instance = Vec::with_capacity(pred.len());
    for (p, (ps, rs)) in pred.iter().zip(reference).enumerate() {
        if ps.len() != rs.len() || ps.is_empty() {
            return Err(shape_err());
        }
        let (mut a, mut c, mut m, mut err2, mut ref2) = (0.0, 0usize, 0.0, 0.0, 0.0);
        for (u_hat, u) in ps.iter().zip(rs) {
            if u_hat.len() != u.len() || u.is_empty() {
                return Err(shape_err());
            }
            let mut step_max: f64 = 0.0;
            for (x, y) in u_hat.iter().zip(u) {
                let e = (y - x).abs();
                a += e;
                err2 += e * e;
                ref2 += y * y;
                step_max = step_max.max(e);
            }
            c += u.len();
            m += step_max;
        }
        abs_sum += a;
        count += c;
        max_sum += m;
        max_count += ps.len();
        let rel = if ref2 > 0.0 {
            let r = math::sqrt(err2 / ref2);
            rel_sum += r;
            rel_count += 1;
            r
        } else {
            excluded.push(p);
            f64::NAN
        };
        per_instance.push(ErrorTriple { mae: a / c as f64, rel_l2: rel, l_inf: m / ps.len() as f64 });
    }
    let triple = ErrorTriple {
        mae: abs_sum / count as f64,
        rel_l2: if rel_count > 0 { rel_sum / rel_count as f64 } else { f64::NAN },
        l_inf: max_sum / max_count as f64,
    };
    Ok(ErrorReport { triple, per_instance, excluded })
}

/// Grid values of steps `1..` of a trajectory.
pub fn grid_values(disc: &Discretization, traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.snapshots.iter().skip(1).map(|s| disc.reconstruct(s)).collect()
}

/// Metrics between predicted and reference trajectories (steps `1..`).
pub fn error_triple(pred: &[Trajectory], reference: &[Trajectory], disc: &Discretization) -> Result<ErrorReport> {
    if pred.iter().chain(reference).any(|t| t.representation != pred[0].representation) {
        return Err(Error::Shape("trajectories use different representations".into()));
    }
    let p: Vec<_> = pred.iter().map(|t| grid_values(disc, t)).collect();
    let r: Vec<_> = reference.iter().map(|t| grid_values(disc, t)).collect();
    error_triple_values(&p, &r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub equation: String,
    pub random_input: String,
    pub method: String,
    pub report: ErrorReport,
}

impl BenchmarkRow {
    /// Values in [`TABLE_COLUMNS`] order; floats carry 17 significant digits.
    pub fn fields(&self) -> [String; 6] {
        let t = self.report.triple;
        [
            self.equation.clone(),
            self.random_input.clone(),
            self.method.clone(),
            alloc::format!("{:.16e}", t.mae),
            alloc::format!("{:.16e}", t.rel_l2),
            alloc::format!("{:.16e}", t.l_inf),
        ]
    }
}

/// Solves references for `tests`, chains the trained segment networks over
/// the horizon, and scores the predictions.
pub fn benchmark_run(
    problem: &PdeProblem,
    template: &NetworkParams,
    segments: &[Vec<f64>],
    tests: &[InputSample],
) -> Result<BenchmarkRow> {
    benchmark_against(problem, problem, template, segments, tests)
}

/// Like [`benchmark_run`], but the references come from `reference`, a
/// problem on the same evaluation grid. Scoring networks trained without
/// the boundary-layer corrector against the corrected solver is the use.
pub fn benchmark_against(
    problem: &PdeProblem,
    reference: &PdeProblem,
    template: &NetworkParams,
    segments: &[Vec<f64>],
    tests: &[InputSample],
) -> Result<BenchmarkRow> {
    if segments.len() != problem.q {
        return Err(Error::Shape(alloc::format!("{} trained segments for Q = {}", segments.len(), problem.q)));
    }
    let disc = problem.discretization()?;
    let ref_disc = reference.discretization()?;
    if disc.grid_len() != ref_disc.grid_len() || problem.total_steps() != reference.total_steps() {
        return Err(Error::Shape("reference problem uses a different grid or horizon".into()));
    }
    let mut pred = Vec::with_capacity(tests.len());
    let mut refs = Vec::with_capacity(tests.len());
    for s in tests {
        refs.push(grid_values(&ref_disc, &solve(reference, s)?));
        pred.push(grid_values(&disc, &predict(problem, template, segments, s)?));
    }
    let report = error_triple_values(&pred, &refs)?;
    Ok(BenchmarkRow {
        equation: problem.family.label().into(),
        random_input: problem.family.input_kind().name().into(),
        method: if problem.corrector { "BE-SCLON" } else { "SCLON" }.into(),
        report,
    })
}
