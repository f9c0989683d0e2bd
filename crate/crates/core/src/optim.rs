//! L-BFGS with a strong-Wolfe line search, a plateau stopping rule, and an
//! Adam fallback.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    /// Curvature pairs kept.
    pub memory: usize,
    pub c1: f64,
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_trials: usize,
    pub max_iters: usize,
    pub plateau_window: usize,
    pub plateau_eps: f64,
    /// Abort when the loss exceeds this multiple of its running minimum.
    pub divergence_factor: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            max_trials: 25,
            max_iters: 2000,
            plateau_window: 50,
            plateau_eps: 1e-8,
            divergence_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub plateau_window: usize,
    pub plateau_eps: f64,
    pub divergence_factor: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_iters: 2000,
            plateau_window: 50,
            plateau_eps: 1e-8,
            divergence_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Zero loss or zero gradient.
    Converged,
    Plateau,
    MaxIterations,
    /// No acceptable step even along steepest descent.
    LineSearchFailed,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::Plateau => "plateau",
            StopReason::MaxIterations => "max_iterations",
            StopReason::LineSearchFailed => "line_search_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Loss at the start and after every accepted iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// True when the loss improved by at most `eps` (relative) over the last
/// `window` iterations.
pub fn plateau_check(history: &[f64], window: usize, eps: f64) -> bool {
    if window == 0 || history.len() < window {
        return false;
    }
    let old = history[history.len() - window];
    let new = history[history.len() - 1];
    old - new <= eps * old.abs()
}

/// Curvature memory and two-loop recursion.
#[derive(Debug, Clone, Default)]
pub struct LbfgsMemory {
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    rho: VecDeque<f64>,
}

impl LbfgsMemory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    /// Stores `(s, y)` if `sᵀy > 0`; returns whether it was kept.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>, capacity: usize) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-300) || !sy.is_finite() {
            return false;
        }
        if self.s.len() == capacity {
            self.s.pop_front();
            self.y.pop_front();
            self.rho.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        self.rho.push_back(1.0 / sy);
        capacity > 0
    }

    /// `-H g` from the stored pairs, with `H₀ = (sᵀy / yᵀy) I`.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let k = self.s.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            alpha[i] = self.rho[i] * dot(&self.s[i], &q);
            q.iter_mut().zip(&self.y[i]).for_each(|(q, y)| *q -= alpha[i] * y);
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|q| *q *= gamma);
        }
        for i in 0..k {
            let beta = self.rho[i] * dot(&self.y[i], &q);
            q.iter_mut().zip(&self.s[i]).for_each(|(q, s)| *q += (alpha[i] - beta) * s);
        }
        q.iter_mut().for_each(|q| *q = -*q);
        q
    }
}

struct Trial {
    a: f64,
    f: f64,
    g: Vec<f64>,
    d: f64,
}

/// Treats a non-finite loss reported by the objective as `+∞` so the line
/// search backs off instead of failing.
fn eval_soft<F>(f: &mut F, x: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    match f(x) {
        Ok((v, g)) if v.is_finite() && g.iter().all(|g| g.is_finite()) => Ok((v, g)),
        Ok((_, g)) => Ok((f64::INFINITY, g)),
        Err(Error::NonFiniteLoss { .. }) | Err(Error::NonFinite { .. }) => Ok((f64::INFINITY, vec![0.0; x.len()])),
        Err(e) => Err(e),
    }
}

fn cubic_min(a: &Trial, b: &Trial) -> Option<f64> {
    // Minimizer of the cubic through (a.a, a.f, a.d) and (b.a, b.f, b.d).
    if !a.f.is_finite() || !b.f.is_finite() {
        return None;
    }
    let d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.a - b.a);
    let disc = d1 * d1 - a.d * b.d;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = math::sqrt(disc) * if b.a > a.a { 1.0 } else { -1.0 };
    let t = b.a - (b.a - a.a) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Strong-Wolfe line search along `dir` from `x`. Returns the accepted trial
/// and the evaluation count, or `None` when `max_trials` evaluations fail.
fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
    a_init: f64,
    cfg: &LbfgsConfig,
) -> Result<(Option<Trial>, usize)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let d0 = dot(g0, dir);
    let mut evals = 0;
    let mut probe = |a: f64, evals: &mut usize| -> Result<Trial> {
        let xa: Vec<f64> = x.iter().zip(dir).map(|(x, d)| x + a * d).collect();
        let (fa, ga) = eval_soft(f, &xa)?;
        *evals += 1;
        let d = dot(&ga, dir);
        Ok(Trial { a, f: fa, g: ga, d })
    };
    let armijo = |t: &Trial| t.f <= f0 + cfg.c1 * t.a * d0;
    let curvature = |t: &Trial| t.d.abs() <= -cfg.c2 * d0;

    let mut prev = Trial { a: 0.0, f: f0, g: g0.to_vec(), d: d0 };
    let mut a = a_init;
    let (mut lo, mut hi);
    loop {
        if evals >= cfg.max_trials {
            return Ok((None, evals));
        }
        let t = probe(a, &mut evals)?;
        if !armijo(&t) || (prev.a > 0.0 && t.f >= prev.f) {
            lo = prev;
            hi = t;
            break;
        }
        if curvature(&t) {
            return Ok((Some(t), evals));
        }
        if t.d >= 0.0 {
            lo = t;
            hi = prev;
            break;
        }
        a = 2.0 * t.a;
        prev = t;
    }
    while evals < cfg.max_trials {
        let (left, right) = if lo.a < hi.a { (lo.a, hi.a) } else { (hi.a, lo.a) };
        let width = right - left;
        let mut a = cubic_min(&lo, &hi).unwrap_or(0.5 * (left + right));
        if !(a > left + 0.1 * width && a < right - 0.1 * width) {
            a = 0.5 * (left + right);
        }
        let t = probe(a, &mut evals)?;
        if !armijo(&t) || t.f >= lo.f {
            hi = t;
        } else {
            if curvature(&t) {
                return Ok((Some(t), evals));
            }
            if t.d * (hi.a - lo.a) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
        if width <= f64::EPSILON * right.max(1e-300) {
            break;
        }
    }
    // Out of trials: accept the best sufficient-decrease point seen, if any.
    if lo.a > 0.0 && armijo(&lo) && lo.f < f0 {
        return Ok((Some(lo), evals));
    }
    Ok((None, evals))
}

/// One L-BFGS iteration from `(x, fx, g)`. Returns the accepted trial
/// `(x_new, f_new, g_new)` or `None` when even steepest descent fails.
#[allow(clippy::type_complexity)]
pub fn lbfgs_step<F>(
    f: &mut F,
    memory: &mut LbfgsMemory,
    x: &[f64],
    fx: f64,
    g: &[f64],
    cfg: &LbfgsConfig,
) -> Result<(Option<(Vec<f64>, f64, Vec<f64>)>, usize)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let gnorm = math::sqrt(dot(g, g));
    if gnorm == 0.0 {
        return Ok((Some((x.to_vec(), fx, g.to_vec())), 0));
    }
    let mut evals = 0;
    for attempt in 0..2 {
        let steepest = attempt == 1 || memory.is_empty();
        let dir = if steepest { g.iter().map(|v| -v).collect() } else { memory.direction(g) };
        if dot(&dir, g) >= 0.0 {
            memory.clear();
            continue;
        }
        let a0 = if memory.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let (trial, n) = line_search(f, x, fx, g, &dir, a0, cfg)?;
        evals += n;
        if let Some(t) = trial {
            let s: Vec<f64> = dir.iter().map(|d| t.a * d).collect();
            let xn: Vec<f64> = x.iter().zip(&s).map(|(x, s)| x + s).collect();
            let y: Vec<f64> = t.g.iter().zip(g).map(|(a, b)| a - b).collect();
            memory.push(s, y, cfg.memory);
            return Ok((Some((xn, t.f, t.g)), evals));
        }
        memory.clear();
        if steepest {
            break;
        }
    }
    Ok((None, evals))
}

/// Minimizes `f` with L-BFGS until convergence, plateau, or the iteration cap.
pub fn minimize_lbfgs<F>(mut f: F, x0: &[f64], cfg: &LbfgsConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (mut fx, mut g) = f(x0)?;
    if !fx.is_finite() {
        return Err(Error::NonFiniteLoss { sample: 0 });
    }
    let mut x = x0.to_vec();
    let mut history = vec![fx];
    let mut memory = LbfgsMemory::default();
    let mut evaluations = 1;
    let mut best = fx;
    let done = |fx: f64, g: &[f64]| fx == 0.0 || g.iter().all(|v| *v == 0.0);
    if done(fx, &g) {
        return Ok(OptimResult { x, value: fx, history, iterations: 0, evaluations, stop: StopReason::Converged });
    }
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let (next, n) = lbfgs_step(&mut f, &mut memory, &x, fx, &g, cfg)?;
        evaluations += n;
        let Some((xn, fnew, gn)) = next else {
            stop = StopReason::LineSearchFailed;
            break;
        };
        iterations += 1;
        x = xn;
        fx = fnew;
        g = gn;
        history.push(fx);
        if fx > cfg.divergence_factor * best {
            return Err(Error::Divergence { iteration: iterations, loss: fx, best });
        }
        best = best.min(fx);
        if done(fx, &g) {
            stop = StopReason::Converged;
            break;
        }
        if plateau_check(&history, cfg.plateau_window, cfg.plateau_eps) {
            stop = StopReason::Plateau;
            break;
        }
    }
    Ok(OptimResult { x, value: fx, history, iterations, evaluations, stop })
}

/// Adam with bias correction. The history records the loss at each iterate.
pub fn minimize_adam<F>(mut f: F, x0: &[f64], cfg: &AdamConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = x0.to_vec();
    let mut m = vec![0.0; x.len()];
    let mut v = vec![0.0; x.len()];
    let (mut fx, mut g) = f(&x)?;
    let mut history = vec![fx];
    let mut best = fx;
    let mut best_x = x.clone();
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    if fx == 0.0 || g.iter().all(|v| *v == 0.0) {
        return Ok(OptimResult { x, value: fx, history, iterations, evaluations: 1, stop: StopReason::Converged });
    }
    while iterations < cfg.max_iters {
        iterations += 1;
        let b1 = 1.0 - math::powi(cfg.beta1, iterations as i32);
        let b2 = 1.0 - math::powi(cfg.beta2, iterations as i32);
        for i in 0..x.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            x[i] -= cfg.lr * (m[i] / b1) / (math::sqrt(v[i] / b2) + cfg.eps);
        }
        let r = f(&x)?;
        fx = r.0;
        g = r.1;
        history.push(fx);
        if !fx.is_finite() || fx > cfg.divergence_factor * best {
            return Err(Error::Divergence { iteration: iterations, loss: fx, best });
        }
        if fx < best {
            best = fx;
            best_x.clone_from(&x);
        }
        if fx == 0.0 {
            stop = StopReason::Converged;
            break;
        }
        if plateau_check(&history, cfg.plateau_window, cfg.plateau_eps) {
            stop = StopReason::Plateau;
            break;
        }
    }
    Ok(OptimResult { x: best_x, value: best, history, iterations, evaluations: iterations + 1, stop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_rule() {
        assert!(plateau_check(&[1.0; 50], 50, 1e-8));
        assert!(!plateau_check(&[1.0; 49], 50, 1e-8));
        let decay: Vec<f64> = (0..2000).map(|k| 0.9f64.powi(k)).collect();
        for end in 50..decay.len() {
            assert!(!plateau_check(&decay[..end], 50, 1e-8));
        }
    }

    #[test]
    fn zero_gradient_start_does_not_move() {
        let r = minimize_lbfgs(|x: &[f64]| Ok((1.0, vec![0.0; x.len()])), &[3.0, 4.0], &LbfgsConfig::default()).unwrap();
        assert_eq!(r.x, vec![3.0, 4.0]);
        assert_eq!(r.iterations, 0);
    }
}
