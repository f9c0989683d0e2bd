use proptest::prelude::*;
use sclon_core::optim::{minimize_adam, minimize_lbfgs, plateau_check, AdamConfig, LbfgsConfig, StopReason};
use sclon_core::sampling::KeyedRng;
use sclon_core::Result;

/// `½ (x - x*)ᵀ A (x - x*)` with `A = Qᵀ D Q`, `D` spread over `[1, 10]`.
struct Quadratic {
    q: Vec<Vec<f64>>,
    d: Vec<f64>,
    x_star: Vec<f64>,
}

impl Quadratic {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = KeyedRng::new(seed, 0);
        // Gram–Schmidt on a Gaussian matrix gives an orthogonal Q.
        let mut q: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            let mut v: Vec<f64> = (0..n).map(|j| rng.normal(i * n + j)).collect();
            for u in &q {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            q.push(v.into_iter().map(|a| a / norm).collect());
        }
        let d = (0..n).map(|i| 1.0 + 9.0 * i as f64 / (n - 1) as f64).collect();
        let x_star = (0..n).map(|i| rng.normal(n * n + i)).collect();
        Self { q, d, x_star }
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let e: Vec<f64> = x.iter().zip(&self.x_star).map(|(a, b)| a - b).collect();
        let qe: Vec<f64> = self.q.iter().map(|row| row.iter().zip(&e).map(|(a, b)| a * b).sum()).collect();
        let f = 0.5 * qe.iter().zip(&self.d).map(|(v, d)| d * v * v).sum::<f64>();
        let mut g = vec![0.0; x.len()];
        for (row, (v, d)) in self.q.iter().zip(qe.iter().zip(&self.d)) {
            g.iter_mut().zip(row).for_each(|(gi, r)| *gi += d * v * r);
        }
        Ok((f, g))
    }
}

fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (a, b) = (x[0], x[1]);
    let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
    let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
    Ok((f, g))
}

#[test]
fn lbfgs_solves_a_twenty_dimensional_quadratic() {
    for seed in 0..4 {
        let quad = Quadratic::new(20, seed);
        let cfg = LbfgsConfig { max_iters: 40, ..LbfgsConfig::default() };
        let r = minimize_lbfgs(|x| quad.eval(x), &[0.0; 20], &cfg).unwrap();
        assert!(r.value <= 1e-10, "seed {seed}: {:e} after {} iterations", r.value, r.iterations);
        assert!(r.iterations <= 40);
    }
}

#[test]
fn lbfgs_solves_rosenbrock() {
    let cfg = LbfgsConfig { max_iters: 200, ..LbfgsConfig::default() };
    let r = minimize_lbfgs(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
    assert!(r.value <= 1e-8, "{:e} after {} iterations", r.value, r.iterations);
    assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3);
}

#[test]
fn lbfgs_history_is_monotone_and_counts_add_up() {
    let cfg = LbfgsConfig { max_iters: 60, ..LbfgsConfig::default() };
    let r = minimize_lbfgs(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
    assert_eq!(r.history.len(), r.iterations + 1);
    assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.evaluations > r.iterations);
    assert_eq!(*r.history.last().unwrap(), r.value);
}

#[test]
fn lbfgs_stops_on_a_plateau() {
    // f = 1 + e^{-x}: the loss keeps falling by ever smaller amounts.
    let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((1.0 + (-x[0]).exp(), vec![-(-x[0]).exp()])) };
    let cfg = LbfgsConfig { max_iters: 10_000, plateau_window: 10, plateau_eps: 1e-6, ..LbfgsConfig::default() };
    let r = minimize_lbfgs(f, &[0.0], &cfg).unwrap();
    if r.stop == StopReason::Plateau {
        assert!(plateau_check(&r.history, 10, 1e-6));
        assert!(!plateau_check(&r.history[..r.history.len() - 1], 10, 1e-6));
    } else {
        assert_eq!(r.stop, StopReason::LineSearchFailed);
    }
}

#[test]
fn zero_loss_start_returns_immediately() {
    let r = minimize_lbfgs(|x| Ok((0.0, vec![0.0; x.len()])), &[1.0, 2.0], &LbfgsConfig::default()).unwrap();
    assert_eq!((r.iterations, r.stop), (0, StopReason::Converged));
    assert_eq!(r.x, vec![1.0, 2.0]);
}

#[test]
fn adam_reduces_a_quadratic() {
    let quad = Quadratic::new(10, 7);
    let x0 = vec![0.0; 10];
    let start = quad.eval(&x0).unwrap().0;
    let cfg = AdamConfig { lr: 0.05, max_iters: 500, ..AdamConfig::default() };
    let r = minimize_adam(|x| quad.eval(x), &x0, &cfg).unwrap();
    assert!(r.value < 1e-3 * start, "{:e} vs {start:e}", r.value);
    assert_eq!(r.value, r.history.iter().copied().fold(f64::INFINITY, f64::min));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plateau_fires_exactly_when_the_window_gain_is_small(
        values in prop::collection::vec(0.0f64..10.0, 1..80),
        window in 1usize..20,
    ) {
        let mut h = values;
        h.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected = h.len() >= window && {
            let old = h[h.len() - window];
            old - h[h.len() - 1] <= 1e-8 * old.abs()
        };
        prop_assert_eq!(plateau_check(&h, window, 1e-8), expected);
    }
}
