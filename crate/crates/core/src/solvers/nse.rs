//! 2D vorticity equation `w_t + u·∇w - Δw/Re = f` with a Crank–Nicolson /
//! Heun two-step update. With `Nᵂ = i k·(F(uw), F(vw))`, `d = |k|²/(2Re)`:
//!
//! ```text
//! predictor   (w̃ - αʳ)/Δt + d(w̃ + αʳ) + N(αʳ) - F(f) = 0
//! corrector   (α^{r+1} - αʳ)/Δt + d(α^{r+1} + αʳ) + (N(αʳ) + N(w̃))/2 - F(f) = 0
//! ```
//!
//! Both are diagonal in Fourier space.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite_complex, check_input, Pseudo};
use crate::error::{Error, Result};
use crate::problem::{to_complex, to_interleaved, Family, InputSample, PdeProblem, Trajectory};
use crate::spectral::FourierGrid;

/// Velocity `(u, v) = (ψ_y, -ψ_x)` on the grid from a vorticity spectrum,
/// with `Δψ = w` and `ψ̂₀ = 0`.
pub fn poisson_curl(grid: &FourierGrid, w: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let ps = Pseudo { grid: grid.clone(), mask: None };
    if grid.dims() != 2 || w.len() != grid.len() {
        return Err(Error::Shape("poisson_curl needs a 2D spectrum matching the grid".into()));
    }
    let (u, v) = velocity_spectra(&ps, w);
    Ok((ps.to_grid(&u), ps.to_grid(&v)))
}

fn velocity_spectra(ps: &Pseudo, w: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let psi: Vec<Complex64> = w
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let k2 = ps.grid.k_squared(i);
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                -w / k2
            }
        })
        .collect();
    let u = ps.deriv(&psi, 1);
    let v: Vec<Complex64> = ps.deriv(&psi, 0).into_iter().map(|z| -z).collect();
    (u, v)
}

/// `i k·(F(uw), F(vw))`.
fn advection_term(ps: &Pseudo, w: &[Complex64]) -> Vec<Complex64> {
    let (us, vs) = velocity_spectra(ps, w);
    let (u, v, wg) = (ps.to_grid(&us), ps.to_grid(&vs), ps.to_grid(w));
    let uw: Vec<f64> = u.iter().zip(&wg).map(|(a, b)| a * b).collect();
    let vw: Vec<f64> = v.iter().zip(&wg).map(|(a, b)| a * b).collect();
    let fx = ps.deriv(&ps.nonlinear(&uw), 0);
    let fy = ps.deriv(&ps.nonlinear(&vw), 1);
    fx.iter().zip(&fy).map(|(a, b)| a + b).collect()
}

pub fn solve_nse_2d(problem: &PdeProblem, w0: &InputSample) -> Result<Trajectory> {
    check_input(problem, w0)?;
    let grid = FourierGrid::new(problem.n, 2)?;
    solve_nse_from(problem, &to_interleaved(&grid.dft(&w0.values)?.values))
}

pub fn solve_nse_from(problem: &PdeProblem, initial: &[f64]) -> Result<Trajectory> {
    problem.validate()?;
    if problem.family != Family::Nse2d {
        return Err(Error::InvalidParameter(alloc::format!("expected nse2d, got {}", problem.family)));
    }
    let rep = problem.representation();
    if initial.len() != rep.snapshot_len() {
        return Err(Error::Shape(alloc::format!("initial state has {} values, expected {}", initial.len(), rep.snapshot_len())));
    }
    let re = problem.re.expect("validated");
    let ps = Pseudo::new(problem.n, 2, problem.dealias)?;
    let len = ps.grid.len();
    let forcing = ps.grid.dft(&problem.forcing_field())?.values;
    let inv_dt = 1.0 / problem.dt;
    let d: Vec<f64> = (0..len).map(|i| ps.grid.k_squared(i) / (2.0 * re)).collect();

    let steps = problem.total_steps();
    let mut state = to_complex(initial);
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(initial.to_vec());
    for r in 0..steps {
        let n0 = advection_term(&ps, &state);
        let pred: Vec<Complex64> = (0..len)
            .map(|i| (state[i] * (inv_dt - d[i]) - n0[i] + forcing[i]) / (inv_dt + d[i]))
            .collect();
        let n1 = advection_term(&ps, &pred);
        for i in 0..len {
            state[i] = (state[i] * (inv_dt - d[i]) - (n0[i] + n1[i]) * 0.5 + forcing[i]) / (inv_dt + d[i]);
        }
        check_finite_complex(&state, r + 1)?;
        snapshots.push(to_interleaved(&state));
    }
    Trajectory::new(rep, snapshots)
}
