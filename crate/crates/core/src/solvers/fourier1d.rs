//! Periodic 1D problems advanced with classical RK4 on the Fourier
//! coefficients.
//!
//! Burgers: `dα/dt = -νξ²α - μ F(F⁻¹(α) · F⁻¹(iξα))`.
//! Advection: `dα/dt = -F(a · F⁻¹(iξα))`.
//!
//! Every stage uses the stage state in both slots of the nonlinearity and the
//! fourth stage uses `α + Δt k₃`, i.e. textbook RK4.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite_complex, check_input, Pseudo};
use crate::error::{Error, Result};
use crate::math;
use crate::problem::{to_complex, to_interleaved, Family, InputSample, PdeProblem, Trajectory};
use crate::spectral::FourierGrid;

/// `u₀(x) = (1 - cos x)/2` on the grid.
pub fn advection_initial(grid: &FourierGrid) -> Vec<f64> {
    grid.nodes().iter().map(|&x| (1.0 - math::cos(x)) / 2.0).collect()
}

pub fn solve_burgers(problem: &PdeProblem, u0: &InputSample) -> Result<Trajectory> {
    check_input(problem, u0)?;
    let grid = FourierGrid::new(problem.n, 1)?;
    solve_burgers_from(problem, &to_interleaved(&grid.dft(&u0.values)?.values))
}

pub fn solve_burgers_from(problem: &PdeProblem, initial: &[f64]) -> Result<Trajectory> {
    expect_family(problem, Family::Burgers)?;
    let ps = Pseudo::new(problem.n, 1, problem.dealias)?;
    let (nu, mu) = (problem.nu, problem.mu);
    let xi2: Vec<f64> = (0..problem.n).map(|i| ps.grid.k_squared(i)).collect();
    rk4(problem, initial, |alpha| {
        let u = ps.to_grid(alpha);
        let ux = ps.to_grid(&ps.deriv(alpha, 0));
        let prod: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| a * b).collect();
        let g = ps.nonlinear(&prod);
        alpha.iter().zip(&g).zip(&xi2).map(|((a, g), k2)| -nu * k2 * a - mu * g).collect()
    })
}

pub fn solve_advection(problem: &PdeProblem, a: &InputSample) -> Result<Trajectory> {
    check_input(problem, a)?;
    let grid = FourierGrid::new(problem.n, 1)?;
    let init = to_interleaved(&grid.dft(&advection_initial(&grid))?.values);
    solve_advection_from(problem, &a.values, &init)
}

pub fn solve_advection_from(problem: &PdeProblem, coefficient: &[f64], initial: &[f64]) -> Result<Trajectory> {
    expect_family(problem, Family::Advection)?;
    if coefficient.len() != problem.n {
        return Err(Error::Shape(alloc::format!("coefficient has {} values, expected {}", coefficient.len(), problem.n)));
    }
    let ps = Pseudo::new(problem.n, 1, problem.dealias)?;
    rk4(problem, initial, |alpha| {
        let ux = ps.to_grid(&ps.deriv(alpha, 0));
        let prod: Vec<f64> = coefficient.iter().zip(&ux).map(|(a, b)| a * b).collect();
        ps.nonlinear(&prod).into_iter().map(|v| -v).collect()
    })
}

fn expect_family(problem: &PdeProblem, family: Family) -> Result<()> {
    problem.validate()?;
    if problem.family != family {
        return Err(Error::InvalidParameter(alloc::format!("expected a {family} problem, got {}", problem.family)));
    }
    Ok(())
}

fn rk4(problem: &PdeProblem, initial: &[f64], rhs: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Result<Trajectory> {
    let rep = problem.representation();
    if initial.len() != rep.snapshot_len() {
        return Err(Error::Shape(alloc::format!("initial state has {} values, expected {}", initial.len(), rep.snapshot_len())));
    }
    let dt = problem.dt;
    let steps = problem.total_steps();
    let axpy = |a: &[Complex64], s: f64, k: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(k).map(|(a, k)| a + k * s).collect()
    };
    let mut state = to_complex(initial);
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(initial.to_vec());
    for r in 0..steps {
        let k1 = rhs(&state);
        let k2 = rhs(&axpy(&state, dt / 2.0, &k1));
        let k3 = rhs(&axpy(&state, dt / 2.0, &k2));
        let k4 = rhs(&axpy(&state, dt, &k3));
        for i in 0..state.len() {
            state[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        check_finite_complex(&state, r + 1)?;
        snapshots.push(to_interleaved(&state));
    }
    Trajectory::new(rep, snapshots)
}
