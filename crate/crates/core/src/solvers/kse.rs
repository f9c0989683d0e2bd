//! 2D Kuramoto–Sivashinsky, `u_t + Δu + Δ²u + |∇u|² = 0`, by ETDRK4
//! (Cox–Matthews) on
//!
//! ```text
//! dα/dt = c α + N(α),   c = |k|² - |k|⁴,   N(α) = -F((∂ₓu)² + (∂ᵧu)²).
//! ```
//!
//! With `E = e^{cΔt}`, `E₂ = e^{cΔt/2}`:
//!
//! ```text
//! a = E₂α + Q N(α)         b = E₂α + Q N(a)        c' = E₂a + Q(2N(b) - N(α))
//! α⁺ = Eα + f₁N(α) + 2f₂(N(a) + N(b)) + f₃N(c')
//! ```
//!
//! `Q, f₁, f₂, f₃` are averaged over a 32-point circle of radius 1 around
//! `cΔt`, which is accurate uniformly in `c` including `c = 0`.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite_complex, check_input, Pseudo};
use crate::error::{Error, Result};
use crate::math;
use crate::problem::{to_complex, to_interleaved, Family, InputSample, KseSymbol, PdeProblem, Trajectory};
use crate::spectral::FourierGrid;

const CONTOUR_POINTS: usize = 32;

/// Linear symbol per flattened mode.
pub fn kse_symbol(grid: &FourierGrid, symbol: KseSymbol) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let k2 = grid.k_squared(i);
            match symbol {
                KseSymbol::Derived => k2 - k2 * k2,
                KseSymbol::Printed => -k2 * k2 - k2,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtdCoefficients {
    pub e: Vec<f64>,
    pub e2: Vec<f64>,
    pub q: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
}

pub fn etd_coefficients(c: &[f64], dt: f64) -> EtdCoefficients {
    let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
        .map(|j| {
            let (s, co) = math::sincos(math::TWO_PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64);
            Complex64::new(co, s)
        })
        .collect();
    let m = CONTOUR_POINTS as f64;
    let mut out = EtdCoefficients {
        e: Vec::with_capacity(c.len()),
        e2: Vec::with_capacity(c.len()),
        q: Vec::with_capacity(c.len()),
        f1: Vec::with_capacity(c.len()),
        f2: Vec::with_capacity(c.len()),
        f3: Vec::with_capacity(c.len()),
    };
    for &ci in c {
        let z = ci * dt;
        out.e.push(math::exp(z));
        out.e2.push(math::exp(z / 2.0));
        let (mut q, mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0);
        for w in &roots {
            let r = w + z;
            let er = r.exp();
            let r3 = r * r * r;
            q += (((r / 2.0).exp() - 1.0) / r).re;
            f1 += ((-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3).re;
            f2 += ((2.0 + r + er * (r - 2.0)) / r3).re;
            f3 += ((-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3).re;
        }
        out.q.push(dt * q / m);
        out.f1.push(dt * f1 / m);
        out.f2.push(dt * f2 / m);
        out.f3.push(dt * f3 / m);
    }
    out
}

pub fn solve_kse_2d(problem: &PdeProblem, u0: &InputSample) -> Result<Trajectory> {
    check_input(problem, u0)?;
    let grid = FourierGrid::new(problem.n, 2)?;
    solve_kse_from(problem, &to_interleaved(&grid.dft(&u0.values)?.values))
}

pub fn solve_kse_from(problem: &PdeProblem, initial: &[f64]) -> Result<Trajectory> {
    problem.validate()?;
    if problem.family != Family::Kse2d {
        return Err(Error::InvalidParameter(alloc::format!("expected kse2d, got {}", problem.family)));
    }
    let rep = problem.representation();
    if initial.len() != rep.snapshot_len() {
        return Err(Error::Shape(alloc::format!("initial state has {} values, expected {}", initial.len(), rep.snapshot_len())));
    }
    let ps = Pseudo::new(problem.n, 2, problem.dealias)?;
    let co = etd_coefficients(&kse_symbol(&ps.grid, problem.kse_symbol), problem.dt);
    let nonlin = |alpha: &[Complex64]| -> Vec<Complex64> {
        let ux = ps.to_grid(&ps.deriv(alpha, 0));
        let uy = ps.to_grid(&ps.deriv(alpha, 1));
        let g: Vec<f64> = ux.iter().zip(&uy).map(|(a, b)| a * a + b * b).collect();
        ps.nonlinear(&g).into_iter().map(|v| -v).collect()
    };
    let len = ps.grid.len();
    let steps = problem.total_steps();
    let mut state = to_complex(initial);
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(initial.to_vec());
    for r in 0..steps {
        let nv = nonlin(&state);
        let a: Vec<Complex64> = (0..len).map(|i| state[i] * co.e2[i] + nv[i] * co.q[i]).collect();
        let na = nonlin(&a);
        let b: Vec<Complex64> = (0..len).map(|i| state[i] * co.e2[i] + na[i] * co.q[i]).collect();
        let nb = nonlin(&b);
        let c: Vec<Complex64> = (0..len).map(|i| a[i] * co.e2[i] + (nb[i] * 2.0 - nv[i]) * co.q[i]).collect();
        let nc = nonlin(&c);
        for i in 0..len {
            state[i] = state[i] * co.e[i] + nv[i] * co.f1[i] + (na[i] + nb[i]) * (2.0 * co.f2[i]) + nc[i] * co.f3[i];
        }
        check_finite_complex(&state, r + 1)?;
        snapshots.push(to_interleaved(&state));
    }
    Trajectory::new(rep, snapshots)
}
