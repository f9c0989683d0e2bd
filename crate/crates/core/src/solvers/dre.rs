//! Diffusion–reaction: semi-implicit Euler in the Dirichlet Legendre basis,
//!
//! ```text
//! (M/Δt + νS) α^{r+1} = M α^r / Δt - μ B (V α^r)² + B f
//! ```
//!
//! where `B` is the quadrature load matrix and `V` the synthesis matrix.

use alloc::vec::Vec;

use super::{check_finite, check_input, legendre_basis};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::problem::{InputSample, PdeProblem, Trajectory};

/// Zero initial state, constant forcing `f` (nodal values).
pub fn solve_diffusion_reaction(problem: &PdeProblem, f: &InputSample) -> Result<Trajectory> {
    check_input(problem, f)?;
    let zero = alloc::vec![0.0; problem.n];
    solve_diffusion_reaction_with(problem, &zero, |_| f.values.clone())
}

/// General form: `initial` coefficients and a forcing evaluated at each new
/// time level (`forcing(r + 1)` is used for the step `r → r + 1`).
pub fn solve_diffusion_reaction_with(
    problem: &PdeProblem,
    initial: &[f64],
    mut forcing: impl FnMut(usize) -> Vec<f64>,
) -> Result<Trajectory> {
    problem.validate()?;
    let basis = legendre_basis(problem)?;
    if initial.len() != basis.dim() {
        return Err(Error::Shape(alloc::format!("initial state has {} values, expected {}", initial.len(), basis.dim())));
    }
    let inv_dt = 1.0 / problem.dt;
    let mass = basis.mass();
    let system = mass.scaled(inv_dt).add_scaled(problem.nu, &basis.stiffness());
    let lu = Lu::factor(&system).map_err(|_| Error::SingularSystem { step: 1 })?;
    let synth = basis.synthesis();
    let load = basis.load();

    let steps = problem.total_steps();
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(initial.to_vec());
    for r in 0..steps {
        let prev = &snapshots[r];
        let u = synth.matvec(prev);
        let f = forcing(r + 1);
        let nodal: Vec<f64> = u.iter().zip(&f).map(|(u, f)| f - problem.mu * u * u).collect();
        let m_prev = mass.matvec(prev);
        let rhs: Vec<f64> = m_prev.iter().zip(load.matvec(&nodal)).map(|(m, b)| m * inv_dt + b).collect();
        let next = lu.solve(&rhs);
        check_finite(&next, r + 1)?;
        snapshots.push(next);
    }
    Trajectory::new(problem.representation(), snapshots)
}
