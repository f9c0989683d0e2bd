//! Convection–diffusion with a boundary layer: fully implicit Euler,
//!
//! ```text
//! (M/Δt + νS - μC) α^{r+1} = M α^r / Δt,   μ = 1,
//! ```
//!
//! on the basis enriched with the corrector (or the plain basis when the
//! corrector is disabled).

use alloc::vec::Vec;

use super::{check_finite, check_input, legendre_basis};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::problem::{InputSample, PdeProblem, Trajectory};

/// Condition numbers above this are reported as a trajectory warning.
pub const CDE_CONDITION_LIMIT: f64 = 1e14;

pub fn solve_cde_boundary_layer(problem: &PdeProblem, u0: &InputSample) -> Result<Trajectory> {
    check_input(problem, u0)?;
    let basis = legendre_basis(problem)?;
    solve_cde_from(problem, &basis.project(&u0.values)?)
}

pub fn solve_cde_from(problem: &PdeProblem, initial: &[f64]) -> Result<Trajectory> {
    problem.validate()?;
    let basis = legendre_basis(problem)?;
    if initial.len() != basis.dim() {
        return Err(Error::Shape(alloc::format!("initial state has {} values, expected {}", initial.len(), basis.dim())));
    }
    let inv_dt = 1.0 / problem.dt;
    let mass = basis.mass();
    let system = mass.scaled(inv_dt).add_scaled(problem.nu, &basis.stiffness()).add_scaled(-problem.mu, &basis.convection());
    let lu = Lu::factor(&system).map_err(|_| Error::SingularSystem { step: 1 })?;
    let cond = lu.condition_one(&system);

    let steps = problem.total_steps();
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(initial.to_vec());
    for r in 0..steps {
        let rhs: Vec<f64> = mass.matvec(&snapshots[r]).into_iter().map(|v| v * inv_dt).collect();
        let next = lu.solve(&rhs);
        check_finite(&next, r + 1)?;
        snapshots.push(next);
    }
    let mut traj = Trajectory::new(problem.representation(), snapshots)?;
    if !(cond <= CDE_CONDITION_LIMIT) {
        traj.warnings.push(alloc::format!("implicit Euler system is ill-conditioned: 1-norm condition {cond:.3e}"));
    }
    Ok(traj)
}
