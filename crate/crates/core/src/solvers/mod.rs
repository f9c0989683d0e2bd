//! Reference solvers. Each one is written directly against `Complex64` /
//! `f64` arrays and is independent of the residual code, so agreement between
//! the two is a real check.

mod cde;
mod dre;
mod fourier1d;
mod kse;
mod nse;

use alloc::vec::Vec;

use num_complex::Complex64;

pub use cde::{solve_cde_boundary_layer, solve_cde_from, CDE_CONDITION_LIMIT};
pub use dre::{solve_diffusion_reaction, solve_diffusion_reaction_with};
pub use fourier1d::{advection_initial, solve_advection, solve_advection_from, solve_burgers, solve_burgers_from};
pub use kse::{etd_coefficients, kse_symbol, solve_kse_2d, solve_kse_from, EtdCoefficients};
pub use nse::{poisson_curl, solve_nse_2d, solve_nse_from};

use crate::error::{Error, Result};
use crate::problem::{to_interleaved, Family, InputSample, PdeProblem, Trajectory};
use crate::spectral::{FourierGrid, LegendreBasis};

/// Solves `problem` for one input over the full horizon.
pub fn solve(problem: &PdeProblem, input: &InputSample) -> Result<Trajectory> {
    check_input(problem, input)?;
    match problem.family {
        Family::DiffusionReaction => solve_diffusion_reaction(problem, input),
        Family::Burgers => solve_burgers(problem, input),
        Family::Advection => solve_advection(problem, input),
        Family::ConvectionDiffusionBL => solve_cde_boundary_layer(problem, input),
        Family::Kse2d => solve_kse_2d(problem, input),
        Family::Nse2d => solve_nse_2d(problem, input),
    }
}

/// The coefficient snapshot `α⁰` for an input.
pub fn initial_coefficients(problem: &PdeProblem, input: &InputSample) -> Result<Vec<f64>> {
    check_input(problem, input)?;
    match problem.family {
        Family::DiffusionReaction => Ok(alloc::vec![0.0; problem.n]),
        Family::ConvectionDiffusionBL => match problem.discretization()? {
            crate::problem::Discretization::Legendre(b) => b.project(&input.values),
            _ => unreachable!(),
        },
        Family::Advection => {
            let grid = FourierGrid::new(problem.n, 1)?;
            Ok(to_interleaved(&grid.dft(&advection_initial(&grid))?.values))
        }
        f => {
            let grid = FourierGrid::new(problem.n, f.dims())?;
            Ok(to_interleaved(&grid.dft(&input.values)?.values))
        }
    }
}

pub(crate) fn check_input(problem: &PdeProblem, input: &InputSample) -> Result<()> {
    problem.validate()?;
    if input.family != problem.family {
        return Err(Error::Shape(alloc::format!("{} input given to a {} problem", input.family, problem.family)));
    }
    if input.values.len() != problem.input_len() {
        return Err(Error::Shape(alloc::format!(
            "{} input has {} values, expected {}",
            problem.family,
            input.values.len(),
            problem.input_len()
        )));
    }
    Ok(())
}

pub(crate) fn check_finite_complex(values: &[Complex64], step: usize) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

pub(crate) fn check_finite(values: &[f64], step: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

/// Pseudo-spectral helpers shared by the Fourier solvers.
#[derive(Debug, Clone)]
pub(crate) struct Pseudo {
    pub grid: FourierGrid,
    pub mask: Option<Vec<f64>>,
}

impl Pseudo {
    pub fn new(n: usize, dims: usize, dealias: bool) -> Result<Self> {
        let grid = FourierGrid::new(n, dims)?;
        let mask = dealias.then(|| grid.two_thirds_mask());
        Ok(Self { grid, mask })
    }

    pub fn to_grid(&self, alpha: &[Complex64]) -> Vec<f64> {
        self.grid.idft_real(alpha).expect("length checked by caller")
    }

    /// Forward transform of a real product, masked when dealiasing.
    pub fn nonlinear(&self, values: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut out = self.grid.forward(&c).expect("length checked by caller");
        if let Some(m) = &self.mask {
            out.iter_mut().zip(m).for_each(|(v, m)| *v *= m);
        }
        out
    }

    /// `i ξ_axis α` (axis 0 is `x`, the outer index in 2D).
    pub fn deriv(&self, alpha: &[Complex64], axis: usize) -> Vec<Complex64> {
        let n = self.grid.n();
        alpha
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let slot = if self.grid.dims() == 1 {
                    idx
                } else if axis == 0 {
                    idx / n
                } else {
                    idx % n
                };
                a * Complex64::new(0.0, self.grid.deriv_symbol(slot))
            })
            .collect()
    }
}

pub(crate) fn legendre_basis(problem: &PdeProblem) -> Result<LegendreBasis> {
    match problem.discretization()? {
        crate::problem::Discretization::Legendre(b) => Ok(b),
        _ => Err(Error::InvalidParameter(alloc::format!("{} is not a Legendre family", problem.family))),
    }
}
