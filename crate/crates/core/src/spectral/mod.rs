//! Bases, quadrature, and discrete transforms.

pub mod basis;
pub mod fft;
pub mod fourier;
pub mod legendre;

pub use basis::{corrector_eval, corrector_deriv, LegendreBasis};
pub use fourier::{CoeffSpectrum, FourierGrid};
pub use legendre::{gauss_lobatto, legendre_eval, legendre_eval_with_deriv};
