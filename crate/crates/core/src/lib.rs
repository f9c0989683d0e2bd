//! Spectral coefficient learning for parametric PDEs.
//!
//! The crate bundles four layers that build on each other:
//!
//! * [`spectral`]: Legendre/Gauss–Lobatto machinery, the boundary-layer
//!   corrector, and discrete Fourier transforms with the `h` / `1/2π`
//!   normalization used throughout.
//! * [`solvers`]: classical spectral time-marching solvers for six model
//!   problems. Their trajectories are the reference data and the oracle for
//!   the losses.
//! * [`residuals`]: discrete weak-residual losses. Each loss is the exact
//!   defect of the matching solver scheme, so a solver trajectory drives it
//!   to rounding level.
//! * [`net`], [`autodiff`], [`optim`], [`trainer`]: a small convolutional
//!   network predicting coefficients, a tape-based reverse-mode engine,
//!   L-BFGS, and the segment-by-segment training loop.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature pulls in
//! `std` and evaluates per-sample losses on a rayon pool; results are summed
//! in sample order, so they are bit-identical to the serial path.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod autodiff;
pub mod error;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod net;
pub mod objective;
pub mod optim;
pub mod problem;
pub mod residuals;
pub mod sampling;
pub mod solvers;
pub mod spectral;
pub mod trainer;

pub use error::{Error, Result};
pub use problem::{Family, InputKind, InputSample, PdeProblem, Representation, Trajectory};
