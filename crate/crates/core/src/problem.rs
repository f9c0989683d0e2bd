//! Problem descriptions, sampled inputs, and coefficient trajectories.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{FourierGrid, LegendreBasis};

/// The six model problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `u_t - ν u_xx + μ u² = f` on `(-1, 1)`, homogeneous Dirichlet.
    DiffusionReaction,
    /// `u_t - ν u_xx + μ u u_x = 0`, periodic.
    Burgers,
    /// `u_t + a(x) u_x = 0`, periodic.
    Advection,
    /// `u_t - ν u_xx - u_x = 0` on `(-1, 1)` with a boundary layer at `x = -1`.
    ConvectionDiffusionBL,
    /// `u_t + Δu + Δ²u + |∇u|² = 0` on the 2π-torus.
    Kse2d,
    /// Vorticity form of incompressible Navier–Stokes on the 2π-torus.
    Nse2d,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::DiffusionReaction,
        Family::Burgers,
        Family::Advection,
        Family::ConvectionDiffusionBL,
        Family::Kse2d,
        Family::Nse2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::DiffusionReaction => "diffusion_reaction",
            Family::Burgers => "burgers",
            Family::Advection => "advection",
            Family::ConvectionDiffusionBL => "convection_diffusion_bl",
            Family::Kse2d => "kse2d",
            Family::Nse2d => "nse2d",
        }
    }

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::DiffusionReaction => "Diffusion reaction",
            Family::Burgers => "Burgers",
            Family::Advection => "Advection",
            Family::ConvectionDiffusionBL => "Convection diffusion with a boundary layer",
            Family::Kse2d => "2D Kuramoto Sivashinsky",
            Family::Nse2d => "2D Navier-Stokes",
        }
    }

    pub fn is_legendre(self) -> bool {
        matches!(self, Family::DiffusionReaction | Family::ConvectionDiffusionBL)
    }

    pub fn dims(self) -> usize {
        match self {
            Family::Kse2d | Family::Nse2d => 2,
            _ => 1,
        }
    }

    pub fn input_kind(self) -> InputKind {
        match self {
            Family::DiffusionReaction => InputKind::Forcing,
            Family::Advection => InputKind::Coefficient,
            _ => InputKind::InitialCondition,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown PDE family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Forcing,
    Coefficient,
    InitialCondition,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Forcing => "forcing",
            InputKind::Coefficient => "coefficient",
            InputKind::InitialCondition => "initial_condition",
        }
    }
}

/// External forcing for the vorticity equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    None,
    /// `f = -n cos(n y)`.
    Kolmogorov { n: u32 },
    /// Grid values on the problem grid.
    Field(Vec<f64>),
}

/// Sign convention for the Kuramoto–Sivashinsky linear symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KseSymbol {
    /// `c = |k|² - |k|⁴`, the symbol of `-Δ - Δ²`.
    Derived,
    /// `c = -|k|⁴ - |k|²`, as printed alongside the scheme.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    pub family: Family,
    pub nu: f64,
    pub mu: f64,
    /// Reynolds number, vorticity equation only.
    pub re: Option<f64>,
    pub forcing: Forcing,
    /// Basis functions (Legendre) or modes per dimension (Fourier).
    pub n: usize,
    pub dt: f64,
    /// Segments.
    pub q: usize,
    /// Steps per segment.
    pub r: usize,
    /// Boundary-layer corrector in the basis (convection–diffusion only).
    pub corrector: bool,
    /// 2/3-rule truncation of the nonlinear terms in the 2D solvers.
    pub dealias: bool,
    pub kse_symbol: KseSymbol,
}

impl PdeProblem {
    /// Defaults for each family (grid sizes, coefficients, and time stepping).
    pub fn defaults(family: Family) -> Self {
        let base = PdeProblem {
            family,
            nu: 0.0,
            mu: 0.0,
            re: None,
            forcing: Forcing::None,
            n: 32,
            dt: 0.01,
            q: 10,
            r: 10,
            corrector: false,
            dealias: false,
            kse_symbol: KseSymbol::Derived,
        };
        match family {
            Family::DiffusionReaction => PdeProblem { nu: 0.01, mu: -0.01, n: 50, ..base },
            Family::Burgers => PdeProblem { nu: 0.5, mu: 5.0, ..base },
            Family::Advection => base,
            Family::ConvectionDiffusionBL => PdeProblem { nu: 1e-6, mu: 1.0, corrector: true, ..base },
            Family::Kse2d => PdeProblem { n: 30, r: 5, ..base },
            Family::Nse2d => PdeProblem {
                re: Some(200.0),
                nu: 1.0 / 200.0,
                forcing: Forcing::Kolmogorov { n: 1 },
                r: 5,
                ..base
            },
        }
    }

    /// Final time `Δt · Q · R`.
    pub fn t_final(&self) -> f64 {
        self.dt * (self.q * self.r) as f64
    }

    pub fn total_steps(&self) -> usize {
        self.q * self.r
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(alloc::format!("dt must be positive, got {}", self.dt));
        }
        if self.q == 0 || self.r == 0 {
            return bad("Q and R must be positive".into());
        }
        if self.n == 0 {
            return bad("N must be positive".into());
        }
        if !self.family.is_legendre() && self.n % 2 != 0 {
            return bad(alloc::format!("Fourier families need an even N, got {}", self.n));
        }
        match (self.family, self.re) {
            (Family::Nse2d, Some(re)) if re > 0.0 => {}
            (Family::Nse2d, _) => return bad("the vorticity equation needs Re > 0".into()),
            (_, Some(_)) => return bad(alloc::format!("Re only applies to nse2d, not {}", self.family)),
            _ => {}
        }
        if self.corrector && self.family != Family::ConvectionDiffusionBL {
            return bad("the corrector only applies to convection_diffusion_bl".into());
        }
        if self.family == Family::ConvectionDiffusionBL && self.corrector && !(self.nu > 0.0) {
            return bad("the corrector needs nu > 0".into());
        }
        if matches!(self.forcing, Forcing::Field(_) | Forcing::Kolmogorov { .. }) && self.family != Family::Nse2d {
            return bad("explicit forcing is only used by nse2d".into());
        }
        if let Forcing::Field(f) = &self.forcing {
            if f.len() != self.n * self.n {
                return bad(alloc::format!("forcing field has {} values, expected {}", f.len(), self.n * self.n));
            }
        }
        Ok(())
    }

    /// Checks a requested final time against `Δt · Q · R`.
    pub fn check_final_time(&self, t_final: f64) -> Result<()> {
        let t = self.t_final();
        if (t - t_final).abs() > 1e-12 * t_final.abs().max(1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "T = {t_final} but dt * Q * R = {} * {} * {} = {t}",
                self.dt,
                self.q,
                self.r
            )));
        }
        Ok(())
    }

    pub fn representation(&self) -> Representation {
        match self.family {
            Family::DiffusionReaction => Representation::Legendre { n: self.n },
            Family::ConvectionDiffusionBL if self.corrector => Representation::LegendreEnriched { n: self.n },
            Family::ConvectionDiffusionBL => Representation::Legendre { n: self.n },
            Family::Burgers | Family::Advection => Representation::Fourier1d { n: self.n },
            Family::Kse2d | Family::Nse2d => Representation::Fourier2d { n: self.n },
        }
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Ok(match self.family {
            Family::DiffusionReaction => Discretization::Legendre(LegendreBasis::dirichlet(self.n)?),
            Family::ConvectionDiffusionBL if self.corrector => {
                Discretization::Legendre(LegendreBasis::enriched(self.n, self.nu)?)
            }
            Family::ConvectionDiffusionBL => Discretization::Legendre(LegendreBasis::dirichlet(self.n)?),
            f => Discretization::Fourier(FourierGrid::new(self.n, f.dims())?),
        })
    }

    /// Number of input values per sample (grid points).
    pub fn input_len(&self) -> usize {
        match self.family {
            Family::DiffusionReaction | Family::ConvectionDiffusionBL => self.n + 2,
            Family::Burgers | Family::Advection => self.n,
            Family::Kse2d | Family::Nse2d => self.n * self.n,
        }
    }

    /// Forcing grid values for the vorticity equation.
    pub fn forcing_field(&self) -> Vec<f64> {
        let len = self.n * self.n;
        match &self.forcing {
            Forcing::None => alloc::vec![0.0; len],
            Forcing::Field(f) => f.clone(),
            Forcing::Kolmogorov { n: k } => {
                let h = crate::math::TWO_PI / self.n as f64;
                let kf = *k as f64;
                (0..len).map(|i| -kf * crate::math::cos(kf * h * (i % self.n) as f64)).collect()
            }
        }
    }
}

/// How a snapshot's coefficients are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Legendre { n: usize },
    LegendreEnriched { n: usize },
    /// `n` complex modes, interleaved `(re, im)`.
    Fourier1d { n: usize },
    /// `n × n` complex modes, interleaved `(re, im)`.
    Fourier2d { n: usize },
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Legendre { .. } => "legendre",
            Representation::LegendreEnriched { .. } => "legendre_enriched",
            Representation::Fourier1d { .. } => "fourier1d",
            Representation::Fourier2d { .. } => "fourier2d",
        }
    }

    /// Real values per snapshot.
    pub fn snapshot_len(self) -> usize {
        match self {
            Representation::Legendre { n } => n,
            Representation::LegendreEnriched { n } => n + 1,
            Representation::Fourier1d { n } => 2 * n,
            Representation::Fourier2d { n } => 2 * n * n,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Representation::Fourier1d { .. } | Representation::Fourier2d { .. })
    }
}

/// Spatial discretization used to turn coefficients into grid values.
#[derive(Debug, Clone)]
pub enum Discretization {
    Legendre(LegendreBasis),
    Fourier(FourierGrid),
}

impl Discretization {
    /// Grid values of one snapshot (Gauss–Lobatto nodes or Fourier nodes).
    pub fn reconstruct(&self, snapshot: &[f64]) -> Vec<f64> {
        match self {
            Discretization::Legendre(b) => b.reconstruct(snapshot),
            Discretization::Fourier(g) => {
                let spec = to_complex(snapshot);
                g.idft_real(&spec).expect("snapshot length matches grid")
            }
        }
    }

    pub fn grid_len(&self) -> usize {
        match self {
            Discretization::Legendre(b) => b.n_nodes(),
            Discretization::Fourier(g) => g.len(),
        }
    }
}

/// One drawn parameter function on the solver grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSample {
    pub kind: InputKind,
    pub family: Family,
    /// Grid values, row-major (`x` outermost) for 2D.
    pub values: Vec<f64>,
    /// Raw draws kept for re-derivation: the unshifted field for advection
    /// coefficients, the four uniform weights for boundary-layer initial data.
    pub aux: Vec<f64>,
}

impl InputSample {
    pub fn new(family: Family, values: Vec<f64>) -> Self {
        Self { kind: family.input_kind(), family, values, aux: Vec::new() }
    }
}

/// Coefficient snapshots `α⁰ … α^{QR}` (or any contiguous range).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub representation: Representation,
    pub snapshots: Vec<Vec<f64>>,
    /// Non-fatal diagnostics, e.g. conditioning warnings.
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn new(representation: Representation, snapshots: Vec<Vec<f64>>) -> Result<Self> {
        let len = representation.snapshot_len();
        if let Some(bad) = snapshots.iter().find(|s| s.len() != len) {
            return Err(Error::Shape(alloc::format!(
                "{} snapshot has {} values, expected {len}",
                representation.name(),
                bad.len()
            )));
        }
        Ok(Self { representation, snapshots, warnings: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn complex_snapshot(&self, r: usize) -> Vec<Complex64> {
        to_complex(&self.snapshots[r])
    }

    /// `Σ_r ‖α^r‖²`.
    pub fn energy(&self) -> f64 {
        self.snapshots.iter().flat_map(|s| s.iter()).map(|v| v * v).sum()
    }
}

pub fn to_complex(interleaved: &[f64]) -> Vec<Complex64> {
    interleaved.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

pub fn to_interleaved(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|c| [c.re, c.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_final_times() {
        for f in Family::ALL {
            let p = PdeProblem::defaults(f);
            p.validate().unwrap();
            let t = if f.dims() == 2 { 0.5 } else { 1.0 };
            p.check_final_time(t).unwrap();
        }
    }

    #[test]
    fn final_time_mismatch_rejected() {
        let p = PdeProblem::defaults(Family::Burgers);
        assert!(p.check_final_time(0.9).is_err());
    }

    #[test]
    fn family_parameter_presence() {
        let mut p = PdeProblem::defaults(Family::Burgers);
        p.re = Some(10.0);
        assert!(p.validate().is_err());
        let mut p = PdeProblem::defaults(Family::Nse2d);
        p.re = None;
        assert!(p.validate().is_err());
    }

    #[test]
    fn family_names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("heat".parse::<Family>().is_err());
    }

    #[test]
    fn trajectory_shape_checked() {
        let rep = Representation::LegendreEnriched { n: 4 };
        assert!(Trajectory::new(rep, alloc::vec![alloc::vec![0.0; 5]]).is_ok());
        assert!(Trajectory::new(rep, alloc::vec![alloc::vec![0.0; 4]]).is_err());
    }
}
