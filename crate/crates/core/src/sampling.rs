//! Seeded random input functions.
//!
//! Every draw is keyed by `(seed, sample index, mode index)`: the sample index
//! selects a ChaCha stream and the mode index a fixed word offset inside it,
//! so sample `p` does not depend on batch size, order, or thread count.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_jittered, Matrix};
use crate::math;
use crate::problem::{Family, InputSample, PdeProblem};
use crate::spectral::{FourierGrid, LegendreBasis};

/// Words reserved per mode: two `u64` draws.
const WORDS_PER_KEY: u128 = 4;

/// Random source for one `(seed, sample)` pair.
#[derive(Debug, Clone)]
pub struct KeyedRng {
    rng: ChaCha8Rng,
}

impl KeyedRng {
    pub fn new(seed: u64, sample: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        Self { rng }
    }

    fn seek(&mut self, key: usize) {
        self.rng.set_word_pos(key as u128 * WORDS_PER_KEY);
    }

    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)` for key `key`.
    pub fn uniform(&mut self, key: usize) -> f64 {
        self.seek(key);
        self.unit()
    }

    /// Pair of independent standard normals for key `key` (Box–Muller).
    pub fn normal_pair(&mut self, key: usize) -> (f64, f64) {
        self.seek(key);
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let (s, c) = math::sincos(math::TWO_PI * u2);
        (r * c, r * s)
    }

    pub fn normal(&mut self, key: usize) -> f64 {
        self.normal_pair(key).0
    }

    /// Standard complex normal, `E|z|² = 1`.
    pub fn complex_normal(&mut self, key: usize) -> Complex64 {
        let (a, b) = self.normal_pair(key);
        Complex64::new(a, b) * core::f64::consts::FRAC_1_SQRT_2
    }
}

/// Periodic Gaussian random field `N(0, σ²(-Δ + τ²I)^{-γ})` on the 2π-torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrfSpec {
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
    pub dims: usize,
    pub n: usize,
    pub periodic: bool,
    pub seed: u64,
}

impl GrfSpec {
    /// Input distribution for a Fourier family.
    pub fn for_family(family: Family, n: usize, seed: u64) -> Option<Self> {
        let (sigma, tau, gamma) = match family {
            Family::Burgers => (25.0, 5.0, 2.0),
            Family::Advection => (30.0, 8.0, 2.0),
            Family::Kse2d => (4.0, 2.0, 2.5),
            Family::Nse2d => (9.0, 3.0, 2.5),
            _ => return None,
        };
        Some(Self { sigma, tau, gamma, dims: family.dims(), n, periodic: true, seed })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(alloc::format!("GRF spec: {m}")));
        if !self.periodic {
            return bad("only periodic fields are supported");
        }
        if self.dims != 1 && self.dims != 2 {
            return bad("dims must be 1 or 2");
        }
        if !(self.sigma > 0.0) {
            return bad("sigma must be positive");
        }
        if !(self.tau >= 0.0) {
            return bad("tau must be nonnegative");
        }
        if !(self.gamma > self.dims as f64 / 2.0) {
            return bad("gamma must exceed dims/2");
        }
        if self.n < 2 || self.n % 2 != 0 {
            return bad("N must be even and at least 2");
        }
        Ok(())
    }

    /// Standard deviation of a mode with `|k|² = k2`.
    pub fn mode_scale(&self, k2: f64) -> f64 {
        self.sigma * math::powf(k2 + self.tau * self.tau, -self.gamma / 2.0)
    }
}

/// Spectral coefficients `α_ξ = F_ξ(u)` of a draw, in storage order.
///
/// The mean mode is zero; self-conjugate modes get a real normal; every
/// other pair is drawn once at its lower storage index and mirrored.
pub fn grf_coefficients(spec: &GrfSpec, sample: u64) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let grid = FourierGrid::new(spec.n, spec.dims)?;
    let mut rng = KeyedRng::new(spec.seed, sample);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 1..grid.len() {
        let partner = grid.conj_index(idx);
        if partner < idx {
            continue;
        }
        let scale = spec.mode_scale(grid.k_squared(idx));
        if partner == idx {
            c[idx] = Complex64::new(scale * rng.normal(idx), 0.0);
        } else {
            let z = rng.complex_normal(idx) * scale;
            c[idx] = z;
            c[partner] = z.conj();
        }
    }
    Ok(c)
}

/// One periodic GRF draw on the `N` (or `N × N`) Fourier nodes: the scaled
/// modes pushed through the inverse transform, so `F_ξ(u)` has variance
/// `σ²(|ξ|² + τ²)^{-γ}`.
pub fn sample_grf_periodic(spec: &GrfSpec, sample: u64) -> Result<Vec<f64>> {
    let alpha = grf_coefficients(spec, sample)?;
    let grid = FourierGrid::new(spec.n, spec.dims)?;
    let field = grid.inverse(&alpha)?;
    debug_assert!(field.iter().all(|v| v.im.abs() <= 1e-13 * (1.0 + v.re.abs())));
    Ok(field.into_iter().map(|v| v.re).collect())
}

/// `a = ã - min ã + 1`; returns `(a, ã)`.
pub fn sample_advection_coefficient(spec: &GrfSpec, sample: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let raw = sample_grf_periodic(spec, sample)?;
    Ok((shift_to_unit_minimum(&raw), raw))
}

pub fn shift_to_unit_minimum(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    raw.iter().map(|v| v - min + 1.0).collect()
}

/// Mean-zero Gaussian process with squared-exponential covariance
/// `amplitude² exp(-(x - x')² / (2ℓ²))` on a fixed set of nodes.
#[derive(Debug, Clone)]
pub struct SquaredExponentialSampler {
    factor: Matrix,
    pub seed: u64,
}

impl SquaredExponentialSampler {
    pub const DEFAULT_AMPLITUDE: f64 = 25.0;
    pub const DEFAULT_LENGTH_SCALE: f64 = 0.2;
    pub const JITTER: f64 = 1e-10;

    pub fn new(nodes: &[f64], amplitude: f64, length_scale: f64, seed: u64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("forcing needs at least two nodes".into()));
        }
        if !(amplitude > 0.0) || !(length_scale > 0.0) {
            return Err(Error::InvalidParameter("kernel amplitude and length scale must be positive".into()));
        }
        let var = amplitude * amplitude;
        let cov = Matrix::from_fn(nodes.len(), nodes.len(), |i, j| {
            let d = nodes[i] - nodes[j];
            var * math::exp(-d * d / (2.0 * length_scale * length_scale))
        });
        Ok(Self { factor: cholesky_jittered(&cov, Self::JITTER)?, seed })
    }

    pub fn sample(&self, sample: u64) -> Vec<f64> {
        let mut rng = KeyedRng::new(self.seed, sample);
        let z: Vec<f64> = (0..self.factor.rows()).map(|j| rng.normal(j)).collect();
        self.factor.matvec(&z)
    }
}

/// Forcing for the diffusion–reaction problem on its Gauss–Lobatto nodes.
pub fn sample_forcing_dre(seed: u64, n: usize, sample: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("forcing needs N >= 2, got {n}")));
    }
    let basis = LegendreBasis::dirichlet(n)?;
    let s = SquaredExponentialSampler::new(
        basis.nodes(),
        SquaredExponentialSampler::DEFAULT_AMPLITUDE,
        SquaredExponentialSampler::DEFAULT_LENGTH_SCALE,
        seed,
    )?;
    Ok(s.sample(sample))
}

/// `(1-x)⁴(1+x) Σ_{j<4} a_j φ_j(x)` on the basis nodes.
pub fn cde_initial_from_weights(basis: &LegendreBasis, a: &[f64; 4]) -> Result<Vec<f64>> {
    if basis.n_poly() < 4 {
        return Err(Error::InvalidParameter("boundary-layer initial data needs at least 4 basis functions".into()));
    }
    Ok(basis
        .nodes()
        .iter()
        .enumerate()
        .map(|(m, &x)| {
            let s: f64 = (0..4).map(|j| a[j] * basis.value(j, m)).sum();
            math::powi(1.0 - x, 4) * (1.0 + x) * s
        })
        .collect())
}

/// Returns `(u0, a)` with `a_j ~ U[0, 1)`.
pub fn sample_cde_initial(seed: u64, basis: &LegendreBasis, sample: u64) -> Result<(Vec<f64>, [f64; 4])> {
    let mut rng = KeyedRng::new(seed, sample);
    let a = [rng.uniform(0), rng.uniform(1), rng.uniform(2), rng.uniform(3)];
    Ok((cde_initial_from_weights(basis, &a)?, a))
}

/// Draws input `sample` for `problem` with the family's default distribution.
#[derive(Debug, Clone)]
pub struct InputSampler {
    family: Family,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Grf(GrfSpec),
    Kernel(SquaredExponentialSampler),
    Weights { seed: u64, basis: LegendreBasis },
}

impl InputSampler {
    pub fn new(problem: &PdeProblem, seed: u64) -> Result<Self> {
        Self::with_length_scale(problem, seed, SquaredExponentialSampler::DEFAULT_LENGTH_SCALE)
    }

    pub fn with_length_scale(problem: &PdeProblem, seed: u64, length_scale: f64) -> Result<Self> {
        let kind = match problem.family {
            Family::DiffusionReaction => {
                let basis = LegendreBasis::dirichlet(problem.n)?;
                SamplerKind::Kernel(SquaredExponentialSampler::new(
                    basis.nodes(),
                    SquaredExponentialSampler::DEFAULT_AMPLITUDE,
                    length_scale,
                    seed,
                )?)
            }
            Family::ConvectionDiffusionBL => {
                SamplerKind::Weights { seed, basis: LegendreBasis::dirichlet(problem.n)? }
            }
            f => SamplerKind::Grf(GrfSpec::for_family(f, problem.n, seed).expect("Fourier family")),
        };
        Ok(Self { family: problem.family, kind })
    }

    /// Replaces the GRF parameters (Fourier families only).
    pub fn with_grf(mut self, spec: GrfSpec) -> Result<Self> {
        spec.validate()?;
        match &mut self.kind {
            SamplerKind::Grf(s) => *s = spec,
            _ => return Err(Error::InvalidParameter(alloc::format!("{} inputs are not GRF draws", self.family))),
        }
        Ok(self)
    }

    pub fn draw(&self, sample: u64) -> Result<InputSample> {
        let mut out = InputSample::new(self.family, Vec::new());
        match &self.kind {
            SamplerKind::Kernel(k) => out.values = k.sample(sample),
            SamplerKind::Weights { seed, basis } => {
                let (u0, a) = sample_cde_initial(*seed, basis, sample)?;
                out.values = u0;
                out.aux = a.to_vec();
            }
            SamplerKind::Grf(spec) if self.family == Family::Advection => {
                let (a, raw) = sample_advection_coefficient(spec, sample)?;
                out.values = a;
                out.aux = raw;
            }
            SamplerKind::Grf(spec) => out.values = sample_grf_periodic(spec, sample)?,
        }
        Ok(out)
    }

    pub fn draw_many(&self, first: u64, count: usize) -> Result<Vec<InputSample>> {
        (0..count as u64).map(|p| self.draw(first + p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers_spec(seed: u64) -> GrfSpec {
        GrfSpec::for_family(Family::Burgers, 32, seed).unwrap()
    }

    #[test]
    fn draws_are_reproducible_and_keyed() {
        let s = burgers_spec(7);
        assert_eq!(sample_grf_periodic(&s, 3).unwrap(), sample_grf_periodic(&s, 3).unwrap());
        assert_ne!(sample_grf_periodic(&s, 3).unwrap(), sample_grf_periodic(&s, 4).unwrap());
        assert_ne!(sample_grf_periodic(&s, 3).unwrap(), sample_grf_periodic(&burgers_spec(8), 3).unwrap());
    }

    #[test]
    fn spec_validation() {
        let mut s = burgers_spec(0);
        s.gamma = 0.5;
        assert!(s.validate().is_err());
        let mut s = burgers_spec(0);
        s.n = 31;
        assert!(s.validate().is_err());
        let mut s = burgers_spec(0);
        s.sigma = 0.0;
        assert!(sample_grf_periodic(&s, 0).is_err());
    }

    #[test]
    fn advection_minimum_is_one() {
        let s = GrfSpec::for_family(Family::Advection, 32, 1).unwrap();
        for p in 0..20 {
            let (a, raw) = sample_advection_coefficient(&s, p).unwrap();
            assert_eq!(a.iter().copied().fold(f64::INFINITY, f64::min), 1.0);
            assert_eq!(a, shift_to_unit_minimum(&raw));
        }
        assert_eq!(shift_to_unit_minimum(&[0.0; 8]), vec![1.0; 8]);
    }

    #[test]
    fn cde_initial_closed_form() {
        let basis = LegendreBasis::dirichlet(32).unwrap();
        let u = cde_initial_from_weights(&basis, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        for (v, &x) in u.iter().zip(basis.nodes()) {
            let expect = math::powi(1.0 - x, 4) * (1.0 + x) * 1.5 * (1.0 - x * x);
            assert!((v - expect).abs() < 1e-13);
        }
        let (u, _) = sample_cde_initial(3, &basis, 0).unwrap();
        assert_eq!(u[0], 0.0);
        assert!(u[u.len() - 1].abs() < 1e-12);
        assert!(cde_initial_from_weights(&LegendreBasis::dirichlet(3).unwrap(), &[1.0; 4]).is_err());
    }

    #[test]
    fn uniform_weights_in_range() {
        let mut rng = KeyedRng::new(1, 2);
        for k in 0..1000 {
            let u = rng.uniform(k);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
