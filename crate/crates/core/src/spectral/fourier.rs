//! Periodic grids on `[0, 2π)` and the discrete Fourier transform pair
//!
//! ```text
//! F_ξ(u)   = h Σ_n e^{-iξx_n} u(x_n)
//! F⁻¹_n(α) = 1/(2π) Σ_ξ e^{iξx_n} α_ξ
//! ```
//!
//! with `h = 2π/N` and `ξ = -N/2+1, …, N/2`. The 2D pair is the tensor
//! product (`h²` and `1/(2π)²`).
//!
//! Spectra are stored in FFT order `{0, 1, …, N/2, -N/2+1, …, -1}`; 2D
//! spectra and fields are row-major with the `x` index outermost. Callers
//! should go through [`FourierGrid::wavenumber`] rather than raw indices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::fft::FftPlan;
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierGrid {
    n: usize,
    dims: usize,
    plan: FftPlan,
}

impl FourierGrid {
    pub fn new(n: usize, dims: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(alloc::format!("Fourier grid needs an even N >= 2, got {n}")));
        }
        if dims != 1 && dims != 2 {
            return Err(Error::InvalidParameter(alloc::format!("Fourier grid dims must be 1 or 2, got {dims}")));
        }
        Ok(Self { n, dims, plan: FftPlan::new(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Total number of grid points (and of modes).
    pub fn len(&self) -> usize {
        if self.dims == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        math::TWO_PI / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| k as f64 * self.spacing()).collect()
    }

    /// Wavenumber of storage slot `idx` along one axis.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage slot of wavenumber `xi` along one axis.
    pub fn index_of(&self, xi: i64) -> usize {
        let n = self.n as i64;
        assert!(xi > -n / 2 && xi <= n / 2, "wavenumber {xi} out of range");
        xi.rem_euclid(n) as usize
    }

    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    /// Symbol of `∂/∂x` along one axis divided by `i`. The Nyquist mode gets
    /// zero so odd derivatives of real fields stay real.
    pub fn deriv_symbol(&self, idx: usize) -> f64 {
        if self.is_nyquist(idx) {
            0.0
        } else {
            self.wavenumber(idx) as f64
        }
    }

    /// Slot of the conjugate partner `-ξ` of slot `idx` (flattened for 2D).
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.n;
        let neg = |i: usize| (n - i) % n;
        if self.dims == 1 {
            neg(idx)
        } else {
            neg(idx / n) * n + neg(idx % n)
        }
    }

    /// `|k|²` for flattened slot `idx`.
    pub fn k_squared(&self, idx: usize) -> f64 {
        if self.dims == 1 {
            let k = self.wavenumber(idx) as f64;
            k * k
        } else {
            let kx = self.wavenumber(idx / self.n) as f64;
            let ky = self.wavenumber(idx % self.n) as f64;
            kx * kx + ky * ky
        }
    }

    /// `h` (1D) or `h²` (2D).
    pub fn forward_scale(&self) -> f64 {
        let h = self.spacing();
        if self.dims == 1 {
            h
        } else {
            h * h
        }
    }

    /// `1/(2π)` (1D) or `1/(2π)²` (2D).
    pub fn inverse_scale(&self) -> f64 {
        if self.dims == 1 {
            1.0 / math::TWO_PI
        } else {
            1.0 / (math::TWO_PI * math::TWO_PI)
        }
    }

    /// Forward transform of complex grid data.
    pub fn forward(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        self.transform(&mut out, false);
        let scale = self.forward_scale();
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    /// Inverse transform to complex grid data.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(spectrum.len())?;
        let mut out = spectrum.to_vec();
        self.transform(&mut out, true);
        let scale = self.inverse_scale();
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    /// Forward transform of a real field, symmetrized so the result carries
    /// exact Hermitian symmetry.
    pub fn dft(&self, values: &[f64]) -> Result<CoeffSpectrum> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut spec = CoeffSpectrum::new(self.forward(&c)?, self.n, self.dims, false);
        spec.symmetrize(self);
        Ok(spec)
    }

    /// Inverse transform, keeping only the real part.
    pub fn idft_real(&self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        Ok(self.inverse(spectrum)?.into_iter().map(|v| v.re).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Shape(alloc::format!("expected {} values on the Fourier grid, got {len}", self.len())));
        }
        Ok(())
    }

    /// Unnormalized transform along every axis (`e^{∓2πijk/N}`, no `h` or `1/2π`).
    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let run = |row: &mut [Complex64]| {
            if inverse {
                self.plan.inverse(row)
            } else {
                self.plan.forward(row)
            }
        };
        if self.dims == 1 {
            run(data);
            return;
        }
        for row in data.chunks_mut(n) {
            run(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            run(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    /// Mask that keeps modes with `|ξ| ≤ N/3` on every axis (2/3 rule).
    pub fn two_thirds_mask(&self) -> Vec<f64> {
        let cut = self.n as i64 / 3;
        let keep = |i: usize| self.wavenumber(i).abs() <= cut;
        (0..self.len())
            .map(|idx| {
                let ok = if self.dims == 1 { keep(idx) } else { keep(idx / self.n) && keep(idx % self.n) };
                if ok {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `F_ξ(u)` of a 1D real field.
pub fn dft_1d(grid: &FourierGrid, values: &[f64]) -> Result<CoeffSpectrum> {
    expect_dims(grid, 1)?;
    grid.dft(values)
}

pub fn idft_1d(grid: &FourierGrid, spectrum: &CoeffSpectrum) -> Result<Vec<f64>> {
    expect_dims(grid, 1)?;
    grid.idft_real(&spectrum.values)
}

pub fn dft_2d(grid: &FourierGrid, values: &[f64]) -> Result<CoeffSpectrum> {
    expect_dims(grid, 2)?;
    grid.dft(values)
}

pub fn idft_2d(grid: &FourierGrid, spectrum: &CoeffSpectrum) -> Result<Vec<f64>> {
    expect_dims(grid, 2)?;
    grid.idft_real(&spectrum.values)
}

fn expect_dims(grid: &FourierGrid, dims: usize) -> Result<()> {
    if grid.dims() != dims {
        return Err(Error::Shape(alloc::format!("expected a {dims}D grid, got {}D", grid.dims())));
    }
    Ok(())
}

/// Complex Fourier coefficients indexed in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSpectrum {
    pub values: Vec<Complex64>,
    pub n: usize,
    pub dims: usize,
    /// Set once the spectrum is known to satisfy `α_{-ξ} = conj(α_ξ)`.
    pub real_field: bool,
}

impl CoeffSpectrum {
    pub fn new(values: Vec<Complex64>, n: usize, dims: usize, real_field: bool) -> Self {
        Self { values, n, dims, real_field }
    }

    pub fn zeros(n: usize, dims: usize) -> Self {
        let len = if dims == 1 { n } else { n * n };
        Self::new(vec![Complex64::new(0.0, 0.0); len], n, dims, true)
    }

    /// Largest violation of `α_{-ξ} = conj(α_ξ)`.
    pub fn hermitian_defect(&self, grid: &FourierGrid) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[grid.conj_index(i)] - self.values[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Averages each conjugate pair so the symmetry holds bit-for-bit.
    pub fn symmetrize(&mut self, grid: &FourierGrid) {
        for i in 0..self.values.len() {
            let j = grid.conj_index(i);
            if j == i {
                self.values[i].im = 0.0;
            } else if j > i {
                let a = (self.values[i] + self.values[j].conj()) * 0.5;
                self.values[i] = a;
                self.values[j] = a.conj();
            }
        }
        self.real_field = true;
    }

    pub fn is_exactly_hermitian(&self, grid: &FourierGrid) -> bool {
        (0..self.values.len()).all(|i| self.values[grid.conj_index(i)] == self.values[i].conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_1d(grid: &FourierGrid, u: &[f64]) -> Vec<Complex64> {
        let h = grid.spacing();
        let x = grid.nodes();
        (0..grid.n())
            .map(|k| {
                let xi = grid.wavenumber(k) as f64;
                u.iter()
                    .zip(&x)
                    .map(|(v, xn)| {
                        let (s, c) = math::sincos(-xi * xn);
                        Complex64::new(c, s) * (h * v)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn constant_field() {
        let g = FourierGrid::new(8, 1).unwrap();
        let s = dft_1d(&g, &[1.0; 8]).unwrap();
        assert!((s.values[0].re - math::TWO_PI).abs() < 1e-13);
        for v in &s.values[1..] {
            assert!(v.norm() < 1e-13);
        }
        let g2 = FourierGrid::new(8, 2).unwrap();
        let s2 = dft_2d(&g2, &[1.0; 64]).unwrap();
        assert!((s2.values[0].re - math::TWO_PI * math::TWO_PI).abs() < 1e-12);
        assert!(s2.values[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn cosine_modes() {
        let g = FourierGrid::new(8, 1).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|&x| math::cos(x)).collect();
        let s = dft_1d(&g, &u).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let xi = g.wavenumber(k);
            let expect = if xi.abs() == 1 { math::PI } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12, "ξ={xi}");
        }
    }

    #[test]
    fn naive_sum_and_roundtrip() {
        let g = FourierGrid::new(32, 1).unwrap();
        let u: Vec<f64> = (0..32).map(|i| math::sin(i as f64 * 1.7) + 0.3 * math::cos(i as f64 * i as f64)).collect();
        let s = dft_1d(&g, &u).unwrap();
        for (a, b) in s.values.iter().zip(naive_1d(&g, &u)) {
            assert!((a - b).norm() < 1e-10);
        }
        let back = idft_1d(&g, &s).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_cosines_2d() {
        let g = FourierGrid::new(8, 2).unwrap();
        let x = g.nodes();
        let u: Vec<f64> = (0..64).map(|i| math::cos(x[i / 8]) * math::cos(x[i % 8])).collect();
        let s = dft_2d(&g, &u).unwrap();
        let big: Vec<usize> = (0..64).filter(|&i| s.values[i].norm() > 1e-10).collect();
        assert_eq!(big.len(), 4);
        for &i in &big {
            assert_eq!(g.wavenumber(i / 8).abs(), 1);
            assert_eq!(g.wavenumber(i % 8).abs(), 1);
            assert!((s.values[i].norm() - math::PI * math::PI).abs() < 1e-11);
        }
    }

    #[test]
    fn wavenumber_ordering() {
        let g = FourierGrid::new(8, 1).unwrap();
        assert_eq!(g.wavenumbers(), vec![0, 1, 2, 3, 4, -3, -2, -1]);
        for xi in -3..=4 {
            assert_eq!(g.wavenumber(g.index_of(xi)), xi);
        }
        assert_eq!(g.deriv_symbol(4), 0.0);
    }

    #[test]
    fn rejects_bad_grids_and_lengths() {
        assert!(FourierGrid::new(7, 1).is_err());
        assert!(FourierGrid::new(8, 3).is_err());
        let g = FourierGrid::new(8, 1).unwrap();
        assert!(matches!(g.dft(&[0.0; 7]), Err(Error::Shape(_))));
    }

    #[test]
    fn real_data_gives_exact_hermitian_spectrum() {
        let g = FourierGrid::new(16, 2).unwrap();
        let u: Vec<f64> = (0..256).map(|i| math::sin(0.37 * i as f64) * math::cos(0.11 * (i * i) as f64)).collect();
        let s = g.dft(&u).unwrap();
        assert!(s.real_field);
        assert!(s.is_exactly_hermitian(&g));
    }
}
