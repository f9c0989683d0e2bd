//! Dirichlet Legendre basis `φ_n = L_n - L_{n+2}` sampled on Gauss–Lobatto
//! nodes, optionally enriched with the boundary-layer corrector.

use alloc::vec::Vec;

use super::legendre::{gauss_lobatto, legendre_eval_with_deriv};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math;

/// Boundary-layer corrector for `u_t - ν u_xx - u_x = 0` with a layer at
/// `x = -1`: `exp(-(1+x)/ν) - (1 - (1 - exp(-2/ν))/2 · (x+1))`.
///
/// Vanishes at both endpoints. For tiny `ν` the exponential underflows to
/// zero away from `x = -1`, which is the correct limit.
pub fn corrector_eval(nu: f64, x: f64) -> f64 {
    corrector_at_offset(nu, 1.0 + x)
}

pub fn corrector_deriv(nu: f64, x: f64) -> f64 {
    corrector_deriv_at_offset(nu, 1.0 + x)
}

/// The corrector at `x = y - 1`. Inside the layer `1 + x` cannot be
/// recovered from `x` to full relative precision, so callers that know `y`
/// should pass it directly.
fn corrector_at_offset(nu: f64, y: f64) -> f64 {
    let slope = -math::expm1(-2.0 / nu) / 2.0;
    math::exp(-y / nu) - (1.0 - slope * y)
}

fn corrector_deriv_at_offset(nu: f64, y: f64) -> f64 {
    let slope = -math::expm1(-2.0 / nu) / 2.0;
    -math::exp(-y / nu) / nu + slope
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrector {
    pub nu: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// Composite rule graded towards `x = -1`, used for every integral that
    /// involves the corrector. The layer is invisible to the Gauss–Lobatto
    /// nodes, so those integrals cannot use them.
    fine: FineRule,
}

#[derive(Debug, Clone, PartialEq)]
struct FineRule {
    weights: Vec<f64>,
    /// Values and derivatives of every basis function (corrector last) at
    /// the rule's points.
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl FineRule {
    /// Gauss–Lobatto panels on `[-1, -1 + ν]`, then doubling widths up to
    /// `x = 1`. Each panel integrates polynomials of the basis's degree
    /// exactly and resolves the exponential to rounding level.
    fn new(n_poly: usize, nu: f64) -> Result<Self> {
        let (ref_nodes, ref_weights) = gauss_lobatto(n_poly + 40)?;
        // Panels are laid out in y = 1 + x.
        let mut breaks = alloc::vec![0.0];
        let mut width = nu;
        while *breaks.last().expect("non-empty") + width < 2.0 {
            let next = breaks.last().expect("non-empty") + width;
            breaks.push(next);
            width *= 2.0;
        }
        breaks.push(2.0);
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for (t, wt) in ref_nodes.iter().zip(&ref_weights) {
                offsets.push(a + half * (t + 1.0));
                weights.push(half * wt);
            }
        }
        let points: Vec<f64> = offsets.iter().map(|y| y - 1.0).collect();
        let mut values = Vec::with_capacity(n_poly + 1);
        let mut derivs = Vec::with_capacity(n_poly + 1);
        for k in 0..n_poly {
            let (v, d): (Vec<f64>, Vec<f64>) = points
                .iter()
                .map(|&x| {
                    let (lk, dk) = legendre_eval_with_deriv(k, x);
                    let (lk2, dk2) = legendre_eval_with_deriv(k + 2, x);
                    (lk - lk2, dk - dk2)
                })
                .unzip();
            values.push(v);
            derivs.push(d);
        }
        values.push(offsets.iter().map(|&y| corrector_at_offset(nu, y)).collect());
        derivs.push(offsets.iter().map(|&y| corrector_deriv_at_offset(nu, y)).collect());
        Ok(Self { weights, values, derivs })
    }

    fn integrate(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }
}

/// Basis tables on a Gauss–Lobatto grid.
///
/// Rows of `values` / `derivs` are basis functions, columns are nodes. When
/// the corrector is enabled it is the last function (index `n_poly`).
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreBasis {
    n_poly: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
    corrector: Option<Corrector>,
}

impl LegendreBasis {
    /// `n` Dirichlet functions on `n + 2` Gauss–Lobatto nodes.
    pub fn dirichlet(n: usize) -> Result<Self> {
        Self::with_nodes(n, n + 2)
    }

    pub fn with_nodes(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("basis needs at least one function".into()));
        }
        let (nodes, weights) = gauss_lobatto(m)?;
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for k in 0..n {
            let (v, d): (Vec<f64>, Vec<f64>) = nodes
                .iter()
                .map(|&x| {
                    let (lk, dk) = legendre_eval_with_deriv(k, x);
                    let (lk2, dk2) = legendre_eval_with_deriv(k + 2, x);
                    (lk - lk2, dk - dk2)
                })
                .unzip();
            values.push(v);
            derivs.push(d);
        }
        Ok(Self { n_poly: n, nodes, weights, values, derivs, corrector: None })
    }

    /// Dirichlet basis plus the corrector for diffusivity `nu`.
    pub fn enriched(n: usize, nu: f64) -> Result<Self> {
        Self::dirichlet(n)?.with_corrector(nu)
    }

    pub fn with_corrector(mut self, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("corrector needs nu > 0, got {nu}")));
        }
        let values = self.nodes.iter().map(|&x| corrector_eval(nu, x)).collect();
        let derivs = self.nodes.iter().map(|&x| corrector_deriv(nu, x)).collect();
        let fine = FineRule::new(self.n_poly, nu)?;
        self.corrector = Some(Corrector { nu, values, derivs, fine });
        Ok(self)
    }

    pub fn without_corrector(mut self) -> Self {
        self.corrector = None;
        self
    }

    /// Number of polynomial functions.
    pub fn n_poly(&self) -> usize {
        self.n_poly
    }

    /// Total number of functions, corrector included.
    pub fn dim(&self) -> usize {
        self.n_poly + usize::from(self.corrector.is_some())
    }

    pub fn corrector(&self) -> Option<&Corrector> {
        self.corrector.as_ref()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        match (&self.corrector, k == self.n_poly) {
            (Some(c), true) => c.values[j],
            _ => self.values[k][j],
        }
    }

    pub fn deriv(&self, k: usize, j: usize) -> f64 {
        match (&self.corrector, k == self.n_poly) {
            (Some(c), true) => c.derivs[j],
            _ => self.derivs[k][j],
        }
    }

    /// Entry `(k, l)` of a bilinear form: Gauss–Lobatto quadrature between
    /// polynomials (exact), the graded rule when the corrector is involved.
    fn form(&self, k: usize, l: usize, dk: bool, dl: bool) -> f64 {
        if let Some(c) = &self.corrector {
            if k == self.n_poly || l == self.n_poly {
                let pick = |i: usize, d: bool| if d { &c.fine.derivs[i] } else { &c.fine.values[i] };
                return c.fine.integrate(pick(k, dk), pick(l, dl));
            }
        }
        let pick = |i: usize, d: bool| if d { &self.derivs[i] } else { &self.values[i] };
        let (a, b) = (pick(k, dk), pick(l, dl));
        (0..self.n_nodes()).map(|j| self.weights[j] * a[j] * b[j]).sum()
    }

    /// `M_{kl} = ∫ φ_k φ_l`.
    pub fn mass(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |k, l| self.form(k, l, false, false))
    }

    /// `S_{kl} = ∫ φ_k' φ_l'`.
    pub fn stiffness(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |k, l| self.form(k, l, true, true))
    }

    /// `C_{kl} = ∫ φ_k φ_l'`, the `∫ u_x φ_k` acting on coefficients.
    pub fn convection(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |k, l| self.form(k, l, false, true))
    }

    /// Synthesis matrix `V_{jk} = φ_k(x_j)` (nodes × functions).
    pub fn synthesis(&self) -> Matrix {
        Matrix::from_fn(self.n_nodes(), self.dim(), |j, k| self.value(k, j))
    }

    /// Load matrix `B_{kj} = w_j φ_k(x_j)`, so `B v` is the quadrature of `v φ_k`.
    pub fn load(&self) -> Matrix {
        Matrix::from_fn(self.dim(), self.n_nodes(), |k, j| self.weights[j] * self.value(k, j))
    }

    /// Nodal values of `Σ_k α_k φ_k`.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim());
        (0..self.n_nodes())
            .map(|j| coeffs.iter().enumerate().map(|(k, a)| a * self.value(k, j)).sum())
            .collect()
    }

    /// Quadrature moments `Σ_j w_j v(x_j) φ_k(x_j)`.
    pub fn project_load(&self, nodal: &[f64]) -> Vec<f64> {
        assert_eq!(nodal.len(), self.n_nodes());
        (0..self.dim())
            .map(|k| (0..self.n_nodes()).map(|j| self.weights[j] * nodal[j] * self.value(k, j)).sum())
            .collect()
    }

    /// Discrete L² projection onto the polynomial functions. The corrector
    /// coefficient, when present, is set to zero: nodal data cannot see the
    /// layer, and on the nodes the corrector coincides with a linear function.
    pub fn project(&self, nodal: &[f64]) -> Result<Vec<f64>> {
        let poly = self.clone().without_corrector();
        let lu = Lu::factor(&poly.mass())?;
        let mut coeffs = lu.solve(&poly.project_load(nodal));
        if self.corrector.is_some() {
            coeffs.push(0.0);
        }
        Ok(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::legendre::legendre_eval;

    #[test]
    fn first_function_closed_form() {
        let b = LegendreBasis::dirichlet(1).unwrap();
        for (j, &x) in b.nodes().iter().enumerate() {
            assert!((b.value(0, j) - 1.5 * (1.0 - x * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn endpoints_vanish() {
        for n in 1..30 {
            let b = LegendreBasis::enriched(n, 0.05).unwrap();
            let last = b.n_nodes() - 1;
            for k in 0..b.dim() {
                assert!(b.value(k, 0).abs() <= 1e-12);
                assert!(b.value(k, last).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn corrector_endpoints_and_extended_precision_value() {
        for nu in [1e-6, 1e-3, 0.1, 1.0] {
            assert!(corrector_eval(nu, -1.0).abs() <= 1e-12);
            assert!(corrector_eval(nu, 1.0).abs() <= 1e-12);
        }
        // 50-digit mpmath value of the closed form at (0.1, 0).
        let expected = -0.499_954_601_100_814_33;
        assert!((corrector_eval(0.1, 0.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn corrector_underflows_cleanly() {
        let v = corrector_eval(1e-6, 0.5);
        assert!(v.is_finite());
        assert!((v + 0.25).abs() < 1e-15);
        assert!(corrector_deriv(1e-6, 0.5).is_finite());
    }

    #[test]
    fn mass_matrix_sparsity_pattern() {
        // φ_m φ_n integrates to zero unless |m - n| ∈ {0, 2}; with 8 functions on
        // 10 nodes the products reach degree 18 > 2M - 3, so compare against
        // a high-order rule for the exact integrals.
        let b = LegendreBasis::dirichlet(8).unwrap();
        let (xq, wq) = gauss_lobatto(30).unwrap();
        let phi = |k: usize, x: f64| legendre_eval(k, x) - legendre_eval(k + 2, x);
        for m in 0..8 {
            for n in 0..8 {
                let exact: f64 = xq.iter().zip(&wq).map(|(&x, w)| w * phi(m, x) * phi(n, x)).sum();
                if m.abs_diff(n) != 0 && m.abs_diff(n) != 2 {
                    assert!(exact.abs() <= 1e-12, "({m},{n}) {exact}");
                }
            }
        }
        let mass = b.mass();
        assert!((mass.get(0, 1)).abs() < 1e-13);
        assert!((mass.get(2, 5)).abs() < 1e-13);
    }

    #[test]
    fn projection_recovers_coefficients() {
        let b = LegendreBasis::dirichlet(10).unwrap();
        let coeffs: Vec<f64> = (0..10).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let nodal = b.reconstruct(&coeffs);
        let back = b.project(&nodal).unwrap();
        for (a, c) in coeffs.iter().zip(&back) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn enriched_projection_zeroes_corrector() {
        let b = LegendreBasis::enriched(6, 1e-6).unwrap();
        let nodal: Vec<f64> = b.nodes().iter().map(|x| 1.0 - x * x).collect();
        let c = b.project(&nodal).unwrap();
        assert_eq!(c.len(), 7);
        assert_eq!(c[6], 0.0);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-13);
    }
}
