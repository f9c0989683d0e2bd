//! Legendre polynomials and Gauss–Lobatto quadrature.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// `L_n(x)` by the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    legendre_eval_with_deriv(n, x).0
}

/// `(L_n(x), L_n'(x))`.
///
/// Uses `(k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}` and
/// `L'_{k+1} = L'_{k-1} + (2k+1) L_k`; both are exact at `x = ±1`.
pub fn legendre_eval_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (p0, d0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss–Lobatto nodes and weights on `[-1, 1]` with `m` points.
///
/// Interior nodes are the roots of `L'_{m-1}`, found by Newton iteration from
/// Chebyshev–Lobatto guesses; weights are `2 / (m (m-1) L_{m-1}(x_j)^2)`.
/// The rule integrates polynomials up to degree `2m - 3` exactly.
pub fn gauss_lobatto(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m < 2 {
        return Err(Error::InvalidParameter(alloc::format!("Gauss-Lobatto needs m >= 2, got {m}")));
    }
    let n = m - 1;
    let nf = n as f64;
    let mut nodes = vec![0.0; m];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    // Solve the left half and mirror, so the rule is symmetric to the bit.
    for j in 1..=(n - 1) / 2 {
        let mut x = -math::cos(math::PI * j as f64 / nf);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre_eval_with_deriv(n, x);
            let d2p = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if math::abs(dx) <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() {
            return Err(Error::QuadratureNoConvergence { nodes: m });
        }
        nodes[j] = x;
        nodes[n - j] = -x;
    }
    if n % 2 == 0 && n > 0 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre_eval(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok((nodes, weights))
}
