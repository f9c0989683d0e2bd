//! Mixed-radix Cooley–Tukey FFT for arbitrary lengths.
//!
//! Lengths factor into primes; each prime stage is a direct DFT, so prime
//! lengths fall back to `O(n²)`. Grids here are at most a few dozen points
//! per axis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct FftPlan {
    n: usize,
    factors: Vec<usize>,
    /// `e^{-2πik/n}` for `k = 0..n`.
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let mut factors = Vec::new();
        let mut rest = n;
        let mut p = 2;
        while rest > 1 {
            while rest % p == 0 {
                factors.push(p);
                rest /= p;
            }
            p += 1;
            if p * p > rest && rest > 1 {
                factors.push(rest);
                break;
            }
        }
        let twiddles = (0..n)
            .map(|k| {
                let (s, c) = math::sincos(-math::TWO_PI * k as f64 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        Self { n, factors, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X_k = Σ_j x_j e^{-2πijk/n}` in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// `x_j = Σ_k X_k e^{+2πijk/n}` in place (no `1/n`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n, "FFT length mismatch");
        if self.n == 1 {
            return;
        }
        let input = data.to_vec();
        self.rec(&input, 1, self.n, data, &self.factors, 1, inverse);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        x: &[Complex64],
        stride: usize,
        n: usize,
        out: &mut [Complex64],
        factors: &[usize],
        tw_stride: usize,
        inverse: bool,
    ) {
        if n == 1 {
            out[0] = x[0];
            return;
        }
        let p = factors[0];
        let m = n / p;
        for j in 0..p {
            self.rec(&x[j * stride..], stride * p, m, &mut out[j * m..(j + 1) * m], &factors[1..], tw_stride * p, inverse);
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); p];
        let mut sub = vec![Complex64::new(0.0, 0.0); p];
        for k in 0..m {
            for j in 0..p {
                sub[j] = out[j * m + k];
            }
            for (q, slot) in acc.iter_mut().enumerate() {
                let idx = k + m * q;
                let mut s = sub[0];
                for (j, y) in sub.iter().enumerate().skip(1) {
                    let e = (j * idx * tw_stride) % self.n;
                    let w = if inverse { self.twiddles[e].conj() } else { self.twiddles[e] };
                    s += w * y;
                }
                *slot = s;
            }
            for (q, v) in acc.iter().enumerate() {
                out[k + m * q] = *v;
            }
        }
    }
}
