use num_complex::Complex64;
use proptest::prelude::*;
use sclon_core::spectral::fourier::{dft_1d, dft_2d, idft_1d, idft_2d};
use sclon_core::spectral::legendre::gauss_lobatto;
use sclon_core::spectral::{corrector_eval, FourierGrid, LegendreBasis};

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// `∫_{-1}^{1} Σ c_k x^k`.
fn exact_integral(c: &[f64]) -> f64 {
    c.iter().enumerate().filter(|(k, _)| k % 2 == 0).map(|(k, a)| 2.0 * a / (k + 1) as f64).sum()
}

/// `L_n^{(j)}(-1) = (-1)^{n+j} (n+j)! / ((n-j)! 2^j j!)`.
fn legendre_deriv_at_minus_one(n: usize, j: usize) -> f64 {
    if j > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..j {
        v *= ((n + j - i) * (n - j + 1 + i)) as f64 / (2.0 * (i + 1) as f64);
    }
    // The loop builds (n+j)!/(n-j)! / (2^j j!) as a product of j ratios.
    if (n + j) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `φ_k^{(j)}(-1)` for `φ_k = L_k - L_{k+2}`.
fn phi_deriv_at_minus_one(k: usize, j: usize) -> f64 {
    legendre_deriv_at_minus_one(k, j) - legendre_deriv_at_minus_one(k + 2, j)
}

/// `∫_{-1}^{1} φ_k(x) e^{-(1+x)/ν} dx / ν` for `ν` small enough that
/// `e^{-2/ν}` underflows: the Laplace series `Σ_j ν^j φ_k^{(j)}(-1)`.
fn laplace(k: usize, nu: f64) -> f64 {
    (0..=k + 2).map(|j| nu.powi(j as i32) * phi_deriv_at_minus_one(k, j)).sum()
}

#[test]
fn legendre_derivative_oracle_matches_known_values() {
    // L_2 = (3x² - 1)/2: L_2(-1) = 1, L_2'(-1) = -3, L_2''(-1) = 3.
    assert_eq!(legendre_deriv_at_minus_one(2, 0), 1.0);
    assert_eq!(legendre_deriv_at_minus_one(2, 1), -3.0);
    assert_eq!(legendre_deriv_at_minus_one(2, 2), 3.0);
    // L_3 = (5x³ - 3x)/2: L_3'(-1) = 6, L_3'''(-1) = 15.
    assert_eq!(legendre_deriv_at_minus_one(3, 1), 6.0);
    assert_eq!(legendre_deriv_at_minus_one(3, 3), 15.0);
}

#[test]
fn corrector_integrals_match_closed_forms() {
    for nu in [1e-6, 1e-4, 1e-3] {
        for n in [1, 4, 8] {
            let b = LegendreBasis::enriched(n, nu).unwrap();
            let c = n;
            let (m, s, cv) = (b.mass(), b.stiffness(), b.convection());
            let close = |got: f64, want: f64, what: &str| {
                assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "nu={nu} n={n} {what}: {got} vs {want}");
            };
            close(m.get(c, c), 2.0 / 3.0 - 1.5 * nu + nu * nu, "mass corner");
            close(s.get(c, c), 0.5 / nu - 0.5, "stiffness corner");
            close(cv.get(c, c), 0.0, "convection corner");
            for k in 0..n {
                let outer = match k {
                    0 => 1.0,
                    1 => -1.0 / 3.0,
                    _ => 0.0,
                };
                let mass = nu * laplace(k, nu) - outer;
                close(m.get(k, c), mass, "mass");
                close(m.get(c, k), mass, "mass");
                // ∫ φ_k' ψ' and ∫ φ_k ψ', with ψ' = -e^{-(1+x)/ν}/ν + 1/2.
                let stiff = -(1..=k + 2).map(|j| nu.powi(j as i32 - 1) * phi_deriv_at_minus_one(k, j)).sum::<f64>();
                close(s.get(k, c), stiff, "stiffness");
                let conv = -laplace(k, nu) + if k == 0 { 1.0 } else { 0.0 };
                close(cv.get(k, c), conv, "convection");
                close(cv.get(c, k), -conv, "convection transpose");
            }
        }
    }
}

#[test]
fn corrector_vanishes_at_both_ends() {
    for nu in [1e-8, 1e-6, 1e-2, 0.5, 4.0] {
        assert!(corrector_eval(nu, -1.0).abs() <= 1e-12);
        assert!(corrector_eval(nu, 1.0).abs() <= 1e-12);
        let b = LegendreBasis::enriched(6, nu).unwrap();
        let last = b.n_nodes() - 1;
        assert!(b.value(6, 0).abs() <= 1e-12 && b.value(6, last).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_lobatto_is_exact_to_degree_2m_minus_3(
        m in 2usize..=20,
        raw in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let (x, w) = gauss_lobatto(m).unwrap();
        let c = &raw[..2 * m - 2];
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * horner(c, *x)).sum();
        let scale = 1.0 + c.iter().map(|a| a.abs()).sum::<f64>();
        prop_assert!((q - exact_integral(c)).abs() <= 1e-12 * scale, "m={} {} vs {}", m, q, exact_integral(c));
    }

    #[test]
    fn basis_functions_vanish_at_endpoints(n in 1usize..40) {
        let b = LegendreBasis::dirichlet(n).unwrap();
        let last = b.n_nodes() - 1;
        prop_assert_eq!(b.nodes()[0], -1.0);
        prop_assert_eq!(b.nodes()[last], 1.0);
        for k in 0..n {
            prop_assert!(b.value(k, 0).abs() <= 1e-12);
            prop_assert!(b.value(k, last).abs() <= 1e-12);
        }
    }

    #[test]
    fn dft_1d_matches_naive_sum_and_round_trips(
        half in 1usize..33,
        raw in prop::collection::vec(-10.0f64..10.0, 64),
    ) {
        let n = 2 * half;
        let grid = FourierGrid::new(n, 1).unwrap();
        let u = &raw[..n];
        let h = grid.spacing();
        let spec = dft_1d(&grid, u).unwrap();
        let scale = 1.0 + u.iter().map(|v| v.abs()).sum::<f64>();
        for (idx, a) in spec.values.iter().enumerate() {
            let xi = grid.wavenumber(idx) as f64;
            let naive: Complex64 = (0..n)
                .map(|j| Complex64::from_polar(h * u[j], -xi * j as f64 * h))
                .sum();
            prop_assert!((a - naive).norm() <= 1e-10 * scale, "slot {}", idx);
        }
        let back = idft_1d(&grid, &spec).unwrap();
        for (x, y) in back.iter().zip(u) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn dft_2d_matches_naive_sum_and_round_trips(
        half in 1usize..7,
        raw in prop::collection::vec(-10.0f64..10.0, 144),
    ) {
        let n = 2 * half;
        let grid = FourierGrid::new(n, 2).unwrap();
        let u = &raw[..n * n];
        let h = grid.spacing();
        let spec = dft_2d(&grid, u).unwrap();
        let scale = 1.0 + u.iter().map(|v| v.abs()).sum::<f64>();
        for (idx, a) in spec.values.iter().enumerate() {
            let (kx, ky) = (grid.wavenumber(idx / n) as f64, grid.wavenumber(idx % n) as f64);
            let mut naive = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    naive += Complex64::from_polar(h * h * u[i * n + j], -(kx * i as f64 + ky * j as f64) * h);
                }
            }
            prop_assert!((a - naive).norm() <= 1e-10 * scale, "slot {}", idx);
        }
        let back = idft_2d(&grid, &spec).unwrap();
        for (x, y) in back.iter().zip(u) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}
