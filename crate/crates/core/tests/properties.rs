mod common;

use common::{random_controllable, Rng};
use nalgebra::DMatrix;
use proptest::prelude::*;
use sysid_core::bounds::{
    gramian22_decay_bound, gramian_upper_bound, powers_bound, sigma_min_certificate,
};
use sysid_core::ctrb::{
    controllability_index, controllability_matrix, distance_to_uncontrollability, gramian,
    staircase, toeplitz_sigma_min, DistanceEstimate, DEFAULT_RANK_TOL,
};
use sysid_core::linalg::{min_symmetric_eigenvalue, sigma_min, spectral_norm};
use sysid_core::{zoo, Complex, Matrix};

/// Smallest eigenvalue of the Hermitian `T = M M^*` through its real
/// symmetric embedding `[[Re T, -Im T], [Im T, Re T]]`, which has the same
/// eigenvalues, each twice.
fn hermitian_min_eigenvalue(m: &DMatrix<Complex>) -> f64 {
    let t = m * m.adjoint();
    let n = t.nrows();
    let embed = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = t[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    min_symmetric_eigenvalue(&embed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gramian_is_monotone(seed in any::<u64>(), n in 1usize..7, r in 1usize..4, k in 1usize..30) {
        let mut rng = Rng::new(seed);
        let a = rng.stable(n);
        let h = rng.gaussian(n, r);
        let g0 = gramian(&a, &h, k).unwrap();
        let g1 = gramian(&a, &h, k + 1).unwrap();
        prop_assert!(min_symmetric_eigenvalue(&(&g1 - &g0)) >= -1e-12 * g1.norm().max(1.0));
    }

    #[test]
    fn gramian_least_eigenvalue_is_inverse_pinv_norm(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = Rng::new(seed);
        let pair = random_controllable(&mut rng, n);
        let kappa = pair.blocks.len();
        let c = controllability_matrix(&pair.a, &pair.h, kappa).unwrap();
        let g = gramian(&pair.a, &pair.h, kappa).unwrap();
        let pinv_norm = 1.0 / sigma_min(&c);
        let lhs = min_symmetric_eigenvalue(&g);
        let rhs = pinv_norm.powi(-2);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{lhs:e} vs {rhs:e}");
    }

    #[test]
    fn index_matches_staircase(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = Rng::new(seed);
        let pair = random_controllable(&mut rng, n);
        let idx = controllability_index(&pair.a, &pair.h, DEFAULT_RANK_TOL).unwrap();
        let sc = staircase(&pair.a, &pair.h, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(idx.kappa, Some(sc.kappa));
        prop_assert_eq!(idx.increments(), sc.block_sizes);
    }

    #[test]
    fn toeplitz_closed_form_matches_dense_eigenvalue(
        rho in 0.05f64..2.0, re in -3.0f64..3.0, im in -3.0f64..3.0, n in 1usize..11,
    ) {
        let (a, h) = zoo::perturbed_integrator(n, rho.min(1.0)).unwrap();
        let rho = rho.min(1.0);
        let s = Complex::new(re, im);
        let m = DMatrix::<Complex>::from_fn(n, n + 1, |i, j| {
            if j < n {
                let v = Complex::new(a[(i, j)], 0.0);
                if i == j { v - s } else { v }
            } else {
                Complex::new(h[(i, 0)], 0.0)
            }
        });
        let dense = hermitian_min_eigenvalue(&m);
        let closed = toeplitz_sigma_min(rho, s, n);
        prop_assert!((dense - closed).abs() <= 1e-10 * (1.0 + closed.abs()), "{dense} vs {closed}");
    }

    #[test]
    fn powers_bound_dominates(seed in any::<u64>(), n in 1usize..9, k in 1usize..51) {
        let mut rng = Rng::new(seed);
        let a = rng.stable(n);
        let mut power = Matrix::identity(n, n);
        for _ in 0..k {
            power = &power * &a;
        }
        prop_assert!(spectral_norm(&power) <= powers_bound(spectral_norm(&a), n, k).unwrap());
    }

    #[test]
    fn gramian_bound_dominates(seed in any::<u64>(), n in 1usize..9, r in 1usize..4, k in 1usize..51) {
        let mut rng = Rng::new(seed);
        let a = rng.stable(n);
        let h = rng.gaussian(n, r.min(n));
        let m = spectral_norm(&a).max(spectral_norm(&h));
        let g = gramian(&a, &h, k).unwrap();
        prop_assert!(spectral_norm(&g) <= gramian_upper_bound(m, n, k).unwrap());
    }

    #[test]
    fn decay_bound_dominates(rho in 0.01f64..0.49, n in 2usize..12, k in 1usize..200) {
        let sys = zoo::hard_chain(n, rho).unwrap();
        let g = gramian(sys.a(), sys.h(), k).unwrap();
        prop_assert!(g[(1, 1)] <= gramian22_decay_bound(rho, n).unwrap());
    }

    #[test]
    fn certificate_dominates(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = Rng::new(seed);
        let pair = random_controllable(&mut rng, n);
        let kappa = pair.blocks.len();
        let m = spectral_norm(&pair.a).max(spectral_norm(&pair.h));
        let res = DistanceEstimate::default_resolution(&pair.a, &pair.h);
        let mu = distance_to_uncontrollability(&pair.a, &pair.h, res, true).unwrap().value;
        let cert = sigma_min_certificate(m, mu, kappa).unwrap();
        let c = controllability_matrix(&pair.a, &pair.h, kappa).unwrap();
        prop_assert!(1.0 / sigma_min(&c) <= cert.bound, "{} > {}", 1.0 / sigma_min(&c), cert.bound);
    }

    #[test]
    fn certificate_is_monotone_in_kappa(m in 0.1f64..3.0, frac in 0.01f64..1.0, kappa in 1usize..20) {
        let mu = frac * m;
        let a = sigma_min_certificate(m, mu, kappa).unwrap();
        let b = sigma_min_certificate(m, mu, kappa + 1).unwrap();
        prop_assert!(b.bound >= a.bound);
        prop_assert!(a.bound >= 1.0 / mu);
        prop_assert!(a.xi.iter().all(|&v| v >= 0.0) && a.alpha1.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn distance_obeys_triangle_inequality(seed in any::<u64>(), n in 2usize..5, frac in 0.05f64..0.95) {
        let mut rng = Rng::new(seed);
        let pair = random_controllable(&mut rng, n);
        let res = DistanceEstimate::default_resolution(&pair.a, &pair.h);
        let d = distance_to_uncontrollability(&pair.a, &pair.h, res, true).unwrap();
        let eps = frac * d.value;
        let dir = rng.gaussian(n, n);
        let a_hat = &pair.a + &dir * (eps / spectral_norm(&dir));
        let res_hat = DistanceEstimate::default_resolution(&a_hat, &pair.h);
        let d_hat = distance_to_uncontrollability(&a_hat, &pair.h, res_hat, true).unwrap();
        prop_assert!(d_hat.value >= d.value - eps - 2.0 * res.max(res_hat),
            "{} < {} - {}", d_hat.value, d.value, eps);
    }
}
