mod common;

use common::{random_controllable, Rng};
use sysid_core::ctrb::{controllability_index, gramian, staircase, DEFAULT_RANK_TOL};
use sysid_core::linalg::{min_symmetric_eigenvalue, sigma_min};
use sysid_core::{zoo, Matrix};

#[test]
fn random_controllable_pairs() {
    let mut rng = Rng::new(2024);
    for case in 0..500 {
        let n = rng.int(2, 10);
        let pair = random_controllable(&mut rng, n);
        let sc = staircase(&pair.a, &pair.h, DEFAULT_RANK_TOL).unwrap();
        let idx = controllability_index(&pair.a, &pair.h, DEFAULT_RANK_TOL).unwrap();

        let ortho = (sc.u.transpose() * &sc.u - Matrix::identity(n, n)).norm();
        assert!(ortho <= 1e-10, "case {case}: U'U - I = {ortho:e}");
        let recon = (sc.u.transpose() * &pair.a * &sc.u - &sc.a_tilde).norm();
        assert!(recon <= 1e-10 * pair.a.norm(), "case {case}: reconstruction {recon:e} discarded {:e} blocks {:?} {:?}", sc.discarded, sc.block_sizes, pair.blocks);
        assert!(sc.controllable, "case {case}");
        assert!(sc.block_sizes.windows(2).all(|w| w[0] >= w[1]), "case {case}");
        assert_eq!(sc.block_sizes, pair.blocks, "case {case}");
        assert_eq!(sc.block_sizes, idx.increments(), "case {case}");
        assert_eq!(Some(sc.kappa), idx.kappa, "case {case}");

        let r1 = sc.block_sizes[0];
        assert!(sc.h_tilde.rows(r1, n - r1).amax() == 0.0);
        for i in 1..sc.kappa {
            let c = sc.coupling(i);
            assert_eq!(c.shape(), (sc.block_sizes[i], sc.block_sizes[i - 1]));
            assert!(sigma_min(&c) > sc.threshold, "case {case}: coupling {i}");
        }
    }
}

#[test]
fn similarity_preserves_gramian_spectrum() {
    let mut rng = Rng::new(7);
    for _ in 0..50 {
        let n = rng.int(2, 8);
        let pair = random_controllable(&mut rng, n);
        let sc = staircase(&pair.a, &pair.h, DEFAULT_RANK_TOL).unwrap();
        for k in 1..=sc.kappa {
            let g = gramian(&pair.a, &pair.h, k).unwrap();
            let gt = gramian(&sc.a_tilde, &sc.h_tilde, k).unwrap();
            let (x, y) = (min_symmetric_eigenvalue(&g), min_symmetric_eigenvalue(&gt));
            assert!((x - y).abs() <= 1e-10 * g.norm(), "k = {k}: {x:e} vs {y:e}");
        }
    }
}

#[test]
fn rotated_hard_chain() {
    let mut rng = Rng::new(11);
    let sys = zoo::hard_chain(5, 0.25).unwrap();
    let q = rng.orthogonal(5);
    let a = &q * sys.a() * q.transpose();
    let h = &q * sys.h();
    let sc = staircase(&a, &h, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(sc.block_sizes, vec![2, 1, 1, 1]);
    assert_eq!(sc.kappa, 4);
    let idx = controllability_index(&a, &h, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(idx.increments(), vec![2, 1, 1, 1]);
}
