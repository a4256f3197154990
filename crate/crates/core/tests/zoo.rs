use sysid_core::ctrb::{
    controllability_index, distance_to_uncontrollability, gramian, DistanceEstimate, DEFAULT_RANK_TOL,
};
use sysid_core::linalg::numerical_rank;
use sysid_core::zoo::{self, InputPattern};
use sysid_core::ctrb::controllability_matrix;

fn kappa(sys: &sysid_core::LtiSystem) -> Option<usize> {
    controllability_index(sys.a(), &sys.excitation(), DEFAULT_RANK_TOL)
        .unwrap()
        .kappa
}

#[test]
fn hard_chain_index_is_n_minus_one() {
    for n in 3..=12 {
        let sys = zoo::hard_chain(n, 0.25).unwrap();
        let idx = controllability_index(sys.a(), sys.h(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(idx.kappa, Some(n - 1), "n = {n}");
    }
}

#[test]
fn jordan_actuated_indices_follow_the_pattern() {
    let cases = [
        (InputPattern::EveryOther, 2),
        (InputPattern::Half, 3),
        (InputPattern::Last, 6),
    ];
    for (pattern, expected) in cases {
        let sys = zoo::jordan_actuated(6, 0.5, 0.1, 5.0, pattern).unwrap();
        assert_eq!(kappa(&sys), Some(expected), "{pattern}");
    }
    for n in 5..=20 {
        let half = zoo::jordan_actuated(n, 0.5, 0.1, 5.0, InputPattern::Half).unwrap();
        assert_eq!(kappa(&half), Some(n.div_ceil(2)), "n = {n}");
        let every = zoo::jordan_actuated(n, 0.5, 0.1, 5.0, InputPattern::EveryOther).unwrap();
        assert_eq!(kappa(&every), Some(2), "n = {n}");
    }
}

#[test]
fn padded_chain_index_by_rank_sweep() {
    // The chain block of length 3 is excited at both ends, so two steps suffice.
    let sys = zoo::padded_chain(6, 2, 0.25).unwrap();
    assert_eq!(sys.r(), 5);
    assert_eq!(kappa(&sys), Some(2));
}

#[test]
fn kl_pair_is_controllable() {
    let (s1, s2) = zoo::kl_pair(0.3, 0.05).unwrap();
    for s in [&s1, &s2] {
        let c = controllability_matrix(s.a(), s.h(), 3).unwrap();
        assert_eq!(numerical_rank(&c, DEFAULT_RANK_TOL), 3);
    }
}

#[test]
fn kl_pair_gramian_entry() {
    let beta = 0.3;
    let (s1, _) = zoo::kl_pair(beta, 0.05).unwrap();
    assert_eq!(gramian(s1.a(), s1.h(), 1).unwrap()[(1, 1)], 0.0);
    for k in 2..=51 {
        let g = gramian(s1.a(), s1.h(), k).unwrap();
        assert!((g[(1, 1)] - beta * beta).abs() <= 1e-12, "k = {k}");
    }
}

#[test]
fn hard_chain_stays_robustly_controllable() {
    for n in 3..=8 {
        let rho = 0.25;
        let sys = zoo::hard_chain(n, rho).unwrap();
        let res = DistanceEstimate::default_resolution(sys.a(), sys.h());
        let d = distance_to_uncontrollability(sys.a(), sys.h(), res, true).unwrap();
        assert!(d.value >= rho / (n as f64 + 1.0), "n = {n}: {}", d.value);
    }
}

#[test]
fn zoo_systems_pass_validation() {
    for n in 2..=15 {
        zoo::scaled_jordan(n).unwrap();
        zoo::hard_chain(n, 0.3).unwrap();
        for lambda in [0.5, 0.7, 1.0] {
            for p in [InputPattern::Last, InputPattern::Half, InputPattern::EveryOther] {
                zoo::jordan_actuated(n, lambda, 0.1, 5.0, p).unwrap();
            }
        }
    }
}
