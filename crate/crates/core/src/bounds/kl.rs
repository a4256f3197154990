use alloc::format;
use alloc::vec::Vec;

use crate::linalg::symmetrize;
use crate::{Error, LtiSystem, Matrix, Result};

/// Residual tolerance for `H G = A_1 - A_2`.
const FACTORIZATION_TOL: f64 = 1e-10;

/// Exact KL divergence between the length-`N` trajectory distributions of
/// two systems, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct KlResult {
    pub value: f64,
    /// `per_step[k] = tr(G Sigma_k G') / 2` for `k = 0..N-1`.
    pub per_step: Vec<f64>,
    pub horizon: usize,
}

/// Outcome of [`minimax_required_samples`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequiredSamples {
    Samples(usize),
    /// The KL threshold is not reached within `n_max` steps; `kl_at_max` is
    /// the divergence at `N = n_max`.
    ExceedsMax { n_max: usize, kl_at_max: f64 },
}

/// Per-step KL machinery shared by both entry points: `G` and the covariance
/// recursion `Sigma_{k+1} = A_1 Sigma_k A_1' + Q`.
struct KlRecursion {
    g: Matrix,
    a1: Matrix,
    q: Matrix,
    sigma: Matrix,
}

impl KlRecursion {
    fn new(s1: &LtiSystem, s2: &LtiSystem) -> Result<Self> {
        if s1.n() != s2.n() {
            return Err(Error::DimensionMismatch(format!(
                "systems have {} and {} states",
                s1.n(),
                s2.n()
            )));
        }
        if s1.h() != s2.h() {
            return Err(Error::KlFactorizationInapplicable(
                "the two systems must share H".into(),
            ));
        }
        if s1.b() != s2.b() {
            return Err(Error::KlFactorizationInapplicable(
                "the two systems must share B".into(),
            ));
        }
        let h = s1.h();
        let delta = s1.a() - s2.a();
        // H has full column rank, so G = R^{-1} Q' delta with H = QR.
        let g = if h.ncols() == 0 {
            Matrix::zeros(0, s1.n())
        } else {
            let qr = h.clone().qr();
            qr.r()
                .solve_upper_triangular(&(qr.q().transpose() * &delta))
                .ok_or_else(|| Error::KlFactorizationInapplicable("H is rank deficient".into()))?
        };
        let residual = (h * &g - &delta).abs().max();
        if residual > FACTORIZATION_TOL {
            return Err(Error::KlFactorizationInapplicable(format!(
                "A_1 - A_2 is not in the column space of H (residual {residual:.3e})"
            )));
        }
        let n = s1.n();
        let mut q = h * h.transpose();
        if s1.p() > 0 {
            q += s1.b() * s1.b().transpose();
        }
        Ok(Self {
            g,
            a1: s1.a().clone(),
            q,
            sigma: Matrix::zeros(n, n),
        })
    }

    fn current_term(&self) -> f64 {
        0.5 * (&self.g * &self.sigma * self.g.transpose()).trace()
    }

    /// Advances the covariance; returns `true` if it did not change.
    fn advance(&mut self) -> bool {
        let next = symmetrize(&(&self.a1 * &self.sigma * self.a1.transpose() + &self.q));
        let fixed = next == self.sigma;
        self.sigma = next;
        fixed
    }
}

/// Exact `KL(P_{S1}, P_{S2})` over `N` transitions.
///
/// Both systems must share `H` (full column rank) and `B`, and
/// `A_1 - A_2 = H G` must hold. Conditionally on `x_k` the next states are
/// Gaussian with the same covariance and means differing by `H G x_k`, so the
/// divergence is `1/2 sum_{k<N} E||G x_k||^2 = 1/2 sum tr(G Sigma_k G')` with
/// `Sigma_k` the state covariance under `S1`. The process noise has unit
/// variance; a shared `B` is driven by unit-variance inputs that are averaged
/// over.
pub fn kl_trajectory(s1: &LtiSystem, s2: &LtiSystem, horizon: usize) -> Result<KlResult> {
    let mut rec = KlRecursion::new(s1, s2)?;
    let mut per_step = Vec::with_capacity(horizon);
    let mut value = 0.0;
    for k in 0..horizon {
        let term = rec.current_term();
        per_step.push(term);
        value += term;
        if k + 1 < horizon {
            rec.advance();
        }
    }
    Ok(KlResult {
        value,
        per_step,
        horizon,
    })
}

/// Smallest `N <= n_max` with `kl_trajectory(s1, s2, N).value >= ln(1/(3 delta))`.
///
/// Runs the same recursion incrementally. Once the covariance reaches a fixed
/// point the per-step term is reused instead of recomputed, so the partial
/// sums are identical to those of [`kl_trajectory`].
pub fn minimax_required_samples(
    s1: &LtiSystem,
    s2: &LtiSystem,
    delta: f64,
    n_max: usize,
) -> Result<RequiredSamples> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if n_max == 0 {
        return Err(Error::param("n_max", "must be >= 1"));
    }
    let threshold = libm::log(1.0 / (3.0 * delta));
    let mut rec = KlRecursion::new(s1, s2)?;
    let mut value = 0.0;
    let mut fixed = false;
    let mut term = rec.current_term();
    for n in 1..=n_max {
        value += term;
        if value >= threshold {
            return Ok(RequiredSamples::Samples(n));
        }
        if !fixed {
            fixed = rec.advance();
            term = rec.current_term();
            if fixed && term == 0.0 {
                break;
            }
        }
    }
    Ok(RequiredSamples::ExceedsMax {
        n_max,
        // After an early break every remaining term is zero.
        kl_at_max: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn identical_systems_have_zero_divergence() {
        let sys = zoo::hard_chain(4, 0.25).unwrap();
        let kl = kl_trajectory(&sys, &sys, 20).unwrap();
        assert_eq!(kl.value, 0.0);
        assert_eq!(kl.per_step.len(), 20);
    }

    #[test]
    fn pair_value_matches_covariance_formula() {
        let (s1, s2) = zoo::kl_pair(0.3, 0.05).unwrap();
        // x_1 = H w_0 has no second component, so only x_2, ..., x_{N-1}
        // contribute 2 eps^2 beta^2 each.
        let kl = kl_trajectory(&s1, &s2, 100).unwrap();
        assert!((kl.value - 2.0 * 0.0025 * 98.0 * 0.09).abs() < 1e-10, "{}", kl.value);
        assert_eq!(kl.per_step[0], 0.0);
        assert_eq!(kl.per_step[1], 0.0);
        // 2 + ceil(ln(1/0.15) / (2 eps^2 beta^2))
        let n = minimax_required_samples(&s1, &s2, 0.05, 100_000).unwrap();
        assert_eq!(n, RequiredSamples::Samples(4218));
    }

    #[test]
    fn vanishing_coupling_needs_unbounded_samples() {
        let (s1, s2) = zoo::kl_pair(1e-6, 0.05).unwrap();
        match minimax_required_samples(&s1, &s2, 0.05, 10_000_000).unwrap() {
            RequiredSamples::ExceedsMax { n_max, kl_at_max } => {
                assert_eq!(n_max, 10_000_000);
                assert!(kl_at_max < libm::log(1.0 / 0.15));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn loose_confidence_needs_one_sample() {
        let (s1, s2) = zoo::kl_pair(0.3, 0.05).unwrap();
        assert_eq!(
            minimax_required_samples(&s1, &s2, 0.34, 10).unwrap(),
            RequiredSamples::Samples(1)
        );
    }

    #[test]
    fn perturbation_outside_noise_range_is_rejected() {
        let (s1, _) = zoo::kl_pair(0.3, 0.05).unwrap();
        let mut a2 = s1.a().clone();
        a2[(1, 0)] = 0.1;
        let s2 = LtiSystem::autonomous(a2, s1.h().clone()).unwrap();
        assert!(matches!(
            kl_trajectory(&s1, &s2, 10),
            Err(Error::KlFactorizationInapplicable(_))
        ));
    }
}
