//! Closed-form bounds, trajectory KL divergence for minimax pairs, and the
//! least-singular-value certificate.
//!
//! Logarithms are natural throughout.

use alloc::format;

use crate::{Error, Result};

mod certificate;
mod kl;

pub use certificate::{sigma_min_certificate, BoundCertificate};
pub use kl::{kl_trajectory, minimax_required_samples, KlResult, RequiredSamples};

const E: f64 = core::f64::consts::E;
const PI: f64 = core::f64::consts::PI;

fn powi(x: f64, k: i64) -> f64 {
    libm::pow(x, k as f64)
}

/// `||A^k|| <= (e k)^{n-1} max(M^n, 1)` for any `A` with `rho(A) <= 1` and
/// `||A|| <= M`.
pub fn powers_bound(m: f64, n: usize, k: usize) -> Result<f64> {
    check_norm_bound(m)?;
    check_positive("n", n)?;
    check_positive("k", k)?;
    Ok(powi(E * k as f64, n as i64 - 1) * powi(m, n as i64).max(1.0))
}

/// `||Gamma_k|| <= e^{2n-2} k^{2n-1} max(M^{2n}, 1)`.
pub fn gramian_upper_bound(m: f64, n: usize, k: usize) -> Result<f64> {
    check_norm_bound(m)?;
    check_positive("n", n)?;
    check_positive("k", k)?;
    let n = n as i64;
    Ok(powi(E, 2 * n - 2) * powi(k as f64, 2 * n - 1) * powi(m, 2 * n).max(1.0))
}

/// Bound on the `(2,2)` Gramian entry of the weakly coupled chain:
/// `(2 rho)^{2n-2} / (1 - 4 rho^2)`, valid for every horizon.
pub fn gramian22_decay_bound(rho: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::param("rho", format!("must lie in (0, 1/2), got {rho}")));
    }
    check_positive("n", n)?;
    Ok(powi(2.0 * rho, 2 * n as i64 - 2) / (1.0 - 4.0 * rho * rho))
}

/// Distance to uncontrollability of the perturbed integrator with its linear
/// sandwich.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorDistance {
    /// `rho sin(pi / (n + 1))`
    pub value: f64,
    /// `2 rho / (n + 1)`
    pub lower: f64,
    /// `rho pi / (n + 1)`
    pub upper: f64,
}

pub fn integrator_distance_closed_form(rho: f64, n: usize) -> Result<IntegratorDistance> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param("rho", "must be finite and > 0"));
    }
    check_positive("n", n)?;
    let np1 = n as f64 + 1.0;
    Ok(IntegratorDistance {
        value: rho * libm::sin(PI / np1),
        lower: 2.0 * rho / np1,
        upper: rho * PI / np1,
    })
}

/// Which closed form of the exponential lower bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpHardForm {
    /// `4^{n-3} / (3 eps^2) ln(1/delta)`, as stated in the theorem.
    #[default]
    Theorem,
    /// `4^{n-2} / (6 eps^2) ln(1/(3 delta))`, the expression the proof ends
    /// with. It differs from the statement by a factor `2 ln(1/(3d)) / ln(1/d)`.
    Proof,
}

/// Minimax lower bound on the trajectory length for the weakly coupled chain
/// class.
pub fn exp_hard_lower_bound(n: usize, eps: f64, delta: f64, form: ExpHardForm) -> Result<f64> {
    if n < 3 {
        return Err(Error::param("n", format!("must be >= 3, got {n}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", "must be finite and > 0"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let n = n as i64;
    Ok(match form {
        ExpHardForm::Theorem => powi(4.0, n - 3) / (3.0 * eps * eps) * libm::log(1.0 / delta),
        ExpHardForm::Proof => {
            if delta >= 1.0 / 3.0 {
                return Err(Error::param("delta", "proof form needs delta < 1/3"));
            }
            powi(4.0, n - 2) / (6.0 * eps * eps) * libm::log(1.0 / (3.0 * delta))
        }
    })
}

fn check_norm_bound(m: f64) -> Result<()> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::param("M", "must be finite and >= 0"));
    }
    Ok(())
}

fn check_positive(name: &'static str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::param(name, "must be >= 1"));
    }
    Ok(())
}
