use alloc::format;

use crate::linalg::spectral_norm;
use crate::{Error, Matrix, Result, Vector};

/// Class-level upper bound on `||C_kappa^dagger||_2` for systems with
/// `max(||A||, ||H||) <= M` and distance to uncontrollability at least `mu`.
///
/// `sigma_min(Gamma_kappa) >= bound^{-2}` follows.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub m: f64,
    pub mu: f64,
    pub kappa: usize,
    /// Recursion matrix acting on `[||C_k^dagger||, ||Lambda_k||, 1/mu]`.
    pub xi: Matrix,
    /// Worst-case initial vector `[1/mu, M/mu^2, 1/mu]`.
    pub alpha1: Vector,
    pub bound: f64,
}

impl BoundCertificate {
    /// Lower bound on `sigma_min(Gamma_kappa)` implied by `bound`.
    pub fn gramian_sigma_min(&self) -> f64 {
        1.0 / (self.bound * self.bound)
    }

    /// Eigenvalues of `xi`, descending. The matrix is block upper triangular
    /// with a `2x2` leading block whose discriminant is always positive, so the
    /// spectrum is real.
    pub fn xi_eigenvalues(&self) -> [f64; 3] {
        let x = 1.0 / self.mu;
        let (p, q, r, s) = (1.0, 1.0, self.m * x, (2.0 + self.m) * x);
        let tr = p + s;
        let det = p * s - q * r;
        let disc = libm::sqrt((tr * tr - 4.0 * det).max(0.0));
        let mut ev = [0.5 * (tr + disc), 0.5 * (tr - disc), x];
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Builds the recursion matrix and returns `||Xi^{kappa-1}|| ||alpha_1||`.
pub fn sigma_min_certificate(m: f64, mu: f64, kappa: usize) -> Result<BoundCertificate> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::param("M", format!("must be finite and > 0, got {m}")));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param("mu", format!("must be finite and > 0, got {mu}")));
    }
    if kappa == 0 {
        return Err(Error::param("kappa", "must be >= 1"));
    }
    let x = 1.0 / mu;
    #[rustfmt::skip]
    let xi = Matrix::from_row_slice(3, 3, &[
        1.0,   1.0,             x,
        m * x, (2.0 + m) * x,   m * x,
        0.0,   0.0,             x,
    ]);
    let alpha1 = Vector::from_column_slice(&[x, m * x * x, x]);
    let mut power = Matrix::identity(3, 3);
    for _ in 1..kappa {
        power = &power * &xi;
    }
    let bound = spectral_norm(&power) * alpha1.norm();
    if !bound.is_finite() {
        return Err(Error::NonFinite("certificate bound"));
    }
    Ok(BoundCertificate {
        m,
        mu,
        kappa,
        xi,
        alpha1,
        bound,
    })
}
