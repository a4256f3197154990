//! Controllability analysis of a pair `(A, H)`.
//!
//! The same routines apply to `(A, B)` or to the stacked excitation
//! `(A, [H B])`; callers pick the input matrix.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::numerical_rank;
use crate::{Error, Matrix, Result};

mod distance;
mod staircase;

pub use distance::{
    distance_to_uncontrollability, sigma_min_pencil, toeplitz_sigma_min, DistanceEstimate,
    DEFAULT_GRID_FRACTION,
};
pub use staircase::{staircase, StaircaseForm};

/// Default relative rank tolerance: singular values below `1e-8 * sigma_max`
/// count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

pub(crate) fn check_pair(a: &Matrix, h: &Matrix) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "A must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if h.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "H has {} rows, A is {}x{}",
            h.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// `C_k(A, H) = [H, AH, ..., A^{k-1} H]`, an `n x (k r)` matrix.
pub fn controllability_matrix(a: &Matrix, h: &Matrix, k: usize) -> Result<Matrix> {
    check_pair(a, h)?;
    if k == 0 {
        return Err(Error::param("k", "must be >= 1"));
    }
    let (n, r) = (a.nrows(), h.ncols());
    let mut out = Matrix::zeros(n, k * r);
    let mut block = h.clone();
    for i in 0..k {
        out.columns_mut(i * r, r).copy_from(&block);
        if i + 1 < k {
            block = a * &block;
        }
    }
    Ok(out)
}

/// Finite-horizon Gramian `Gamma_k = sum_{i<k} A^i H H' (A')^i`.
///
/// Accumulated term by term and symmetrized; equals `C_k C_k'`.
pub fn gramian(a: &Matrix, h: &Matrix, k: usize) -> Result<Matrix> {
    check_pair(a, h)?;
    if k == 0 {
        return Err(Error::param("k", "must be >= 1"));
    }
    let n = a.nrows();
    let mut g = Matrix::zeros(n, n);
    let mut block = h.clone();
    for i in 0..k {
        g.gemm(1.0, &block, &block.transpose(), 1.0);
        if i + 1 < k {
            block = a * &block;
        }
    }
    Ok(crate::linalg::symmetrize(&g))
}

/// Outcome of the rank sweep over `C_1, C_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityIndex {
    /// Smallest `k` with `rank C_k = n`, or `None` when the rank stalls below `n`.
    pub kappa: Option<usize>,
    /// `rank C_1, rank C_2, ...` up to the point where the sweep stopped.
    pub ranks: Vec<usize>,
    /// Relative tolerance the ranks were computed with.
    pub tol: f64,
}

impl ControllabilityIndex {
    pub fn is_controllable(&self) -> bool {
        self.kappa.is_some()
    }

    /// Rank increments `r_i = rank C_i - rank C_{i-1}`.
    pub fn increments(&self) -> Vec<usize> {
        let mut prev = 0;
        self.ranks
            .iter()
            .map(|&r| {
                let d = r - prev.min(r);
                prev = r;
                d
            })
            .collect()
    }
}

/// Controllability index by rank sweep: the smallest `k` such that the
/// numerical rank of `C_k` (singular values `>= tol * sigma_max(C_k)`) is `n`.
///
/// Returns `kappa = None` as soon as the rank stops growing below `n`.
pub fn controllability_index(a: &Matrix, h: &Matrix, tol: f64) -> Result<ControllabilityIndex> {
    check_pair(a, h)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let n = a.nrows();
    let mut ranks = Vec::new();
    let mut prev = 0;
    for k in 1..=n {
        let c = controllability_matrix(a, h, k)?;
        let rank = numerical_rank(&c, tol);
        ranks.push(rank);
        if rank == n {
            return Ok(ControllabilityIndex {
                kappa: Some(k),
                ranks,
                tol,
            });
        }
        if rank == prev {
            break;
        }
        prev = rank;
    }
    Ok(ControllabilityIndex {
        kappa: None,
        ranks,
        tol,
    })
}
