use alloc::vec::Vec;

use super::check_pair;
use crate::linalg::{full_left_singular_basis, spectral_norm};
use crate::{Error, Matrix, Result};

/// Orthogonal staircase (block upper-Hessenberg) form of a pair `(A, H)`.
///
/// `A_tilde = U' A U` has blocks `A_{i,j}` of size `r_i x r_j` with
/// `A_{i,j} = 0` for `i > j + 1`; the subdiagonal couplings `A_{i+1,i}` have
/// full row rank. `H_tilde = U' H` is zero below its first `r_1` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseForm {
    pub u: Matrix,
    pub a_tilde: Matrix,
    pub h_tilde: Matrix,
    /// `r_1 >= r_2 >= ...`, summing to `n` when controllable.
    pub block_sizes: Vec<usize>,
    /// Number of staircase steps. Equals the controllability index when
    /// `controllable`; otherwise the number of steps taken before a coupling
    /// block vanished.
    pub kappa: usize,
    pub controllable: bool,
    /// Relative tolerance requested by the caller.
    pub tol: f64,
    /// Absolute singular-value threshold actually applied,
    /// `tol * max(||A||, ||H||)`.
    pub threshold: f64,
    /// Largest magnitude that was zeroed out to enforce the block structure.
    pub discarded: f64,
}

impl StaircaseForm {
    /// Row/column offset of block `i` (1-based).
    fn offset(&self, i: usize) -> usize {
        self.block_sizes[..i - 1].iter().sum()
    }

    /// `A_{i,j}` (1-based block indices).
    pub fn block(&self, i: usize, j: usize) -> Matrix {
        let (ri, rj) = (self.block_sizes[i - 1], self.block_sizes[j - 1]);
        self.a_tilde
            .view((self.offset(i), self.offset(j)), (ri, rj))
            .into_owned()
    }

    /// Subdiagonal coupling `A_{i+1,i}` for `i = 1..kappa-1`.
    pub fn coupling(&self, i: usize) -> Matrix {
        self.block(i + 1, i)
    }

    /// Leading block `H_1` (the first `r_1` rows of `H_tilde`).
    pub fn h1(&self) -> Matrix {
        self.h_tilde.rows(0, self.block_sizes[0]).into_owned()
    }
}

/// Reduces `(A, H)` to staircase form by repeated SVD deflation.
///
/// Step 1 rotates the rows so that the range of `H` occupies the first `r_1`
/// coordinates. Each following step takes the coupling block below the block
/// just produced, reads its numerical rank `r_{i+1}` from its singular values,
/// and rotates the remaining coordinates by its left singular vectors. The
/// iteration stops when the blocks fill all `n` states or a coupling block has
/// rank 0 (uncontrollable pair, reported in-band).
pub fn staircase(a: &Matrix, h: &Matrix, tol: f64) -> Result<StaircaseForm> {
    check_pair(a, h)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    let n = a.nrows();
    let scale = spectral_norm(a).max(spectral_norm(h));
    let threshold = tol * scale;

    let mut u = Matrix::identity(n, n);
    let mut at = a.clone();
    let mut ht = h.clone();
    let mut blocks = Vec::new();
    let mut discarded: f64 = 0.0;
    let mut offset = 0;
    let mut coupling_cols: Option<(usize, usize)> = None;
    let mut controllable = false;

    while offset < n {
        let m = n - offset;
        let coupling = match coupling_cols {
            None => ht.rows(offset, m).into_owned(),
            Some((start, len)) => at.view((offset, start), (m, len)).into_owned(),
        };
        let (q, sv) = full_left_singular_basis(&coupling);
        let rank = sv.iter().filter(|&&s| s > threshold).count();
        if rank == 0 {
            break;
        }

        // Rotate the trailing m coordinates: A <- P'AP, H <- P'H, U <- UP.
        let rows = q.transpose() * at.rows(offset, m);
        at.rows_mut(offset, m).copy_from(&rows);
        let cols = at.columns(offset, m) * &q;
        at.columns_mut(offset, m).copy_from(&cols);
        let hrows = q.transpose() * ht.rows(offset, m);
        ht.rows_mut(offset, m).copy_from(&hrows);
        let ucols = u.columns(offset, m) * &q;
        u.columns_mut(offset, m).copy_from(&ucols);

        // Below the new block the coupling is numerically zero.
        let below = m - rank;
        if below > 0 {
            let mut tail = match coupling_cols {
                None => ht.rows_mut(offset + rank, below),
                Some((start, len)) => at.view_mut((offset + rank, start), (below, len)),
            };
            discarded = discarded.max(tail.amax());
            tail.fill(0.0);
        }

        blocks.push(rank);
        coupling_cols = Some((offset, rank));
        offset += rank;
        if offset == n {
            controllable = true;
        }
    }

    Ok(StaircaseForm {
        u,
        a_tilde: at,
        h_tilde: ht,
        kappa: blocks.len(),
        block_sizes: blocks,
        controllable,
        tol,
        threshold,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jordan_block, sigma_min};
    use crate::zoo;

    #[test]
    fn staircase_input_is_a_fixed_point() {
        let a = jordan_block(4, 0.5).transpose();
        let mut h = Matrix::zeros(4, 1);
        h[(0, 0)] = 1.0;
        let sc = staircase(&a, &h, 1e-8).unwrap();
        assert!(sc.controllable);
        assert_eq!(sc.block_sizes, alloc::vec![1, 1, 1, 1]);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((sc.u[(i, j)].abs() - expected).abs() < 1e-12);
            }
        }
        assert!((sc.a_tilde.abs() - a.abs()).norm() < 1e-12);
    }

    #[test]
    fn integrator_couplings_dominate_distance() {
        let (a, h) = zoo::perturbed_integrator(6, 0.5).unwrap();
        let sc = staircase(&a, &h, 1e-8).unwrap();
        let mu = 0.5 * (core::f64::consts::PI / 7.0).sin();
        assert!((mu - 0.2169).abs() < 1e-4);
        assert_eq!(sc.kappa, 6);
        assert!(sigma_min(&sc.h1()) >= mu);
        for i in 1..sc.kappa {
            assert!(sigma_min(&sc.coupling(i)) >= mu, "coupling {i}");
        }
    }

    #[test]
    fn uncontrollable_pair_gives_partial_staircase() {
        // Second state is never reached.
        let a = Matrix::from_row_slice(3, 3, &[0.5, 0.0, 0.2, 0.0, 0.3, 0.0, 0.1, 0.0, 0.4]);
        let mut h = Matrix::zeros(3, 1);
        h[(0, 0)] = 1.0;
        let sc = staircase(&a, &h, 1e-8).unwrap();
        assert!(!sc.controllable);
        assert_eq!(sc.block_sizes, alloc::vec![1, 1]);
        assert_eq!(sc.kappa, 2);
    }

    #[test]
    fn zero_input_matrix_has_no_blocks() {
        let sc = staircase(&jordan_block(2, 0.5), &Matrix::zeros(2, 1), 1e-8).unwrap();
        assert!(!sc.controllable);
        assert!(sc.block_sizes.is_empty());
    }
}
