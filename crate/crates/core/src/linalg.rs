//! Small dense linear-algebra helpers.
//!
//! Matrices are stored as nalgebra `DMatrix`, but singular value and eigenvalue
//! decompositions go through faer: nalgebra's SVD loses accuracy on
//! rank-deficient inputs (recomposition errors of order one on some 3x3
//! rank-one matrices), which is exactly the regime the rank and staircase
//! code works in.
//!
//! Singular values returned here are always sorted in descending order.

use alloc::vec;
use alloc::vec::Vec;

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::{Complex, Matrix};

/// Copy scaled to unit max-abs entry, so that entries near the overflow
/// threshold do not break the iterations. Returns the factor to undo it.
fn to_faer_scaled(m: &Matrix) -> (Mat<f64>, f64) {
    let s = m.amax();
    let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
    (Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / s), s)
}

/// Singular values of `m`, descending. Empty matrices have none; non-finite
/// input yields NaNs.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    let (f, scale) = to_faer_scaled(m);
    match f.singular_values() {
        Ok(mut sv) => {
            sv.iter_mut().for_each(|v| *v *= scale);
            sv.sort_by(|a, b| b.total_cmp(a));
            sv
        }
        Err(_) => vec![f64::NAN; k],
    }
}

/// Spectral norm (largest singular value). Zero for empty matrices.
pub fn spectral_norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn sigma_min(m: &Matrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Smallest singular value of a complex matrix.
pub fn sigma_min_complex(m: &DMatrix<Complex>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    match Mat::<Complex>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / scale).singular_values() {
        Ok(sv) => sv.into_iter().fold(f64::INFINITY, f64::min) * scale,
        Err(_) => f64::NAN,
    }
}

/// Numerical rank: number of singular values `>= rel_tol * sigma_max`.
///
/// A zero matrix has rank 0 regardless of the tolerance.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&smax) if smax > 0.0 => sv.iter().filter(|&&s| s >= rel_tol * smax).count(),
        _ => 0,
    }
}

/// Rank with an absolute threshold on the singular values.
pub fn rank_abs(m: &Matrix, threshold: f64) -> usize {
    singular_values(m)
        .iter()
        .filter(|&&s| s > threshold && s > 0.0)
        .count()
}

/// Spectral norm of the Moore-Penrose pseudo-inverse of a full-row-rank
/// matrix, i.e. `1 / sigma_min`.
pub fn pinv_norm(m: &Matrix) -> f64 {
    1.0 / sigma_min(m)
}

/// Eigenvalue moduli of a square matrix.
///
/// Triangular matrices are special-cased to read the diagonal: a Schur
/// iteration on a defective block such as `J_n(1)` would otherwise spread the
/// eigenvalues by roughly `eps^(1/n)`.
pub fn eigenvalue_moduli(a: &Matrix) -> Vec<f64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let upper = (0..n).all(|i| (0..i).all(|j| a[(i, j)] == 0.0));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| a[(i, j)] == 0.0));
    if upper || lower {
        return (0..n).map(|i| a[(i, i)].abs()).collect();
    }
    let (f, scale) = to_faer_scaled(a);
    match f.eigenvalues() {
        Ok(ev) => ev.iter().map(|z| z.norm() * scale).collect(),
        Err(_) => vec![f64::NAN; n],
    }
}

/// Spectral radius `max |lambda_i(A)|`.
pub fn spectral_radius(a: &Matrix) -> f64 {
    eigenvalue_moduli(a).into_iter().fold(0.0, f64::max)
}

/// Horizontal concatenation `[left, right]`.
pub fn hcat(left: &Matrix, right: &Matrix) -> Matrix {
    assert_eq!(left.nrows(), right.nrows(), "hcat: row count differs");
    let (n, a, b) = (left.nrows(), left.ncols(), right.ncols());
    let mut out = Matrix::zeros(n, a + b);
    out.columns_mut(0, a).copy_from(left);
    out.columns_mut(a, b).copy_from(right);
    out
}

/// Full SVD left factor: an `m x m` orthogonal matrix whose leading columns are
/// the left singular vectors of `block` ordered by descending singular value,
/// together with the `min(m, cols)` singular values.
pub fn full_left_singular_basis(block: &Matrix) -> (Matrix, Vec<f64>) {
    let m = block.nrows();
    if m == 0 {
        return (Matrix::zeros(0, 0), Vec::new());
    }
    if block.ncols() == 0 {
        return (Matrix::identity(m, m), Vec::new());
    }
    let (f, scale) = to_faer_scaled(block);
    let Ok(svd) = f.svd() else {
        let k = m.min(block.ncols());
        return (Matrix::identity(m, m), vec![f64::NAN; k]);
    };
    let u = svd.U();
    let s = svd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i] * scale).collect();
    (Matrix::from_fn(m, m, |i, j| u[(i, j)]), values)
}

/// Symmetric part `(m + m') / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    let (f, scale) = to_faer_scaled(&symmetrize(m));
    match f.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) => ev.into_iter().fold(f64::INFINITY, f64::min) * scale,
        Err(_) => f64::NAN,
    }
}

/// Unit vector `e_i` in `R^n`, with `i` 1-based to match the usual notation.
pub fn unit(n: usize, i: usize) -> crate::Vector {
    let mut v = crate::Vector::zeros(n);
    v[i - 1] = 1.0;
    v
}

/// Jordan block `J_n(lambda)`: `lambda` on the diagonal, ones above it.
pub fn jordan_block(n: usize, lambda: f64) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    })
}
