//! Ridge-regularized least-squares identification from one trajectory.

use alloc::format;

use nalgebra::QR;

use crate::linalg::{singular_values, spectral_norm};
use crate::{Error, Matrix, Result, Trajectory};

/// Ridge coefficient used when the caller does not pick one.
pub const DEFAULT_RIDGE: f64 = 1e-3;

/// Gram condition numbers above this are flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

/// With `ridge = 0`, a pivot below this fraction of the largest one means the
/// regressors are rank deficient.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub a_hat: Matrix,
    pub b_hat: Matrix,
    pub ridge: f64,
    /// Number of transitions used.
    pub horizon: usize,
    /// Condition number of the regularized Gram matrix `Z Z' + ridge I`.
    pub gram_condition: f64,
    /// `||A_true - A_hat||_2`, filled in by [`Estimate::with_truth`].
    pub error_vs: Option<f64>,
}

impl Estimate {
    pub fn with_truth(mut self, a_true: &Matrix) -> Result<Self> {
        self.error_vs = Some(estimation_error(&self, a_true)?);
        Ok(self)
    }

    pub fn is_ill_conditioned(&self) -> bool {
        !(self.gram_condition <= ILL_CONDITIONED)
    }
}

/// Minimizes `sum_t ||x_{t+1} - F x_t - G u_t||^2 + ridge (||F||_F^2 + ||G||_F^2)`.
///
/// With `z_t = [x_t; u_t]` stacked into `Z` (`d x N`) and `Y = [x_1 .. x_N]`,
/// the minimizer solves `(Z Z' + ridge I) [F G]' = Z Y'`. Instead of forming
/// the Gram matrix this factors the augmented matrix `[Z'; sqrt(ridge) I]`
/// by Householder QR, which squares nothing.
pub fn least_squares(traj: &Trajectory, ridge: f64) -> Result<Estimate> {
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::param("ridge", format!("must be finite and >= 0, got {ridge}")));
    }
    let horizon = traj.len();
    if horizon == 0 {
        return Err(Error::param("N", "trajectory needs at least one transition"));
    }
    let (n, p) = (traj.n(), traj.p());
    let d = n + p;
    if ridge == 0.0 && horizon < d {
        return Err(Error::RankDeficientRegression);
    }

    let extra = if ridge > 0.0 { d } else { 0 };
    let rows = horizon + extra;
    let states = traj.states();
    let mut design = Matrix::zeros(rows, d);
    design
        .view_mut((0, 0), (horizon, n))
        .copy_from(&states.columns(0, horizon).transpose());
    if p > 0 {
        design
            .view_mut((0, n), (horizon, p))
            .copy_from(&traj.inputs().transpose());
    }
    let mut rhs = Matrix::zeros(rows, n);
    rhs.view_mut((0, 0), (horizon, n))
        .copy_from(&states.columns(1, horizon).transpose());
    if extra > 0 {
        let s = libm::sqrt(ridge);
        for i in 0..d {
            design[(horizon + i, i)] = s;
        }
    }

    let qr = QR::new(design);
    qr.q_tr_mul(&mut rhs);
    let r = qr.r();
    let r = r.view((0, 0), (d, d)).into_owned();

    let pivots = r.diagonal().map(f64::abs);
    let largest = pivots.max();
    if !(largest > 0.0) || (ridge == 0.0 && pivots.min() <= PIVOT_TOL * largest) {
        return Err(Error::RankDeficientRegression);
    }
    let top = rhs.rows(0, d).into_owned();
    let theta_t = r
        .solve_upper_triangular(&top)
        .ok_or(Error::RankDeficientRegression)?;
    if theta_t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares solution"));
    }
    let theta = theta_t.transpose();

    let sv = singular_values(&r);
    let ratio = sv[0] / sv[d - 1];
    Ok(Estimate {
        a_hat: theta.columns(0, n).into_owned(),
        b_hat: theta.columns(n, p).into_owned(),
        ridge,
        horizon,
        gram_condition: ratio * ratio,
        error_vs: None,
    })
}

/// Spectral-norm error `||A_true - A_hat||_2`.
pub fn estimation_error(est: &Estimate, a_true: &Matrix) -> Result<f64> {
    if a_true.shape() != est.a_hat.shape() {
        return Err(Error::DimensionMismatch(format!(
            "A_true is {}x{}, estimate is {}x{}",
            a_true.nrows(),
            a_true.ncols(),
            est.a_hat.nrows(),
            est.a_hat.ncols()
        )));
    }
    Ok(spectral_norm(&(a_true - &est.a_hat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::simulate;
    use crate::{LtiSystem, NoiseSpec};

    fn residual(traj: &Trajectory, a: &Matrix, b: &Matrix, ridge: f64) -> f64 {
        let mut total = ridge * (a.norm_squared() + b.norm_squared());
        for t in 0..traj.len() {
            let mut e = traj.state(t + 1) - a * traj.state(t);
            if traj.p() > 0 {
                e -= b * traj.inputs().column(t);
            }
            total += e.norm_squared();
        }
        total
    }

    #[test]
    fn noiseless_data_is_interpolated() {
        let a = Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.8]);
        let sys = LtiSystem::new(a.clone(), Matrix::identity(2, 2), Matrix::zeros(2, 0)).unwrap();
        let traj = simulate(&sys, 50, &NoiseSpec::new(1.0, 0.0).unwrap(), 3).unwrap();
        let est = least_squares(&traj, 0.0).unwrap();
        assert!((&est.a_hat - &a).amax() < 1e-8);
        assert!((&est.b_hat - Matrix::identity(2, 2)).amax() < 1e-8);
    }

    #[test]
    fn zero_data_shrinks_to_zero() {
        let traj = Trajectory::from_parts(Matrix::zeros(2, 2), Matrix::zeros(2, 1), 0).unwrap();
        let est = least_squares(&traj, 1e-3).unwrap();
        assert_eq!(est.a_hat, Matrix::zeros(2, 2));
        assert_eq!(est.b_hat, Matrix::zeros(2, 2));
        assert!(matches!(least_squares(&traj, 0.0), Err(Error::RankDeficientRegression)));
    }

    #[test]
    fn states_only_regression() {
        let sys = LtiSystem::autonomous(Matrix::identity(3, 3) * 0.5, Matrix::identity(3, 3)).unwrap();
        let traj = simulate(&sys, 500, &NoiseSpec::unit(), 11).unwrap();
        let est = least_squares(&traj, DEFAULT_RIDGE).unwrap();
        assert_eq!(est.b_hat.shape(), (3, 0));
        assert!(estimation_error(&est, sys.a()).unwrap() < 0.2);
    }

    #[test]
    fn minimizer_beats_perturbations() {
        let a = Matrix::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 0.5]);
        let sys = LtiSystem::new(a, Matrix::from_row_slice(2, 1, &[1.0, 0.5]), Matrix::identity(2, 2)).unwrap();
        let traj = simulate(&sys, 40, &NoiseSpec::unit(), 5).unwrap();
        let est = least_squares(&traj, 0.01).unwrap();
        let best = residual(&traj, &est.a_hat, &est.b_hat, 0.01);
        let mut g = crate::rng::GaussianStream::new(99);
        for _ in 0..100 {
            let da = Matrix::from_fn(2, 2, |_, _| 1e-3 * g.next_std());
            let db = Matrix::from_fn(2, 1, |_, _| 1e-3 * g.next_std());
            assert!(residual(&traj, &(&est.a_hat + da), &(&est.b_hat + db), 0.01) >= best);
        }
    }

    #[test]
    fn error_of_rank_one_offset() {
        let a = Matrix::identity(3, 3) * 0.4;
        let mut a_hat = a.clone();
        a_hat[(0, 1)] += 0.1;
        let est = Estimate {
            a_hat,
            b_hat: Matrix::zeros(3, 0),
            ridge: 0.0,
            horizon: 1,
            gram_condition: 1.0,
            error_vs: None,
        };
        assert!((estimation_error(&est, &a).unwrap() - 0.1).abs() < 1e-15);
        assert!(estimation_error(&est, &Matrix::zeros(2, 2)).is_err());
    }
}
