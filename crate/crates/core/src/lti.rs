//! Discrete-time linear systems driven by white-noise inputs and process noise.

use alloc::format;

use crate::linalg::{numerical_rank, spectral_norm, spectral_radius};
use crate::rng::GaussianStream;
use crate::{Error, Matrix, Result, Vector};

/// Slack on the non-explosive condition `rho(A) <= 1`.
pub const SPECTRAL_RADIUS_TOL: f64 = 1e-9;
/// Relative singular-value tolerance for the full-column-rank checks on B and H.
pub const RANK_TOL: f64 = 1e-8;

/// A validated triple `(A, B, H)` with state dimension `n`, `p` inputs and
/// `r` noise channels.
///
/// Invariants, checked on construction:
/// * `||A||, ||B||, ||H|| <= M` where `M` is the largest of the three norms,
/// * `rho(A) <= 1 + 1e-9`,
/// * B and H have full column rank.
///
/// `p = 0` (no inputs) and `r = 0` (no process noise) are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    h: Matrix,
    norm_bound: f64,
}

impl LtiSystem {
    /// Validates `(A, B, H)` and computes the norm bound `M`.
    pub fn new(a: Matrix, b: Matrix, h: Matrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.nrows()
            )));
        }
        if h.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "H has {} rows, expected {n}",
                h.nrows()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("H", &h)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        let radius = spectral_radius(&a);
        if radius > 1.0 + SPECTRAL_RADIUS_TOL {
            return Err(Error::ExplosiveSpectralRadius {
                radius,
                tol: SPECTRAL_RADIUS_TOL,
            });
        }
        if b.ncols() > n {
            return Err(Error::RankDeficientInput {
                rank: n,
                cols: b.ncols(),
            });
        }
        let rank_b = numerical_rank(&b, RANK_TOL);
        if rank_b < b.ncols() {
            return Err(Error::RankDeficientInput {
                rank: rank_b,
                cols: b.ncols(),
            });
        }
        if h.ncols() > n {
            return Err(Error::RankDeficientNoise {
                rank: n,
                cols: h.ncols(),
            });
        }
        let rank_h = numerical_rank(&h, RANK_TOL);
        if rank_h < h.ncols() {
            return Err(Error::RankDeficientNoise {
                rank: rank_h,
                cols: h.ncols(),
            });
        }
        let norm_bound = spectral_norm(&a)
            .max(spectral_norm(&b))
            .max(spectral_norm(&h));
        Ok(Self {
            a,
            b,
            h,
            norm_bound,
        })
    }

    /// System without exogenous inputs (`p = 0`).
    pub fn autonomous(a: Matrix, h: Matrix) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, Matrix::zeros(n, 0), h)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn p(&self) -> usize {
        self.b.ncols()
    }

    /// Number of noise channels.
    pub fn r(&self) -> usize {
        self.h.ncols()
    }

    /// `M = max(||A||, ||B||, ||H||)`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Excitation matrix `[H B]` used for controllability of the full system.
    pub fn excitation(&self) -> Matrix {
        crate::linalg::hcat(&self.h, &self.b)
    }
}

/// Per-coordinate standard deviations of the white-noise input `u_k` and the
/// process noise `w_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub input_std: f64,
    pub noise_std: f64,
}

impl NoiseSpec {
    pub fn new(input_std: f64, noise_std: f64) -> Result<Self> {
        for (name, v) in [("input_std", input_std), ("noise_std", noise_std)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self {
            input_std,
            noise_std,
        })
    }

    /// Builds the spec from variances, e.g. `N(0, 0.5)` read as variance 0.5.
    pub fn from_variances(input_var: f64, noise_var: f64) -> Result<Self> {
        for (name, v) in [("input_var", input_var), ("noise_var", noise_var)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Self::new(libm::sqrt(input_var), libm::sqrt(noise_var))
    }

    pub fn unit() -> Self {
        Self {
            input_std: 1.0,
            noise_std: 1.0,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            input_std: self.input_std * c,
            noise_std: self.noise_std * c,
        }
    }
}

/// One seeded rollout: states `x_0..x_N` (columns of an `n x (N+1)` matrix)
/// and inputs `u_0..u_{N-1}` (columns of a `p x N` matrix). `x_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Matrix,
    inputs: Matrix,
    seed: u64,
}

impl Trajectory {
    /// Assembles a trajectory from recorded data, e.g. one read back from a
    /// file.
    pub fn from_parts(states: Matrix, inputs: Matrix, seed: u64) -> Result<Self> {
        if states.ncols() == 0 {
            return Err(Error::DimensionMismatch("trajectory has no states".into()));
        }
        if inputs.ncols() + 1 != states.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} states need {} inputs, got {}",
                states.ncols(),
                states.ncols() - 1,
                inputs.ncols()
            )));
        }
        Ok(Self {
            states,
            inputs,
            seed,
        })
    }

    /// Horizon `N` (number of transitions).
    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        self.states.nrows()
    }

    pub fn p(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn states(&self) -> &Matrix {
        &self.states
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn state(&self, k: usize) -> Vector {
        self.states.column(k).into_owned()
    }
}

/// Rolls out `x_{k+1} = A x_k + B u_k + H w_k` from `x_0 = 0` for `horizon`
/// steps.
///
/// At each step the `p` input coordinates are drawn first, then the `r` noise
/// coordinates, all from one [`GaussianStream`] seeded with `seed`.
pub fn simulate(
    sys: &LtiSystem,
    horizon: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::param("horizon", "must be >= 1"));
    }
    let (n, p, r) = (sys.n(), sys.p(), sys.r());
    let mut stream = GaussianStream::new(seed);
    let mut states = Matrix::zeros(n, horizon + 1);
    let mut inputs = Matrix::zeros(p, horizon);
    let mut x = Vector::zeros(n);
    let mut next = Vector::zeros(n);
    let mut u = Vector::zeros(p);
    let mut w = Vector::zeros(r);
    for k in 0..horizon {
        for v in u.iter_mut() {
            *v = noise.input_std * stream.next_std();
        }
        for v in w.iter_mut() {
            *v = noise.noise_std * stream.next_std();
        }
        next.gemv(1.0, sys.a(), &x, 0.0);
        if p > 0 {
            next.gemv(1.0, sys.b(), &u, 1.0);
        }
        if r > 0 {
            next.gemv(1.0, sys.h(), &w, 1.0);
        }
        inputs.set_column(k, &u);
        states.set_column(k + 1, &next);
        core::mem::swap(&mut x, &mut next);
    }
    Ok(Trajectory {
        states,
        inputs,
        seed,
    })
}
