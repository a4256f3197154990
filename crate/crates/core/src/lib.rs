//! Numerical core for single-trajectory identification of linear systems
//!
//! ```text
//! x_{k+1} = A x_k + B u_k + H w_k,    x_0 = 0
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`lti`]: validated system triples, seeded simulation, and the [`zoo`] of
//!   benchmark systems (weakly coupled chains, Jordan blocks, integrators).
//! * [`ctrb`]: controllability matrices, Gramians, controllability index,
//!   staircase form and distance to uncontrollability.
//! * [`bounds`]: closed-form sample-complexity and Gramian bounds, exact
//!   trajectory KL divergence for minimax pairs, and the staircase-based
//!   least-singular-value certificate.
//! * [`ident`]: ridge-regularized least squares from one trajectory.
//!
//! Everything here is a pure function of its inputs. The Monte Carlo harness,
//! file formats and the command-line tool live in the `sysid` crate.
#![no_std]

extern crate alloc;

pub mod bounds;
pub mod ctrb;
mod error;
pub mod ident;
pub mod linalg;
pub mod lti;
pub mod rng;
pub mod zoo;

pub use error::{Error, Result};
pub use lti::{LtiSystem, NoiseSpec, Trajectory};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;
/// Complex scalar, used for the distance-to-uncontrollability search variable.
pub type Complex = num_complex::Complex64;
