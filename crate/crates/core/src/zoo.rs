//! Benchmark systems.
//!
//! The constructors build the under-actuated families whose identification
//! difficulty is studied by the harness: Jordan blocks actuated from the last
//! state, weakly coupled chains, perturbed integrators and the two-system
//! construction with an arbitrarily weak coupling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::{jordan_block, unit};
use crate::{Error, LtiSystem, Matrix, Result};

/// `0.5 J_n(1)` actuated and disturbed through the last state: `B = H = e_n`.
pub fn scaled_jordan(n: usize) -> Result<LtiSystem> {
    if n < 2 {
        return Err(Error::param("n", format!("must be >= 2, got {n}")));
    }
    let a = jordan_block(n, 1.0) * 0.5;
    let e_n = Matrix::from_column_slice(n, 1, unit(n, n).as_slice());
    LtiSystem::new(a, e_n.clone(), e_n)
}

/// Weakly coupled chain: `rho` on the diagonal and superdiagonal,
/// `H = [e_1, rho e_n]`, no inputs.
pub fn hard_chain(n: usize, rho: f64) -> Result<LtiSystem> {
    if n < 2 {
        return Err(Error::param("n", format!("must be >= 2, got {n}")));
    }
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::param("rho", format!("must lie in (0, 1/2), got {rho}")));
    }
    let a = jordan_block(n, 1.0) * rho;
    let mut h = Matrix::zeros(n, 2);
    h[(0, 0)] = 1.0;
    h[(n - 1, 1)] = rho;
    LtiSystem::autonomous(a, h)
}

/// Perturbed `n`-th order integrator `A = rho (I + S)`, `H = rho e_n`, where
/// `S` is the upper shift.
pub fn perturbed_integrator(n: usize, rho: f64) -> Result<(Matrix, Matrix)> {
    if n < 1 {
        return Err(Error::param("n", "must be >= 1"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1], got {rho}")));
    }
    let a = jordan_block(n, 1.0) * rho;
    let mut h = Matrix::zeros(n, 1);
    h[(n - 1, 0)] = rho;
    Ok((a, h))
}

/// The pair `(S1, S2)` on three states with `H = [e_1, e_3]`: `S1` has the
/// single coupling `A[2,3] = beta`, `S2` additionally sets `A[1,2] = 2 eps`.
///
/// For small `beta` the second state is barely excited, so the two systems
/// produce nearly indistinguishable trajectories while `||A1 - A2|| = 2 eps`.
pub fn kl_pair(beta: f64, eps: f64) -> Result<(LtiSystem, LtiSystem)> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::param("beta", "must be finite and non-zero"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", "must be finite and > 0"));
    }
    let mut a1 = Matrix::zeros(3, 3);
    a1[(1, 2)] = beta;
    let mut a2 = a1.clone();
    a2[(0, 1)] = 2.0 * eps;
    let mut h = Matrix::zeros(3, 2);
    h[(0, 0)] = 1.0;
    h[(2, 1)] = 1.0;
    Ok((
        LtiSystem::autonomous(a1, h.clone())?,
        LtiSystem::autonomous(a2, h)?,
    ))
}

/// Shortened chain padded with directly excited states:
/// `A = diag(rho J_c(1), I_{n-c})` with `c = floor(n/m)`, and
/// `H = [e_1, rho e_c, e_{c+1}, ..., e_n]`.
pub fn padded_chain(n: usize, m: usize, rho: f64) -> Result<LtiSystem> {
    if m < 1 || m > n {
        return Err(Error::param("m", format!("must satisfy 1 <= m <= n = {n}, got {m}")));
    }
    let c = n / m;
    if c < 2 {
        return Err(Error::param(
            "m",
            format!("chain block floor(n/m) = {c} must have at least 2 states"),
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    let mut a = Matrix::identity(n, n);
    a.view_mut((0, 0), (c, c)).copy_from(&(jordan_block(c, 1.0) * rho));
    let mut h = Matrix::zeros(n, 2 + n - c);
    h[(0, 0)] = 1.0;
    h[(c - 1, 1)] = rho;
    for (col, state) in (c..n).enumerate() {
        h[(state, 2 + col)] = 1.0;
    }
    LtiSystem::autonomous(a, h)
}

/// Placement of the actuated states for [`jordan_actuated`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputPattern {
    /// `[e_n]`
    Last,
    /// `[e_n, e_ceil(n/2)]`
    Half,
    /// `[e_n, e_{n-2}, e_{n-4}, ...]`
    EveryOther,
}

impl InputPattern {
    /// 1-based indices of the actuated states.
    pub fn states(self, n: usize) -> Vec<usize> {
        match self {
            InputPattern::Last => alloc::vec![n],
            InputPattern::Half => alloc::vec![n, n.div_ceil(2)],
            InputPattern::EveryOther => (1..=n).rev().step_by(2).collect(),
        }
    }

    /// Label for the controllability index this pattern produces.
    pub fn kappa_label(self) -> &'static str {
        match self {
            InputPattern::Last => "n",
            InputPattern::Half => "ceil(n/2)",
            InputPattern::EveryOther => "2",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InputPattern::Last => "last",
            InputPattern::Half => "half",
            InputPattern::EveryOther => "every_other",
        }
    }
}

impl FromStr for InputPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(InputPattern::Last),
            "half" => Ok(InputPattern::Half),
            "every_other" | "every-other" => Ok(InputPattern::EveryOther),
            other => Err(Error::param(
                "pattern",
                format!("unknown pattern `{other}` (expected last, half or every_other)"),
            )),
        }
    }
}

impl fmt::Display for InputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Jordan block `J_n(lambda)` with `H = h_scale e_n` and inputs entering at
/// the states selected by `pattern`, each scaled by `b_scale`.
pub fn jordan_actuated(
    n: usize,
    lambda: f64,
    h_scale: f64,
    b_scale: f64,
    pattern: InputPattern,
) -> Result<LtiSystem> {
    if n < 2 {
        return Err(Error::param("n", format!("must be >= 2, got {n}")));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::param("lambda", format!("must lie in (0, 1], got {lambda}")));
    }
    if h_scale == 0.0 || b_scale == 0.0 {
        return Err(Error::param("scale", "h_scale and b_scale must be non-zero"));
    }
    let a = jordan_block(n, lambda);
    let mut h = Matrix::zeros(n, 1);
    h[(n - 1, 0)] = h_scale;
    let states = pattern.states(n);
    let mut b = Matrix::zeros(n, states.len());
    for (col, &state) in states.iter().enumerate() {
        b[(state - 1, col)] = b_scale;
    }
    LtiSystem::new(a, b, h)
}

/// A zoo family with its parameters, instantiated per dimension with
/// [`SystemSpec::build`].
///
/// The textual form is `name` or `name:key=value,key=value`, e.g.
/// `jordan_actuated:lambda=0.5,h=0.1,b=5,pattern=last`.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    ScaledJordan,
    HardChain {
        rho: f64,
    },
    PaddedChain {
        m: usize,
        rho: f64,
    },
    PerturbedIntegrator {
        rho: f64,
    },
    JordanActuated {
        lambda: f64,
        h_scale: f64,
        b_scale: f64,
        pattern: InputPattern,
    },
}

impl SystemSpec {
    pub fn build(&self, n: usize) -> Result<LtiSystem> {
        match *self {
            SystemSpec::ScaledJordan => scaled_jordan(n),
            SystemSpec::HardChain { rho } => hard_chain(n, rho),
            SystemSpec::PaddedChain { m, rho } => padded_chain(n, m, rho),
            SystemSpec::PerturbedIntegrator { rho } => {
                let (a, h) = perturbed_integrator(n, rho)?;
                LtiSystem::autonomous(a, h)
            }
            SystemSpec::JordanActuated {
                lambda,
                h_scale,
                b_scale,
                pattern,
            } => jordan_actuated(n, lambda, h_scale, b_scale, pattern),
        }
    }

    /// Diagonal eigenvalue of the family, when it has a single one.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            SystemSpec::ScaledJordan => Some(0.5),
            SystemSpec::HardChain { rho } | SystemSpec::PerturbedIntegrator { rho } => Some(rho),
            SystemSpec::PaddedChain { .. } => None,
            SystemSpec::JordanActuated { lambda, .. } => Some(lambda),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::ScaledJordan => "scaled_jordan",
            SystemSpec::HardChain { .. } => "hard_chain",
            SystemSpec::PaddedChain { .. } => "padded_chain",
            SystemSpec::PerturbedIntegrator { .. } => "perturbed_integrator",
            SystemSpec::JordanActuated { .. } => "jordan_actuated",
        }
    }
}

fn spec_err(reason: String) -> Error {
    Error::param("system", reason)
}

impl FromStr for SystemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((name, rest)) => (name.trim(), rest.trim()),
            None => (s, ""),
        };
        let mut params: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| spec_err(format!("expected key=value, got `{item}`")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut take = |key: &str| -> Option<String> {
            let pos = params.iter().position(|(k, _)| k == key)?;
            Some(params.remove(pos).1)
        };
        let num = |key: &str, v: Option<String>, default: Option<f64>| -> Result<f64> {
            match v {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| spec_err(format!("`{key}` is not a number: `{v}`"))),
                None => default.ok_or_else(|| spec_err(format!("missing parameter `{key}`"))),
            }
        };
        let spec = match name {
            "scaled_jordan" => SystemSpec::ScaledJordan,
            "hard_chain" => SystemSpec::HardChain {
                rho: num("rho", take("rho"), Some(0.25))?,
            },
            "padded_chain" => SystemSpec::PaddedChain {
                m: num("m", take("m"), None)? as usize,
                rho: num("rho", take("rho"), Some(0.25))?,
            },
            "perturbed_integrator" => SystemSpec::PerturbedIntegrator {
                rho: num("rho", take("rho"), None)?,
            },
            "jordan_actuated" => SystemSpec::JordanActuated {
                lambda: num("lambda", take("lambda"), None)?,
                h_scale: num("h", take("h"), Some(0.1))?,
                b_scale: num("b", take("b"), Some(5.0))?,
                pattern: match take("pattern") {
                    Some(p) => p.parse()?,
                    None => InputPattern::Last,
                },
            },
            other => return Err(spec_err(format!("unknown system family `{other}`"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(spec_err(format!("unknown parameter `{k}` for `{name}`")));
        }
        Ok(spec)
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::ScaledJordan => write!(f, "scaled_jordan"),
            SystemSpec::HardChain { rho } => write!(f, "hard_chain:rho={rho}"),
            SystemSpec::PaddedChain { m, rho } => write!(f, "padded_chain:m={m},rho={rho}"),
            SystemSpec::PerturbedIntegrator { rho } => write!(f, "perturbed_integrator:rho={rho}"),
            SystemSpec::JordanActuated {
                lambda,
                h_scale,
                b_scale,
                pattern,
            } => write!(
                f,
                "jordan_actuated:lambda={lambda},h={h_scale},b={b_scale},pattern={pattern}"
            ),
        }
    }
}
