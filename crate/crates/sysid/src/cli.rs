//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success, 1 for usage errors and
//! malformed files, 2 for numerical or domain errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sysid_core::bounds::{self, ExpHardForm, RequiredSamples};
use sysid_core::ctrb::{self, DEFAULT_RANK_TOL};
use sysid_core::ident::{least_squares, DEFAULT_RIDGE};
use sysid_core::linalg::singular_values;
use sysid_core::lti::simulate;
use sysid_core::zoo::{self, SystemSpec};
use sysid_core::{LtiSystem, NoiseSpec};

use crate::config::{parse_dims, read_config};
use crate::io::{self, fmt_f64, write_text};
use crate::mc::{self, NoiseReading, Preset, PresetOptions, DEFAULT_N_MAX, DEFAULT_TRIALS};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "sysid",
    version,
    about = "Sample complexity of identifying linear systems: simulation, least squares, controllability analysis, bounds and Monte Carlo sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and write it as CSV
    Simulate(SimulateArgs),
    /// Least-squares estimate of (A, B) from a trajectory CSV
    Identify(IdentifyArgs),
    /// Controllability analysis of (A, [H B])
    #[command(subcommand)]
    Ctrb(CtrbCommand),
    /// Same as `ctrb distance`
    Distance(DistanceArgs),
    /// Same as `ctrb staircase`
    Staircase(StaircaseArgs),
    /// Evaluate closed-form bounds
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Minimum-sample search for an experiment config file
    Mc(McArgs),
    /// Regenerate a built-in sample-complexity sweep
    Repro(ReproArgs),
    /// Write a benchmark system as a model file
    Zoo(ZooArgs),
}

/// Where a system comes from: a model file or a zoo family.
#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Model file with `# block:` sections A, optional B, and H
    #[arg(long, value_name = "FILE", conflicts_with = "zoo", required_unless_present = "zoo")]
    pub model: Option<PathBuf>,
    /// Zoo family, e.g. `hard_chain:rho=0.25` or `jordan_actuated:lambda=0.5,pattern=half`
    #[arg(long, value_name = "SPEC", requires = "dim")]
    pub zoo: Option<String>,
    /// State dimension for --zoo
    #[arg(long, value_name = "N")]
    pub dim: Option<usize>,
}

impl SystemArgs {
    fn load(&self) -> Result<LtiSystem> {
        match (&self.model, &self.zoo) {
            (Some(path), _) => io::read_model(path),
            (None, Some(spec)) => build_zoo(spec, self.dim.unwrap_or(0)),
            (None, None) => Err(Error::Usage("give --model or --zoo".into())),
        }
    }
}

fn build_zoo(spec: &str, dim: usize) -> Result<LtiSystem> {
    let spec: SystemSpec = spec.parse().map_err(|e: sysid_core::Error| Error::Usage(e.to_string()))?;
    Ok(spec.build(dim)?)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Number of transitions N
    #[arg(long, value_name = "N")]
    pub steps: usize,
    /// RNG seed
    #[arg(long)]
    pub seed: u64,
    /// Standard deviation of each input coordinate
    #[arg(long, conflicts_with = "input_var")]
    pub input_std: Option<f64>,
    /// Standard deviation of each process-noise coordinate
    #[arg(long, conflicts_with = "noise_var")]
    pub noise_std: Option<f64>,
    /// Variance of each input coordinate
    #[arg(long)]
    pub input_var: Option<f64>,
    /// Variance of each process-noise coordinate
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Output file (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Trajectory CSV with header `t,x1..xn,u1..up`
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Ridge coefficient
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    pub ridge: f64,
    /// Model file of the true system; adds the spectral error to the report
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    /// Estimate CSV output (default: stdout, with the report on stderr)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CtrbCommand {
    /// Controllability index by rank sweep
    Index(IndexArgs),
    /// Orthogonal staircase form
    Staircase(StaircaseArgs),
    /// Distance to uncontrollability
    Distance(DistanceArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Relative rank tolerance
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct StaircaseArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Relative rank tolerance
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
    /// Also write U, A_tilde and H_tilde as a block file
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Grid spacing (default: 0.02 (||A|| + ||[H B]||))
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Skip the local refinement pass
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// Evaluate one closed-form bound
    Eval(EvalArgs),
    /// Bound on ||C_kappa^+|| for a class (M, mu, kappa)
    Certify(CertifyArgs),
    /// Exact KL divergence of the weak-coupling pair and required samples
    Kl(KlArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundName {
    /// (e k)^{n-1} max(M^n, 1) >= ||A^k||
    Powers,
    /// e^{2n-2} k^{2n-1} max(M^{2n}, 1) >= ||Gamma_k||
    Gramian,
    /// (2 rho)^{2n-2} / (1 - 4 rho^2), Gramian (2,2) entry of the weak chain
    Gramian22,
    /// rho sin(pi/(n+1)) and its bracket
    IntegratorDistance,
    /// Exponential lower bound on the trajectory length
    ExpHard,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Bound to evaluate
    #[arg(value_enum)]
    pub bound: BoundName,
    /// Norm bound M (powers, gramian)
    #[arg(long = "M", visible_alias = "m")]
    pub m: Option<f64>,
    /// State dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Power or horizon (powers, gramian)
    #[arg(long)]
    pub k: Option<usize>,
    /// Coupling (gramian22, integrator-distance)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Accuracy (exp-hard)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Failure probability (exp-hard)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Use the proof's constant instead of the theorem's (exp-hard)
    #[arg(long)]
    pub proof_form: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Norm bound M >= max(||A||, ||H||)
    #[arg(long = "M", visible_alias = "m")]
    pub m: f64,
    /// Lower bound on the distance to uncontrollability
    #[arg(long)]
    pub mu: f64,
    /// Controllability index
    #[arg(long)]
    pub kappa: usize,
}

#[derive(Debug, Args)]
pub struct KlArgs {
    /// Weak coupling beta
    #[arg(long)]
    pub beta: f64,
    /// Perturbation size eps
    #[arg(long)]
    pub eps: f64,
    /// Trajectory length for the KL value
    #[arg(long, value_name = "N")]
    pub horizon: Option<usize>,
    /// Also report the smallest N whose KL reaches ln(1/(3 delta))
    #[arg(long)]
    pub delta: Option<f64>,
    /// Search cap for --delta
    #[arg(long, default_value_t = 10_000_000)]
    pub n_max: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Experiment config file (key = value lines)
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Master seed; must agree with `master_seed` in the config if present
    #[arg(long)]
    pub seed: u64,
    /// CSV output (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadingArg {
    Variance,
    Std,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Sweep to run
    #[arg(value_enum)]
    pub preset: PresetName,
    /// Master seed
    #[arg(long)]
    pub seed: u64,
    /// Accuracy targets (default: the preset's)
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Monte Carlo trials per probe
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Dimensions, `5..10` or `5,7,9` (default: the preset's)
    #[arg(long, value_name = "RANGE")]
    pub n_range: Option<String>,
    /// Search cap on N
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    /// Read the preset's noise figures as variances or standard deviations
    #[arg(long, value_enum, default_value_t = ReadingArg::Variance)]
    pub noise_reading: ReadingArg,
    /// Ridge coefficient
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    pub ridge: f64,
    /// CSV output (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    /// Zoo family, e.g. `padded_chain:m=2,rho=0.25`
    #[arg(long, value_name = "SPEC")]
    pub zoo: String,
    /// State dimension
    #[arg(long, value_name = "N")]
    pub dim: usize,
    /// Model file output (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| Error::io("<stdout>", e))?
    };
}

fn require<T>(v: Option<T>, flag: &str, bound: &str) -> Result<T> {
    v.ok_or_else(|| Error::Usage(format!("`bounds eval {bound}` needs --{flag}")))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(Error::Usage("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start thread pool: {e}")))?
            .install(f),
    }
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let sys = a.system.load()?;
            let noise = match (a.input_var, a.noise_var) {
                (None, None) => NoiseSpec::new(a.input_std.unwrap_or(1.0), a.noise_std.unwrap_or(1.0))?,
                (iv, nv) if a.input_std.is_none() && a.noise_std.is_none() => {
                    NoiseSpec::from_variances(iv.unwrap_or(1.0), nv.unwrap_or(1.0))?
                }
                _ => {
                    return Err(Error::Usage(
                        "give noise either as standard deviations or as variances, not both".into(),
                    ))
                }
            };
            let traj = simulate(&sys, a.steps, &noise, a.seed)?;
            emit(a.out.as_deref(), &io::trajectory_to_csv(&traj), stdout)
        }
        Command::Identify(a) => {
            let traj = io::read_trajectory(&a.data)?;
            let mut est = least_squares(&traj, a.ridge)?;
            if let Some(path) = &a.truth {
                let truth = io::read_model(path)?;
                est = est.with_truth(truth.a())?;
            }
            emit(a.out.as_deref(), &io::estimate_to_csv(&est), stdout)?;
            let report: &mut dyn Write = if a.out.is_some() { stdout } else { stderr };
            say!(report, "horizon: {}", est.horizon);
            say!(report, "ridge: {}", fmt_f64(est.ridge));
            say!(report, "gram_condition: {}", fmt_f64(est.gram_condition));
            say!(report, "ill_conditioned: {}", est.is_ill_conditioned());
            if let Some(err) = est.error_vs {
                say!(report, "error: {}", fmt_f64(err));
            }
            Ok(())
        }
        Command::Ctrb(CtrbCommand::Index(a)) => {
            let sys = a.system.load()?;
            let idx = ctrb::controllability_index(sys.a(), &sys.excitation(), a.tol)?;
            match idx.kappa {
                Some(k) => say!(stdout, "kappa: {k}"),
                None => say!(stdout, "kappa: none"),
            }
            say!(stdout, "controllable: {}", idx.is_controllable());
            say!(stdout, "ranks: {}", fmt_list(&idx.ranks));
            say!(stdout, "increments: {}", fmt_list(&idx.increments()));
            say!(stdout, "tol: {}", fmt_f64(idx.tol));
            Ok(())
        }
        Command::Ctrb(CtrbCommand::Staircase(a)) | Command::Staircase(a) => {
            let sys = a.system.load()?;
            let form = ctrb::staircase(sys.a(), &sys.excitation(), a.tol)?;
            say!(stdout, "kappa: {}", form.kappa);
            say!(stdout, "controllable: {}", form.controllable);
            say!(stdout, "block_sizes: {}", fmt_list(&form.block_sizes));
            let couplings: Vec<String> = (1..form.block_sizes.len())
                .map(|i| {
                    let sv = singular_values(&form.coupling(i));
                    fmt_f64(sv.last().copied().unwrap_or(0.0))
                })
                .collect();
            say!(stdout, "coupling_sigma_min: {}", couplings.join(","));
            say!(stdout, "tol: {}", fmt_f64(form.tol));
            say!(stdout, "threshold: {}", fmt_f64(form.threshold));
            say!(stdout, "discarded: {}", fmt_f64(form.discarded));
            if let Some(path) = &a.csv {
                let mut text = String::new();
                for (name, m) in [("U", &form.u), ("A_tilde", &form.a_tilde), ("H_tilde", &form.h_tilde)] {
                    io::write_block(&mut text, name, m);
                }
                write_text(path, &text)?;
            }
            Ok(())
        }
        Command::Ctrb(CtrbCommand::Distance(a)) | Command::Distance(a) => {
            let sys = a.system.load()?;
            let h = sys.excitation();
            let resolution = a
                .resolution
                .unwrap_or_else(|| ctrb::DistanceEstimate::default_resolution(sys.a(), &h));
            let d = ctrb::distance_to_uncontrollability(sys.a(), &h, resolution, !a.no_refine)?;
            say!(stdout, "distance: {}", fmt_f64(d.value));
            say!(stdout, "minimizer_re: {}", fmt_f64(d.minimizer_s.re));
            say!(stdout, "minimizer_im: {}", fmt_f64(d.minimizer_s.im));
            say!(stdout, "grid_resolution: {}", fmt_f64(d.grid_resolution));
            say!(stdout, "refined: {}", d.refined);
            say!(stdout, "evaluations: {}", d.evaluations);
            Ok(())
        }
        Command::Bounds(BoundsCommand::Eval(a)) => eval_bound(&a, stdout),
        Command::Bounds(BoundsCommand::Certify(a)) => {
            let c = bounds::sigma_min_certificate(a.m, a.mu, a.kappa)?;
            say!(stdout, "bound: {}", fmt_f64(c.bound));
            say!(stdout, "gramian_sigma_min_lower: {}", fmt_f64(c.gramian_sigma_min()));
            say!(stdout, "M: {}", fmt_f64(c.m));
            say!(stdout, "mu: {}", fmt_f64(c.mu));
            say!(stdout, "kappa: {}", c.kappa);
            say!(stdout, "alpha1: {}", fmt_list(&c.alpha1.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>()));
            for i in 0..3 {
                let row: Vec<String> = c.xi.row(i).iter().map(|&v| fmt_f64(v)).collect();
                say!(stdout, "xi_row{}: {}", i + 1, row.join(","));
            }
            say!(stdout, "xi_eigenvalues: {}", fmt_list(&c.xi_eigenvalues().map(fmt_f64)));
            Ok(())
        }
        Command::Bounds(BoundsCommand::Kl(a)) => {
            if a.horizon.is_none() && a.delta.is_none() {
                return Err(Error::Usage("`bounds kl` needs --horizon and/or --delta".into()));
            }
            let (s1, s2) = zoo::kl_pair(a.beta, a.eps)?;
            if let Some(n) = a.horizon {
                let kl = bounds::kl_trajectory(&s1, &s2, n)?;
                say!(stdout, "kl: {}", fmt_f64(kl.value));
            }
            if let Some(delta) = a.delta {
                match bounds::minimax_required_samples(&s1, &s2, delta, a.n_max)? {
                    RequiredSamples::Samples(n) => say!(stdout, "required_samples: {n}"),
                    RequiredSamples::ExceedsMax { n_max, kl_at_max } => {
                        say!(stdout, "required_samples: exceeds {n_max}");
                        say!(stdout, "kl_at_n_max: {}", fmt_f64(kl_at_max));
                    }
                }
            }
            Ok(())
        }
        Command::Mc(a) => {
            let cfg = read_config(&a.config)?;
            if let Some(seed) = cfg.master_seed {
                if seed != a.seed {
                    return Err(Error::Usage(format!(
                        "--seed {} disagrees with master_seed = {seed} in {}",
                        a.seed,
                        a.config.display()
                    )));
                }
            }
            let mut exp = cfg.experiment;
            exp.probe.master_seed = a.seed;
            let curve = with_threads(a.threads, || mc::run_experiment(&exp))?;
            emit(a.out.as_deref(), &curve.to_csv(), stdout)
        }
        Command::Repro(a) => {
            let preset = match a.preset {
                PresetName::Fig1 => Preset::Fig1,
                PresetName::Fig2 => Preset::Fig2,
                PresetName::Fig3 => Preset::Fig3,
            };
            let mut opts = PresetOptions::new(a.seed);
            opts.eps = a.eps;
            opts.trials = a.trials;
            opts.n_max = a.n_max;
            opts.ridge = a.ridge;
            opts.reading = match a.noise_reading {
                ReadingArg::Variance => NoiseReading::Variance,
                ReadingArg::Std => NoiseReading::Std,
            };
            if let Some(r) = &a.n_range {
                opts.dims = parse_dims(r).map_err(|m| Error::Usage(format!("--n-range: {m}")))?;
            }
            for e in &opts.eps {
                if !(*e > 0.0) {
                    return Err(Error::Usage(format!("--eps must be > 0, got {e}")));
                }
            }
            let curve = with_threads(a.threads, || mc::run_preset(preset, &opts))?;
            emit(a.out.as_deref(), &curve.to_csv(), stdout)
        }
        Command::Zoo(a) => {
            let sys = build_zoo(&a.zoo, a.dim)?;
            emit(a.out.as_deref(), &io::model_to_string(&sys), stdout)
        }
    }
}

fn eval_bound(a: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let name = a.bound.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let n = require(a.n, "n", &name)?;
    match a.bound {
        BoundName::Powers | BoundName::Gramian => {
            let m = require(a.m, "M", &name)?;
            let k = require(a.k, "k", &name)?;
            let v = if a.bound == BoundName::Powers {
                bounds::powers_bound(m, n, k)?
            } else {
                bounds::gramian_upper_bound(m, n, k)?
            };
            say!(stdout, "{}", fmt_f64(v));
        }
        BoundName::Gramian22 => {
            let rho = require(a.rho, "rho", &name)?;
            say!(stdout, "{}", fmt_f64(bounds::gramian22_decay_bound(rho, n)?));
        }
        BoundName::IntegratorDistance => {
            let rho = require(a.rho, "rho", &name)?;
            let d = bounds::integrator_distance_closed_form(rho, n)?;
            say!(stdout, "{}", fmt_f64(d.value));
            say!(stdout, "lower: {}", fmt_f64(d.lower));
            say!(stdout, "upper: {}", fmt_f64(d.upper));
        }
        BoundName::ExpHard => {
            let eps = require(a.eps, "eps", &name)?;
            let delta = require(a.delta, "delta", &name)?;
            let form = if a.proof_form {
                ExpHardForm::Proof
            } else {
                ExpHardForm::Theorem
            };
            say!(stdout, "{}", fmt_f64(bounds::exp_hard_lower_bound(n, eps, delta, form)?));
        }
    }
    Ok(())
}
