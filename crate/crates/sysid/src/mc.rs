//! Monte Carlo estimates of the identification error and of the minimum
//! trajectory length reaching a target accuracy.
//!
//! Trials run on the current rayon pool. Every trial has its own seed,
//! `derive_seed(master, n, N, i)`, results are collected in trial order and
//! reduced sequentially, so the numbers do not depend on the thread count.

use rayon::prelude::*;
use sysid_core::ident::{estimation_error, least_squares, DEFAULT_RIDGE};
use sysid_core::lti::simulate;
use sysid_core::rng::derive_seed;
use sysid_core::zoo::{InputPattern, SystemSpec};
use sysid_core::{ctrb, LtiSystem, NoiseSpec};

use crate::{Error, Result};

/// Default Monte Carlo count per probe.
pub const DEFAULT_TRIALS: usize = 1000;
/// Default search cap on the trajectory length.
pub const DEFAULT_N_MAX: usize = 20_000;

/// Settings shared by every probe of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub noise: NoiseSpec,
    pub trials: usize,
    pub master_seed: u64,
    pub ridge: f64,
}

/// Statistics of the spectral error `||A - A_hat||` over the trials of one
/// probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub horizon: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std: f64,
    /// Nearest-rank 90% quantile.
    pub q90: f64,
    /// Largest Gram condition number seen across trials.
    pub max_condition: f64,
}

impl TrialStats {
    pub fn ill_conditioned(&self) -> bool {
        !(self.max_condition <= sysid_core::ident::ILL_CONDITIONED)
    }
}

/// Mean spectral estimation error of least squares over `cfg.trials`
/// independent trajectories of length `horizon`.
pub fn mean_error(sys: &LtiSystem, horizon: usize, cfg: &ProbeConfig) -> Result<TrialStats> {
    if cfg.trials == 0 {
        return Err(Error::Usage("trials must be >= 1".into()));
    }
    let n = sys.n();
    let outcomes: Vec<Result<(f64, f64)>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.master_seed, n as u64, horizon as u64, i);
            let trial_err = |source| Error::Trial {
                n,
                horizon,
                trial: i,
                source,
            };
            let traj = simulate(sys, horizon, &cfg.noise, seed).map_err(trial_err)?;
            let est = least_squares(&traj, cfg.ridge).map_err(trial_err)?;
            let err = estimation_error(&est, sys.a()).map_err(trial_err)?;
            Ok((err, est.gram_condition))
        })
        .collect();

    let mut errors = Vec::with_capacity(cfg.trials);
    let mut max_condition: f64 = 0.0;
    for outcome in outcomes {
        let (err, cond) = outcome?;
        errors.push(err);
        max_condition = max_condition.max(cond);
    }
    let count = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / count;
    let std = if errors.len() > 1 {
        (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = errors;
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.9 * count).ceil() as usize).clamp(1, sorted.len());
    Ok(TrialStats {
        horizon,
        mean,
        std,
        q90: sorted[rank - 1],
        max_condition,
    })
}

/// Result of [`min_samples`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Passing probe at `N_min`, or `None` when no `N <= n_max` passes.
    pub found: Option<TrialStats>,
    /// Failing probe closest below `N_min` (for an unsuccessful search, the
    /// probe at `n_max`). `None` when the very first probe passed.
    pub previous: Option<TrialStats>,
    /// Number of probes evaluated.
    pub probes: usize,
}

impl SearchOutcome {
    pub fn n_min(&self) -> Option<usize> {
        self.found.map(|s| s.horizon)
    }
}

/// Smallest `N` with mean error `<= eps`: doubling from `N = n + 1` until a
/// probe passes (the last probe is clamped to `n_max`), then bisection down
/// to granularity one.
///
/// A probe whose unregularized regression is rank deficient counts as
/// failing.
pub fn min_samples(sys: &LtiSystem, eps: f64, n_max: usize, cfg: &ProbeConfig) -> Result<SearchOutcome> {
    if !(eps > 0.0) {
        return Err(Error::Usage(format!("eps must be > 0, got {eps}")));
    }
    let start = sys.n() + 1;
    if n_max < start {
        return Err(Error::Usage(format!("n_max = {n_max} is below the first probe N = {start}")));
    }
    let mut probes = 0;
    let mut probe = |horizon: usize| -> Result<Option<TrialStats>> {
        probes += 1;
        match mean_error(sys, horizon, cfg) {
            Ok(stats) => Ok(Some(stats)),
            Err(Error::Trial {
                source: sysid_core::Error::RankDeficientRegression,
                ..
            }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let passes = |s: &Option<TrialStats>| matches!(s, Some(s) if s.mean <= eps);

    // Bracket.
    let mut lo: Option<(usize, Option<TrialStats>)> = None;
    let mut horizon = start;
    let (mut hi, mut hi_stats) = loop {
        let stats = probe(horizon)?;
        if passes(&stats) {
            break (horizon, stats);
        }
        if horizon == n_max {
            return Ok(SearchOutcome {
                found: None,
                previous: stats,
                probes,
            });
        }
        lo = Some((horizon, stats));
        horizon = (2 * horizon).min(n_max);
    };

    // Bisect between the last failing and the first passing probe.
    if let Some((mut lo_n, mut lo_stats)) = lo {
        while hi - lo_n > 1 {
            let mid = lo_n + (hi - lo_n) / 2;
            let stats = probe(mid)?;
            if passes(&stats) {
                hi = mid;
                hi_stats = stats;
            } else {
                lo_n = mid;
                lo_stats = stats;
            }
        }
        lo = Some((lo_n, lo_stats));
    }
    Ok(SearchOutcome {
        found: hi_stats,
        previous: lo.and_then(|(_, s)| s),
        probes,
    })
}

/// Which noise parameters the experiment's `N(0, v)` figures stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseReading {
    /// `v` is a variance (default).
    #[default]
    Variance,
    /// `v` is a standard deviation.
    Std,
}

impl NoiseReading {
    pub fn noise(self, input: f64, process: f64) -> Result<NoiseSpec> {
        Ok(match self {
            NoiseReading::Variance => NoiseSpec::from_variances(input, process)?,
            NoiseReading::Std => NoiseSpec::new(input, process)?,
        })
    }
}

/// Built-in experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `0.5 J_n(1)` actuated and excited at the last state, three accuracies.
    Fig1,
    /// Jordan blocks `J_n(lambda)` actuated at the last state, four
    /// eigenvalues.
    Fig2,
    /// `J_n(0.5)` with one, two or `n/2` actuated states.
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn default_eps(self) -> &'static [f64] {
        match self {
            Preset::Fig1 => &[0.1, 0.15, 0.2],
            Preset::Fig2 | Preset::Fig3 => &[0.005],
        }
    }

    pub fn default_dims(self) -> Vec<usize> {
        match self {
            Preset::Fig1 => (5..=12).collect(),
            Preset::Fig2 => (5..=13).collect(),
            Preset::Fig3 => (5..=20).collect(),
        }
    }

    /// `(input, process)` noise parameters before reading them as variances
    /// or standard deviations.
    pub fn noise_parameters(self) -> (f64, f64) {
        match self {
            Preset::Fig1 => (10.0, 0.5),
            Preset::Fig2 | Preset::Fig3 => (1.0, 1.0),
        }
    }

    /// System families swept by the preset.
    pub fn systems(self) -> Vec<SystemSpec> {
        let actuated = |lambda, pattern| SystemSpec::JordanActuated {
            lambda,
            h_scale: 0.1,
            b_scale: 5.0,
            pattern,
        };
        match self {
            Preset::Fig1 => vec![SystemSpec::ScaledJordan],
            Preset::Fig2 => [0.5, 0.6, 0.7, 1.0]
                .into_iter()
                .map(|l| actuated(l, InputPattern::Last))
                .collect(),
            Preset::Fig3 => [InputPattern::Last, InputPattern::Half, InputPattern::EveryOther]
                .into_iter()
                .map(|p| actuated(0.5, p))
                .collect(),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::Usage(format!("unknown preset `{other}`"))),
        }
    }
}

/// A fully specified sweep: one system family, one accuracy, many
/// dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub system: SystemSpec,
    pub eps: f64,
    pub dims: Vec<usize>,
    pub n_max: usize,
    pub probe: ProbeConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.probe.trials == 0 {
            return Err(Error::Usage("trials must be >= 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Usage(format!("eps must be > 0, got {}", self.eps)));
        }
        if self.n_max == 0 {
            return Err(Error::Usage("n_max must be >= 1".into()));
        }
        if !(self.probe.ridge >= 0.0) {
            return Err(Error::Usage("ridge must be >= 0".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Usage("n_range is empty".into()));
        }
        Ok(())
    }
}

/// One row of a complexity curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub preset: String,
    pub n: usize,
    pub kappa_label: String,
    pub lambda: Option<f64>,
    pub eps: f64,
    pub search: SearchOutcome,
    pub trials: usize,
    pub master_seed: u64,
}

/// Per-dimension minimum sample counts for one sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexityCurve {
    pub rows: Vec<CurveRow>,
}

pub const CSV_HEADER: &str = "preset,n,kappa_label,lambda,epsilon,N_min,mean_error,std_error,trials,master_seed,prev_N,prev_mean_error,q90_error,ill_conditioned";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ComplexityCurve {
    pub fn extend(&mut self, other: ComplexityCurve) {
        self.rows.extend(other.rows);
    }

    /// CSV with the header line. `std_error` is the standard deviation of the
    /// per-trial errors at `N_min`. Searches that hit `n_max` leave the
    /// `N_min` group empty and report the `n_max` probe as `prev_*`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let found = row.search.found;
            let prev = row.search.previous;
            let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
            let ill = found
                .iter()
                .chain(prev.iter())
                .any(TrialStats::ill_conditioned);
            let fields = [
                row.preset.clone(),
                row.n.to_string(),
                row.kappa_label.clone(),
                opt(row.lambda),
                float(row.eps),
                found.map(|s| s.horizon.to_string()).unwrap_or_default(),
                opt(found.map(|s| s.mean)),
                opt(found.map(|s| s.std)),
                row.trials.to_string(),
                row.master_seed.to_string(),
                prev.map(|s| s.horizon.to_string()).unwrap_or_default(),
                opt(prev.map(|s| s.mean)),
                opt(found.map(|s| s.q90)),
                ill.to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Label for the controllability index of `(A, [H B])`: the pattern's
/// symbolic label for actuated Jordan blocks, `n` for the scaled Jordan
/// chain, otherwise the numeric index from the rank sweep.
fn kappa_label(spec: &SystemSpec, sys: &LtiSystem) -> String {
    match spec {
        SystemSpec::JordanActuated { pattern, .. } => pattern.kappa_label().to_string(),
        SystemSpec::ScaledJordan => "n".to_string(),
        _ => ctrb::controllability_index(sys.a(), &sys.excitation(), ctrb::DEFAULT_RANK_TOL)
            .ok()
            .and_then(|idx| idx.kappa)
            .map(|k| k.to_string())
            .unwrap_or_else(|| "uncontrollable".to_string()),
    }
}

/// Runs [`min_samples`] for every dimension of the sweep, in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComplexityCurve> {
    cfg.validate()?;
    let mut curve = ComplexityCurve::default();
    for &n in &cfg.dims {
        let sys = cfg.system.build(n)?;
        let search = min_samples(&sys, cfg.eps, cfg.n_max, &cfg.probe)?;
        curve.rows.push(CurveRow {
            preset: cfg.label.clone(),
            n,
            kappa_label: kappa_label(&cfg.system, &sys),
            lambda: cfg.system.lambda(),
            eps: cfg.eps,
            search,
            trials: cfg.probe.trials,
            master_seed: cfg.probe.master_seed,
        });
    }
    Ok(curve)
}

/// Options for expanding a [`Preset`] into sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    /// Accuracies to run; empty means the preset's defaults.
    pub eps: Vec<f64>,
    /// Dimensions; empty means the preset's defaults.
    pub dims: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub ridge: f64,
    pub n_max: usize,
    pub reading: NoiseReading,
}

impl PresetOptions {
    pub fn new(master_seed: u64) -> Self {
        Self {
            eps: Vec::new(),
            dims: Vec::new(),
            trials: DEFAULT_TRIALS,
            master_seed,
            ridge: DEFAULT_RIDGE,
            n_max: DEFAULT_N_MAX,
            reading: NoiseReading::Variance,
        }
    }
}

/// The sweeps a preset consists of, in output order (accuracy-major for
/// `fig1`, system-major otherwise).
pub fn preset_experiments(preset: Preset, opts: &PresetOptions) -> Result<Vec<ExperimentConfig>> {
    let eps = if opts.eps.is_empty() {
        preset.default_eps().to_vec()
    } else {
        opts.eps.clone()
    };
    let dims = if opts.dims.is_empty() {
        preset.default_dims()
    } else {
        opts.dims.clone()
    };
    let (input, process) = preset.noise_parameters();
    let probe = ProbeConfig {
        noise: opts.reading.noise(input, process)?,
        trials: opts.trials,
        master_seed: opts.master_seed,
        ridge: opts.ridge,
    };
    let mut out = Vec::new();
    for system in preset.systems() {
        for &e in &eps {
            out.push(ExperimentConfig {
                label: preset.name().to_string(),
                system: system.clone(),
                eps: e,
                dims: dims.clone(),
                n_max: opts.n_max,
                probe: probe.clone(),
            });
        }
    }
    Ok(out)
}

/// Runs every sweep of a preset and concatenates the curves.
pub fn run_preset(preset: Preset, opts: &PresetOptions) -> Result<ComplexityCurve> {
    let mut curve = ComplexityCurve::default();
    for cfg in preset_experiments(preset, opts)? {
        curve.extend(run_experiment(&cfg)?);
    }
    Ok(curve)
}
