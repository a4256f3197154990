//! Experiment config files: one `key = value` pair per line, `#` starts a
//! comment. Unknown or repeated keys are errors.
//!
//! ```text
//! system = jordan_actuated:lambda=0.5,h=0.1,b=5,pattern=last
//! input_var = 1
//! noise_var = 1
//! eps = 0.005
//! trials = 1000
//! master_seed = 7
//! n_range = 5..13
//! ```
//!
//! Noise is given either as `input_std`/`noise_std` or as
//! `input_var`/`noise_var` (not both); unspecified parameters default to 1.

use std::path::{Path, PathBuf};

use sysid_core::ident::DEFAULT_RIDGE;
use sysid_core::zoo::SystemSpec;
use sysid_core::NoiseSpec;

use crate::io::{read_text, Source};
use crate::mc::{ExperimentConfig, ProbeConfig, DEFAULT_N_MAX, DEFAULT_TRIALS};
use crate::{Error, Result};

const KEYS: &[&str] = &[
    "label",
    "system",
    "input_std",
    "noise_std",
    "input_var",
    "noise_var",
    "eps",
    "trials",
    "master_seed",
    "ridge",
    "n_max",
    "n_range",
];

/// Parsed config; `master_seed` stays optional so the command line can
/// supply it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub experiment: ExperimentConfig,
    pub master_seed: Option<u64>,
}

/// Parses `5..10` (inclusive), `5..=10`, or a comma-separated list.
pub fn parse_dims(text: &str) -> std::result::Result<Vec<usize>, String> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start `{lo}`"))?;
        let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end `{hi}`"))?;
        if hi < lo {
            return Err(format!("empty range {lo}..{hi}"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad dimension `{}`", s.trim())))
        .collect()
}

pub fn parse_config(text: &str, path: impl Into<PathBuf>) -> Result<ConfigFile> {
    let src = Source::new(path);
    let mut values: Vec<(&str, &str, usize, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            let col = raw.len() - raw.trim_start().len() + 1;
            return Err(src.err(lineno, col, "expected `key = value`"));
        };
        let key_col = key.len() - key.trim_start().len() + 1;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(src.err(lineno, key_col, format!("unknown key `{key}`")));
        }
        if values.iter().any(|(k, ..)| *k == key) {
            return Err(src.err(lineno, key_col, format!("duplicate key `{key}`")));
        }
        let value_col = line.len() - value.len() + 1 + (value.len() - value.trim_start().len());
        values.push((key, value.trim(), lineno, value_col));
    }

    let last = text.lines().count().max(1);
    let get = |key: &str| values.iter().find(|(k, ..)| *k == key).copied();
    let parse = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|(_, v, l, c)| v.parse::<f64>().map_err(|_| src.err(l, c, format!("`{key}` expects a number, found `{v}`"))))
            .transpose()
    };
    let parse_int = |key: &str| -> Result<Option<u64>> {
        get(key)
            .map(|(_, v, l, c)| v.parse::<u64>().map_err(|_| src.err(l, c, format!("`{key}` expects a non-negative integer, found `{v}`"))))
            .transpose()
    };
    let at = |key: &str| get(key).map(|(_, _, l, c)| (l, c)).unwrap_or((last, 1));

    let (system_text, sl, sc) = match get("system") {
        Some((_, v, l, c)) => (v, l, c),
        None => return Err(src.err(last, 1, "missing required key `system`")),
    };
    let system: SystemSpec = system_text.parse().map_err(|e: sysid_core::Error| src.err(sl, sc, e.to_string()))?;

    let stds = (parse("input_std")?, parse("noise_std")?);
    let vars = (parse("input_var")?, parse("noise_var")?);
    let noise = match (stds, vars) {
        ((None, None), (iv, nv)) => NoiseSpec::from_variances(iv.unwrap_or(1.0), nv.unwrap_or(1.0)),
        ((is, ns), (None, None)) => NoiseSpec::new(is.unwrap_or(1.0), ns.unwrap_or(1.0)),
        _ => {
            let (l, c) = at("input_var").min(at("noise_var"));
            return Err(src.err(l, c, "give noise either as standard deviations or as variances, not both"));
        }
    }
    .map_err(|e| {
        let (l, c) = [at("input_std"), at("noise_std"), at("input_var"), at("noise_var")].into_iter().min().unwrap();
        src.err(l, c, e.to_string())
    })?;

    let eps = parse("eps")?.ok_or_else(|| src.err(last, 1, "missing required key `eps`"))?;
    let dims = match get("n_range") {
        Some((_, v, l, c)) => parse_dims(v).map_err(|m| src.err(l, c, m))?,
        None => return Err(src.err(last, 1, "missing required key `n_range`")),
    };
    let trials = parse_int("trials")?.map_or(DEFAULT_TRIALS, |t| t as usize);
    let n_max = parse_int("n_max")?.map_or(DEFAULT_N_MAX, |t| t as usize);
    let ridge = parse("ridge")?.unwrap_or(DEFAULT_RIDGE);
    let master_seed = parse_int("master_seed")?;
    let label = get("label").map_or("custom", |(_, v, ..)| v).to_string();

    let experiment = ExperimentConfig {
        label,
        system,
        eps,
        dims,
        n_max,
        probe: ProbeConfig {
            noise,
            trials,
            master_seed: master_seed.unwrap_or(0),
            ridge,
        },
    };
    experiment.validate().map_err(|e| {
        let key = match &e {
            Error::Usage(m) if m.starts_with("trials") => "trials",
            Error::Usage(m) if m.starts_with("eps") => "eps",
            Error::Usage(m) if m.starts_with("n_max") => "n_max",
            Error::Usage(m) if m.starts_with("ridge") => "ridge",
            _ => "n_range",
        };
        let (l, c) = at(key);
        src.err(l, c, e.to_string())
    })?;
    Ok(ConfigFile {
        experiment,
        master_seed,
    })
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    parse_config(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# Jordan sweep
system = jordan_actuated:lambda=0.5,h=0.1,b=5,pattern=last
input_var = 1
noise_var = 1   # unit
eps = 0.005
trials = 10
master_seed = 7
n_range = 5..7
";

    #[test]
    fn parses_every_field() {
        let cfg = parse_config(SAMPLE, "c").unwrap();
        assert_eq!(cfg.master_seed, Some(7));
        let e = cfg.experiment;
        assert_eq!(e.dims, vec![5, 6, 7]);
        assert_eq!(e.probe.trials, 10);
        assert_eq!(e.probe.ridge, DEFAULT_RIDGE);
        assert_eq!(e.n_max, DEFAULT_N_MAX);
        assert_eq!(e.probe.noise, NoiseSpec::unit());
        assert_eq!(e.eps, 0.005);
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = format!("{SAMPLE}  epsilon = 0.1\n");
        let err = parse_config(&text, "c.cfg").unwrap_err().to_string();
        assert!(err.starts_with("c.cfg:9:3:"), "{err}");
        assert!(err.contains("unknown key `epsilon`"));
    }

    #[test]
    fn bad_values_report_position() {
        let text = SAMPLE.replace("trials = 10", "trials = ten");
        let err = parse_config(&text, "c").unwrap_err().to_string();
        assert!(err.starts_with("c:6:10:"), "{err}");
        let text = SAMPLE.replace("eps = 0.005", "eps = 0");
        let err = parse_config(&text, "c").unwrap_err().to_string();
        assert!(err.starts_with("c:5:7:"), "{err}");
        let text = SAMPLE.replace("n_range = 5..7", "n_range = 5,x");
        assert!(parse_config(&text, "c").unwrap_err().to_string().starts_with("c:8:11:"));
    }

    #[test]
    fn mixed_noise_forms_are_rejected() {
        let text = format!("{SAMPLE}input_std = 2\n");
        assert!(parse_config(&text, "c").is_err());
    }

    #[test]
    fn dims_forms() {
        assert_eq!(parse_dims("5..=7").unwrap(), vec![5, 6, 7]);
        assert_eq!(parse_dims("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_dims("7..5").is_err());
    }
}
