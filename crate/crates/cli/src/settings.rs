//! Global settings: explicit flags, then `--config` file entries, then
//! `MIXREG_SEED`, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mixreg::bounds::DEFAULT_RHO;
use mixreg::path::{DEFAULT_TOLERANCE, ROBBINS_C_MIN};
use mixreg::PriorSpec;

use crate::{CliError, GlobalArgs};

/// Keys a config file may set.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "alpha",
    "rho",
    "c",
    "prior",
    "out",
    "tolerance",
    "threads",
    "model",
    "n-paths",
    "T",
    "checkpoints-per-decade",
];

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub alpha: f64,
    pub rho: f64,
    pub c: f64,
    pub prior: PriorSpec,
    pub out: PathBuf,
    pub tolerance: f64,
    pub threads: Option<usize>,
    file: BTreeMap<String, String>,
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str, path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("{}:{}: expected key = value", path.display(), i + 1))
        })?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(CliError::usage(format!("{}:{}: unknown key `{k}`", path.display(), i + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::usage(format!("invalid value `{raw}` for `{key}`")))
}

impl Settings {
    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &g.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text, p)?
            }
            None => BTreeMap::new(),
        };
        let from_file = |key: &str| file.get(key).map(String::as_str);

        let seed = match (g.seed, from_file("seed"), std::env::var("MIXREG_SEED").ok()) {
            (Some(s), _, _) => s,
            (None, Some(raw), _) => parse("seed", raw)?,
            (None, None, Some(raw)) => parse("MIXREG_SEED", &raw)?,
            (None, None, None) => 0,
        };
        let pick = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, CliError> {
            match (flag, from_file(key)) {
                (Some(x), _) => Ok(x),
                (None, Some(raw)) => parse(key, raw),
                (None, None) => Ok(default),
            }
        };
        let alpha = pick(g.alpha, "alpha", 0.05)?;
        let rho = pick(g.rho, "rho", DEFAULT_RHO)?;
        let c = pick(g.c, "c", ROBBINS_C_MIN)?;
        let tolerance = pick(g.tolerance, "tolerance", DEFAULT_TOLERANCE)?;
        let threads = match (g.threads, from_file("threads")) {
            (Some(t), _) => Some(t),
            (None, Some(raw)) => Some(parse("threads", raw)?),
            (None, None) => None,
        };
        let prior_raw = g
            .prior
            .clone()
            .or_else(|| from_file("prior").map(str::to_string))
            .unwrap_or_else(|| "robbins".to_string());
        let mut prior: PriorSpec = prior_raw.parse().map_err(|e| CliError::usage(format!("{e}")))?;
        // A bare `robbins` takes its constant from --c.
        if prior_raw.trim() == "robbins" {
            prior = PriorSpec::Robbins { c };
        }
        let out = g
            .out
            .clone()
            .or_else(|| from_file("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("mixreg-out"));

        let s = Settings {
            seed,
            alpha,
            rho,
            c,
            prior,
            out,
            tolerance,
            threads,
            file,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::usage(format!("--alpha {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.rho > 0.0 && self.rho < 0.25) {
            return Err(CliError::usage(format!("--rho {} must lie in (0, 1/4)", self.rho)));
        }
        PriorSpec::Robbins { c: self.c }
            .validate()
            .map_err(|e| CliError::usage(format!("--c: {e}")))?;
        self.prior.validate().map_err(|e| CliError::usage(format!("--prior: {e}")))?;
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::usage(format!("--tolerance {} must be non-negative", self.tolerance)));
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        Ok(())
    }

    /// A command-level value: the flag, else the config file, else `default`.
    pub fn command_value<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        match (flag, self.file.get(key)) {
            (Some(x), _) => Ok(x),
            (None, Some(raw)) => parse(key, raw),
            (None, None) => Ok(default),
        }
    }
}
