//! Run configuration: flags layered over an optional key=value file.
//!
//! Precedence, highest first: command-line flags, the command's own section
//! of the config file, the file's global keys (top level or `[run]`),
//! `FIXPOINT_SEED` (seed only), built-in defaults.
//!
//! ```text
//! # shared by every command
//! map = zoo:banach:1/4
//! seed = 7
//!
//! [certify]
//! region = 0:10
//! n-max = 40
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gate::DEFAULT_RESOLUTION;
use crate::metric::Interval;
use crate::solver::DEFAULT_MAX_ITER;
use crate::DEFAULT_SEED;

/// Environment variable that replaces the default seed.
pub const SEED_ENV: &str = "FIXPOINT_SEED";

/// Every key a config file or flag may set.
pub const KEYS: [&str; 18] = [
    "map",
    "x0",
    "region",
    "tol",
    "eps",
    "n-max",
    "max-iter",
    "grid",
    "seed",
    "out",
    "format",
    "psi",
    "phi",
    "phi-limit",
    "global-uniform",
    "trace",
    "escape-radius",
    "resolution",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Certify,
    Envelope,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::Envelope => "envelope",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `example1`, `zoo:<tag>[:alpha]` (the `zoo:` prefix is optional) or
    /// `expr:<expression in x>`.
    pub map: Option<String>,
    pub x0: Option<f64>,
    pub region: Option<Interval>,
    pub tol: f64,
    pub eps: Option<f64>,
    pub n_max: u32,
    pub max_iter: usize,
    /// Number of grid points; `None` lets each command pick.
    pub grid: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub psi: Option<String>,
    pub phi: Option<String>,
    pub phi_limit: Option<String>,
    pub global_uniform: bool,
    pub trace: Option<PathBuf>,
    pub escape_radius: Option<f64>,
    pub resolution: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            map: None,
            x0: None,
            region: None,
            tol: 1e-9,
            eps: None,
            n_max: 30,
            max_iter: DEFAULT_MAX_ITER,
            grid: None,
            seed: DEFAULT_SEED,
            out: None,
            format: Format::Json,
            psi: None,
            phi: None,
            phi_limit: None,
            global_uniform: false,
            trace: None,
            escape_radius: None,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    /// Layers `file` (if any), the seed variable and `flags` over the
    /// defaults.
    pub fn resolve(
        command: Command,
        file: Option<&ConfigFile>,
        env_seed: Option<&str>,
        flags: &[(&str, String)],
    ) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(command);
        if let Some(s) = env_seed {
            cfg.set("seed", s)
                .map_err(|e| Error::Config(format!("{SEED_ENV}: {e}")))?;
        }
        if let Some(file) = file {
            for section in ["", command.name()] {
                for (k, v) in file.section(section) {
                    cfg.set(k, v)
                        .map_err(|e| Error::Config(format!("config key `{k}`: {e}")))?;
                }
            }
        }
        for (k, v) in flags {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its string form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "map" => self.map = Some(value.to_string()),
            "x0" => self.x0 = Some(number(value)?),
            "region" => self.region = Some(parse_region(value)?),
            "tol" => self.tol = number(value)?,
            "eps" => self.eps = Some(number(value)?),
            "n-max" => self.n_max = integer(value)?,
            "max-iter" => self.max_iter = integer(value)?,
            "grid" => self.grid = Some(integer(value)?),
            "seed" => self.seed = integer(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = match value {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(Error::usage(format!("format must be json or csv, got `{value}`"))),
                }
            }
            "psi" => self.psi = Some(value.to_string()),
            "phi" => self.phi = Some(value.to_string()),
            "phi-limit" => self.phi_limit = Some(value.to_string()),
            "global-uniform" => {
                self.global_uniform = match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(Error::usage(format!("expected true or false, got `{value}`"))),
                }
            }
            "trace" => self.trace = Some(PathBuf::from(value)),
            "escape-radius" => self.escape_radius = Some(number(value)?),
            "resolution" => self.resolution = number(value)?,
            _ => return Err(Error::usage(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", Some(self.tol)),
            ("resolution", Some(self.resolution)),
            ("escape-radius", self.escape_radius),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::usage(format!("{name} must be positive and finite, got {v}")));
                }
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::usage(format!("eps must be positive and finite, got {eps}")));
            }
        }
        if self.n_max < 1 || self.max_iter < 1 {
            return Err(Error::usage("n-max and max-iter must be at least 1"));
        }
        if self.grid.is_some_and(|g| g < 2) {
            return Err(Error::usage("grid needs at least 2 points"));
        }
        Ok(())
    }
}

/// Numbers accept constant expressions, so `1/3` and `1e-9` both work.
fn number(s: &str) -> Result<f64> {
    let v = Expr::constant(s)?;
    if v.is_nan() {
        return Err(Error::usage(format!("`{s}` is not a number")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::usage(format!("`{s}` is not a nonnegative integer")))
}

/// `LO:HI` with finite bounds.
pub fn parse_region(s: &str) -> Result<Interval> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::usage(format!("region must look like LO:HI, got `{s}`")))?;
    let (lo, hi) = (number(lo)?, number(hi)?);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::usage(format!("region bounds must be finite, got `{s}`")));
    }
    Interval::new(lo, hi)
}

/// A parsed config file: sections of key=value pairs, in file order.
///
/// Keys before any header, or under `[run]`, apply to every command;
/// `[solve]`, `[certify]` and `[envelope]` apply to one. `#` and `;` start
/// comments. Underscores in keys are read as dashes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, Vec<(String, String)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut file = ConfigFile::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header `{line}`")))?
                    .trim();
                section = match name {
                    "run" => String::new(),
                    "solve" | "certify" | "envelope" => name.to_string(),
                    _ => return Err(at(format!("unknown section `[{name}]`"))),
                };
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(at(format!("unknown key `{key}`")));
            }
            file.sections
                .entry(section.clone())
                .or_default()
                .push((key, value.trim().to_string()));
        }
        Ok(file)
    }

    /// Pairs of one section (`""` for the global keys).
    pub fn section(&self, name: &str) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .get(name)
            .into_iter()
            .flatten()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
