//! The `fixpoint` command line.
//!
//! ```text
//! fixpoint solve    --map example1 --x0 1 --tol 1e-9
//! fixpoint certify  --map example1 --region 0:10 --n-max 30 [--global-uniform]
//! fixpoint envelope --psi 'piecewise:t/2;@1:t-1/2' --region 0:5 --grid 51
//! fixpoint zoo list | fixpoint zoo describe banach
//! ```
//!
//! Exit codes: 0 when every check passes (or the solve converged), 1 when a
//! check is refuted (or the solve did not converge, or the map failed), 2 for
//! usage and config errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_certify, cmd_envelope, cmd_solve, cmd_zoo_describe, cmd_zoo_list, resolve_map, Outcome, ResolvedMap,
    DEFAULT_REGION_WIDTH, DEFAULT_TABLE_POINTS, GLOBAL_PROBE_N, GLOBAL_PROBE_RADII,
};
pub use config::{parse_region, Command, ConfigFile, Format, RunConfig, KEYS, SEED_ENV};

use crate::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fixpoint",
    version,
    about = "Picard iteration and sampled contraction certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Iterate a map to its fixed point.
    Solve(RunArgs),
    /// Check the contraction conditions of a map on a bounded region.
    Certify(RunArgs),
    /// Tabulate a gate and its running supremum.
    Envelope(RunArgs),
    /// Inspect the built-in maps.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List {
        #[arg(long)]
        format: Option<String>,
    },
    Describe {
        tag: String,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

// Values stay strings here so flags and config files share one parser.
#[derive(Args, Default)]
struct RunArgs {
    /// example1, zoo:<tag>[:alpha] or expr:<expression in x>
    #[arg(long)]
    map: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// LO:HI
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
    /// linear:A, expr:E(t), piecewise:E0;@B:E1;@>B:E2, table:t=v,... or zero
    #[arg(long)]
    psi: Option<String>,
    /// example1, power:A, constant, or phi_n as an expression in x, y, n
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// phi as an expression in x, y
    #[arg(long, allow_hyphen_values = true)]
    phi_limit: Option<String>,
    /// Also probe uniformity on the whole space; a refutation fails the run.
    #[arg(long)]
    global_uniform: bool,
    /// Write the orbit as CSV here (solve).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    escape_radius: Option<String>,
    /// Envelope grid step.
    #[arg(long)]
    resolution: Option<String>,
    /// key = value file with optional [solve], [certify], [envelope] sections.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
        let pairs = [
            ("map", self.map.clone()),
            ("x0", self.x0.clone()),
            ("region", self.region.clone()),
            ("tol", self.tol.clone()),
            ("eps", self.eps.clone()),
            ("n-max", self.n_max.clone()),
            ("max-iter", self.max_iter.clone()),
            ("grid", self.grid.clone()),
            ("seed", self.seed.clone()),
            ("out", path(&self.out)),
            ("format", self.format.clone()),
            ("psi", self.psi.clone()),
            ("phi", self.phi.clone()),
            ("phi-limit", self.phi_limit.clone()),
            ("global-uniform", self.global_uniform.then(|| "true".to_string())),
            ("trace", path(&self.trace)),
            ("escape-radius", self.escape_radius.clone()),
            ("resolution", self.resolution.clone()),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect()
    }

    fn resolve(&self, command: Command) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                Some(ConfigFile::parse(&text)?)
            }
            None => None,
        };
        let env_seed = std::env::var(SEED_ENV).ok();
        RunConfig::resolve(command, file.as_ref(), env_seed.as_deref(), &self.flags())
    }
}

fn parse_format(s: Option<&str>) -> Result<Format> {
    match s {
        None | Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => Err(Error::usage(format!("format must be json or csv, got `{other}`"))),
    }
}

/// Exit code for an error: 2 for bad input, 1 when the map or metric broke
/// during a run.
pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::MapFailed { .. } | Error::MetricViolation { .. } => 1,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> Result<(Outcome, Option<PathBuf>)> {
    let (cfg, f): (RunConfig, fn(&RunConfig) -> Result<Outcome>) = match cli.command {
        Sub::Solve(a) => (a.resolve(Command::Solve)?, cmd_solve),
        Sub::Certify(a) => (a.resolve(Command::Certify)?, cmd_certify),
        Sub::Envelope(a) => (a.resolve(Command::Envelope)?, cmd_envelope),
        Sub::Zoo { action } => {
            let outcome = match action {
                ZooAction::List { format } => cmd_zoo_list(parse_format(format.as_deref())?)?,
                ZooAction::Describe { tag, format, seed } => {
                    let seed = match seed {
                        Some(s) => s,
                        None => {
                            RunConfig::resolve(Command::Certify, None, std::env::var(SEED_ENV).ok().as_deref(), &[])?
                                .seed
                        }
                    };
                    cmd_zoo_describe(&tag, parse_format(format.as_deref())?, seed)?
                }
            };
            return Ok((outcome, None));
        }
    };
    Ok((f(&cfg)?, cfg.out))
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Reports go to `--out` or `stdout`; warnings and errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return 2;
            }
            let _ = write!(stdout, "{text}");
            return 0;
        }
    };
    let (outcome, out) = match dispatch(cli) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return error_code(&e);
        }
    };
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "WARNING: {w}");
    }
    let written = match &out {
        Some(path) => std::fs::write(path, &outcome.output),
        None => stdout.write_all(outcome.output.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return 2;
    }
    outcome.code
}
