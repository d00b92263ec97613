//! The four subcommands, as plain functions from a [`RunConfig`] to an
//! [`Outcome`]. Nothing here touches stdout or the filesystem except the
//! optional trace file.

use serde::Serialize;

use super::config::{Format, RunConfig};
use crate::certificate::Certificate;
use crate::contraction::{
    certify, check_global_uniform, check_self_map, CertifyConfig, GapRow, LocalUniformConfig, PairSample, PhiFamily,
    SelfMap, DEFAULT_PAIRS,
};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::gate::{
    check_boyd_wong, check_envelope_properties, default_deltas, default_grid, uniform_grid, Envelope, GateFunction,
    DEFAULT_GRID_POINTS, DEFAULT_T_MAX,
};
use crate::metric::{sample_region, Interval, RealLine};
use crate::report::{certificate_csv, fmt_f64, report_json_with, to_json, trace_csv};
use crate::solver::{check_orbit_contraction, iterate_to_fixed_point, SolveOptions, DEFAULT_WINDOW};
use crate::zoo::{self, ZooEntry};

/// Result of one command: exit code, the report body and any warnings for
/// stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub output: String,
    pub warnings: Vec<String>,
}

/// Radii and index of the whole-space uniformity probe.
pub const GLOBAL_PROBE_RADII: [f64; 3] = [10.0, 100.0, 1000.0];
pub const GLOBAL_PROBE_N: u32 = 10;
/// Default width of the certification region for zoo maps.
pub const DEFAULT_REGION_WIDTH: f64 = 10.0;
/// Table rows for `envelope` when `--grid` is not given.
pub const DEFAULT_TABLE_POINTS: usize = 101;

/// A map spec turned into callables, plus whatever triple came with it.
pub struct ResolvedMap {
    pub label: String,
    pub map: SelfMap<f64>,
    pub entry: Option<ZooEntry>,
    pub family: Option<PhiFamily<f64>>,
    pub gate: Option<GateFunction>,
}

/// Reads `--map`, `--phi`, `--phi-limit` and `--psi`. `--phi` is a named
/// family (`example1`, `power:A`, `constant`) or, together with
/// `--phi-limit`, a pair of expressions. Explicit `--phi` and
/// `--psi` replace the zoo entry's own.
pub fn resolve_map(cfg: &RunConfig) -> Result<ResolvedMap> {
    let spec = cfg
        .map
        .as_deref()
        .ok_or_else(|| Error::usage("no map given (use --map example1, --map zoo:<tag> or --map expr:<x-expr>)"))?;
    let mut resolved = if let Some(src) = spec.strip_prefix("expr:") {
        let e = Expr::parse(src, &[Var::X])?;
        let label = e.source().to_string();
        let map = SelfMap::fallible(label.clone(), move |x: &f64| {
            let v = e.eval(&Env {
                x: *x,
                ..Env::default()
            });
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite value {v} at x = {x}"))
            }
        });
        ResolvedMap {
            label,
            map,
            entry: None,
            family: None,
            gate: None,
        }
    } else {
        let entry = zoo::by_tag(spec.strip_prefix("zoo:").unwrap_or(spec))?;
        ResolvedMap {
            label: entry.self_map.label().to_string(),
            map: entry.self_map.clone(),
            family: entry.phi_family.clone(),
            gate: entry.gate.clone(),
            entry: Some(entry),
        }
    };

    match (&cfg.phi, &cfg.phi_limit) {
        (Some(phi), None) => {
            resolved.family = Some(PhiFamily::named(phi)?.ok_or_else(|| {
                Error::usage(format!(
                    "`{phi}` is not a named family; expressions need --phi-limit too"
                ))
            })?);
        }
        (Some(phi), Some(limit)) => {
            let phi_n = Expr::parse(phi, &[Var::X, Var::Y, Var::N])?;
            let phi = Expr::parse(limit, &[Var::X, Var::Y])?;
            let label = format!("{} -> {}", phi_n.source(), phi.source());
            resolved.family = Some(PhiFamily::new(
                label,
                move |n, x: &f64, y: &f64| {
                    phi_n.eval(&Env {
                        x: *x,
                        y: *y,
                        n: n as f64,
                        t: 0.0,
                    })
                },
                move |x: &f64, y: &f64| {
                    phi.eval(&Env {
                        x: *x,
                        y: *y,
                        ..Env::default()
                    })
                },
            ));
        }
        (None, Some(_)) => return Err(Error::usage("--phi-limit needs --phi")),
        (None, None) => {}
    }
    if let Some(psi) = &cfg.psi {
        resolved.gate = Some(GateFunction::parse(psi)?);
    }
    Ok(resolved)
}

fn default_region(cfg: &RunConfig, resolved: &ResolvedMap) -> Result<Interval> {
    match (cfg.region, &resolved.entry) {
        (Some(r), _) => Ok(r),
        (None, Some(e)) => Ok(e.bounded_region(DEFAULT_REGION_WIDTH)),
        (None, None) => Err(Error::usage("expression maps need an explicit --region LO:HI")),
    }
}

fn orbit_region(points: &[f64]) -> Interval {
    let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi }
}

/// Picard iteration from `--x0`. With `--eps` and a map that carries a
/// triple, the orbit's shifted contraction inequality is reported as a
/// diagnostic (it does not change the exit code).
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let resolved = resolve_map(cfg)?;
    let x0 = cfg.x0.ok_or_else(|| Error::usage("solve needs --x0"))?;
    let opts = SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        window: DEFAULT_WINDOW,
        escape_radius: cfg.escape_radius,
    };
    let (report, trace) = iterate_to_fixed_point(&RealLine, &resolved.map, &x0, &opts)?;

    let mut diagnostics = Vec::new();
    if let (Some(eps), Some(family), Some(psi), true) = (cfg.eps, &resolved.family, &resolved.gate, trace.bounded) {
        let g = Envelope::new(psi.clone(), cfg.resolution)?;
        let region = orbit_region(&trace.points);
        diagnostics.push(check_orbit_contraction(
            family,
            &region,
            &g,
            &trace.tail_diams,
            eps,
            DEFAULT_PAIRS,
            cfg.seed,
            cfg.n_max,
        )?);
    }

    let mut warnings = Vec::new();
    if let Some(path) = &cfg.trace {
        std::fs::write(path, trace_csv(&trace))?;
    }
    if !trace.bounded {
        warnings.push(format!(
            "orbit left the ball of radius {} around x0 at iterate {}",
            report.escape_radius,
            trace.escape_index.unwrap_or(0)
        ));
    }
    let output = match cfg.format {
        Format::Json => report_json_with(&report, &resolved.label, &x0, cfg.tol, &diagnostics)?,
        Format::Csv => trace_csv(&trace),
    };
    Ok(Outcome {
        code: if report.converged() { 0 } else { 1 },
        output,
        warnings,
    })
}

#[derive(Serialize)]
struct OrbitProbe {
    x0: f64,
    verdict: crate::solver::SolveVerdict,
    iterations: usize,
    bounded: bool,
}

#[derive(Serialize)]
struct CertifyView<'a> {
    map: &'a str,
    phi_family: &'a str,
    psi: &'a str,
    region: String,
    seed: u64,
    certificate: &'a Certificate,
    local_gaps: &'a [GapRow],
    global_gaps: &'a [(f64, f64)],
    orbit_probe: OrbitProbe,
    warnings: &'a [String],
}

/// Gate checks, envelope checks and the three contraction conditions on the
/// region, bundled into one certificate. Exit 0 iff the bundle passes.
///
/// Also iterates once from `--x0` (default: the region's lower end) and warns
/// when that orbit is unbounded: the conditions alone do not give a fixed
/// point.
pub fn cmd_certify(cfg: &RunConfig) -> Result<Outcome> {
    let resolved = resolve_map(cfg)?;
    let (Some(family), Some(psi)) = (&resolved.family, &resolved.gate) else {
        return Err(Error::usage(format!(
            "map `{}` carries no (phi_n, phi, psi) triple; pass --phi, --phi-limit and --psi",
            resolved.label
        )));
    };
    let region = default_region(cfg, &resolved)?;
    let t_max = DEFAULT_T_MAX.max(4.0 * region.lo.abs().max(region.hi.abs()));
    let grid = default_grid(t_max, cfg.grid.unwrap_or(DEFAULT_GRID_POINTS));
    let deltas = default_deltas();

    let mut children = Vec::new();
    if let Some(entry) = &resolved.entry {
        let pts = sample_region(&region, DEFAULT_PAIRS, cfg.seed)?;
        children.push(check_self_map(&resolved.map, &entry.domain, &pts)?);
    }
    children.push(check_boyd_wong(psi, &grid, &deltas)?);
    children.push(check_envelope_properties(
        &Envelope::new(psi.clone(), cfg.resolution)?,
        &grid,
        &deltas,
    )?);
    let config = CertifyConfig {
        n_max: cfg.n_max,
        local: LocalUniformConfig {
            seed: cfg.seed,
            ..LocalUniformConfig::default()
        },
    };
    let (conditions, local_gaps) = certify(&RealLine, &resolved.map, family, psi, &region, &config)?;
    children.push(conditions);

    let mut global_gaps = Vec::new();
    if cfg.global_uniform {
        let lo = region.lo;
        let (cert, gaps) = check_global_uniform(
            family,
            |r| Interval { lo, hi: lo + r },
            &GLOBAL_PROBE_RADII,
            GLOBAL_PROBE_N,
            DEFAULT_PAIRS,
            cfg.seed,
        )?;
        children.push(cert);
        global_gaps = gaps;
    }
    let bundle = Certificate::all("certify", children);

    let x0 = cfg.x0.unwrap_or(region.lo);
    let opts = SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        window: DEFAULT_WINDOW,
        escape_radius: cfg.escape_radius,
    };
    let (report, trace) = iterate_to_fixed_point(&RealLine, &resolved.map, &x0, &opts)?;
    let mut warnings = Vec::new();
    if !trace.bounded {
        warnings.push(format!(
            "no bounded orbit: the orbit of {x0} escaped at iterate {}; the conditions hold \
             but nothing guarantees a fixed point",
            trace.escape_index.unwrap_or(0)
        ));
    }

    let output = match cfg.format {
        Format::Json => to_json(&CertifyView {
            map: &resolved.label,
            phi_family: family.label(),
            psi: psi.label(),
            region: region.to_string(),
            seed: cfg.seed,
            certificate: &bundle,
            local_gaps: &local_gaps,
            global_gaps: &global_gaps,
            orbit_probe: OrbitProbe {
                x0,
                verdict: report.verdict,
                iterations: report.iterations,
                bounded: trace.bounded,
            },
            warnings: &warnings,
        })?,
        Format::Csv => certificate_csv(&bundle),
    };
    Ok(Outcome {
        code: if bundle.passed() { 0 } else { 1 },
        output,
        warnings,
    })
}

#[derive(Serialize)]
struct EnvelopeRow {
    t: f64,
    psi: f64,
    g: f64,
}

#[derive(Serialize)]
struct EnvelopeView<'a> {
    psi: &'a str,
    resolution: f64,
    rows: Vec<EnvelopeRow>,
    checks: &'a Certificate,
}

/// `(t, psi(t), g(t))` on `--grid` points of `--region` (default `0:10`),
/// followed by the envelope property checks. Exit 1 if any is refuted.
pub fn cmd_envelope(cfg: &RunConfig) -> Result<Outcome> {
    let psi = match (&cfg.psi, &cfg.map) {
        (Some(spec), _) => GateFunction::parse(spec)?,
        (None, Some(_)) => resolve_map(cfg)?
            .gate
            .ok_or_else(|| Error::usage("map carries no gate; pass --psi"))?,
        (None, None) => return Err(Error::usage("envelope needs --psi (or a --map with a gate)")),
    };
    let region = cfg.region.unwrap_or(Interval { lo: 0.0, hi: 10.0 });
    if region.lo < 0.0 {
        return Err(Error::usage(format!("envelope grid must be nonnegative, got {region}")));
    }
    let grid = uniform_grid(region.lo, region.hi, cfg.grid.unwrap_or(DEFAULT_TABLE_POINTS) - 1);
    let env = Envelope::new(psi.clone(), cfg.resolution)?;
    let g = env.sweep(&grid);
    let checks = check_envelope_properties(&env, &grid, &default_deltas())?;

    let output = match cfg.format {
        Format::Json => to_json(&EnvelopeView {
            psi: psi.label(),
            resolution: cfg.resolution,
            rows: grid
                .iter()
                .zip(&g)
                .map(|(&t, &g)| EnvelopeRow { t, psi: psi.eval(t), g })
                .collect(),
            checks: &checks,
        })?,
        Format::Csv => {
            let mut out = String::from("t,psi,g\n");
            for (&t, &gv) in grid.iter().zip(&g) {
                out.push_str(&format!("{},{},{}\n", fmt_f64(t), fmt_f64(psi.eval(t)), fmt_f64(gv)));
            }
            for line in certificate_csv(&checks).lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
            out
        }
    };
    Ok(Outcome {
        code: if checks.is_refuted() { 1 } else { 0 },
        output,
        warnings: Vec::new(),
    })
}

/// `zoo list`: one summary per class tag.
pub fn cmd_zoo_list(format: Format) -> Result<Outcome> {
    let summaries: Vec<_> = zoo::catalog().iter().map(ZooEntry::summary).collect();
    let output = match format {
        Format::Json => to_json(&summaries)?,
        Format::Csv => {
            let mut out = String::from("tag,map,domain,expected_fixed_point\n");
            for s in &summaries {
                out.push_str(&format!(
                    "{},{},\"{}\",{}\n",
                    s.tag,
                    s.map,
                    s.domain,
                    s.expected_fixed_point.map(fmt_f64).unwrap_or_default()
                ));
            }
            out
        }
    };
    Ok(Outcome {
        code: 0,
        output,
        warnings: Vec::new(),
    })
}

#[derive(Serialize)]
struct DescribeView {
    #[serde(flatten)]
    summary: zoo::ZooSummary,
    class_condition: Option<Certificate>,
}

/// `zoo describe <tag>`: the summary plus the class condition sampled on the
/// default region.
pub fn cmd_zoo_describe(tag: &str, format: Format, seed: u64) -> Result<Outcome> {
    let entry = zoo::by_tag(tag.strip_prefix("zoo:").unwrap_or(tag))?;
    let sample = PairSample::from_region(&entry.bounded_region(DEFAULT_REGION_WIDTH), DEFAULT_PAIRS, seed)?;
    let class_condition = entry.check_class_condition(&sample)?;
    let code = match &class_condition {
        Some(c) if c.is_refuted() => 1,
        _ => 0,
    };
    let output = match format {
        Format::Json => to_json(&DescribeView {
            summary: entry.summary(),
            class_condition,
        })?,
        Format::Csv => match &class_condition {
            Some(c) => certificate_csv(c),
            None => String::from("check,verdict,conditional,witness_lhs,witness_rhs,note\n"),
        },
    };
    Ok(Outcome {
        code,
        output,
        warnings: Vec::new(),
    })
}
