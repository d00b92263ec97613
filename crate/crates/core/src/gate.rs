//! Gate functions `psi: [0, inf) -> [0, inf)` of Boyd-Wong type, their sampled
//! property checks, and the running-supremum envelope `g`.
//!
//! Semicontinuity and right continuity are limit properties; the checks here
//! can refute them but never prove them, and their certificates say so.

use std::fmt;
use std::sync::Arc;

use crate::certificate::{Certificate, Verdict, Witness, WorstCase};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};

/// Slack allowed between consecutive samples of a nondecreasing function.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Relative margin for the strict test `psi(t) < t`, applied as `psi(t) <= t - margin * t`.
pub const STRICT_MARGIN: f64 = 1e-12;
/// Default tolerance for the right upper semicontinuity check.
pub const RUSC_TOL: f64 = 1e-9;
/// Slack for the limsup inequality.
pub const LIMSUP_TOL: f64 = 1e-9;
/// Default envelope grid step.
pub const DEFAULT_RESOLUTION: f64 = 1e-4;
/// Default number of points in [`default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Default upper end of the check grid.
pub const DEFAULT_T_MAX: f64 = 100.0;

/// Default window widths for the right-limit probes.
pub fn default_deltas() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

/// A mixed grid over `(0, t_max]`: half geometric (down to `t_max * 1e-9`,
/// which probes behaviour near zero) and half uniform. Sorted, deduplicated.
pub fn default_grid(t_max: f64, points: usize) -> Vec<f64> {
    let half = (points / 2).max(1);
    let lo = t_max * 1e-9;
    let ratio = (t_max / lo).powf(1.0 / (half.max(2) - 1) as f64);
    let mut grid: Vec<f64> = (0..half).map(|k| lo * ratio.powi(k as i32)).collect();
    grid.extend((1..=points - half).map(|k| t_max * k as f64 / (points - half) as f64));
    grid.push(t_max);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.retain(|t| *t <= t_max);
    grid
}

/// `n + 1` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A comparison function `psi` with a human-readable label.
#[derive(Clone)]
pub struct GateFunction {
    label: String,
    eval: ScalarFn,
}

impl fmt::Debug for GateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GateFunction").field("label", &self.label).finish()
    }
}

/// One affine-or-expression piece of a piecewise gate, active from `start`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub start: f64,
    /// Active for `t > start` rather than `t >= start`.
    pub open: bool,
    pub expr: Expr,
}

impl GateFunction {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GateFunction {
            label: label.into(),
            eval: Arc::new(f),
        }
    }

    /// `psi(t) = a t`.
    pub fn linear(a: f64) -> Self {
        Self::new(format!("linear:{a}"), move |t| a * t)
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0)
    }

    /// Piecewise gate; the piece with the largest matching start wins. The
    /// first piece must start at 0.
    pub fn piecewise(label: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::usage("piecewise gate needs at least one piece"));
        }
        if pieces.windows(2).any(|w| w[1].start < w[0].start) {
            return Err(Error::usage("piecewise breakpoints must be ascending"));
        }
        Ok(Self::new(label, move |t| {
            let piece = pieces
                .iter()
                .rev()
                .find(|p| if p.open { t > p.start } else { t >= p.start })
                .unwrap_or(&pieces[0]);
            piece.expr.eval(&Env { t, ..Env::default() })
        }))
    }

    /// Right-constant interpolation through `(t_i, v_i)`: `psi(t) = v_i` for
    /// `t_i <= t < t_{i+1}`, `v_0` below `t_0`, last value beyond the table.
    pub fn tabulated(label: impl Into<String>, table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::usage("tabulated gate needs at least one row"));
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::usage("tabulated abscissae must be strictly increasing"));
        }
        Ok(Self::new(label, move |t| {
            let idx = table.partition_point(|(s, _)| *s <= t);
            table[idx.saturating_sub(1)].1
        }))
    }

    /// Parses a gate spec:
    ///
    /// * `linear:A`: `A t` (A may be a constant expression such as `1/3`)
    /// * `expr:E`: an expression in `t`
    /// * `piecewise:E0;@B1:E1;@>B2:E2`: `E_k` from `t >= B_k` (`@>`: `t > B_k`)
    /// * `table:T0=V0,T1=V1,...`: right-constant interpolation
    /// * `zero`
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "zero" => Ok(Self::zero()),
            "linear" => {
                let a = Expr::constant(body)?;
                Ok(Self::new(spec, move |t| a * t))
            }
            "expr" => {
                let e = Expr::parse(body, &[Var::T])?;
                Ok(Self::new(spec, move |t| e.eval(&Env { t, ..Env::default() })))
            }
            "piecewise" => {
                let mut pieces = Vec::new();
                for (k, part) in body.split(';').enumerate() {
                    let part = part.trim();
                    if k == 0 {
                        pieces.push(Piece {
                            start: 0.0,
                            open: false,
                            expr: Expr::parse(part, &[Var::T])?,
                        });
                        continue;
                    }
                    let rest = part
                        .strip_prefix('@')
                        .ok_or_else(|| Error::usage(format!("piece `{part}` must start with `@breakpoint:`")))?;
                    let (open, rest) = match rest.strip_prefix('>') {
                        Some(r) => (true, r),
                        None => (false, rest),
                    };
                    let (bp, e) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::usage(format!("piece `{part}` lacks `:`")))?;
                    pieces.push(Piece {
                        start: Expr::constant(bp)?,
                        open,
                        expr: Expr::parse(e, &[Var::T])?,
                    });
                }
                Self::piecewise(spec, pieces)
            }
            "table" => {
                let rows = body
                    .split(',')
                    .map(|row| {
                        let (t, v) = row
                            .split_once('=')
                            .ok_or_else(|| Error::usage(format!("table row `{row}` lacks `=`")))?;
                        Ok((Expr::constant(t)?, Expr::constant(v)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::tabulated(spec, rows)
            }
            other => Err(Error::usage(format!("unknown gate kind `{other}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

fn validate_grid(grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::usage(format!(
            "grid needs at least {min_len} points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::usage("grid values must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::usage("grid must be sorted ascending"));
    }
    Ok(())
}

/// `psi(t_i) <= psi(t_{i+1}) + 1e-12` for all consecutive grid points. The
/// witness is the largest drop (first one on ties).
pub fn check_nondecreasing(psi: &GateFunction, grid: &[f64]) -> Result<Certificate> {
    validate_grid(grid, 2)?;
    let vals: Vec<f64> = grid.iter().map(|t| psi.eval(*t)).collect();
    let mut worst = WorstCase::default();
    for i in 0..grid.len() - 1 {
        worst.offer(
            || Witness::new(vec![vec![grid[i]], vec![grid[i + 1]]], Some(i), 0.0, 0.0),
            vals[i],
            vals[i + 1],
        );
    }
    Ok(
        Certificate::from_worst("psi-nondecreasing", worst.worst, MONOTONE_SLACK)
            .measure("grid-points", grid.len() as f64),
    )
}

/// `psi(t) < t` at every positive grid point, tested as
/// `psi(t) <= t - 1e-12 t`. Zero entries are skipped.
pub fn check_below_identity(psi: &GateFunction, grid: &[f64]) -> Result<Certificate> {
    if grid.iter().any(|t| *t < 0.0 || t.is_nan()) {
        return Err(Error::usage("grid for psi(t) < t must be nonnegative"));
    }
    let mut worst = WorstCase::default();
    for &t in grid.iter().filter(|t| **t > 0.0) {
        worst.offer(
            || Witness::new(vec![vec![t]], None, 0.0, 0.0),
            psi.eval(t),
            t - STRICT_MARGIN * t,
        );
    }
    Ok(Certificate::from_worst("psi-below-identity", worst.worst, 0.0))
}

/// Points sampled inside `(t0, t0 + delta]`: uniform plus geometric offsets
/// crowding toward `t0`.
fn right_window(t0: f64, delta: f64) -> impl Iterator<Item = f64> {
    let uniform = (1..=32).map(move |k| t0 + delta * k as f64 / 32.0);
    let geometric = (1..=20).map(move |j| t0 + delta * 0.5f64.powi(j));
    uniform.chain(geometric).filter(move |t| *t > t0)
}

/// Outcome of probing `limsup_{t -> t0+} f(t) <= f(t0)`.
struct RightLimitProbe {
    base: f64,
    /// `max f` over each window, one per delta.
    window_max: Vec<f64>,
}

impl RightLimitProbe {
    fn run(f: impl Fn(f64) -> f64, t0: f64, deltas: &[f64]) -> Self {
        let window_max = deltas
            .iter()
            .map(|&d| right_window(t0, d).map(&f).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        RightLimitProbe {
            base: f(t0),
            window_max,
        }
    }

    /// Smallest window maximum: the measured right limsup.
    fn limsup(&self) -> f64 {
        self.window_max.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// No violation if the excess over `f(t0)` is within `tol`, or is still
    /// shrinking at the finest scale (at least halving over the last step).
    /// A jump shows up as an excess that stops shrinking.
    fn holds(&self, tol: f64) -> bool {
        let excess: Vec<f64> = self.window_max.iter().map(|s| s - self.base).collect();
        if self.limsup() <= self.base + tol {
            return true;
        }
        match excess.as_slice() {
            [.., prev, last] => *last <= 0.5 * *prev,
            _ => false,
        }
    }
}

fn validate_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::usage("deltas must be positive"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::usage("deltas must be strictly decreasing"));
    }
    Ok(())
}

fn rusc_note(deltas: &[f64]) -> String {
    format!(
        "refutation-only: no violation found down to window {:e}",
        deltas.last().copied().unwrap_or(f64::NAN)
    )
}

/// Right upper semicontinuity of `psi` at each anchor, probed over shrinking
/// right windows `(t0, t0 + delta_k]`.
pub fn check_right_usc(psi: &GateFunction, anchors: &[f64], deltas: &[f64], tol: f64) -> Result<Certificate> {
    validate_deltas(deltas)?;
    let mut worst = WorstCase::default();
    let mut failed = false;
    for &t0 in anchors {
        let probe = RightLimitProbe::run(|t| psi.eval(t), t0, deltas);
        let holds = probe.holds(tol);
        // Prefer real violations as witnesses over merely-tight anchors.
        if !holds && !failed {
            worst = WorstCase::default();
            failed = true;
        }
        if holds == !failed {
            worst.offer(
                || Witness::new(vec![vec![t0]], None, 0.0, 0.0),
                probe.limsup(),
                probe.base,
            );
        }
    }
    let cert = match worst.worst {
        Some(w) if failed => Certificate::refuted("psi-right-usc", w),
        Some(w) => Certificate::pass("psi-right-usc").with_witness(w),
        None => Certificate::pass("psi-right-usc"),
    };
    Ok(cert.with_note(rusc_note(deltas)))
}

/// Gate bundle: nondecreasing, right u.s.c. and strictly below the
/// identity, all on `grid`.
pub fn check_boyd_wong(psi: &GateFunction, grid: &[f64], deltas: &[f64]) -> Result<Certificate> {
    let mut with_zero = Vec::with_capacity(grid.len() + 1);
    if grid.first() != Some(&0.0) {
        with_zero.push(0.0);
    }
    with_zero.extend_from_slice(grid);
    Ok(Certificate::all(
        "psi-boyd-wong",
        vec![
            check_nondecreasing(psi, &with_zero)?,
            check_right_usc(psi, &with_zero, deltas, RUSC_TOL)?,
            check_below_identity(psi, grid)?,
        ],
    ))
}

/// The running supremum `g(t) = sup_{0 <= s <= t} psi(s)`, approximated on a
/// grid of step `resolution`.
#[derive(Debug, Clone)]
pub struct Envelope {
    base: GateFunction,
    resolution: f64,
}

impl Envelope {
    pub fn new(base: GateFunction, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::usage(format!(
                "envelope resolution must be positive, got {resolution}"
            )));
        }
        Ok(Envelope { base, resolution })
    }

    pub fn with_default_resolution(base: GateFunction) -> Self {
        Envelope {
            base,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn base(&self) -> &GateFunction {
        &self.base
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Max of `psi` over `{0, h, 2h, ..., t} ∪ {t}`. NaN for negative `t`.
    pub fn value(&self, t: f64) -> f64 {
        self.sweep(&[t])[0]
    }

    /// `value` at every query, walking the grid once. Queries may come in any
    /// order; results are returned in query order.
    pub fn sweep(&self, ts: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        let mut out = vec![f64::NAN; ts.len()];
        let mut k = 0u64;
        let mut grid_max = f64::NEG_INFINITY;
        for idx in order {
            let t = ts[idx];
            if !(t >= 0.0) {
                continue;
            }
            loop {
                let s = k as f64 * self.resolution;
                if s > t {
                    break;
                }
                grid_max = grid_max.max(self.base.eval(s));
                k += 1;
            }
            out[idx] = grid_max.max(self.base.eval(t));
        }
        out
    }
}

/// `g(t)` for `psi` at grid step `resolution`.
pub fn envelope_value(psi: &GateFunction, t: f64, resolution: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::usage(format!("envelope needs t >= 0, got {t}")));
    }
    Ok(Envelope::new(psi.clone(), resolution)?.value(t))
}

/// Properties of the envelope on `grid`: nondecreasing, `g(0) = 0`,
/// `g(t) <= t`, `g(t) < t` for `t > 0`, and right continuity (refutation-only).
///
/// The bundle is marked conditional when `psi` itself fails the gate
/// checks on the same grid.
pub fn check_envelope_properties(env: &Envelope, grid: &[f64], deltas: &[f64]) -> Result<Certificate> {
    validate_grid(grid, 2)?;
    validate_deltas(deltas)?;
    let psi_ok = check_boyd_wong(env.base(), grid, deltas)?.passed();

    // One sweep answers every query: grid points, 0, and the right windows.
    let mut queries = grid.to_vec();
    queries.push(0.0);
    for &t0 in grid {
        queries.extend(deltas.iter().map(|d| t0 + d));
    }
    let vals = env.sweep(&queries);
    let g = &vals[..grid.len()];
    let g0 = vals[grid.len()];
    let windows = &vals[grid.len() + 1..];

    let mut mono = WorstCase::default();
    for i in 0..grid.len() - 1 {
        mono.offer(
            || Witness::new(vec![vec![grid[i]], vec![grid[i + 1]]], Some(i), 0.0, 0.0),
            g[i],
            g[i + 1],
        );
    }
    let mut weak = WorstCase::default();
    let mut strict = WorstCase::default();
    for (i, &t) in grid.iter().enumerate() {
        weak.offer(|| Witness::new(vec![vec![t]], None, 0.0, 0.0), g[i], t);
        if t > 0.0 {
            strict.offer(
                || Witness::new(vec![vec![t]], None, 0.0, 0.0),
                g[i],
                t - STRICT_MARGIN * t,
            );
        }
    }

    let mut right = WorstCase::default();
    let mut right_failed = false;
    for (i, &t0) in grid.iter().enumerate() {
        let probe = RightLimitProbe {
            base: g[i],
            window_max: windows[i * deltas.len()..(i + 1) * deltas.len()].to_vec(),
        };
        let holds = probe.holds(RUSC_TOL);
        if !holds && !right_failed {
            right = WorstCase::default();
            right_failed = true;
        }
        if holds == !right_failed {
            right.offer(
                || Witness::new(vec![vec![t0]], None, 0.0, 0.0),
                probe.limsup(),
                probe.base,
            );
        }
    }
    let right_cert = match right.worst {
        Some(w) if right_failed => Certificate::refuted("g-right-continuous", w),
        Some(w) => Certificate::pass("g-right-continuous").with_witness(w),
        None => Certificate::pass("g-right-continuous"),
    }
    .with_note(rusc_note(deltas));

    let zero_cert = if g0 == 0.0 {
        Certificate::pass("g-zero-at-zero")
    } else {
        Certificate::refuted("g-zero-at-zero", Witness::new(vec![vec![0.0]], None, g0, 0.0))
    };

    let mut bundle = Certificate::all(
        "envelope-properties",
        vec![
            Certificate::from_worst("g-nondecreasing", mono.worst, MONOTONE_SLACK),
            zero_cert,
            Certificate::from_worst("g-at-most-identity", weak.worst, 0.0),
            Certificate::from_worst("g-below-identity", strict.worst, 0.0),
            right_cert,
        ],
    )
    .conditional(!psi_ok)
    .measure("resolution", env.resolution());
    if !psi_ok {
        bundle = bundle.with_note("conditional: psi fails the Boyd-Wong checks on this grid");
    }
    Ok(bundle)
}

/// Windowed version of `limsup g(a_n) <= g(limsup a_n)`: with
/// `A = max_{n >= tail_start} a_n` and `B = max_{n >= tail_start} g(a_n)`,
/// passes iff `B <= g(A) + 1e-9`.
pub fn check_limsup_inequality(g: &Envelope, sequence: &[f64], tail_start: usize) -> Result<Certificate> {
    if tail_start >= sequence.len() {
        return Err(Error::usage(format!(
            "tail_start {tail_start} leaves an empty tail of a length-{} sequence",
            sequence.len()
        )));
    }
    if sequence.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::usage("sequence must be finite and nonnegative"));
    }
    let tail = &sequence[tail_start..];
    let (arg, a_max) =
        tail.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, a)| if a > acc.1 { (i, a) } else { acc },
        );
    let mut queries = tail.to_vec();
    queries.push(a_max);
    let vals = g.sweep(&queries);
    let g_of_limsup = vals[tail.len()];
    let (b_arg, b) = vals[..tail.len()]
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let w = Witness::new(vec![vec![tail[b_arg]]], Some(tail_start + b_arg), b, g_of_limsup);
    let verdict = if b <= g_of_limsup + LIMSUP_TOL {
        Verdict::Pass
    } else {
        Verdict::Refuted
    };
    Ok(Certificate::new("limsup-inequality", verdict)
        .with_witness(w)
        .measure("tail-max", a_max)
        .measure("tail-max-index", (tail_start + arg) as f64)
        .measure("g-tail-max", b)
        .measure("g-of-tail-max", g_of_limsup))
}
