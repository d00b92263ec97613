//! Picard iteration with diagnostics that follow the convergence argument:
//! tail diameters of the orbit, the shifted contraction inequality
//! `b_{n+m} <= g(b_n) + eps`, a boundedness monitor, the fixed-point residual
//! and a multi-start uniqueness probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::{Certificate, Verdict, Witness, WorstCase};
use crate::contraction::{estimate_uniform_index, PhiFamily, SelfMap};
use crate::error::{Error, Result};
use crate::gate::Envelope;
use crate::metric::{distance, MetricSpace, Point, Region};

/// Default Cauchy window.
pub const DEFAULT_WINDOW: usize = 16;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Default escape radius is this factor times `1 + d(x0, T x0)`.
pub const ESCAPE_FACTOR: f64 = 1e4;
/// A Cauchy-detected limit with residual above `RESIDUAL_FACTOR * tol` is
/// reported as suspect.
pub const RESIDUAL_FACTOR: f64 = 10.0;
/// Slack for the contraction inequality.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub window: usize,
    /// `None` picks `ESCAPE_FACTOR * (1 + d(x0, T x0))`.
    pub escape_radius: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_iter: DEFAULT_MAX_ITER,
            window: DEFAULT_WINDOW,
            escape_radius: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveVerdict {
    Converged,
    /// Cauchy detection fired but `d(Tz, z)` is large; `T` may be
    /// discontinuous at the limit.
    Suspect,
    MaxIter,
    DivergedUnbounded,
}

/// The iterates of one run and their derived distances.
#[derive(Debug, Clone)]
pub struct OrbitTrace<P> {
    pub points: Vec<P>,
    /// `d(x_{k+1}, x_k)`, one shorter than `points`.
    pub step_dists: Vec<f64>,
    /// `b_n^{(N)} = max_{n <= i,j <= N} d(x_i, x_j)`, a lower bound for the
    /// infinite-tail diameter.
    pub tail_diams: Vec<f64>,
    pub bounded: bool,
    pub escape_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport<P> {
    pub limit: Option<P>,
    pub iterations: usize,
    /// `d(Tz, z)` for the reported limit.
    pub final_residual: Option<f64>,
    /// Windowed tail diameter at the stopping index.
    pub tail_limit_estimate: f64,
    pub verdict: SolveVerdict,
    pub escape_radius: f64,
}

impl<P> ConvergenceReport<P> {
    pub fn converged(&self) -> bool {
        self.verdict == SolveVerdict::Converged
    }
}

fn window_diameter<S: MetricSpace + ?Sized>(space: &S, pts: &[S::Point]) -> Result<f64> {
    Ok(space.tail_diameters(pts)?.first().copied().unwrap_or(0.0))
}

/// Iterates `x_{k+1} = T x_k` until the diameter of the last `window`
/// iterates drops below `tol`, the orbit leaves the escape ball around `x0`,
/// or `max_iter` maps have been applied.
#[allow(clippy::type_complexity)]
pub fn iterate_to_fixed_point<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    x0: &S::Point,
    opts: &SolveOptions,
) -> Result<(ConvergenceReport<S::Point>, OrbitTrace<S::Point>)> {
    if !(opts.tol > 0.0) {
        return Err(Error::usage(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.max_iter < 1 || opts.window < 2 {
        return Err(Error::usage("max_iter must be >= 1 and window >= 2"));
    }
    let first = map.apply_at(x0, 1)?;
    let escape_radius = match opts.escape_radius {
        Some(r) => r,
        None => ESCAPE_FACTOR * (1.0 + distance(space, x0, &first)?),
    };

    let mut points = vec![x0.clone(), first];
    let mut step_dists = Vec::new();
    let mut verdict = SolveVerdict::MaxIter;
    let mut escape_index = None;
    let mut window_diam = f64::INFINITY;
    loop {
        let k = points.len() - 1;
        step_dists.push(distance(space, &points[k], &points[k - 1])?);
        if distance(space, &points[k], x0)? >= escape_radius {
            verdict = SolveVerdict::DivergedUnbounded;
            escape_index = Some(k);
            break;
        }
        if points.len() >= opts.window {
            window_diam = window_diameter(space, &points[points.len() - opts.window..])?;
            if window_diam < opts.tol {
                verdict = SolveVerdict::Converged;
                break;
            }
        }
        if k >= opts.max_iter {
            break;
        }
        let next = map.apply_at(&points[k], k + 1)?;
        points.push(next);
    }

    let iterations = points.len() - 1;
    let (limit, final_residual) = if verdict == SolveVerdict::Converged {
        let z = points[iterations].clone();
        let residual = distance(space, &map.apply(&z)?, &z)?;
        if residual > RESIDUAL_FACTOR * opts.tol {
            verdict = SolveVerdict::Suspect;
        }
        (Some(z), Some(residual))
    } else {
        (None, None)
    };
    let tail_diams = space.tail_diameters(&points)?;
    let report = ConvergenceReport {
        limit,
        iterations,
        final_residual,
        tail_limit_estimate: window_diam,
        verdict,
        escape_radius,
    };
    let trace = OrbitTrace {
        points,
        step_dists,
        tail_diams,
        bounded: escape_index.is_none(),
        escape_index,
    };
    Ok((report, trace))
}

/// `b_n^{(N)}` for `n = 0..=N` over `points[..=window_end]`.
pub fn tail_diameters<S: MetricSpace + ?Sized>(space: &S, points: &[S::Point], window_end: usize) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::usage("tail diameters need a nonempty trace"));
    }
    let end = window_end.min(points.len() - 1);
    space.tail_diameters(&points[..=end])
}

/// `b_{n+m} <= g(b_n) + eps + 1e-12` for every `n` with `n + m` in range.
pub fn check_contraction_inequality(tail_diams: &[f64], g: &Envelope, m_shift: usize, eps: f64) -> Result<Certificate> {
    if m_shift < 1 {
        return Err(Error::usage("m_shift must be at least 1"));
    }
    if tail_diams.len() < m_shift + 2 {
        return Err(Error::usage(format!(
            "trace of {} tail diameters is too short for shift {m_shift}",
            tail_diams.len()
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::usage("eps must be nonnegative"));
    }
    let count = tail_diams.len() - m_shift;
    let g_vals = g.sweep(&tail_diams[..count]);
    let mut worst = WorstCase::default();
    for n in 0..count {
        worst.offer(
            || Witness::new(vec![], Some(n), 0.0, 0.0),
            tail_diams[n + m_shift],
            g_vals[n] + eps,
        );
    }
    Ok(
        Certificate::from_worst("contraction-inequality", worst.worst, INEQUALITY_SLACK)
            .measure("m-shift", m_shift as f64)
            .measure("eps", eps)
            .measure("checked", count as f64),
    )
}

/// Picks the shift from the family's uniform index on `region` for the given
/// `eps`, then checks the shifted inequality on the trace.
///
/// Inconclusive when no index exists below `n_cap` or the trace is too short
/// for it.
#[allow(clippy::too_many_arguments)]
pub fn check_orbit_contraction<P: Point, R: Region<P> + ?Sized>(
    family: &PhiFamily<P>,
    region: &R,
    g: &Envelope,
    tail_diams: &[f64],
    eps: f64,
    random_pairs: usize,
    seed: u64,
    n_cap: u32,
) -> Result<Certificate> {
    let Some(m) = estimate_uniform_index(family, region, eps, random_pairs, seed, n_cap)? else {
        return Ok(Certificate::new("orbit-contraction", Verdict::Inconclusive)
            .with_note(format!("no uniform index up to {n_cap} for eps {eps:e}")));
    };
    if tail_diams.len() < m as usize + 2 {
        return Ok(Certificate::new("orbit-contraction", Verdict::Inconclusive)
            .with_note(format!("trace too short for shift {m}")));
    }
    let inner = check_contraction_inequality(tail_diams, g, m as usize, eps)?;
    let mut c = Certificate::all("orbit-contraction", vec![inner]);
    c.measured.push(("m-shift".into(), m as f64));
    Ok(c)
}

/// Runs [`iterate_to_fixed_point`] from every start (in parallel) and passes
/// iff all limits lie pairwise within `2 tol`.
///
/// A start whose orbit escapes or never settles is a failed hypothesis, not
/// a counterexample to uniqueness: the result is then inconclusive.
pub fn uniqueness_probe<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    starts: &[S::Point],
    opts: &SolveOptions,
) -> Result<Certificate> {
    if starts.len() < 2 {
        return Err(Error::usage("uniqueness probe needs at least two starts"));
    }
    let runs = starts
        .par_iter()
        .map(|x0| iterate_to_fixed_point(space, map, x0, opts).map(|(r, _)| r))
        .collect::<Result<Vec<_>>>()?;

    if let Some((k, r)) = runs.iter().enumerate().find(|(_, r)| !r.converged()) {
        return Ok(Certificate::new("uniqueness", Verdict::Inconclusive)
            .with_witness(Witness::new(vec![starts[k].coords()], Some(k), f64::NAN, f64::NAN))
            .with_note(format!(
                "hypothesis failure: start {k} ended {:?} (bounded orbit not established)",
                r.verdict
            )));
    }
    let limits: Vec<&S::Point> = runs.iter().filter_map(|r| r.limit.as_ref()).collect();
    let mut worst = WorstCase::default();
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            let d = distance(space, limits[i], limits[j])?;
            worst.offer(
                || Witness::new(vec![limits[i].coords(), limits[j].coords()], Some(i), 0.0, 0.0),
                d,
                2.0 * opts.tol,
            );
        }
    }
    let spread = worst.worst.as_ref().map_or(0.0, |w| w.lhs);
    Ok(Certificate::from_worst("uniqueness", worst.worst, 0.0)
        .measure("starts", starts.len() as f64)
        .measure("limit-spread", spread))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateFunction;
    use crate::metric::RealLine;

    fn third() -> SelfMap<f64> {
        SelfMap::new("x/3", |x: &f64| x / 3.0)
    }

    fn brute_tail(points: &[f64]) -> Vec<f64> {
        (0..points.len())
            .map(|n| {
                let mut b = 0.0f64;
                for i in n..points.len() {
                    for j in n..points.len() {
                        b = b.max((points[i] - points[j]).abs());
                    }
                }
                b
            })
            .collect()
    }

    #[test]
    fn example1_orbit_converges_to_zero() {
        let (rep, trace) = iterate_to_fixed_point(&RealLine, &third(), &1.0, &SolveOptions::with_tol(1e-9)).unwrap();
        assert_eq!(rep.verdict, SolveVerdict::Converged);
        assert!(rep.limit.unwrap().abs() < 1e-9);
        assert!(rep.final_residual.unwrap() <= RESIDUAL_FACTOR * 1e-9);
        for (n, x) in trace.points.iter().enumerate().take(31) {
            let exact = 3f64.powi(-(n as i32));
            assert!((x - exact).abs() <= 1e-12 * exact);
        }
        assert!(trace.bounded);
    }

    #[test]
    fn fixed_start_converges_within_window() {
        let (rep, trace) = iterate_to_fixed_point(&RealLine, &third(), &0.0, &SolveOptions::default()).unwrap();
        assert!(rep.converged());
        assert!(rep.iterations <= DEFAULT_WINDOW);
        assert_eq!(rep.final_residual, Some(0.0));
        assert!(trace.tail_diams.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn translation_escapes_at_radius() {
        let shift = SelfMap::new("x+1", |x: &f64| x + 1.0);
        let opts = SolveOptions {
            escape_radius: Some(1e6),
            max_iter: 2_000_000,
            ..SolveOptions::default()
        };
        let (rep, trace) = iterate_to_fixed_point(&RealLine, &shift, &0.0, &opts).unwrap();
        assert_eq!(rep.verdict, SolveVerdict::DivergedUnbounded);
        assert_eq!(trace.escape_index, Some(1_000_000));
        assert!(!trace.bounded);
        assert!(rep.limit.is_none());
    }

    #[test]
    fn max_iter_is_a_verdict_not_an_error() {
        let slow = SelfMap::new("slow", |x: &f64| x * 0.999_999);
        let opts = SolveOptions {
            max_iter: 50,
            ..SolveOptions::default()
        };
        let (rep, trace) = iterate_to_fixed_point(&RealLine, &slow, &1.0, &opts).unwrap();
        assert_eq!(rep.verdict, SolveVerdict::MaxIter);
        assert_eq!(trace.points.len(), 51);
    }

    #[test]
    fn discontinuous_limit_is_suspect() {
        // Cauchy detection fires at z = 1/16, but T jumps away below 0.07
        let jump = SelfMap::new("jump", |x: &f64| if *x > 0.07 { x / 2.0 } else { 5.0 });
        let opts = SolveOptions {
            tol: 0.1,
            window: 2,
            ..SolveOptions::default()
        };
        let (rep, _) = iterate_to_fixed_point(&RealLine, &jump, &1.0, &opts).unwrap();
        assert_eq!(rep.verdict, SolveVerdict::Suspect);
        assert_eq!(rep.limit, Some(0.0625));
        assert!(rep.final_residual.unwrap() > RESIDUAL_FACTOR * opts.tol);
    }

    #[test]
    fn tail_diameters_examples() {
        let pts: Vec<f64> = (0..=50).map(|n| 3f64.powi(-n)).collect();
        let b = tail_diameters(&RealLine, &pts, 50).unwrap();
        assert_eq!(b, brute_tail(&pts));
        for (n, bn) in b.iter().enumerate() {
            let closed = 3f64.powi(-(n as i32)) - 3f64.powi(-50);
            assert!((bn - closed).abs() <= 1e-15 * closed.max(1e-300));
        }
        assert!(tail_diameters(&RealLine, &[2.0; 9], 8)
            .unwrap()
            .iter()
            .all(|b| *b == 0.0));
        let halving: Vec<f64> = (0..=30).map(|n| 8.0 * 2f64.powi(-n)).collect();
        assert_eq!(tail_diameters(&RealLine, &halving, 30).unwrap(), brute_tail(&halving));
        assert!(tail_diameters(&RealLine, &[], 0).is_err());
    }

    #[test]
    fn contraction_inequality_examples() {
        let half = SelfMap::new("x/2", |x: &f64| x / 2.0);
        let opts = SolveOptions::with_tol(1e-12);
        let (_, trace) = iterate_to_fixed_point(&RealLine, &half, &8.0, &opts).unwrap();
        let g = Envelope::with_default_resolution(GateFunction::linear(0.5));
        let c = check_contraction_inequality(&trace.tail_diams, &g, 1, 0.0).unwrap();
        assert!(c.passed(), "{c:?}");

        let zeros = vec![0.0; 10];
        assert!(check_contraction_inequality(&zeros, &g, 3, 0.0).unwrap().passed());
        assert!(check_contraction_inequality(&zeros, &g, 9, 0.0).is_err());
        assert!(check_contraction_inequality(&zeros, &g, 0, 0.0).is_err());

        let bad = vec![1.0, 0.9, 0.8];
        assert!(check_contraction_inequality(&bad, &g, 1, 0.0).unwrap().is_refuted());
    }

    #[test]
    fn uniqueness_examples() {
        let opts = SolveOptions::with_tol(1e-9);
        let c = uniqueness_probe(&RealLine, &third(), &[-5.0, 1.0, 100.0], &opts).unwrap();
        assert!(c.passed());
        assert!(c.measured("limit-spread").unwrap() <= 1e-8);
        assert!(uniqueness_probe(&RealLine, &third(), &[3.0, 3.0], &opts)
            .unwrap()
            .passed());
        let shift = SelfMap::new("x+1", |x: &f64| x + 1.0);
        let c = uniqueness_probe(&RealLine, &shift, &[0.0, 1.0], &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.note.contains("hypothesis failure"));
        assert!(uniqueness_probe(&RealLine, &third(), &[1.0], &opts).is_err());
    }
}
