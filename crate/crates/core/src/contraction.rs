//! Asymptotic pointwise contraction data and its sampled condition checks.
//!
//! A candidate certificate for a map `T` is a triple: a family `phi_n`
//! bounding `d(T^n x, T^n y)`, its claimed limit `phi`, and a gate `psi`
//! with `phi(x, y) <= psi(M(x, y))`, where `M` is the five-distance max term.
//! Each condition has its own check; [`certify`] runs them together.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::certificate::{Certificate, Witness, WorstCase};
use crate::error::{Error, Result};
use crate::gate::GateFunction;
use crate::metric::{distance, sample_region, MetricSpace, Point, Region};

/// Slack for the pairwise inequalities of the condition checks.
pub const PAIR_SLACK: f64 = 1e-12;
/// Allowed upward wobble of sampled sup gaps between schedule entries.
pub const GAP_JITTER: f64 = 1e-9;
/// Default number of random pairs per region sample.
pub const DEFAULT_PAIRS: usize = 4096;

type MapFn<P> = Arc<dyn Fn(&P) -> std::result::Result<P, String> + Send + Sync>;

/// A self-map `T: X -> X`.
pub struct SelfMap<P> {
    label: String,
    apply: MapFn<P>,
}

impl<P> Clone for SelfMap<P> {
    fn clone(&self) -> Self {
        SelfMap {
            label: self.label.clone(),
            apply: Arc::clone(&self.apply),
        }
    }
}

impl<P> fmt::Debug for SelfMap<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap").field("label", &self.label).finish()
    }
}

impl<P: Point> SelfMap<P> {
    pub fn new(label: impl Into<String>, f: impl Fn(&P) -> P + Send + Sync + 'static) -> Self {
        SelfMap {
            label: label.into(),
            apply: Arc::new(move |p| Ok(f(p))),
        }
    }

    /// A map that may fail on some inputs.
    pub fn fallible(
        label: impl Into<String>,
        f: impl Fn(&P) -> std::result::Result<P, String> + Send + Sync + 'static,
    ) -> Self {
        SelfMap {
            label: label.into(),
            apply: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, x: &P) -> Result<P> {
        self.apply_at(x, 1)
    }

    /// Applies the map, tagging failures with the iterate index being built.
    pub(crate) fn apply_at(&self, x: &P, index: usize) -> Result<P> {
        (self.apply)(x).map_err(|message| Error::MapFailed {
            label: self.label.clone(),
            index,
            message,
        })
    }
}

/// Checks that `T` maps every sampled point of `domain` back into `domain`.
pub fn check_self_map<P: Point, R: Region<P> + ?Sized>(
    map: &SelfMap<P>,
    domain: &R,
    points: &[P],
) -> Result<Certificate> {
    for p in points.iter().filter(|p| domain.contains(p)) {
        let image = map.apply(p)?;
        if !domain.contains(&image) {
            return Ok(Certificate::refuted(
                "maps-domain-into-itself",
                Witness::new(vec![p.coords(), image.coords()], None, 1.0, 0.0),
            )
            .with_note(format!("image leaves {}", domain.describe())));
        }
    }
    Ok(Certificate::pass("maps-domain-into-itself").measure("points", points.len() as f64))
}

type PhiFn<P> = Arc<dyn Fn(u32, &P, &P) -> f64 + Send + Sync>;
type LimitFn<P> = Arc<dyn Fn(&P, &P) -> f64 + Send + Sync>;

/// The family `phi_n` and its claimed pointwise limit `phi`.
pub struct PhiFamily<P> {
    label: String,
    phi_n: PhiFn<P>,
    limit: LimitFn<P>,
    /// Whether `phi_0` is meaningful; when set, the domination check also
    /// covers `n = 0`.
    defines_zero: bool,
}

impl<P> Clone for PhiFamily<P> {
    fn clone(&self) -> Self {
        PhiFamily {
            label: self.label.clone(),
            phi_n: Arc::clone(&self.phi_n),
            limit: Arc::clone(&self.limit),
            defines_zero: self.defines_zero,
        }
    }
}

impl<P> fmt::Debug for PhiFamily<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFamily").field("label", &self.label).finish()
    }
}

impl<P: Point> PhiFamily<P> {
    pub fn new(
        label: impl Into<String>,
        phi_n: impl Fn(u32, &P, &P) -> f64 + Send + Sync + 'static,
        limit: impl Fn(&P, &P) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PhiFamily {
            label: label.into(),
            phi_n: Arc::new(phi_n),
            limit: Arc::new(limit),
            defines_zero: false,
        }
    }

    /// `phi_n = phi` for every `n`.
    pub fn constant(label: impl Into<String>, phi: impl Fn(&P, &P) -> f64 + Send + Sync + 'static) -> Self {
        let phi = Arc::new(phi);
        let limit = Arc::clone(&phi);
        PhiFamily {
            label: label.into(),
            phi_n: Arc::new(move |_, x, y| phi(x, y)),
            limit,
            defines_zero: true,
        }
    }

    pub fn with_zero_index(mut self, defines_zero: bool) -> Self {
        self.defines_zero = defines_zero;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi_n(&self, n: u32, x: &P, y: &P) -> f64 {
        (self.phi_n)(n, x, y)
    }

    pub fn limit(&self, x: &P, y: &P) -> f64 {
        (self.limit)(x, y)
    }

    pub fn defines_zero(&self) -> bool {
        self.defines_zero
    }
}

/// Which of the five distances realizes the max term.
impl PhiFamily<f64> {
    /// Built-in families on the real line, or `None` for an unknown name:
    ///
    /// * `example1`: `(1/3 + 1/(n+1)) |x - y|`, limit `|x - y| / 3`
    /// * `power:A`: `A^n |x - y|`, limit 0 (`A` may be `1/4` and so on)
    /// * `constant`: `|x - y|` for every `n`, including 0
    pub fn named(spec: &str) -> Result<Option<Self>> {
        let family = match spec.split_once(':') {
            None if spec == "example1" => PhiFamily::new(
                "(1/3 + 1/(n+1)) |x - y|",
                |n, x: &f64, y: &f64| (1.0 / 3.0 + 1.0 / (n as f64 + 1.0)) * (x - y).abs(),
                |x: &f64, y: &f64| (x - y).abs() / 3.0,
            ),
            None if spec == "constant" => PhiFamily::constant("|x - y|", |x: &f64, y: &f64| (x - y).abs()),
            Some(("power", a)) => {
                let alpha = crate::expr::Expr::constant(a)?;
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::usage(format!(
                        "power family needs a finite alpha >= 0, got {alpha}"
                    )));
                }
                PhiFamily::new(
                    format!("{alpha}^n |x - y|"),
                    move |n, x: &f64, y: &f64| alpha.powi(n as i32) * (x - y).abs(),
                    |_: &f64, _: &f64| 0.0,
                )
            }
            _ => return Ok(None),
        };
        Ok(Some(family))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxTermComponent {
    /// `d(x, y)`
    PointPair,
    /// `d(Tx, x)`
    StepX,
    /// `d(Ty, y)`
    StepY,
    /// `d(Ty, x)`
    CrossYX,
    /// `d(Tx, y)`
    CrossXY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxTermValue {
    pub value: f64,
    pub argmax: MaxTermComponent,
}

fn max_term_with_images<S: MetricSpace + ?Sized>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    tx: &S::Point,
    ty: &S::Point,
) -> Result<MaxTermValue> {
    use MaxTermComponent::*;
    let parts = [
        (PointPair, distance(space, x, y)?),
        (StepX, distance(space, tx, x)?),
        (StepY, distance(space, ty, y)?),
        (CrossYX, distance(space, ty, x)?),
        (CrossXY, distance(space, tx, y)?),
    ];
    // strict comparison: ties go to the earliest component
    let (argmax, value) = parts
        .iter()
        .copied()
        .fold(parts[0], |best, c| if c.1 > best.1 { c } else { best });
    Ok(MaxTermValue { value, argmax })
}

/// `M(x, y) = max{d(x,y), d(Tx,x), d(Ty,y), d(Ty,x), d(Tx,y)}`.
pub fn max_term<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    x: &S::Point,
    y: &S::Point,
) -> Result<MaxTermValue> {
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    max_term_with_images(space, x, y, &tx, &ty)
}

/// Sampled pairs over a shared point pool, so per-point work (orbits, images)
/// is done once per point rather than once per pair.
#[derive(Debug, Clone)]
pub struct PairSample<P> {
    pub points: Vec<P>,
    pub pairs: Vec<(usize, usize)>,
}

impl<P: Point> PairSample<P> {
    /// All pairs among the region's extreme points (diagonal included), plus
    /// `random_pairs` seeded uniform pairs.
    pub fn from_region<R: Region<P> + ?Sized>(region: &R, random_pairs: usize, seed: u64) -> Result<Self> {
        let mut points = region.extreme_points();
        let corners = points.len();
        let mut pairs = Vec::new();
        for i in 0..corners {
            for j in i..corners {
                pairs.push((i, j));
            }
        }
        let drawn = sample_region(region, 2 * random_pairs, seed)?;
        points.extend(drawn);
        pairs.extend((0..random_pairs).map(|k| (corners + 2 * k, corners + 2 * k + 1)));
        Ok(PairSample { points, pairs })
    }

    /// Every ordered pair of a point list (a full grid sweep).
    pub fn all_pairs(points: Vec<P>) -> Self {
        let n = points.len();
        let pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        PairSample { points, pairs }
    }

    pub fn from_pairs(list: Vec<(P, P)>) -> Self {
        let mut points = Vec::with_capacity(2 * list.len());
        let mut pairs = Vec::with_capacity(list.len());
        for (k, (x, y)) in list.into_iter().enumerate() {
            points.push(x);
            points.push(y);
            pairs.push((2 * k, 2 * k + 1));
        }
        PairSample { points, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &P)> {
        self.pairs.iter().map(|&(i, j)| (&self.points[i], &self.points[j]))
    }

    fn witness_points(&self, k: usize) -> Vec<Vec<f64>> {
        let (i, j) = self.pairs[k];
        vec![self.points[i].coords(), self.points[j].coords()]
    }
}

/// Domination: `d(T^n x, T^n y) <= phi_n(x, y) + 1e-12` for every sampled
/// pair and every `1 <= n <= n_max` (also `n = 0` when the family defines it).
pub fn check_domination<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    family: &PhiFamily<S::Point>,
    sample: &PairSample<S::Point>,
    n_max: u32,
) -> Result<Certificate> {
    if n_max < 1 {
        return Err(Error::usage("n_max must be at least 1"));
    }
    if sample.is_empty() {
        return Err(Error::usage("domination check needs at least one pair"));
    }
    // orbits[p][n] = T^n(points[p])
    let orbits = sample
        .points
        .iter()
        .map(|p| crate::metric::orbit(map, p, n_max as usize))
        .collect::<Result<Vec<_>>>()?;
    let first = if family.defines_zero() { 0 } else { 1 };
    let mut worst = WorstCase::default();
    for (k, &(i, j)) in sample.pairs.iter().enumerate() {
        let (x, y) = (&sample.points[i], &sample.points[j]);
        for n in first..=n_max {
            let lhs = distance(space, &orbits[i][n as usize], &orbits[j][n as usize])?;
            let rhs = family.phi_n(n, x, y);
            worst.offer(
                || Witness::new(sample.witness_points(k), Some(n as usize), 0.0, 0.0),
                lhs,
                rhs,
            );
        }
    }
    Ok(Certificate::from_worst("domination", worst.worst, PAIR_SLACK)
        .measure("pairs", sample.len() as f64)
        .measure("n-max", n_max as f64))
}

/// One row of the local-uniform gap table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub n: u32,
    pub gap: f64,
}

/// Sampled `G_n = max_{(x,y)} |phi_n(x,y) - phi(x,y)|` for one `n`.
pub fn sup_gap<P: Point>(family: &PhiFamily<P>, sample: &PairSample<P>, n: u32) -> f64 {
    sample
        .iter()
        .map(|(x, y)| (family.phi_n(n, x, y) - family.limit(x, y)).abs())
        .fold(0.0, f64::max)
}

/// Settings for [`check_local_uniform`].
#[derive(Debug, Clone)]
pub struct LocalUniformConfig {
    pub n_schedule: Vec<u32>,
    /// Every target must eventually be undercut by the measured gap.
    pub targets: Vec<f64>,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for LocalUniformConfig {
    fn default() -> Self {
        LocalUniformConfig {
            n_schedule: (0..=14).map(|k| 1u32 << k).collect(),
            targets: vec![1e-1, 1e-2, 1e-3],
            random_pairs: DEFAULT_PAIRS,
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalUniformReport {
    pub certificate: Certificate,
    pub gaps: Vec<GapRow>,
}

/// Local uniform convergence on one bounded region: the sampled sup gap must be
/// nonincreasing along the schedule (within 1e-9) and must fall below every
/// target.
pub fn check_local_uniform<P: Point, R: Region<P> + ?Sized>(
    family: &PhiFamily<P>,
    region: &R,
    config: &LocalUniformConfig,
) -> Result<LocalUniformReport> {
    if !region.is_bounded() {
        return Err(Error::usage(format!(
            "local-uniform check needs a bounded region, got {}",
            region.describe()
        )));
    }
    if config.n_schedule.is_empty() || config.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::usage("n_schedule must be nonempty and strictly increasing"));
    }
    let sample = PairSample::from_region(region, config.random_pairs, config.seed)?;
    let gaps: Vec<GapRow> = config
        .n_schedule
        .iter()
        .map(|&n| GapRow {
            n,
            gap: sup_gap(family, &sample, n),
        })
        .collect();

    let rise = gaps
        .windows(2)
        .enumerate()
        .find(|(_, w)| w[1].gap > w[0].gap + GAP_JITTER);
    let last = gaps.last().map_or(f64::NAN, |r| r.gap);
    let missed = config.targets.iter().copied().find(|t| !(last <= *t));

    let mut cert = if let Some((k, w)) = rise {
        Certificate::refuted(
            "local-uniform",
            Witness::new(vec![], Some(w[1].n as usize), w[1].gap, w[0].gap),
        )
        .with_note(format!("sup gap rises between n={} and n={}", gaps[k].n, w[1].n))
    } else if let Some(t) = missed {
        Certificate::refuted(
            "local-uniform",
            Witness::new(vec![], gaps.last().map(|r| r.n as usize), last, t),
        )
        .with_note(format!("sup gap never falls below {t:e} on the schedule"))
    } else {
        Certificate::pass("local-uniform")
    };
    cert = cert.measure("pairs", sample.len() as f64).measure("final-gap", last);
    if cert.note.is_empty() {
        cert = cert.with_note(format!(
            "checked on {} only; pointwise convergence elsewhere is not sampled",
            region.describe()
        ));
    }
    Ok(LocalUniformReport {
        certificate: cert,
        gaps,
    })
}

/// Smallest exponent `p` in `gap ~ radius^p` between consecutive probes that
/// still counts as unbounded growth.
pub const GROWTH_EXPONENT: f64 = 0.5;

/// Probes uniformity on the whole space at a fixed `n` by measuring the sup
/// gap on regions of increasing radius. Refuted ("not globally uniform") when
/// the gap grows at least like `radius^0.5` across every probe step;
/// otherwise an inconclusive pass.
pub fn check_global_uniform<P: Point, R: Region<P>>(
    family: &PhiFamily<P>,
    probe_region: impl Fn(f64) -> R,
    radii: &[f64],
    n: u32,
    random_pairs: usize,
    seed: u64,
) -> Result<(Certificate, Vec<(f64, f64)>)> {
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::usage("probe radii must be positive, increasing, at least two"));
    }
    let gaps = radii
        .iter()
        .map(|&r| {
            let sample = PairSample::from_region(&probe_region(r), random_pairs, seed)?;
            Ok((r, sup_gap(family, &sample, n)))
        })
        .collect::<Result<Vec<_>>>()?;
    let unbounded = gaps.windows(2).all(|w| {
        let (r0, g0) = w[0];
        let (r1, g1) = w[1];
        g0 > 0.0 && g1 > g0 && (g1 / g0).ln() / (r1 / r0).ln() >= GROWTH_EXPONENT
    });
    let (r_last, g_last) = *gaps.last().expect("at least two radii");
    let cert = if unbounded {
        Certificate::refuted(
            "global-uniform",
            Witness::new(vec![], Some(n as usize), g_last, gaps[0].1),
        )
        .with_note(format!(
            "sup gap at n={n} grows without bound in the radius (reaches {g_last:e} at radius {r_last})"
        ))
    } else {
        Certificate::pass("global-uniform").with_note("inconclusive: no unbounded growth detected at the probed radii")
    };
    Ok((cert.measure("n", n as f64), gaps))
}

/// Gate bound: `phi(x, y) <= psi(M(x, y)) + 1e-12` on every sampled pair.
/// The `min-margin` measurement records `min (psi(M) - phi)`.
pub fn check_gate_bound<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    family: &PhiFamily<S::Point>,
    psi: &GateFunction,
    sample: &PairSample<S::Point>,
) -> Result<Certificate> {
    if sample.is_empty() {
        return Err(Error::usage("gate-bound check needs at least one pair"));
    }
    let images = sample.points.iter().map(|p| map.apply(p)).collect::<Result<Vec<_>>>()?;
    let mut worst = WorstCase::default();
    for (k, &(i, j)) in sample.pairs.iter().enumerate() {
        let (x, y) = (&sample.points[i], &sample.points[j]);
        let m = max_term_with_images(space, x, y, &images[i], &images[j])?;
        worst.offer(
            || Witness::new(sample.witness_points(k), None, 0.0, 0.0),
            family.limit(x, y),
            psi.eval(m.value),
        );
    }
    let margin = worst.worst.as_ref().map_or(f64::INFINITY, |w| -w.gap());
    Ok(Certificate::from_worst("gate-bound", worst.worst, PAIR_SLACK)
        .measure("pairs", sample.len() as f64)
        .measure("min-margin", margin))
}

/// Least `m` in `1..=n_cap` whose sampled sup gap on `region` is at most
/// `epsilon`.
pub fn estimate_uniform_index<P: Point, R: Region<P> + ?Sized>(
    family: &PhiFamily<P>,
    region: &R,
    epsilon: f64,
    random_pairs: usize,
    seed: u64,
    n_cap: u32,
) -> Result<Option<u32>> {
    if !(epsilon > 0.0) {
        return Err(Error::usage(format!("epsilon must be positive, got {epsilon}")));
    }
    let sample = PairSample::from_region(region, random_pairs, seed)?;
    Ok((1..=n_cap).find(|&m| sup_gap(family, &sample, m) <= epsilon))
}

/// Settings for a full three-condition certification run.
#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub n_max: u32,
    pub local: LocalUniformConfig,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            n_max: 30,
            local: LocalUniformConfig::default(),
        }
    }
}

/// Runs the three contraction conditions on one region and bundles the certificates. The
/// local-uniform gap table comes back alongside.
pub fn certify<S, R>(
    space: &S,
    map: &SelfMap<S::Point>,
    family: &PhiFamily<S::Point>,
    psi: &GateFunction,
    region: &R,
    config: &CertifyConfig,
) -> Result<(Certificate, Vec<GapRow>)>
where
    S: MetricSpace + ?Sized,
    R: Region<S::Point> + ?Sized,
{
    let sample = PairSample::from_region(region, config.local.random_pairs, config.local.seed)?;
    let domination = check_domination(space, map, family, &sample, config.n_max)?;
    let local = check_local_uniform(family, region, &config.local)?;
    let gate = check_gate_bound(space, map, family, psi, &sample)?;
    let bundle = Certificate::all(
        "asymptotic-pointwise-contraction",
        vec![domination, local.certificate, gate],
    );
    Ok((bundle, local.gaps))
}
