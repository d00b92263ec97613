//! Metric spaces, bounded regions and orbits.
//!
//! A space is anything implementing [`MetricSpace`]; the crate ships the real
//! line, fixed-dimension Euclidean space and the discrete metric on integers.
//! New spaces can be registered at runtime with [`FnMetric`], which wraps a
//! plain distance closure.
//!
//! Bounded regions ([`Region`]) double as the seeded samplers used by the
//! certifiers, so a region plus a seed always yields the same point list.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contraction::SelfMap;
use crate::error::{Error, Result};

/// Negative distances smaller than this in magnitude are treated as rounding
/// noise and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-15;

/// An element of a carrier set.
///
/// `coords` flattens the point into real coordinates for reports and
/// witnesses; it plays no part in any distance computation.
pub trait Point: Clone + fmt::Debug + Send + Sync + 'static {
    fn coords(&self) -> Vec<f64>;
}

impl Point for f64 {
    fn coords(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl<const D: usize> Point for [f64; D] {
    fn coords(&self) -> Vec<f64> {
        self.to_vec()
    }
}

impl Point for Vec<f64> {
    fn coords(&self) -> Vec<f64> {
        self.clone()
    }
}

impl Point for i64 {
    fn coords(&self) -> Vec<f64> {
        vec![*self as f64]
    }
}

/// A metric on a point type.
pub trait MetricSpace: Send + Sync {
    type Point: Point;

    /// Raw distance. Callers should go through [`distance`], which validates
    /// the sign of the result.
    fn dist(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn name(&self) -> &str;

    /// Windowed tail diameters `b_n = max_{n <= i,j < len} d(x_i, x_j)`.
    ///
    /// The default is a direct pair scan and costs `O(len^2)` distance
    /// evaluations. Spaces with more structure can do better.
    fn tail_diameters(&self, points: &[Self::Point]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; points.len()];
        let mut running = 0.0f64;
        for n in (0..points.len()).rev() {
            for j in n + 1..points.len() {
                running = running.max(distance(self, &points[n], &points[j])?);
            }
            out[n] = running;
        }
        Ok(out)
    }
}

/// Validated distance: clamps tiny negative values to zero and rejects
/// anything else that is negative or NaN.
pub fn distance<S: MetricSpace + ?Sized>(space: &S, x: &S::Point, y: &S::Point) -> Result<f64> {
    let v = space.dist(x, y);
    if v >= 0.0 {
        Ok(v)
    } else if v > -NEGATIVE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::MetricViolation { value: v })
    }
}

/// Largest pairwise distance in a finite, nonempty point list.
pub fn finite_diameter<S: MetricSpace + ?Sized>(space: &S, points: &[S::Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::usage("finite_diameter needs at least one point"));
    }
    let mut diam = 0.0f64;
    for (i, u) in points.iter().enumerate() {
        for v in &points[i + 1..] {
            diam = diam.max(distance(space, u, v)?);
        }
    }
    Ok(diam)
}

/// `[x0, T x0, ..., T^n x0]`.
pub fn orbit<P: Point>(map: &SelfMap<P>, x0: &P, n: usize) -> Result<Vec<P>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x0.clone());
    for index in 1..=n {
        let next = map.apply_at(&out[index - 1], index)?;
        out.push(next);
    }
    Ok(out)
}

/// The real line with `d(x, y) = |x - y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RealLine;

impl MetricSpace for RealLine {
    type Point = f64;

    fn dist(&self, x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    fn name(&self) -> &str {
        "real-line"
    }

    // On the line the diameter of a set is max - min, so a suffix max/min
    // pass gives every tail diameter in linear time. Rounding is monotone, so
    // the result matches a pairwise scan bit for bit.
    fn tail_diameters(&self, points: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; points.len()];
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for n in (0..points.len()).rev() {
            hi = hi.max(points[n]);
            lo = lo.min(points[n]);
            out[n] = hi - lo;
        }
        if out.iter().any(|b| b.is_nan()) {
            return Err(Error::MetricViolation { value: f64::NAN });
        }
        Ok(out)
    }
}

/// `R^D` with the Euclidean norm.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean<const D: usize>;

impl<const D: usize> MetricSpace for Euclidean<D> {
    type Point = [f64; D];

    fn dist(&self, x: &[f64; D], y: &[f64; D]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    fn name(&self) -> &str {
        "euclidean"
    }
}

/// The discrete metric on integers: 0 for equal points, 1 otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct Discrete;

impl MetricSpace for Discrete {
    type Point = i64;

    fn dist(&self, x: &i64, y: &i64) -> f64 {
        if x == y {
            0.0
        } else {
            1.0
        }
    }

    fn name(&self) -> &str {
        "discrete"
    }
}

type DistanceFn<P> = Arc<dyn Fn(&P, &P) -> f64 + Send + Sync>;

/// A user-registered metric backed by a distance closure.
///
/// Nothing is assumed about the closure; use [`check_metric_axioms`] on a
/// sample before trusting it.
pub struct FnMetric<P> {
    name: String,
    dist: DistanceFn<P>,
}

impl<P> FnMetric<P> {
    pub fn new(name: impl Into<String>, dist: impl Fn(&P, &P) -> f64 + Send + Sync + 'static) -> Self {
        FnMetric {
            name: name.into(),
            dist: Arc::new(dist),
        }
    }
}

impl<P> Clone for FnMetric<P> {
    fn clone(&self) -> Self {
        FnMetric {
            name: self.name.clone(),
            dist: Arc::clone(&self.dist),
        }
    }
}

impl<P: Point> MetricSpace for FnMetric<P> {
    type Point = P;

    fn dist(&self, x: &P, y: &P) -> f64 {
        (self.dist)(x, y)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// The first metric axiom violated on a sample, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum AxiomViolation {
    NonzeroSelfDistance {
        index: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },
}

/// Checks identity, symmetry and the triangle inequality on every pair and
/// triple of `points`. Identity and symmetry are exact; the triangle
/// inequality allows `rel_slack * d(x, z)` for rounding (pass 0 for points
/// whose distances are exactly representable, such as dyadic rationals on the
/// line).
pub fn check_metric_axioms<S: MetricSpace + ?Sized>(
    space: &S,
    points: &[S::Point],
    rel_slack: f64,
) -> Result<Option<AxiomViolation>> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = distance(space, &points[i], &points[j])?;
        }
    }
    for i in 0..n {
        if d[i * n + i] != 0.0 {
            return Ok(Some(AxiomViolation::NonzeroSelfDistance {
                index: i,
                value: d[i * n + i],
            }));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d[i * n + j] != d[j * n + i] {
                return Ok(Some(AxiomViolation::Asymmetric {
                    i,
                    j,
                    forward: d[i * n + j],
                    backward: d[j * n + i],
                }));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let detour = d[i * n + j] + d[j * n + k];
                if d[i * n + k] > detour + rel_slack * d[i * n + k] {
                    return Ok(Some(AxiomViolation::Triangle {
                        i,
                        j,
                        k,
                        direct: d[i * n + k],
                        detour,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// A subset of a carrier set that the certifiers can sample from.
pub trait Region<P>: Send + Sync {
    fn is_bounded(&self) -> bool;

    fn contains(&self, p: &P) -> bool;

    /// Deterministic extreme points (interval endpoints, box corners). The
    /// sup over `B x B` of the shipped families is attained on these.
    fn extreme_points(&self) -> Vec<P>;

    /// `count` points drawn uniformly. Only called on bounded regions.
    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<P>;

    fn describe(&self) -> String;
}

/// Seeded sampler for a bounded region.
pub fn sample_region<P, R: Region<P> + ?Sized>(region: &R, count: usize, seed: u64) -> Result<Vec<P>> {
    if !region.is_bounded() {
        return Err(Error::usage(format!(
            "cannot sample unbounded region {}",
            region.describe()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(region.draw(&mut rng, count))
}

/// Closed interval `[lo, hi]`; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY {
            return Err(Error::usage(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn half_line(lo: f64) -> Self {
        Interval { lo, hi: f64::INFINITY }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// The bounded piece `[lo, min(hi, lo + width)]`.
    pub fn truncate(&self, width: f64) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.hi.min(self.lo + width),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo.is_infinite() { '(' } else { '[' };
        let close = if self.hi.is_infinite() { ')' } else { ']' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

impl Region<f64> for Interval {
    fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn contains(&self, p: &f64) -> bool {
        *p >= self.lo && *p <= self.hi
    }

    fn extreme_points(&self) -> Vec<f64> {
        if self.lo == self.hi {
            vec![self.lo]
        } else {
            vec![self.lo, self.hi]
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| self.lo + rng.random::<f64>() * (self.hi - self.lo))
            .collect()
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

/// Axis-aligned box in `R^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxRegion<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> BoxRegion<D> {
    pub fn cube(lo: f64, hi: f64) -> Self {
        BoxRegion {
            lo: [lo; D],
            hi: [hi; D],
        }
    }
}

impl<const D: usize> Region<[f64; D]> for BoxRegion<D> {
    fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    fn contains(&self, p: &[f64; D]) -> bool {
        (0..D).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    fn extreme_points(&self) -> Vec<[f64; D]> {
        (0..1usize << D)
            .map(|mask| {
                let mut c = self.lo;
                for (k, v) in c.iter_mut().enumerate() {
                    if mask & (1 << k) != 0 {
                        *v = self.hi[k];
                    }
                }
                c
            })
            .collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<[f64; D]> {
        (0..count)
            .map(|_| {
                let mut p = self.lo;
                for (k, v) in p.iter_mut().enumerate() {
                    *v += rng.random::<f64>() * (self.hi[k] - self.lo[k]);
                }
                p
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("box {:?} x {:?}", self.lo, self.hi)
    }
}

/// Integers `lo..=hi`, for the discrete metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl Region<i64> for IntRange {
    fn is_bounded(&self) -> bool {
        true
    }

    fn contains(&self, p: &i64) -> bool {
        (self.lo..=self.hi).contains(p)
    }

    fn extreme_points(&self) -> Vec<i64> {
        vec![self.lo, self.hi]
    }

    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<i64> {
        (0..count).map(|_| rng.random_range(self.lo..=self.hi)).collect()
    }

    fn describe(&self) -> String {
        format!("{{{}..={}}}", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_line_distances() {
        assert_eq!(distance(&RealLine, &3.0, &0.0).unwrap(), 3.0);
        assert_eq!(distance(&RealLine, &-2.5, &-2.5).unwrap(), 0.0);
        assert_eq!(distance(&RealLine, &(1.0 / 3.0), &0.0).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn negative_distances_are_clamped_or_rejected() {
        let tiny = FnMetric::new("tiny", |_: &f64, _: &f64| -1e-16);
        assert_eq!(distance(&tiny, &0.0, &1.0).unwrap(), 0.0);
        let bad = FnMetric::new("bad", |_: &f64, _: &f64| -1e-3);
        assert!(matches!(distance(&bad, &0.0, &1.0), Err(Error::MetricViolation { .. })));
        let nan = FnMetric::new("nan", |_: &f64, _: &f64| f64::NAN);
        assert!(distance(&nan, &0.0, &1.0).is_err());
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(finite_diameter(&RealLine, &[0.0, 1.0, 5.0]).unwrap(), 5.0);
        assert_eq!(finite_diameter(&RealLine, &[7.0]).unwrap(), 0.0);
        assert!(matches!(finite_diameter(&RealLine, &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn diameter_of_geometric_points_matches_pair_enumeration() {
        let pts: Vec<f64> = (0..=10).map(|n| 3f64.powi(-n)).collect();
        let mut brute = 0.0f64;
        let mut pairs = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                brute = brute.max((pts[i] - pts[j]).abs());
                pairs += 1;
            }
        }
        assert_eq!(pairs, 55);
        let d = finite_diameter(&RealLine, &pts).unwrap();
        assert_eq!(d, brute);
        assert!((d - (1.0 - 3f64.powi(-10))).abs() < 1e-15);
    }

    #[test]
    fn orbit_examples() {
        let third = SelfMap::new("x/3", |x: &f64| x / 3.0);
        let o = orbit(&third, &1.0, 3).unwrap();
        assert_eq!(o, vec![1.0, 1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0]);
        assert_eq!(orbit(&third, &4.0, 0).unwrap(), vec![4.0]);
        let shift = SelfMap::new("x+1", |x: &f64| x + 1.0);
        assert_eq!(orbit(&shift, &0.0, 4).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn orbit_reports_failing_index() {
        let map = SelfMap::fallible("sqrt", |x: &f64| {
            if *x < 0.0 {
                Err("negative input".to_string())
            } else {
                Ok(x.sqrt() - 1.0)
            }
        });
        // 4 -> 1 -> 0 -> -1 -> fails computing the 4th iterate
        match orbit(&map, &4.0, 6) {
            Err(Error::MapFailed { index, .. }) => assert_eq!(index, 4),
            other => panic!("expected MapFailed, got {other:?}"),
        }
    }

    #[test]
    fn builtin_metrics_satisfy_axioms() {
        let pts = sample_region(&Interval::new(-5.0, 5.0).unwrap(), 30, 1).unwrap();
        assert_eq!(check_metric_axioms(&RealLine, &pts, 4.0 * f64::EPSILON).unwrap(), None);
        // dyadic points: every sum and difference is exact
        let dyadic: Vec<f64> = pts.iter().map(|x| (x * 1024.0).round() / 1024.0).collect();
        assert_eq!(check_metric_axioms(&RealLine, &dyadic, 0.0).unwrap(), None);
        let ints = sample_region(&IntRange { lo: 0, hi: 4 }, 12, 2).unwrap();
        assert_eq!(check_metric_axioms(&Discrete, &ints, 0.0).unwrap(), None);
        let cube = sample_region(&BoxRegion::<3>::cube(-1.0, 1.0), 20, 3).unwrap();
        assert_eq!(
            check_metric_axioms(&Euclidean::<3>, &cube, 4.0 * f64::EPSILON).unwrap(),
            None
        );
        let sq = FnMetric::new("squared", |x: &f64, y: &f64| (x - y) * (x - y));
        let v = check_metric_axioms(&sq, &[0.0, 1.0, 2.0], 0.0).unwrap();
        assert!(matches!(v, Some(AxiomViolation::Triangle { .. })));
    }

    #[test]
    fn sampling_is_seeded() {
        let b = BoxRegion::<2>::cube(0.0, 1.0);
        assert_eq!(sample_region(&b, 8, 42).unwrap(), sample_region(&b, 8, 42).unwrap());
        assert_ne!(sample_region(&b, 8, 42).unwrap(), sample_region(&b, 8, 43).unwrap());
        assert_eq!(b.extreme_points().len(), 4);
        assert!(sample_region(&Interval::half_line(0.0), 3, 0).is_err());
    }

    #[test]
    fn real_line_tail_diameters_match_generic_scan() {
        let pts = vec![0.3, -1.0, 2.5, 2.4, 2.45, 2.45];
        let fast = RealLine.tail_diameters(&pts).unwrap();
        let generic = FnMetric::new("abs", |x: &f64, y: &f64| (x - y).abs())
            .tail_diameters(&pts)
            .unwrap();
        assert_eq!(fast, generic);
    }
}
