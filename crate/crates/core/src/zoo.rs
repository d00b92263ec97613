//! Canonical maps for each contraction class, bundled with their expected
//! fixed point and, where one exists, a `(phi_n, phi, psi)` triple.
//!
//! Entries are plain data. Every check on them goes through the generic
//! routines in [`contraction`](crate::contraction) and [`solver`](crate::solver);
//! the class-specific single-step conditions live here as free functions over
//! any metric space.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::certificate::{Certificate, Witness, WorstCase};
use crate::contraction::{max_term, PairSample, PhiFamily, SelfMap, PAIR_SLACK};
use crate::error::{Error, Result};
use crate::gate::{check_below_identity, check_nondecreasing, default_grid, GateFunction, MONOTONE_SLACK};
use crate::metric::{distance, Interval, MetricSpace, RealLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassTag {
    Banach,
    Rakotch,
    BoydWong,
    Ciric,
    KirkAsymptotic,
    Example1,
    NonexampleTranslation,
}

impl ClassTag {
    pub const ALL: [ClassTag; 7] = [
        ClassTag::Banach,
        ClassTag::Rakotch,
        ClassTag::BoydWong,
        ClassTag::Ciric,
        ClassTag::KirkAsymptotic,
        ClassTag::Example1,
        ClassTag::NonexampleTranslation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::Banach => "banach",
            ClassTag::Rakotch => "rakotch",
            ClassTag::BoydWong => "boyd-wong",
            ClassTag::Ciric => "ciric",
            ClassTag::KirkAsymptotic => "kirk-asymptotic",
            ClassTag::Example1 => "example1",
            ClassTag::NonexampleTranslation => "nonexample-translation",
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::usage(format!("unknown zoo tag `{s}`")))
    }
}

type IndexedScalar = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;

/// The class-defining single-step (or iterated) inequality of an entry.
#[derive(Clone)]
pub enum ClassCondition {
    /// `d(Tx, Ty) <= alpha d(x, y)`
    Banach { alpha: f64 },
    /// `d(Tx, Ty) <= alpha(d(x, y)) d(x, y)`
    Rakotch { alpha_fn: GateFunction },
    /// `d(Tx, Ty) <= psi(d(x, y))`
    BoydWong { psi: GateFunction },
    /// `d(Tx, Ty) <= alpha max{five distances}`
    Ciric { alpha: f64 },
    /// `d(T^n x, T^n y) <= psi_n(d(x, y))` with `psi_n -> psi` uniformly on `[0, inf)`
    Kirk { psi_n: IndexedScalar, psi: GateFunction },
}

impl fmt::Debug for ClassCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassCondition::Banach { alpha } => write!(f, "Banach({alpha})"),
            ClassCondition::Rakotch { alpha_fn } => write!(f, "Rakotch({})", alpha_fn.label()),
            ClassCondition::BoydWong { psi } => write!(f, "BoydWong({})", psi.label()),
            ClassCondition::Ciric { alpha } => write!(f, "Ciric({alpha})"),
            ClassCondition::Kirk { psi, .. } => write!(f, "Kirk(-> {})", psi.label()),
        }
    }
}

/// One zoo mapping on the real line.
#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub class_tag: ClassTag,
    pub self_map: SelfMap<f64>,
    pub domain: Interval,
    pub phi_family: Option<PhiFamily<f64>>,
    pub gate: Option<GateFunction>,
    pub expected_fixed_point: Option<f64>,
    pub condition: Option<ClassCondition>,
    pub notes: String,
}

/// Serializable summary for listings.
#[derive(Debug, Clone, Serialize)]
pub struct ZooSummary {
    pub tag: String,
    pub map: String,
    pub domain: String,
    pub phi_family: Option<String>,
    pub gate: Option<String>,
    pub expected_fixed_point: Option<f64>,
    pub condition: Option<String>,
    pub notes: String,
}

impl ZooEntry {
    pub fn summary(&self) -> ZooSummary {
        ZooSummary {
            tag: self.class_tag.to_string(),
            map: self.self_map.label().to_string(),
            domain: self.domain.to_string(),
            phi_family: self.phi_family.as_ref().map(|f| f.label().to_string()),
            gate: self.gate.as_ref().map(|g| g.label().to_string()),
            expected_fixed_point: self.expected_fixed_point,
            condition: self.condition.as_ref().map(|c| format!("{c:?}")),
            notes: self.notes.clone(),
        }
    }

    /// A bounded piece of the domain of width at most `width`, anchored at the
    /// lower end (or centred on 0 for the whole line).
    pub fn bounded_region(&self, width: f64) -> Interval {
        if self.domain.lo.is_finite() {
            self.domain.truncate(width)
        } else {
            let hi = self.domain.hi.min(width / 2.0);
            Interval { lo: hi - width, hi }
        }
    }

    /// Runs the entry's class condition on `sample`, if it has one.
    pub fn check_class_condition(&self, sample: &PairSample<f64>) -> Result<Option<Certificate>> {
        let map = &self.self_map;
        let cert = match &self.condition {
            None => return Ok(None),
            Some(ClassCondition::Banach { alpha }) => {
                check_boyd_wong_step(&RealLine, map, &GateFunction::linear(*alpha), sample)?
            }
            Some(ClassCondition::Rakotch { alpha_fn }) => check_rakotch_condition(&RealLine, map, alpha_fn, sample)?,
            Some(ClassCondition::BoydWong { psi }) => check_boyd_wong_step(&RealLine, map, psi, sample)?,
            Some(ClassCondition::Ciric { alpha }) => check_quasi_contraction(&RealLine, map, *alpha, sample)?,
            Some(ClassCondition::Kirk { psi_n, psi }) => {
                let psi_n = Arc::clone(psi_n);
                let fam = PhiFamily::new(
                    "kirk psi_n(d)",
                    move |n, x: &f64, y: &f64| psi_n(n, (x - y).abs()),
                    |_: &f64, _: &f64| 0.0,
                );
                let dom = crate::contraction::check_domination(&RealLine, map, &fam, sample, 30)?;
                let uni = self.check_kirk_uniform(&[1, 2, 4, 8, 16, 32])?;
                Certificate::all(
                    "kirk-asymptotic",
                    vec![dom, uni, check_below_identity(psi, &default_grid(100.0, 256))?],
                )
            }
        };
        Ok(Some(cert))
    }

    /// Kirk entries only: `sup_{t >= 0} |psi_n(t) - psi(t)|` measured on a probe
    /// grid reaching `1e6`, required to be nonincreasing in `n` and to end
    /// below `1e-3`.
    pub fn check_kirk_uniform(&self, n_schedule: &[u32]) -> Result<Certificate> {
        let Some(ClassCondition::Kirk { psi_n, psi }) = &self.condition else {
            return Err(Error::usage(format!("{} carries no Kirk family", self.class_tag)));
        };
        let mut probe = default_grid(1e6, 1024);
        probe.insert(0, 0.0);
        let sups: Vec<f64> = n_schedule
            .iter()
            .map(|&n| {
                probe
                    .iter()
                    .map(|&t| (psi_n(n, t) - psi.eval(t)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let monotone = sups.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        let last = sups.last().copied().unwrap_or(f64::NAN);
        let mut c = if monotone && last <= 1e-3 {
            Certificate::pass("kirk-uniform")
        } else {
            Certificate::refuted(
                "kirk-uniform",
                Witness::new(vec![], n_schedule.last().map(|n| *n as usize), last, 1e-3),
            )
        };
        for (n, s) in n_schedule.iter().zip(&sups) {
            c = c.measure(format!("sup-gap-n{n}"), *s);
        }
        Ok(c.with_note("uniform on [0, inf) probed up to t = 1e6"))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `T x = alpha x` on the real line, with `phi_n = alpha^n |x - y|`,
/// `phi = 0` and `psi(t) = alpha t`.
pub fn banach(alpha: f64) -> Result<ZooEntry> {
    check_alpha(alpha)?;
    Ok(ZooEntry {
        class_tag: ClassTag::Banach,
        self_map: SelfMap::new(format!("{alpha} * x"), move |x: &f64| alpha * x),
        domain: Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        },
        phi_family: Some(PhiFamily::new(
            format!("{alpha}^n |x - y|"),
            move |n, x: &f64, y: &f64| alpha.powi(n as i32) * (x - y).abs(),
            |_: &f64, _: &f64| 0.0,
        )),
        gate: Some(GateFunction::linear(alpha)),
        expected_fixed_point: Some(0.0),
        condition: Some(ClassCondition::Banach { alpha }),
        notes: "Banach contraction; d(T^n x, T^n y) = alpha^n d(x, y) exactly".into(),
    })
}

/// `T x = x / 3` on `[0, inf)` with `phi_n = (1/3 + 1/(n+1)) |x - y|`,
/// `phi = |x - y| / 3` and `psi(t) = t / 3`.
pub fn example1() -> ZooEntry {
    ZooEntry {
        class_tag: ClassTag::Example1,
        self_map: SelfMap::new("x / 3", |x: &f64| x / 3.0),
        domain: Interval::half_line(0.0),
        phi_family: Some(PhiFamily::new(
            "(1/3 + 1/(n+1)) |x - y|",
            |n, x: &f64, y: &f64| (1.0 / 3.0 + 1.0 / (n as f64 + 1.0)) * (x - y).abs(),
            |x: &f64, y: &f64| (x - y).abs() / 3.0,
        )),
        gate: Some(GateFunction::new("t / 3", |t| t / 3.0)),
        expected_fixed_point: Some(0.0),
        condition: None,
        notes: "phi_n -> phi uniformly on every [0, R] (gap R/(n+1)) but not on the whole \
                half-line: the global sup gap is infinite for every n"
            .into(),
    }
}

/// `T x = alpha x` on `[0, 1]`, with the quasi-contraction condition
/// `d(Tx, Ty) <= alpha max{d(x,y), d(x,Tx), d(Ty,y), d(Tx,y), d(Ty,x)}`.
pub fn ciric(alpha: f64) -> Result<ZooEntry> {
    check_alpha(alpha)?;
    Ok(ZooEntry {
        class_tag: ClassTag::Ciric,
        self_map: SelfMap::new(format!("{alpha} * x"), move |x: &f64| alpha * x),
        domain: Interval { lo: 0.0, hi: 1.0 },
        phi_family: Some(PhiFamily::new(
            format!("{alpha}^n |x - y|"),
            move |n, x: &f64, y: &f64| alpha.powi(n as i32) * (x - y).abs(),
            |_: &f64, _: &f64| 0.0,
        )),
        gate: Some(GateFunction::linear(alpha)),
        expected_fixed_point: Some(0.0),
        condition: Some(ClassCondition::Ciric { alpha }),
        notes: "quasi-contraction on [0, 1]".into(),
    })
}

/// A Rakotch entry for a user map on `domain`. `alpha_fn` must be
/// nonincreasing (weakly: a constant reduces to Banach) and below 1 on
/// `(0, width]`, checked on a grid.
pub fn rakotch(alpha_fn: GateFunction, map: SelfMap<f64>, domain: Interval) -> Result<ZooEntry> {
    let t_max = if domain.width().is_finite() && domain.width() > 0.0 {
        domain.width()
    } else {
        100.0
    };
    let grid = default_grid(t_max, 512);
    let neg = GateFunction::new("-alpha", {
        let a = alpha_fn.clone();
        move |t| -a.eval(t)
    });
    let mono = check_nondecreasing(&neg, &grid)?;
    if mono.is_refuted() {
        let w = mono.witness.expect("refutations carry a witness");
        return Err(Error::usage(format!(
            "rakotch alpha `{}` increases between t = {} and t = {}",
            alpha_fn.label(),
            w.points[0][0],
            w.points[1][0]
        )));
    }
    if let Some(&t) = grid.iter().find(|&&t| !(alpha_fn.eval(t) < 1.0)) {
        return Err(Error::usage(format!(
            "rakotch alpha `{}` reaches {} >= 1 at t = {t}",
            alpha_fn.label(),
            alpha_fn.eval(t)
        )));
    }
    Ok(ZooEntry {
        class_tag: ClassTag::Rakotch,
        self_map: map,
        domain,
        phi_family: None,
        gate: None,
        expected_fixed_point: None,
        condition: Some(ClassCondition::Rakotch { alpha_fn }),
        notes: "Rakotch contraction; 'decreasing' alpha accepted in the weak sense".into(),
    })
}

/// Iterates of `x / (1 + x)` satisfy `d(T^n x, T^n y) <= d / (1 + n d)`.
fn harmonic_family() -> PhiFamily<f64> {
    PhiFamily::new(
        "|x - y| / (1 + n |x - y|)",
        |n, x: &f64, y: &f64| {
            let d = (x - y).abs();
            d / (1.0 + n as f64 * d)
        },
        |_: &f64, _: &f64| 0.0,
    )
}

fn harmonic_map() -> SelfMap<f64> {
    SelfMap::new("x / (1 + x)", |x: &f64| x / (1.0 + x))
}

/// The shipped Rakotch instance: `x / (1 + x)` on `[0, 10]` with
/// `alpha(t) = 1 / (1 + t)`.
pub fn rakotch_default() -> ZooEntry {
    let mut e = rakotch(
        GateFunction::new("1 / (1 + t)", |t| 1.0 / (1.0 + t)),
        harmonic_map(),
        Interval { lo: 0.0, hi: 10.0 },
    )
    .expect("1/(1+t) is a valid Rakotch function");
    e.phi_family = Some(harmonic_family());
    e.gate = Some(GateFunction::new("t / (1 + t)", |t| t / (1.0 + t)));
    e.expected_fixed_point = Some(0.0);
    e
}

/// `x / (1 + x)` on `[0, inf)` with the continuous gate `psi(t) = t / (1 + t)`.
pub fn boyd_wong() -> ZooEntry {
    let psi = GateFunction::new("t / (1 + t)", |t| t / (1.0 + t));
    ZooEntry {
        class_tag: ClassTag::BoydWong,
        self_map: harmonic_map(),
        domain: Interval::half_line(0.0),
        phi_family: Some(harmonic_family()),
        gate: Some(psi.clone()),
        expected_fixed_point: Some(0.0),
        condition: Some(ClassCondition::BoydWong { psi }),
        notes: "nonlinear contraction that is not Banach: psi(t)/t -> 1 as t -> 0".into(),
    }
}

/// `x / 3` on `[0, 1]` with `psi_n(t) = min(t, 1) / 3^n -> 0` uniformly on
/// `[0, inf)`. The domain is bounded because a uniformly convergent `psi_n`
/// cannot dominate an unbounded linear map with limit 0.
pub fn kirk_asymptotic() -> ZooEntry {
    let psi_n: IndexedScalar = Arc::new(|n, t: f64| t.min(1.0) / 3f64.powi(n as i32));
    let fam_psi = Arc::clone(&psi_n);
    ZooEntry {
        class_tag: ClassTag::KirkAsymptotic,
        self_map: SelfMap::new("x / 3", |x: &f64| x / 3.0),
        domain: Interval { lo: 0.0, hi: 1.0 },
        phi_family: Some(PhiFamily::new(
            "min(|x - y|, 1) / 3^n",
            move |n, x: &f64, y: &f64| fam_psi(n, (x - y).abs()),
            |_: &f64, _: &f64| 0.0,
        )),
        gate: Some(GateFunction::zero()),
        expected_fixed_point: Some(0.0),
        condition: Some(ClassCondition::Kirk {
            psi_n,
            psi: GateFunction::zero(),
        }),
        notes: "Kirk asymptotic contraction placed on [0, 1]: sup_t psi_n(t) = 3^-n".into(),
    }
}

/// `x + 1` on `[0, inf)`: satisfies all three contraction conditions
/// (`M(x, y) = |x - y| + 1`) yet has no fixed point and only unbounded orbits.
pub fn translation_nonexample() -> ZooEntry {
    ZooEntry {
        class_tag: ClassTag::NonexampleTranslation,
        self_map: SelfMap::new("x + 1", |x: &f64| x + 1.0),
        domain: Interval::half_line(0.0),
        phi_family: Some(PhiFamily::constant("|x - y|", |x: &f64, y: &f64| (x - y).abs())),
        gate: Some(GateFunction::parse("piecewise:t/2;@1:t-1/2").expect("static gate spec")),
        expected_fixed_point: None,
        condition: None,
        notes: "conditions hold but every orbit is unbounded: the bounded-orbit hypothesis \
                cannot be dropped"
            .into(),
    }
}

/// Looks up an entry by tag. `banach` and `ciric` accept `:alpha`.
pub fn by_tag(spec: &str) -> Result<ZooEntry> {
    let (tag, param) = match spec.split_once(':') {
        Some((t, p)) => (t, Some(p)),
        None => (spec, None),
    };
    let tag: ClassTag = tag.parse()?;
    let alpha = |default: f64| -> Result<f64> { param.map_or(Ok(default), crate::expr::Expr::constant) };
    if param.is_some() && !matches!(tag, ClassTag::Banach | ClassTag::Ciric) {
        return Err(Error::usage(format!("zoo tag `{tag}` takes no parameter")));
    }
    match tag {
        ClassTag::Banach => banach(alpha(0.5)?),
        ClassTag::Ciric => ciric(alpha(0.5)?),
        ClassTag::Rakotch => Ok(rakotch_default()),
        ClassTag::BoydWong => Ok(boyd_wong()),
        ClassTag::KirkAsymptotic => Ok(kirk_asymptotic()),
        ClassTag::Example1 => Ok(example1()),
        ClassTag::NonexampleTranslation => Ok(translation_nonexample()),
    }
}

/// One default instance per class tag.
pub fn catalog() -> Vec<ZooEntry> {
    ClassTag::ALL
        .into_iter()
        .map(|t| by_tag(t.as_str()).expect("default instances are valid"))
        .collect()
}

/// Boyd-Wong single step: `d(Tx, Ty) <= psi(d(x, y)) + 1e-12`.
pub fn check_boyd_wong_step<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    psi: &GateFunction,
    sample: &PairSample<S::Point>,
) -> Result<Certificate> {
    let images = images(map, sample)?;
    let mut worst = WorstCase::default();
    for (k, &(i, j)) in sample.pairs.iter().enumerate() {
        let d = distance(space, &sample.points[i], &sample.points[j])?;
        let lhs = distance(space, &images[i], &images[j])?;
        worst.offer(|| pair_witness(sample, k), lhs, psi.eval(d));
    }
    Ok(Certificate::from_worst("boyd-wong-step", worst.worst, PAIR_SLACK))
}

/// Rakotch single step: `d(Tx, Ty) <= alpha(d(x, y)) d(x, y) + 1e-12`.
pub fn check_rakotch_condition<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    alpha_fn: &GateFunction,
    sample: &PairSample<S::Point>,
) -> Result<Certificate> {
    let images = images(map, sample)?;
    let mut worst = WorstCase::default();
    for (k, &(i, j)) in sample.pairs.iter().enumerate() {
        let d = distance(space, &sample.points[i], &sample.points[j])?;
        let lhs = distance(space, &images[i], &images[j])?;
        worst.offer(|| pair_witness(sample, k), lhs, alpha_fn.eval(d) * d);
    }
    Ok(Certificate::from_worst("rakotch-step", worst.worst, PAIR_SLACK))
}

/// Quasi-contraction: `d(Tx, Ty) <= alpha M(x, y) + 1e-12`.
pub fn check_quasi_contraction<S: MetricSpace + ?Sized>(
    space: &S,
    map: &SelfMap<S::Point>,
    alpha: f64,
    sample: &PairSample<S::Point>,
) -> Result<Certificate> {
    let images = images(map, sample)?;
    let mut worst = WorstCase::default();
    for (k, &(i, j)) in sample.pairs.iter().enumerate() {
        let m = max_term(space, map, &sample.points[i], &sample.points[j])?;
        let lhs = distance(space, &images[i], &images[j])?;
        worst.offer(|| pair_witness(sample, k), lhs, alpha * m.value);
    }
    Ok(Certificate::from_worst("quasi-contraction", worst.worst, PAIR_SLACK))
}

fn images<P: crate::metric::Point>(map: &SelfMap<P>, sample: &PairSample<P>) -> Result<Vec<P>> {
    sample.points.iter().map(|p| map.apply(p)).collect()
}

fn pair_witness<P: crate::metric::Point>(sample: &PairSample<P>, k: usize) -> Witness {
    let (i, j) = sample.pairs[k];
    Witness::new(
        vec![sample.points[i].coords(), sample.points[j].coords()],
        None,
        0.0,
        0.0,
    )
}
