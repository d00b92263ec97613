//! Acceptance suite: one test per criterion, each printing a `[PASS]` or
//! `[FAIL]` line. Run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see the
//! lines in order.
//!
//! Reference values come from closed forms or from brute-force oracles
//! written here, independent of the library's own algorithms.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};

use fixpoint_lab::contraction::{certify, check_global_uniform, sup_gap, CertifyConfig};
use fixpoint_lab::gate::{
    check_boyd_wong, check_envelope_properties, check_limsup_inequality, default_deltas, default_grid, envelope_value,
};
use fixpoint_lab::metric::sample_region;
use fixpoint_lab::solver::{check_contraction_inequality, iterate_to_fixed_point, tail_diameters, uniqueness_probe};
use fixpoint_lab::{
    max_term, zoo, Discrete, Envelope, Euclidean, GateFunction, Interval, MetricSpace, PairSample, RealLine, SelfMap,
    SolveOptions, SolveVerdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Runs `body`, prints one pass/fail line and re-raises any failure.
fn criterion(n: u32, title: &str, body: impl FnOnce() -> String) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(detail) => println!("[PASS] criterion {n:>2}: {title} ({detail})"),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            println!("[FAIL] criterion {n:>2}: {title} ({msg})");
            resume_unwind(e)
        }
    }
}

#[test]
fn criterion_01_example1_convergence() {
    criterion(1, "example1 converges to 0 and x_n = 3^-n", || {
        let entry = zoo::example1();
        let (report, trace) =
            iterate_to_fixed_point(&RealLine, &entry.self_map, &1.0, &SolveOptions::with_tol(1e-9)).unwrap();
        assert_eq!(report.verdict, SolveVerdict::Converged);
        let z = report.limit.unwrap();
        assert!(z.abs() <= 1e-9, "limit {z}");
        assert!(trace.points.len() > 30);
        let mut worst = 0.0f64;
        for n in 0..=30i32 {
            // 3^n is exact in binary for n <= 33
            let exact = 1.0 / 3f64.powi(n);
            let rel = (trace.points[n as usize] - exact).abs() / exact;
            assert!(rel <= 1e-12, "n={n}: x_n={} vs {exact}", trace.points[n as usize]);
            worst = worst.max(rel);
        }
        format!("limit {z:.3e}, worst relative deviation {worst:.1e}")
    });
}

#[test]
fn criterion_02_local_uniform_gap() {
    criterion(2, "example1 sup gap on [0, R] equals R/(n+1)", || {
        let family = zoo::example1().phi_family.unwrap();
        let mut worst = 0.0f64;
        for r in [1.0, 10.0] {
            let sample = PairSample::from_region(&Interval::new(0.0, r).unwrap(), 4096, 17).unwrap();
            for n in [1u32, 5, 10, 100] {
                let gap = sup_gap(&family, &sample, n);
                let exact = r / (n as f64 + 1.0);
                assert!((gap - exact).abs() <= 1e-10, "R={r} n={n}: {gap} vs {exact}");
                worst = worst.max((gap - exact).abs());
            }
        }
        format!("8 cases, worst error {worst:.1e}")
    });
}

#[test]
fn criterion_03_global_non_uniformity() {
    criterion(3, "example1 gap at n=10 grows >= 9.9x per decade of radius", || {
        let family = zoo::example1().phi_family.unwrap();
        let (cert, gaps) = check_global_uniform(
            &family,
            |r| Interval { lo: 0.0, hi: r },
            &[10.0, 100.0, 1000.0],
            10,
            4096,
            23,
        )
        .unwrap();
        let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1].1 / w[0].1).collect();
        for r in &ratios {
            assert!(*r >= 9.9, "ratio {r}");
        }
        assert!(cert.is_refuted(), "{cert:?}");
        format!("growth ratios {:.4}, {:.4}; verdict refuted", ratios[0], ratios[1])
    });
}

/// Dense-grid supremum oracle: prefix maxima of `psi(k h)`, then the query
/// itself.
struct DenseSup {
    h: f64,
    prefix: Vec<f64>,
}

impl DenseSup {
    fn new(psi: &GateFunction, h: f64, t_max: f64) -> Self {
        let count = (t_max / h).ceil() as usize + 2;
        let mut prefix = Vec::with_capacity(count);
        let mut m = f64::NEG_INFINITY;
        for k in 0..count {
            m = m.max(psi.eval(k as f64 * h));
            prefix.push(m);
        }
        DenseSup { h, prefix }
    }

    fn at(&self, psi: &GateFunction, t: f64) -> f64 {
        let mut k = (t / self.h).floor() as usize;
        // guard against floor landing one cell past t
        while k > 0 && k as f64 * self.h > t {
            k -= 1;
        }
        self.prefix[k].max(psi.eval(t))
    }
}

#[test]
fn criterion_04_envelope_oracle() {
    criterion(
        4,
        "envelope matches dense-grid sup; envelope checks pass for valid gates",
        || {
            let h = 1e-4;
            let t_max = 4.0;
            let gates = [
                ("linear", GateFunction::linear(1.0 / 3.0), true),
                (
                    "piecewise",
                    GateFunction::parse("piecewise:0.9*t;@1:0.5*t").unwrap(),
                    false,
                ),
                (
                    "tabulated",
                    GateFunction::parse("table:0=0,1=0.5,2=1.5,3.5=3").unwrap(),
                    true,
                ),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let queries: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * t_max).collect();
            let mut worst = 0.0f64;
            for (name, psi, compliant) in &gates {
                let oracle = DenseSup::new(psi, h, t_max);
                for &t in &queries {
                    let got = envelope_value(psi, t, h).unwrap();
                    let want = oracle.at(psi, t);
                    assert!((got - want).abs() <= 1e-6, "{name} at t={t}: {got} vs {want}");
                    worst = worst.max((got - want).abs());
                }
                let grid = default_grid(100.0, 512);
                let deltas = default_deltas();
                assert_eq!(
                    check_boyd_wong(psi, &grid, &deltas).unwrap().passed(),
                    *compliant,
                    "{name}"
                );
                if *compliant {
                    let env = Envelope::new(psi.clone(), h).unwrap();
                    let props = check_envelope_properties(&env, &grid, &deltas).unwrap();
                    assert!(props.passed() && !props.conditional, "{name}: {props:?}");
                }
            }
            // the non-monotone gate against its closed-form envelope, within one cell
            let psi = &gates[1].1;
            for &t in &queries {
                let exact = if t < 1.0 { 0.9 * t } else { 0.9f64.max(0.5 * t) };
                assert!((envelope_value(psi, t, h).unwrap() - exact).abs() <= h, "t={t}");
            }
            format!("3 gates x 1000 queries, worst error {worst:.1e}")
        },
    );
}

#[test]
fn criterion_05_contraction_inequality() {
    criterion(5, "banach(1/2) orbit satisfies b_(n+1) <= b_n / 2", || {
        let entry = zoo::banach(0.5).unwrap();
        let opts = SolveOptions {
            max_iter: 41,
            window: 64,
            ..SolveOptions::default()
        };
        let (_, trace) = iterate_to_fixed_point(&RealLine, &entry.self_map, &8.0, &opts).unwrap();
        assert_eq!(trace.points.len(), 42);
        let g = Envelope::new(GateFunction::linear(0.5), 1e-4).unwrap();
        let cert = check_contraction_inequality(&trace.tail_diams, &g, 1, 0.0).unwrap();
        assert!(cert.passed(), "{cert:?}");
        // independent recomputation straight from the points
        let b = brute_tail(&RealLine, &trace.points);
        for n in 0..=40 {
            assert!(b[n + 1] <= b[n] / 2.0 + 1e-12, "n={n}");
        }
        format!("{} inequalities checked", cert.measured("checked").unwrap())
    });
}

#[test]
fn criterion_06_limsup_property() {
    criterion(6, "limsup g(a_n) <= g(limsup a_n) on 20 sequences x 3 gates", || {
        let gs = [
            Envelope::new(GateFunction::linear(0.5), 1e-4).unwrap(),
            Envelope::new(GateFunction::new("t/(1+t)", |t| t / (1.0 + t)), 1e-4).unwrap(),
            Envelope::new(GateFunction::parse("table:0=0,1=0.5,2=1.5,3.5=3").unwrap(), 1e-4).unwrap(),
        ];
        let mut checked = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
            let scale = rng.random::<f64>() * 5.0;
            let seq: Vec<f64> = (0..400)
                .map(|k| match seed % 4 {
                    0 => rng.random::<f64>() * scale,
                    1 => scale * (1.0 + (-1f64).powi(k) / (k as f64 + 1.0)),
                    2 => scale / (1.0 + k as f64) + rng.random::<f64>() * 0.1,
                    _ => scale * (k as f64 * 0.37).sin().abs(),
                })
                .collect();
            for g in &gs {
                let cert = check_limsup_inequality(g, &seq, 200).unwrap();
                assert!(cert.passed(), "seed {seed}, {}: {cert:?}", g.base().label());
                // oracle: g is nondecreasing, so every tail value of g sits
                // below g at the tail maximum
                let a = seq[200..].iter().copied().fold(0.0, f64::max);
                let b = seq[200..].iter().map(|&s| g.value(s)).fold(0.0, f64::max);
                assert!(b <= g.value(a) + 1e-9);
                checked += 1;
            }
        }
        format!("{checked} pairs")
    });
}

#[test]
fn criterion_07_uniqueness() {
    criterion(7, "example1 from 10 starts in [0, 100] reaches one limit", || {
        let entry = zoo::example1();
        let starts = sample_region(&Interval::new(0.0, 100.0).unwrap(), 10, 7).unwrap();
        let opts = SolveOptions::with_tol(1e-9);
        let cert = uniqueness_probe(&RealLine, &entry.self_map, &starts, &opts).unwrap();
        assert!(cert.passed(), "{cert:?}");
        let limits: Vec<f64> = starts
            .iter()
            .map(|x0| {
                let (r, _) = iterate_to_fixed_point(&RealLine, &entry.self_map, x0, &opts).unwrap();
                r.limit.unwrap()
            })
            .collect();
        let mut spread = 0.0f64;
        for a in &limits {
            for b in &limits {
                spread = spread.max((a - b).abs());
            }
        }
        assert!(spread <= 1e-8, "spread {spread}");
        format!("pairwise spread {spread:.1e}")
    });
}

#[test]
fn criterion_08_hypothesis_necessity() {
    criterion(8, "translation passes all conditions yet diverges", || {
        let entry = zoo::translation_nonexample();
        let region = Interval::new(0.0, 10.0).unwrap();
        let (cert, gaps) = certify(
            &RealLine,
            &entry.self_map,
            entry.phi_family.as_ref().unwrap(),
            entry.gate.as_ref().unwrap(),
            &region,
            &CertifyConfig::default(),
        )
        .unwrap();
        for check in ["domination", "local-uniform", "gate-bound"] {
            assert!(cert.find(check).unwrap().passed(), "{check}: {cert:?}");
        }
        let margin = cert.find("gate-bound").unwrap().measured("min-margin").unwrap();
        assert!(margin >= 0.5 - 1e-9, "gate-bound margin {margin}");
        assert!(gaps.iter().all(|r| r.gap == 0.0));

        let opts = SolveOptions {
            escape_radius: Some(1e6),
            max_iter: 2_000_000,
            ..SolveOptions::default()
        };
        let (report, trace) = iterate_to_fixed_point(&RealLine, &entry.self_map, &0.0, &opts).unwrap();
        assert_eq!(report.verdict, SolveVerdict::DivergedUnbounded);
        assert_eq!(trace.escape_index, Some(1_000_000));
        assert!(!trace.bounded);
        format!("gate margin {margin:.6}, escaped at iterate 1e6")
    });
}

#[test]
fn criterion_09_max_term_identities() {
    criterion(9, "max_term(p,p) = 0, symmetric, >= d on 10000 pairs per entry", || {
        let mut total = 0;
        for entry in zoo::catalog() {
            if let Some(p) = entry.expected_fixed_point {
                assert_eq!(entry.self_map.apply(&p).unwrap(), p);
                assert_eq!(max_term(&RealLine, &entry.self_map, &p, &p).unwrap().value, 0.0);
            }
            let region = entry.bounded_region(10.0);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..10_000 {
                let x = region.lo + rng.random::<f64>() * region.width();
                let y = region.lo + rng.random::<f64>() * region.width();
                let m = max_term(&RealLine, &entry.self_map, &x, &y).unwrap().value;
                let back = max_term(&RealLine, &entry.self_map, &y, &x).unwrap().value;
                assert_eq!(m, back, "{} at ({x}, {y})", entry.class_tag);
                assert!(m >= (x - y).abs());
                total += 1;
            }
        }
        format!("{total} pairs over {} entries", zoo::catalog().len())
    });
}

fn brute_tail<S: MetricSpace>(space: &S, points: &[S::Point]) -> Vec<f64> {
    (0..points.len())
        .map(|n| {
            let mut b = 0.0f64;
            for i in n..points.len() {
                for j in n..points.len() {
                    b = b.max(space.dist(&points[i], &points[j]));
                }
            }
            b
        })
        .collect()
}

fn assert_tails_match<S: MetricSpace>(space: &S, points: &[S::Point], reported: &[f64]) -> usize {
    assert!(points.len() <= 200);
    let oracle = brute_tail(space, points);
    assert_eq!(reported, &oracle[..], "{}", space.name());
    for end in [0, points.len() / 3, points.len() - 1] {
        assert_eq!(
            tail_diameters(space, points, end).unwrap(),
            brute_tail(space, &points[..=end])
        );
    }
    1
}

#[test]
fn criterion_10_tail_diameters() {
    criterion(10, "tail diameters equal the all-pairs oracle on every trace", || {
        let mut traces = 0;
        let capped = |max_iter| SolveOptions {
            max_iter,
            ..SolveOptions::default()
        };
        for entry in zoo::catalog() {
            let region = entry.bounded_region(10.0);
            for (k, x0) in [region.lo, region.hi, 0.5 * (region.lo + region.hi)]
                .into_iter()
                .enumerate()
            {
                let (_, trace) = iterate_to_fixed_point(&RealLine, &entry.self_map, &x0, &capped(60 + 60 * k)).unwrap();
                traces += assert_tails_match(&RealLine, &trace.points, &trace.tail_diams);
            }
        }
        let (s, c) = 0.7f64.sin_cos();
        let spiral = SelfMap::new("spiral", move |p: &[f64; 2]| {
            [0.8 * (c * p[0] - s * p[1]), 0.8 * (s * p[0] + c * p[1])]
        });
        let (_, trace) = iterate_to_fixed_point(&Euclidean::<2>, &spiral, &[3.0, -1.0], &capped(150)).unwrap();
        traces += assert_tails_match(&Euclidean::<2>, &trace.points, &trace.tail_diams);
        let halve = SelfMap::new("halve", |x: &i64| x / 2);
        let (_, trace) = iterate_to_fixed_point(&Discrete, &halve, &1_000_000, &capped(199)).unwrap();
        traces += assert_tails_match(&Discrete, &trace.points, &trace.tail_diams);
        // a wandering orbit with no order to exploit
        let wander = SelfMap::new("wander", |x: &f64| (3.7 * x * (1.0 - x)).clamp(0.0, 1.0));
        let (_, trace) = iterate_to_fixed_point(&RealLine, &wander, &0.3, &capped(199)).unwrap();
        traces += assert_tails_match(&RealLine, &trace.points, &trace.tail_diams);
        format!("{traces} traces")
    });
}
