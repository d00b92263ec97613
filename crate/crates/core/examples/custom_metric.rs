// Spaces beyond the real line: a rotation-and-shrink map on the plane under
// the Euclidean metric, and the same map under a user-supplied max-norm
// metric registered as a closure.

use fixpoint_lab::metric::{check_metric_axioms, sample_region, BoxRegion};
use fixpoint_lab::solver::iterate_to_fixed_point;
use fixpoint_lab::{Euclidean, FnMetric, MetricSpace, Result, SelfMap, SolveOptions};

fn spiral() -> SelfMap<[f64; 2]> {
    // 0.6 * rotation by 1 radian, about the point (1, 2)
    let (s, c) = 1f64.sin_cos();
    SelfMap::new("spiral", move |p: &[f64; 2]| {
        let (dx, dy) = (p[0] - 1.0, p[1] - 2.0);
        [1.0 + 0.6 * (c * dx - s * dy), 2.0 + 0.6 * (s * dx + c * dy)]
    })
}

fn solve_in<S: MetricSpace<Point = [f64; 2]>>(space: &S) -> Result<[f64; 2]> {
    let (report, trace) = iterate_to_fixed_point(space, &spiral(), &[10.0, -5.0], &SolveOptions::with_tol(1e-10))?;
    println!(
        "{:<10} {:?} after {} steps, limit {:?}, b_5 = {:.3e}",
        space.name(),
        report.verdict,
        report.iterations,
        report.limit,
        trace.tail_diams[5]
    );
    assert!(report.converged());
    Ok(report.limit.unwrap())
}

fn run_example() -> Result<()> {
    let max_norm = FnMetric::new("max-norm", |a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
    });
    let pts = sample_region(&BoxRegion::<2>::cube(-3.0, 3.0), 25, 5)?;
    let axioms = check_metric_axioms(&max_norm, &pts, 4.0 * f64::EPSILON)?;
    println!("max-norm axioms on 25 points: {axioms:?}");

    let a = solve_in(&Euclidean::<2>)?;
    let b = solve_in(&max_norm)?;
    assert!(axioms.is_none());
    assert!((a[0] - 1.0).abs() < 1e-8 && (b[1] - 2.0).abs() < 1e-8);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
