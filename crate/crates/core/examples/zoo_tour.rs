// Every built-in map: its class condition on a bounded piece of the domain,
// a solve from the far end, and a five-start uniqueness probe.
//
// The x / (1 + x) maps converge like 1/n, so the Cauchy window fires long
// before the iterate is within tol of 0; the last column shows the real
// error.

use fixpoint_lab::metric::sample_region;
use fixpoint_lab::solver::{iterate_to_fixed_point, uniqueness_probe};
use fixpoint_lab::{zoo, PairSample, RealLine, Result, SolveOptions};

fn run_example() -> Result<()> {
    let opts = SolveOptions::with_tol(1e-6);
    for entry in zoo::catalog() {
        let region = entry.bounded_region(10.0);
        let sample = PairSample::from_region(&region, 512, 11)?;
        let class = entry
            .check_class_condition(&sample)?
            .map_or("-".to_string(), |c| format!("{:?}", c.verdict));
        let (report, _) = iterate_to_fixed_point(&RealLine, &entry.self_map, &region.hi, &opts)?;
        let starts = sample_region(&region, 5, 3)?;
        let unique = uniqueness_probe(&RealLine, &entry.self_map, &starts, &opts)?;
        let error = match (report.limit, entry.expected_fixed_point) {
            (Some(z), Some(p)) => format!("{:.1e}", (z - p).abs()),
            _ => "-".to_string(),
        };
        println!(
            "{:<24} {:<14} class {:<8} solve {:<18} uniqueness {:<14} error {error}",
            entry.class_tag.as_str(),
            entry.self_map.label(),
            class,
            format!("{:?}", report.verdict),
            format!("{:?}", unique.verdict),
        );
        if entry.expected_fixed_point.is_some() {
            assert!(report.converged() && unique.passed());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
