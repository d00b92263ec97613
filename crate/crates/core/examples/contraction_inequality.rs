// The shifted inequality b_{n+m} <= g(b_n) + eps on a traced orbit, first
// with a fixed shift and then with the shift picked from the family's
// uniform index for a given eps.

use fixpoint_lab::solver::{check_contraction_inequality, check_orbit_contraction, iterate_to_fixed_point};
use fixpoint_lab::{zoo, Envelope, GateFunction, Interval, RealLine, Result, SolveOptions};

fn run_example() -> Result<()> {
    let entry = zoo::banach(0.5)?;
    let opts = SolveOptions {
        max_iter: 40,
        window: 41,
        ..SolveOptions::default()
    };
    let (_, trace) = iterate_to_fixed_point(&RealLine, &entry.self_map, &8.0, &opts)?;
    let g = Envelope::new(GateFunction::linear(0.5), 1e-4)?;

    let fixed = check_contraction_inequality(&trace.tail_diams, &g, 1, 0.0)?;
    println!(
        "b_(n+1) <= b_n / 2 for n < {}: {:?}",
        trace.tail_diams.len() - 1,
        fixed.verdict
    );

    let family = entry.phi_family.as_ref().expect("family");
    for eps in [1e-1, 1e-2, 1e-3] {
        let c = check_orbit_contraction(
            family,
            &Interval::new(0.0, 8.0)?,
            &g,
            &trace.tail_diams,
            eps,
            256,
            1,
            60,
        )?;
        println!("eps {eps:e}: shift {:?}, {:?}", c.measured("m-shift"), c.verdict);
        assert!(c.passed());
    }
    assert!(fixed.passed());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
