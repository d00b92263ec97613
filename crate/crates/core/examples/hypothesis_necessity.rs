// T(x) = x + 1 on [0, inf) meets every contraction condition, since
// M(x, y) = |x - y| + 1 and |x - y| <= psi(|x - y| + 1) = |x - y| + 1/2,
// yet it has no fixed point. The bounded-orbit hypothesis is what fails.

use fixpoint_lab::contraction::{certify, max_term, CertifyConfig};
use fixpoint_lab::solver::iterate_to_fixed_point;
use fixpoint_lab::{zoo, Interval, RealLine, Result, SolveOptions, SolveVerdict};

fn run_example() -> Result<()> {
    let entry = zoo::translation_nonexample();
    let family = entry.phi_family.as_ref().expect("family");
    let psi = entry.gate.as_ref().expect("gate");

    let m = max_term(&RealLine, &entry.self_map, &3.0, &0.0)?;
    println!("M(3, 0) = {} via {:?}", m.value, m.argmax);

    let region = Interval::new(0.0, 10.0)?;
    let (cert, _) = certify(
        &RealLine,
        &entry.self_map,
        family,
        psi,
        &region,
        &CertifyConfig::default(),
    )?;
    for c in &cert.children {
        println!("{:<14} {:?}", c.check, c.verdict);
    }
    println!(
        "gate-bound margin {}",
        cert.find("gate-bound").and_then(|c| c.measured("min-margin")).unwrap()
    );

    let opts = SolveOptions {
        escape_radius: Some(1e6),
        max_iter: 2_000_000,
        ..SolveOptions::default()
    };
    let (report, trace) = iterate_to_fixed_point(&RealLine, &entry.self_map, &0.0, &opts)?;
    println!("solve: {:?} at iterate {:?}", report.verdict, trace.escape_index);

    assert!(cert.passed());
    assert_eq!(report.verdict, SolveVerdict::DivergedUnbounded);
    assert_eq!(trace.escape_index, Some(1_000_000));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
