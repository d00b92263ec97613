// Sampled certification of T(x) = x / 3 with phi_n = (1/3 + 1/(n+1)) |x - y|.
//
// On [0, R] the sup gap |phi_n - phi| is exactly R / (n + 1), so convergence
// is uniform on bounded sets. Over growing radii the gap grows linearly: not
// uniform on the whole half-line.

use fixpoint_lab::contraction::{certify, check_global_uniform, CertifyConfig};
use fixpoint_lab::gate::{check_boyd_wong, default_deltas, default_grid};
use fixpoint_lab::{zoo, Interval, RealLine, Result};

fn run_example() -> Result<()> {
    let entry = zoo::example1();
    let family = entry.phi_family.as_ref().expect("example1 carries a family");
    let psi = entry.gate.as_ref().expect("example1 carries a gate");

    let gate = check_boyd_wong(psi, &default_grid(100.0, 2048), &default_deltas())?;
    println!("gate checks: {:?}", gate.verdict);

    let region = Interval::new(0.0, 10.0)?;
    let (cert, gaps) = certify(
        &RealLine,
        &entry.self_map,
        family,
        psi,
        &region,
        &CertifyConfig::default(),
    )?;
    println!("conditions on {region}: {:?}", cert.verdict);
    for child in &cert.children {
        println!("  {:<14} {:?}", child.check, child.verdict);
    }
    println!("{:>6}  {:>12}  {:>12}", "n", "sup gap", "R/(n+1)");
    for row in gaps.iter().take(6) {
        println!(
            "{:>6}  {:>12.6e}  {:>12.6e}",
            row.n,
            row.gap,
            10.0 / (row.n as f64 + 1.0)
        );
    }

    let (global, probes) = check_global_uniform(
        family,
        |r| Interval { lo: 0.0, hi: r },
        &[10.0, 100.0, 1000.0],
        10,
        1024,
        1,
    )?;
    for (r, g) in &probes {
        println!("radius {r:>6}: gap at n=10 is {g:.6}");
    }
    println!("whole half-line: {:?} ({})", global.verdict, global.note);

    assert!(gate.passed() && cert.passed() && global.is_refuted());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
