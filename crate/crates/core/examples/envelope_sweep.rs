// The running supremum g(t) = sup_{s <= t} psi(s) of a gate that is not
// monotone: 0.9 t below 1, 0.5 t from 1 on. g is flat at 0.9 on [1, 1.8]
// and then follows 0.5 t again.
//
// Also runs the limsup check on a damped oscillating sequence.

use fixpoint_lab::gate::{
    check_envelope_properties, check_limsup_inequality, check_nondecreasing, default_deltas, uniform_grid,
};
use fixpoint_lab::{Envelope, GateFunction, Result};

fn run_example() -> Result<()> {
    let psi = GateFunction::parse("piecewise:0.9*t;@1:0.5*t")?;
    let grid = uniform_grid(0.0, 3.0, 13);
    let env = Envelope::new(psi.clone(), 1e-4)?;

    println!("{:>6}  {:>8}  {:>8}", "t", "psi", "g");
    for (t, g) in grid.iter().zip(env.sweep(&grid)) {
        println!("{t:>6.2}  {:>8.4}  {g:>8.4}", psi.eval(*t));
    }

    let psi_monotone = check_nondecreasing(&psi, &grid)?;
    println!("psi nondecreasing: {:?}", psi_monotone.verdict);
    let props = check_envelope_properties(&env, &uniform_grid(0.0, 3.0, 301), &default_deltas())?;
    println!("envelope checks (conditional = {}):", props.conditional);
    for c in &props.children {
        println!("  {:<20} {:?}", c.check, c.verdict);
    }

    // s_k = 1 + 2^-k (-1)^k: limsup is 1, so limsup g(s_k) <= g(1) = 0.9
    let seq: Vec<f64> = (0..60)
        .map(|k| 1.0 + 0.5f64.powi(k) * if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let lim = check_limsup_inequality(&Envelope::new(GateFunction::linear(0.5), 1e-4)?, &seq, 40)?;
    println!("limsup inequality: {:?}", lim.verdict);

    assert!(psi_monotone.is_refuted());
    assert!(props.find("g-nondecreasing").unwrap().passed());
    assert!(lim.passed());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
