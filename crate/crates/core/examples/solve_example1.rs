// Picard iteration for T(x) = x / 3 from x0 = 1.
//
// Prints the first iterates next to 3^-n, the windowed tail diameters and
// the final report.

use fixpoint_lab::{solver, zoo, RealLine, Result, SolveOptions};

fn run_example() -> Result<()> {
    let entry = zoo::example1();
    let (report, trace) =
        solver::iterate_to_fixed_point(&RealLine, &entry.self_map, &1.0, &SolveOptions::with_tol(1e-9))?;

    println!("{:>3}  {:>24}  {:>24}  {:>24}", "n", "x_n", "3^-n", "b_n");
    for (n, x) in trace.points.iter().enumerate().take(8) {
        println!(
            "{n:>3}  {x:>24.17e}  {:>24.17e}  {:>24.17e}",
            3f64.powi(-(n as i32)),
            trace.tail_diams[n]
        );
    }
    println!("...");
    println!("verdict    {:?}", report.verdict);
    println!("iterations {}", report.iterations);
    println!("limit      {:e}", report.limit.unwrap_or(f64::NAN));
    println!("residual   {:e}", report.final_residual.unwrap_or(f64::NAN));

    assert!(report.converged());
    assert!(report.limit.unwrap().abs() <= 1e-9);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
