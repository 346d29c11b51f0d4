//! Sweep lambda across the certified lower endpoint: below lambda1* the
//! multistart search typically finds only the trivial point, above it a
//! negative-energy minimizer appears.

use pbiharmonic::config::parse_spec;
use pbiharmonic::solver::branch_sweep;

fn main() {
    // coarse grid keeps the sweep quick; seed fixed for reproducibility
    let spec = parse_spec(
        "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nn = 64\nseed = 3\n",
    )
    .unwrap();
    let report = pbiharmonic::certify(&spec).unwrap();
    let iv = report.intervals.clone().unwrap();
    println!("lambda1* = {:.6e}", iv.lambda1);

    let lambdas: Vec<f64> = (0..8)
        .map(|i| iv.lambda1 * (0.4 + 0.25 * i as f64))
        .collect();
    let rows = branch_sweep(&spec, Some(&iv), &lambdas, 4, 3).unwrap();

    println!(
        "{:>12} {:>6} {:>6} {:>4}  per-solution (J, ||u||)",
        "lambda", "in_L1", "<=l3h", "#"
    );
    for row in rows {
        let sols: Vec<String> = row
            .solutions
            .iter()
            .map(|s| format!("({:+.3e}, {:.3e})", s.state.energy, s.state.norm))
            .collect();
        println!(
            "{:>12.5e} {:>6} {:>6} {:>4}  {}",
            row.lambda,
            row.in_lambda1,
            row.below_lambda3h,
            row.n_distinct,
            sols.join(" ")
        );
    }
}
