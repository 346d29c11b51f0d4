//! A certificate with a finite upper endpoint: the nonlinearity is flat
//! only below 1, so the sup-level integral is positive for gamma > 1 and
//! lambda2 stays finite. The embedding constant is supplied by hand here
//! (the built-in upper bound is too coarse for this window to open); the
//! report records the override and the user owns its validity.

use pbiharmonic::config::parse_spec;
use pbiharmonic::report::ExtReal;

const CONFIG: &str = "\
N = 3
p = 2
domain = ball
radius = 1
f = flatpower
threshold = 1
exponent = 0.5
scale = 1
gamma = 1.05
delta = 2
h = 2
k = 0.05
";

fn main() {
    let spec = parse_spec(CONFIG).expect("config parses");
    let report = pbiharmonic::certify(&spec).expect("certificate pipeline");

    println!("f(t) = (t - 1)^(1/2) above 1, zero below; gamma = {}", report.gamma);
    println!("k = {:.3e} ({})", report.k, report.k_source);
    println!("sup-level integral = {:.6e} (positive => finite lambda2)", report.sup_level_integral);
    for v in &report.hypotheses {
        println!(
            "  {:?}: {} (margin {:+.3e})",
            v.name,
            if v.holds { "holds" } else { "fails" },
            v.margin
        );
    }
    let iv = report.intervals.expect("hypotheses hold");
    let lambda2 = match iv.lambda2 {
        ExtReal::Finite(v) => v,
        ExtReal::PosInf => unreachable!("sup-level integral is positive"),
    };
    println!();
    println!(
        "certified window: ]{:.6e}, {:.6e}[ (nonempty: {})",
        iv.lambda1, lambda2, iv.nonempty
    );
    println!(
        "lambda_(3,h) = {:.6e}, classification of the two windows: {:?}",
        iv.lambda3h, iv.overlap
    );
    println!("granted: {}", report.granted);
}
