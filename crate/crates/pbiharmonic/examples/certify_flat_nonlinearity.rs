//! Certificate for the flat square-root nonlinearity on the unit ball:
//! f(t) = 0 below 2 and sqrt(t - 2) above. The primitive vanishes on
//! [-gamma, gamma], so the sup-level integral is exactly zero, lambda2 is
//! +infinity, and the certified window is ]lambda1*, inf[ with
//! lambda_{3,h} = h lambda1*.

use pbiharmonic::config::{parse_spec, EXAMPLE36_CONFIG};
use pbiharmonic::report::ExtReal;

fn main() {
    let spec = parse_spec(EXAMPLE36_CONFIG).expect("reference config parses");
    let report = pbiharmonic::certify(&spec).expect("certificate pipeline");

    println!("domain: unit ball in R^3, p = {}", report.p);
    println!("embedding constant k = {:.6e} ({})", report.k, report.k_source);
    println!("sigma_(2,3)(1)      = {:.12e}", report.sigma);
    println!("K_(2,3)(1)          = {:.6e}", report.k_const);
    println!("eta(gamma, delta)   = {:.6e}", report.eta);
    println!("Phi(u_delta)        = {:.6e}", report.phi_u_delta);
    println!("Psi(u_delta)        = {:.6e}", report.psi_u_delta);
    println!("sup-level integral  = {:.1e}", report.sup_level_integral);
    println!();
    for v in &report.hypotheses {
        println!(
            "  {:?}: {} (margin {:+.3e})",
            v.name,
            if v.holds { "holds" } else { "fails" },
            v.margin
        );
    }
    println!();
    let iv = report.intervals.expect("hypotheses hold");
    let lambda2 = match iv.lambda2 {
        ExtReal::PosInf => "inf".to_string(),
        ExtReal::Finite(v) => format!("{v:.6e}"),
    };
    println!("certified window: lambda in ]{:.6e}, {lambda2}[", iv.lambda1);
    println!(
        "second window inside [0, {:.6e}] (= h lambda1* with h = {})",
        iv.lambda3h, iv.h
    );
    println!("granted: {}", report.granted);
}
