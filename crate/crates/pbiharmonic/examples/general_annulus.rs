//! The two-radius test function: supplying (r1, r2) switches the pipeline
//! to the generalized bump v_delta with its own sigma(r1, r2), K(r1, r2)
//! and Phi(v_delta). At (r1, r2) = (tau/2, tau) everything must collapse
//! to the single-radius quantities; this example shows the identity and
//! then a genuinely different annulus.

use pbiharmonic::config::parse_spec;

fn config(r1: f64, r2: f64) -> String {
    format!(
        "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nr1 = {r1}\nr2 = {r2}\n"
    )
}

fn main() {
    let base = pbiharmonic::certify(
        &parse_spec("N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\n")
            .unwrap(),
    )
    .unwrap();

    println!("single-radius pipeline:");
    println!("  K(tau)        = {:.12e}", base.k_const);
    println!("  Phi(u_delta)  = {:.12e}", base.phi_u_delta);
    println!("  lambda1       = {:.12e}", base.intervals.as_ref().unwrap().lambda1);

    // reduction: (r1, r2) = (tau/2, tau)
    let reduced = pbiharmonic::certify(&parse_spec(&config(0.5, 1.0)).unwrap()).unwrap();
    let v = reduced.variant.as_ref().unwrap();
    println!();
    println!("general pipeline at (tau/2, tau):");
    println!("  K(r1, r2)     = {:.12e}", v.k_general);
    println!("  Phi(v_delta)  = {:.12e}", v.phi_v_delta);
    println!(
        "  lambda1       = {:.12e}",
        reduced.intervals.as_ref().unwrap().lambda1
    );
    let rel = (v.k_general - base.k_const).abs() / base.k_const;
    println!("  K reduction relative gap: {rel:.3e}");

    // a different annulus: thinner bump near the boundary
    let other = pbiharmonic::certify(&parse_spec(&config(0.6, 0.9)).unwrap()).unwrap();
    let v = other.variant.as_ref().unwrap();
    println!();
    println!("general pipeline at (0.6, 0.9):");
    println!("  sigma(r1, r2) = {:.12e}", v.sigma_general);
    println!("  K(r1, r2)     = {:.12e}", v.k_general);
    println!("  Phi(v_delta)  = {:.12e}", v.phi_v_delta);
    match &other.intervals {
        Some(iv) => println!("  lambda1       = {:.12e} (granted: {})", iv.lambda1, other.granted),
        None => println!("  window denied on this annulus"),
    }
}
