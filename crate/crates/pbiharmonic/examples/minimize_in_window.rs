//! Inside the certified window the energy admits a negative-energy state
//! by construction (the certificate's bump), so descent from the bump
//! profile produces a nontrivial minimizer while the zero initialization
//! stays at the trivial critical point.

use pbiharmonic::config::{parse_spec, EXAMPLE36_CONFIG};
use pbiharmonic::solver::{energy, initial_state, minimize, Init, RadialGrid};

fn main() {
    let spec = parse_spec(EXAMPLE36_CONFIG).unwrap();
    let report = pbiharmonic::certify(&spec).unwrap();
    let lambda1 = report.intervals.as_ref().unwrap().lambda1;
    let lambda = 2.0 * lambda1;
    println!("certified lower endpoint lambda1* = {lambda1:.6e}; solving at lambda = {lambda:.6e}");

    let grid = RadialGrid::for_spec(&spec).unwrap();
    let bump = initial_state(&grid, &spec, &Init::UDeltaProfile);
    println!(
        "J(u_delta) = {:.6e} (negative inside the window)",
        energy(&grid, &spec.nonlinearity, &bump, lambda)
    );

    let trivial = minimize(&grid, &spec, lambda, &Init::Zero).unwrap();
    println!(
        "from zero:   {:?}, J = {:.3e}, residual = {:.1e}",
        trivial.classification, trivial.state.energy, trivial.residual
    );

    let rec = minimize(&grid, &spec, lambda, &Init::UDeltaProfile).unwrap();
    println!(
        "from bump:   {:?}, J = {:.6e}, residual = {:.1e}, iterations = {}",
        rec.classification, rec.state.energy, rec.residual, rec.iterations
    );
    println!(
        "minimizer: max|u| = {:.6e}, ||u|| = {:.6e}, u(0) = {:.6e}",
        rec.state.max_abs,
        rec.state.norm,
        rec.state.values[0]
    );
    println!(
        "distinct from trivial: {}",
        rec.is_distinct_from(&trivial)
    );
}
