//! The explicit radial bump: profile values, the closed-form Laplacian on
//! the annulus, and the cross-check that the energy constant reproduces
//! the norm quadrature of that Laplacian.

use pbiharmonic::geometry::sphere_area;
use pbiharmonic::numerics::integrate;
use pbiharmonic::testfun;

fn main() {
    let (tau, delta, n, p) = (1.0, 8.0, 3usize, 2.0);

    println!("u_delta profile (tau = {tau}, delta = {delta}, N = {n}):");
    println!("{:>8} {:>14} {:>14}", "l", "value", "laplacian");
    for i in 0..=16 {
        let l = tau * i as f64 / 16.0;
        let (v, lap) = testfun::eval_u_delta(tau, delta, n, l);
        println!("{l:8.4} {v:14.6e} {lap:14.6e}");
    }

    let sigma = testfun::sigma(p, n, tau, 1e-12).unwrap();
    let phi_closed = testfun::phi_u_delta(p, n, tau, delta, 1e-12).unwrap();
    let quad = integrate(
        |s| {
            let (_, lap) = testfun::eval_u_delta(tau, delta, n, s);
            lap.abs().powf(p) * s.powf(n as f64 - 1.0)
        },
        tau / 2.0,
        tau,
        1e-12,
        &[],
    )
    .unwrap();
    let phi_quad = sphere_area(n) * quad.value / p;

    println!();
    println!("sigma            = {:.12e} (error estimate {:.1e})", sigma.value, sigma.error_estimate);
    println!("Phi closed form  = {phi_closed:.12e}");
    println!("Phi by norm quad = {phi_quad:.12e}");
    println!("discrepancy      = {:.3e}", (phi_closed - phi_quad).abs());

    println!();
    let (r1, r2) = (0.3, 0.9);
    println!("two-radius bump v_delta on ({r1}, {r2}):");
    println!("{:>8} {:>14} {:>14}", "l", "value", "laplacian");
    for i in 0..=12 {
        let l = r2 * i as f64 / 12.0;
        let v = testfun::eval_v_delta(r1, r2, delta, l);
        let lap = testfun::v_delta_laplacian(r1, r2, delta, n, l);
        println!("{l:8.4} {v:14.6e} {lap:14.6e}");
    }
}
