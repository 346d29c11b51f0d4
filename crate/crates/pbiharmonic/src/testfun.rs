//! The explicit radial test functions (the flat-top quartic bump and its
//! two-radius generalization), their Laplacians, and the derived constants
//! sigma, K, eta, Phi and the sublevel radius r.

use crate::numerics::{self, NumericsError, QuadResult};
use std::f64::consts::PI;

/// Quadratic whose absolute p-th power is the sigma integrand:
/// q(s) = 2(N+2) s^2 - 3(N+1) tau s + N tau^2. It is -tau^2/2 at tau/2 and
/// tau^2 at tau, so it has exactly one interior root.
pub fn sigma_quadratic(n: usize, tau: f64, s: f64) -> f64 {
    let nf = n as f64;
    2.0 * (nf + 2.0) * s * s - 3.0 * (nf + 1.0) * tau * s + nf * tau * tau
}

/// Quadratic for the general annulus: (N+2) s^2 - (N+1)(r1+r2) s + N r1 r2.
/// At (r1, r2) = (tau/2, tau) it equals q(s)/2.
pub fn sigma_general_quadratic(n: usize, r1: f64, r2: f64, s: f64) -> f64 {
    let nf = n as f64;
    (nf + 2.0) * s * s - (nf + 1.0) * (r1 + r2) * s + nf * r1 * r2
}

/// Value and Laplacian of the flat-top bump: delta on B(x0, tau/2), the
/// quartic profile 16 l^2 (tau - l)^2 delta / tau^4 on the annulus, zero
/// outside B(x0, tau). The Laplacian on the annulus is
/// 32 delta (2(N+2) l^2 - 3(N+1) tau l + N tau^2) / tau^4 and zero on both
/// flat regions.
pub fn eval_u_delta(tau: f64, delta: f64, n: usize, l: f64) -> (f64, f64) {
    if l >= tau {
        (0.0, 0.0)
    } else if l <= tau / 2.0 {
        (delta, 0.0)
    } else {
        let t4 = tau.powi(4);
        let v = 16.0 * l * l * (tau - l) * (tau - l) * delta / t4;
        let lap = 32.0 * delta * sigma_quadratic(n, tau, l) / t4;
        (v, lap)
    }
}

/// Radial derivative of the bump profile: 32 delta l (tau - l)(tau - 2l) / tau^4
/// on the annulus; vanishes at both junction radii, so the bump is C^1.
pub fn u_delta_radial_derivative(tau: f64, delta: f64, l: f64) -> f64 {
    if l <= tau / 2.0 || l >= tau {
        0.0
    } else {
        32.0 * delta * l * (tau - l) * (tau - 2.0 * l) / tau.powi(4)
    }
}

/// The two-radius bump: delta on B(x0, r1), zero outside B(x0, r2), and on
/// the annulus the quartic
/// delta (3(l^4 - r2^4) - 4(r1+r2)(l^3 - r2^3) + 6 r1 r2 (l^2 - r2^2))
///   / ((r2 - r1)^3 (r1 + r2)).
pub fn eval_v_delta(r1: f64, r2: f64, delta: f64, l: f64) -> f64 {
    if l >= r2 {
        0.0
    } else if l <= r1 {
        delta
    } else {
        let num = 3.0 * (l.powi(4) - r2.powi(4)) - 4.0 * (r1 + r2) * (l.powi(3) - r2.powi(3))
            + 6.0 * r1 * r2 * (l * l - r2 * r2);
        delta * num / ((r2 - r1).powi(3) * (r1 + r2))
    }
}

/// Laplacian of the two-radius bump on its annulus:
/// 12 delta ((N+2) l^2 - (N+1)(r1+r2) l + N r1 r2) / ((r2-r1)^3 (r1+r2)).
pub fn v_delta_laplacian(r1: f64, r2: f64, delta: f64, n: usize, l: f64) -> f64 {
    if l <= r1 || l >= r2 {
        0.0
    } else {
        12.0 * delta * sigma_general_quadratic(n, r1, r2, l)
            / ((r2 - r1).powi(3) * (r1 + r2))
    }
}

// |x|^p with the exact zero mapped to zero; powf already guarantees this
// for p > 0 but the intent is worth pinning.
fn abs_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p)
    }
}

// ln of factors overflowing double precision triggers the log-space path
const LN_GUARD: f64 = 600.0;

/// sigma_{p,N}(tau) = int_{tau/2}^tau |q(s)|^p s^(N-1) ds, integrated with
/// the interval split at the unique interior root of q. For parameters so
/// extreme that the integrand overflows, the substitution s = tau t is
/// applied and the result rescaled by tau^(2p+N).
pub fn sigma(p: f64, n: usize, tau: f64, tol: f64) -> Result<QuadResult, NumericsError> {
    let ln_scale = (2.0 * p + n as f64) * tau.ln();
    if ln_scale.abs() > LN_GUARD {
        let unit = sigma(p, n, 1.0, tol)?;
        let scale = ln_scale.exp();
        return Ok(QuadResult {
            value: unit.value * scale,
            error_estimate: unit.error_estimate * scale,
            subdivisions: unit.subdivisions,
        });
    }
    let root = numerics::find_root(
        |s| sigma_quadratic(n, tau, s),
        tau / 2.0,
        tau,
        1e-14 * tau,
    )?;
    // keep the tolerance relative for small integrals (tau < 1 shrinks the
    // value like tau^(2p+N))
    let tol_eff = tol * ln_scale.exp().min(1.0);
    numerics::integrate(
        |s| abs_pow(sigma_quadratic(n, tau, s), p) * s.powf(n as f64 - 1.0),
        tau / 2.0,
        tau,
        tol_eff,
        &[root],
    )
}

/// sigma_{p,N}(r1, r2) with kink splitting at the sign change of the
/// general quadratic on (r1, r2).
pub fn sigma_general(
    p: f64,
    n: usize,
    r1: f64,
    r2: f64,
    tol: f64,
) -> Result<QuadResult, NumericsError> {
    let q = |s: f64| sigma_general_quadratic(n, r1, r2, s);
    // q(r1) = r1(r1 - r2) < 0 < r2(r2 - r1) = q(r2): exactly one sign change
    let root = numerics::find_root(q, r1, r2, 1e-14 * r2)?;
    let scale =
        abs_pow(q(r1).abs().max(q(r2).abs()), p) * r2.powf(n as f64 - 1.0) * (r2 - r1);
    let tol_eff = tol * scale.clamp(1e-300, 1.0);
    numerics::integrate(
        |s| abs_pow(q(s), p) * s.powf(n as f64 - 1.0),
        r1,
        r2,
        tol_eff,
        &[root],
    )
}

fn ln_gamma_half(n: usize) -> f64 {
    numerics::ln_gamma(n as f64 / 2.0)
}

/// K_{p,N}(tau) = tau^(4p) Gamma(N/2) / (2^(5p+1) pi^(N/2) k^p sigma),
/// given a precomputed sigma value.
pub fn k_const_with_sigma(p: f64, n: usize, tau: f64, k: f64, sigma_val: f64) -> f64 {
    let ln_num = 4.0 * p * tau.ln() + ln_gamma_half(n);
    let ln_den = (5.0 * p + 1.0) * std::f64::consts::LN_2
        + (n as f64 / 2.0) * PI.ln()
        + p * k.ln()
        + sigma_val.ln();
    if ln_num.abs() > LN_GUARD || ln_den.abs() > LN_GUARD {
        (ln_num - ln_den).exp()
    } else {
        tau.powf(4.0 * p) * (ln_gamma_half(n)).exp()
            / (2f64.powf(5.0 * p + 1.0) * PI.powf(n as f64 / 2.0) * k.powf(p) * sigma_val)
    }
}

pub fn k_const(p: f64, n: usize, tau: f64, k: f64, tol: f64) -> Result<f64, NumericsError> {
    Ok(k_const_with_sigma(p, n, tau, k, sigma(p, n, tau, tol)?.value))
}

/// K_{p,N}(r1, r2) = (r2-r1)^(3p) (r1+r2)^p Gamma(N/2)
///                   / (2^(2p+1) 3^p pi^(N/2) k^p sigma(r1, r2)).
pub fn k_general_with_sigma(
    p: f64,
    n: usize,
    r1: f64,
    r2: f64,
    k: f64,
    sigma_val: f64,
) -> f64 {
    let ln_num = 3.0 * p * (r2 - r1).ln() + p * (r1 + r2).ln() + ln_gamma_half(n);
    let ln_den = (2.0 * p + 1.0) * std::f64::consts::LN_2
        + p * 3f64.ln()
        + (n as f64 / 2.0) * PI.ln()
        + p * k.ln()
        + sigma_val.ln();
    if ln_num.abs() > LN_GUARD || ln_den.abs() > LN_GUARD {
        (ln_num - ln_den).exp()
    } else {
        (r2 - r1).powf(3.0 * p) * (r1 + r2).powf(p) * ln_gamma_half(n).exp()
            / (2f64.powf(2.0 * p + 1.0)
                * 3f64.powf(p)
                * PI.powf(n as f64 / 2.0)
                * k.powf(p)
                * sigma_val)
    }
}

pub fn k_general(
    p: f64,
    n: usize,
    r1: f64,
    r2: f64,
    k: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    Ok(k_general_with_sigma(
        p,
        n,
        r1,
        r2,
        k,
        sigma_general(p, n, r1, r2, tol)?.value,
    ))
}

/// eta(gamma, delta) = A / (A + B) with A = tau^(4p) Gamma(N/2) gamma^p and
/// B = k^p 2^(5p+1) pi^(N/2) delta^p sigma. Always in (0, 1).
pub fn eta_with_sigma(
    gamma: f64,
    delta: f64,
    p: f64,
    n: usize,
    tau: f64,
    k: f64,
    sigma_val: f64,
) -> f64 {
    let ln_a = 4.0 * p * tau.ln() + ln_gamma_half(n) + p * gamma.ln();
    let ln_b = p * k.ln()
        + (5.0 * p + 1.0) * std::f64::consts::LN_2
        + (n as f64 / 2.0) * PI.ln()
        + p * delta.ln()
        + sigma_val.ln();
    if ln_a.abs() > LN_GUARD || ln_b.abs() > LN_GUARD {
        1.0 / (1.0 + (ln_b - ln_a).exp())
    } else {
        let a = tau.powf(4.0 * p) * ln_gamma_half(n).exp() * gamma.powf(p);
        let b = k.powf(p)
            * 2f64.powf(5.0 * p + 1.0)
            * PI.powf(n as f64 / 2.0)
            * delta.powf(p)
            * sigma_val;
        a / (a + b)
    }
}

pub fn eta(
    gamma: f64,
    delta: f64,
    p: f64,
    n: usize,
    tau: f64,
    k: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    Ok(eta_with_sigma(
        gamma,
        delta,
        p,
        n,
        tau,
        k,
        sigma(p, n, tau, tol)?.value,
    ))
}

/// Phi(u_delta) = 2^(5p+1) pi^(N/2) delta^p sigma / (tau^(4p) Gamma(N/2) p).
pub fn phi_u_delta_with_sigma(p: f64, n: usize, tau: f64, delta: f64, sigma_val: f64) -> f64 {
    let ln_num = (5.0 * p + 1.0) * std::f64::consts::LN_2
        + (n as f64 / 2.0) * PI.ln()
        + p * delta.ln()
        + sigma_val.ln();
    let ln_den = 4.0 * p * tau.ln() + ln_gamma_half(n) + p.ln();
    if ln_num.abs() > LN_GUARD || ln_den.abs() > LN_GUARD {
        (ln_num - ln_den).exp()
    } else {
        2f64.powf(5.0 * p + 1.0) * PI.powf(n as f64 / 2.0) * delta.powf(p) * sigma_val
            / (tau.powf(4.0 * p) * ln_gamma_half(n).exp() * p)
    }
}

pub fn phi_u_delta(
    p: f64,
    n: usize,
    tau: f64,
    delta: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    Ok(phi_u_delta_with_sigma(
        p,
        n,
        tau,
        delta,
        sigma(p, n, tau, tol)?.value,
    ))
}

/// Phi(v_delta) = delta^p / (p k^p K_{p,N}(r1, r2)); the embedding constant
/// cancels against the k inside K.
pub fn phi_v_delta_with_sigma(
    p: f64,
    n: usize,
    r1: f64,
    r2: f64,
    delta: f64,
    k: f64,
    sigma_val: f64,
) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    delta.powf(p) / (p * k.powf(p) * k_general_with_sigma(p, n, r1, r2, k, sigma_val))
}

pub fn phi_v_delta(
    p: f64,
    n: usize,
    r1: f64,
    r2: f64,
    delta: f64,
    k: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    Ok(phi_v_delta_with_sigma(
        p,
        n,
        r1,
        r2,
        delta,
        k,
        sigma_general(p, n, r1, r2, tol)?.value,
    ))
}

/// The sublevel radius r = gamma^p / (p k^p).
pub fn r_level(gamma: f64, p: f64, k: f64) -> f64 {
    let ln_r = p * gamma.ln() - p.ln() - p * k.ln();
    if ln_r.abs() > LN_GUARD {
        ln_r.exp()
    } else {
        gamma.powf(p) / (p * k.powf(p))
    }
}
