//! Domain geometry (measure, inradius, incenter) and the embedding
//! constant bound obtained from Talenti's rearrangement estimate.

use crate::numerics::{gamma, ln_gamma};
use crate::problem::{DomainSpec, ProblemSpec};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("embedding bound unavailable for N = {0} < 3; supply k")]
    BoundUnavailable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSource {
    TalentiBound,
    UserOverride,
}

/// Resolved geometric data for a domain: everything the certificate needs.
#[derive(Debug, Clone)]
pub struct GeometryData {
    pub meas: f64,
    pub tau: f64,
    pub center: Vec<f64>,
    pub k: f64,
    pub k_source: KSource,
}

/// Surface measure of the unit sphere S^(N-1): 2 pi^(N/2) / Gamma(N/2).
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0).expect("N >= 1")
}

/// Volume of the N-ball of radius r.
pub fn ball_measure(n: usize, r: f64) -> f64 {
    PI.powf(n as f64 / 2.0) * r.powi(n as i32) / gamma(n as f64 / 2.0 + 1.0).expect("N >= 1")
}

/// Exact Lebesgue measure of the domain.
pub fn measure(domain: &DomainSpec, n: usize) -> f64 {
    match domain {
        DomainSpec::Ball { radius, .. } => ball_measure(n, *radius),
        DomainSpec::Box { lower, upper } => {
            lower.iter().zip(upper).map(|(l, u)| u - l).product()
        }
    }
}

/// Exact inradius tau and an incenter x0 with B(x0, tau) contained in the
/// domain. Ball: (R, center); box: (min side / 2, midpoint).
pub fn inradius_center(domain: &DomainSpec) -> (f64, Vec<f64>) {
    match domain {
        DomainSpec::Ball { center, radius } => (*radius, center.clone()),
        DomainSpec::Box { lower, upper } => {
            let tau = lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) / 2.0)
                .fold(f64::INFINITY, f64::min);
            let mid = lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect();
            (tau, mid)
        }
    }
}

/// Upper bound for the C^0 embedding constant, evaluated exactly as the
/// printed estimate:
///
///   meas^(2/N + 1/p' - 1) * Gamma(1 + N/2)^(2/N) / (N (N-2) pi)
///     * [Gamma(1 + p') Gamma(N/(N-2) - p') / Gamma(N/(N-2))]^(1/p')
///
/// with p' = p/(p-1). Requires N >= 3; p > N/2 guarantees every Gamma
/// argument is positive, but the bracket blows up as p decreases to N/2
/// (Gamma pole at 0), so values near that edge are large and useless.
pub fn talenti_k_bound(meas: f64, n: usize, p: f64) -> Result<f64, GeometryError> {
    if n < 3 {
        return Err(GeometryError::BoundUnavailable(n));
    }
    let nf = n as f64;
    let pp = p / (p - 1.0);
    let edge = nf / (nf - 2.0);
    let exponent = 2.0 / nf + 1.0 / pp - 1.0;
    // log-space: Gamma(1 + p') overflows for p near 1 (p' large)
    let ln_bracket =
        (ln_gamma(1.0 + pp) + ln_gamma(edge - pp) - ln_gamma(edge)) / pp;
    let ln_value = exponent * meas.ln() + (2.0 / nf) * ln_gamma(1.0 + nf / 2.0)
        - (nf * (nf - 2.0) * PI).ln()
        + ln_bracket;
    Ok(ln_value.exp())
}

/// The embedding constant used by the certificate: a user override when
/// present, else the Talenti bound. The bound overestimates k, which only
/// shrinks the certified intervals; the source is recorded so users can
/// tighten k by hand.
pub fn resolve_k(spec: &ProblemSpec, meas: f64) -> Result<(f64, KSource), GeometryError> {
    if let Some(k) = spec.k_override {
        return Ok((k, KSource::UserOverride));
    }
    talenti_k_bound(meas, spec.dim, spec.p).map(|k| (k, KSource::TalentiBound))
}

impl GeometryData {
    pub fn resolve(spec: &ProblemSpec) -> Result<Self, GeometryError> {
        let meas = measure(&spec.domain, spec.dim);
        let (tau, center) = inradius_center(&spec.domain);
        let (k, k_source) = resolve_k(spec, meas)?;
        Ok(GeometryData {
            meas,
            tau,
            center,
            k,
            k_source,
        })
    }
}
