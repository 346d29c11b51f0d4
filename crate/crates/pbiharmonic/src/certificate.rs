//! Hypothesis verification and the certified lambda-intervals.
//!
//! All paper inequalities are strict: a verdict holds only when its margin
//! stays positive after the accumulated quadrature error bound has been
//! subtracted, so a certificate is never granted on round-off. Growth
//! hypotheses cannot be proven by sampling; they are validated against the
//! declared metadata and labeled as such in the verdict details.

use crate::geometry::{ball_measure, sphere_area, GeometryData, GeometryError, KSource};
use crate::numerics::{self, NumericsError, QuadResult};
use crate::problem::{DomainSpec, ProblemSpec, SpecError};
use crate::report::{
    CertificateReport, ExtReal, HypothesisName, HypothesisVerdict, IntervalPair, Overlap,
    VariantConstants,
};
use crate::testfun;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("quadrature failure: {0}")]
    Numerics(#[from] NumericsError),
}

/// Which explicit test function drives the annulus integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestVariant {
    UDelta,
    VDelta { r1: f64, r2: f64 },
}

/// Everything the hypothesis checks and interval formulas consume.
#[derive(Debug, Clone)]
pub struct Constants {
    pub sigma: QuadResult,
    /// K_{p,N}(tau)
    pub k_tau: f64,
    pub eta: f64,
    pub r: f64,
    pub phi_u: f64,
    pub sup_level: f64,
    pub sup_level_err: f64,
    /// R_F (non-autonomous) or G_F (autonomous)
    pub annulus: f64,
    pub annulus_err: f64,
    /// int_{B(x0, tau/2)} F(x, delta) dx, exact
    pub ball: f64,
    pub variant: Option<VariantComputed>,
}

#[derive(Debug, Clone)]
pub struct VariantComputed {
    pub r1: f64,
    pub r2: f64,
    pub sigma_gen: QuadResult,
    pub k_gen: f64,
    pub phi_v: f64,
    pub annulus: f64,
    pub annulus_err: f64,
    /// int_{B(x0, r1)} F(x, delta) dx
    pub ball: f64,
}

impl Constants {
    /// Psi(u_delta) = R_F + ball term (Eq.-(7) decomposition).
    pub fn psi_u(&self) -> f64 {
        self.annulus + self.ball
    }
}

const MAX_SAMPLES: usize = 2048;

/// int_Omega max_{|xi| <= gamma} F(x, xi) dx.
///
/// Autonomous entries reduce to meas(Omega) * max G; separable entries
/// split the radial factor into positive and negative parts:
/// (int a+) max G + (int a-) max(-G). Both maxima are nonnegative because
/// G(0) = 0 lies in the scan range.
pub fn sup_level_integral(
    spec: &ProblemSpec,
    geo: &GeometryData,
    gamma: f64,
) -> Result<(f64, f64), NumericsError> {
    let nl = &spec.nonlinearity;
    let (_, max_g) = numerics::max_on_interval(|xi| nl.g_primitive(xi), -gamma, gamma, MAX_SAMPLES);
    if nl.is_autonomous() {
        return Ok((geo.meas * max_g, 0.0));
    }
    let a = nl.spatial.as_ref().expect("separable entry has a factor");
    let (_, max_neg_g) =
        numerics::max_on_interval(|xi| -nl.g_primitive(xi), -gamma, gamma, MAX_SAMPLES);
    let (int_plus, int_minus, err) = split_spatial_integral(spec, geo, a)?;
    Ok((
        int_plus * max_g + int_minus * max_neg_g,
        err * (max_g.abs() + max_neg_g.abs()),
    ))
}

// (int_Omega a+, int_Omega a-, error bound). Ball: radial quadrature with
// kink splitting at the sign changes of a. Box: tensor-grid quadrature of
// the positive part; int a is exact per coordinate power, so a- follows.
fn split_spatial_integral(
    spec: &ProblemSpec,
    geo: &GeometryData,
    a: &crate::nonlinearity::RadialPoly,
) -> Result<(f64, f64, f64), NumericsError> {
    match &spec.domain {
        DomainSpec::Ball { radius, .. } => {
            let n = spec.dim;
            let omega = sphere_area(n);
            let int_a = omega * a.weighted_integral(0.0, *radius, n);
            let roots = a.sign_changes(0.0, *radius);
            let abs = numerics::integrate(
                |l| a.eval(l).abs() * l.powf(n as f64 - 1.0),
                0.0,
                *radius,
                spec.quad_tol,
                &roots,
            )?;
            let int_abs = omega * abs.value;
            let err = omega * abs.error_estimate;
            Ok((
                0.5 * (int_abs + int_a),
                0.5 * (int_abs - int_a),
                err,
            ))
        }
        DomainSpec::Box { lower, upper } => {
            let center = geo.center.clone();
            let plus = nested_box_integral(
                lower,
                upper,
                &mut vec![0.0; lower.len()],
                0,
                spec.quad_tol,
                &|x| {
                    let l = dist(x, &center);
                    a.eval(l).max(0.0)
                },
            )?;
            let minus = nested_box_integral(
                lower,
                upper,
                &mut vec![0.0; lower.len()],
                0,
                spec.quad_tol,
                &|x| {
                    let l = dist(x, &center);
                    (-a.eval(l)).max(0.0)
                },
            )?;
            let err = spec.quad_tol * geo.meas.max(1.0) * 2.0;
            Ok((plus, minus, err))
        }
    }
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn nested_box_integral(
    lower: &[f64],
    upper: &[f64],
    point: &mut Vec<f64>,
    dim: usize,
    tol: f64,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<f64, NumericsError> {
    if dim == lower.len() {
        return Ok(f(point));
    }
    // immutable-capture closure; inner failures stashed in a cell
    let failure = std::cell::RefCell::new(None);
    let result = numerics::integrate(
        |x| {
            let mut p = point.clone();
            p[dim] = x;
            match nested_box_integral(lower, upper, &mut p, dim + 1, tol, f) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        lower[dim],
        upper[dim],
        tol,
        &[],
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map(|r| r.value)
}

/// int_{B(x0, radius)} F(x, delta) dx: exact, since the t-factor is a
/// constant G(delta) and the radial factor integrates in closed form.
pub fn ball_level_term(spec: &ProblemSpec, radius: f64) -> f64 {
    let nl = &spec.nonlinearity;
    let g_delta = nl.g_primitive(spec.delta);
    match &nl.spatial {
        None => ball_measure(spec.dim, radius) * g_delta,
        Some(a) => {
            sphere_area(spec.dim) * a.weighted_integral(0.0, radius, spec.dim) * g_delta
        }
    }
}

/// Annulus part of Psi applied to the chosen test function:
/// omega_{N-1} int a(s) F(profile(s)) s^(N-1) ds over the annulus. The
/// profile is strictly decreasing there, so each kink of the primitive G
/// has a single preimage, which is added as a quadrature split point.
pub fn annulus_f_integral(
    spec: &ProblemSpec,
    geo: &GeometryData,
    variant: TestVariant,
) -> Result<(f64, f64), NumericsError> {
    let nl = &spec.nonlinearity;
    let delta = spec.delta;
    let n = spec.dim;
    let (lo, hi, profile): (f64, f64, Box<dyn Fn(f64) -> f64>) = match variant {
        TestVariant::UDelta => {
            let tau = geo.tau;
            (
                tau / 2.0,
                tau,
                Box::new(move |s| testfun::eval_u_delta(tau, delta, n, s).0),
            )
        }
        TestVariant::VDelta { r1, r2 } => (
            r1,
            r2,
            Box::new(move |s| testfun::eval_v_delta(r1, r2, delta, s)),
        ),
    };

    // preimages of the primitive's kinks under the decreasing profile
    let mut kinks = Vec::new();
    for xi in nl.g_kinks() {
        if xi > 0.0 && xi < delta {
            if let Ok(s) = numerics::find_root(|s| profile(s) - xi, lo, hi, 1e-13 * hi) {
                kinks.push(s);
            }
        }
    }

    let weight = |s: f64| match &nl.spatial {
        None => 1.0,
        Some(a) => a.eval(s),
    };
    let quad = numerics::integrate(
        |s| weight(s) * nl.g_primitive(profile(s)) * s.powf(n as f64 - 1.0),
        lo,
        hi,
        spec.quad_tol,
        &kinks,
    )?;
    let omega = sphere_area(n);
    Ok((omega * quad.value, omega * quad.error_estimate))
}

/// Computes every certificate constant for the spec.
pub fn compute_constants(
    spec: &ProblemSpec,
    geo: &GeometryData,
) -> Result<Constants, CertifyError> {
    let (p, n, tau, k) = (spec.p, spec.dim, geo.tau, geo.k);
    let sigma = testfun::sigma(p, n, tau, spec.quad_tol)?;
    let k_tau = testfun::k_const_with_sigma(p, n, tau, k, sigma.value);
    let eta = testfun::eta_with_sigma(spec.gamma, spec.delta, p, n, tau, k, sigma.value);
    let r = testfun::r_level(spec.gamma, p, k);
    let phi_u = testfun::phi_u_delta_with_sigma(p, n, tau, spec.delta, sigma.value);
    let (sup_level, sup_level_err) = sup_level_integral(spec, geo, spec.gamma)?;
    let (annulus, annulus_err) = annulus_f_integral(spec, geo, TestVariant::UDelta)?;
    let ball = ball_level_term(spec, tau / 2.0);

    let variant = match spec.annulus {
        None => None,
        Some((r1, r2)) => {
            let sigma_gen = testfun::sigma_general(p, n, r1, r2, spec.quad_tol)?;
            let k_gen = testfun::k_general_with_sigma(p, n, r1, r2, k, sigma_gen.value);
            let phi_v = testfun::phi_v_delta_with_sigma(p, n, r1, r2, spec.delta, k, sigma_gen.value);
            let (annulus_v, annulus_v_err) =
                annulus_f_integral(spec, geo, TestVariant::VDelta { r1, r2 })?;
            let ball_v = ball_level_term(spec, r1);
            Some(VariantComputed {
                r1,
                r2,
                sigma_gen,
                k_gen,
                phi_v,
                annulus: annulus_v,
                annulus_err: annulus_v_err,
                ball: ball_v,
            })
        }
    };

    Ok(Constants {
        sigma,
        k_tau,
        eta,
        r,
        phi_u,
        sup_level,
        sup_level_err,
        annulus,
        annulus_err,
        ball,
        variant,
    })
}

fn verdict(name: HypothesisName, margin: f64, detail: String) -> HypothesisVerdict {
    HypothesisVerdict {
        name,
        holds: margin > 0.0,
        margin,
        detail,
    }
}

/// Runs every applicable hypothesis check. Margins are conservative: the
/// quadrature error bound of each ingredient has already been subtracted.
pub fn check_hypotheses(
    spec: &ProblemSpec,
    geo: &GeometryData,
    c: &Constants,
) -> Vec<HypothesisVerdict> {
    let mut out = Vec::new();
    let nl = &spec.nonlinearity;
    let (p, gamma, delta) = (spec.p, spec.gamma, spec.delta);
    let autonomous = nl.is_autonomous();

    // (h1): delta > K^(1/p) gamma, against the conservative (larger) K
    // obtained from the lower end of the sigma error interval.
    if let Some(v) = &c.variant {
        let sig_lo = (v.sigma_gen.value - v.sigma_gen.error_estimate).max(f64::MIN_POSITIVE);
        let k_hi = testfun::k_general_with_sigma(p, spec.dim, v.r1, v.r2, geo.k, sig_lo);
        let margin = delta - k_hi.powf(1.0 / p) * gamma;
        out.push(verdict(
            HypothesisName::H1,
            margin,
            format!(
                "delta > K(r1,r2)^(1/p) gamma: {delta:.6e} vs {:.6e} (general annulus)",
                k_hi.powf(1.0 / p) * gamma
            ),
        ));
    } else {
        let sig_lo = (c.sigma.value - c.sigma.error_estimate).max(f64::MIN_POSITIVE);
        let k_hi = testfun::k_const_with_sigma(p, spec.dim, geo.tau, geo.k, sig_lo);
        let margin = delta - k_hi.powf(1.0 / p) * gamma;
        out.push(verdict(
            HypothesisName::H1,
            margin,
            format!(
                "delta > K^(1/p) gamma: {delta:.6e} vs {:.6e}",
                k_hi.powf(1.0 / p) * gamma
            ),
        ));
    }

    // (h2) family: sup-level integral < eta * Psi(test function), with eta
    // and Psi taken at the unfavorable ends of their error intervals.
    let s_hi = c.sup_level + c.sup_level_err;
    if let Some(v) = &c.variant {
        let psi_lo = v.annulus - v.annulus_err + v.ball;
        let eta_v = c.r / (c.r + v.phi_v);
        let margin = eta_v * psi_lo - s_hi;
        out.push(verdict(
            HypothesisName::H2Star,
            margin,
            format!(
                "sup-level {:.6e} < r/(r+Phi(v_delta)) * Psi(v_delta) = {:.6e}",
                c.sup_level,
                eta_v * v.psi()
            ),
        ));
    } else {
        let eta_lo = conservative_eta(spec, geo, c);
        let psi_lo = c.annulus - c.annulus_err + c.ball;
        let margin = eta_lo * psi_lo - s_hi;
        let name = if autonomous {
            HypothesisName::H2Prime
        } else {
            HypothesisName::H2
        };
        let pointwise = if autonomous {
            format!(
                "; pointwise form: max F = {:.6e} vs eta/meas * Psi = {:.6e}",
                c.sup_level / geo.meas,
                c.eta * c.psi_u() / geo.meas
            )
        } else {
            String::new()
        };
        out.push(verdict(
            name,
            margin,
            format!(
                "sup-level {:.6e} < eta * Psi(u_delta) = {:.6e}{pointwise}",
                c.sup_level,
                c.eta * c.psi_u()
            ),
        ));
    }

    // growth checks: validated (sampled), not proven
    let outer_radius = match &spec.domain {
        DomainSpec::Ball { radius, .. } => *radius,
        DomainSpec::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| (u - l) * (u - l) / 4.0)
            .sum::<f64>()
            .sqrt(),
    };
    out.push(growth_verdict(spec, outer_radius));

    // sufficient conditions (j): only stated for the single-annulus bump
    if c.variant.is_none() {
        let tau = geo.tau;
        if autonomous {
            out.push(verdict(
                HypothesisName::J1Prime,
                c.annulus - c.annulus_err,
                format!("G_F = {:.6e} >= 0", c.annulus),
            ));
            let (_, max_g) =
                numerics::max_on_interval(|xi| nl.g_primitive(xi), -gamma, gamma, MAX_SAMPLES);
            let rhs = c.eta * ball_measure(spec.dim, tau / 2.0) / geo.meas * nl.g_primitive(delta);
            out.push(verdict(
                HypothesisName::J2Prime,
                rhs - max_g,
                format!("max_(|xi|<=gamma) F = {max_g:.6e} < eta meas(B)/meas(Omega) F(delta) = {rhs:.6e}"),
            ));
        } else {
            let mut min_f = f64::INFINITY;
            for i in 0..=32 {
                let l = tau / 2.0 + (tau / 2.0) * i as f64 / 32.0;
                for j in 0..=64 {
                    let xi = delta * j as f64 / 64.0;
                    min_f = min_f.min(nl.eval_big_f(Some(l), xi));
                }
            }
            out.push(verdict(
                HypothesisName::J1,
                min_f,
                format!("min F(x, xi) on annulus x [0, delta] = {min_f:.6e} (sampled)"),
            ));
            let margin = c.eta * c.ball - (c.sup_level + c.sup_level_err);
            out.push(verdict(
                HypothesisName::J2,
                margin,
                format!(
                    "sup-level {:.6e} < eta * ball term = {:.6e}",
                    c.sup_level,
                    c.eta * c.ball
                ),
            ));
        }
    }

    out
}

// eta evaluated at the sigma error-interval end that minimizes it (eta is
// decreasing in sigma, so use the upper end).
fn conservative_eta(spec: &ProblemSpec, geo: &GeometryData, c: &Constants) -> f64 {
    testfun::eta_with_sigma(
        spec.gamma,
        spec.delta,
        spec.p,
        spec.dim,
        geo.tau,
        geo.k,
        c.sigma.value + c.sigma.error_estimate,
    )
}

impl VariantComputed {
    fn psi(&self) -> f64 {
        self.annulus + self.ball
    }
}

fn growth_verdict(spec: &ProblemSpec, outer_radius: f64) -> HypothesisVerdict {
    use crate::nonlinearity::GrowthForm;
    let nl = &spec.nonlinearity;
    let p = spec.p;

    // log-spaced |xi| grid up to 1e6, both signs, plus a linear patch near 0
    let grid: Vec<f64> = (0..=120)
        .map(|i| 10f64.powf(-2.0 + 8.0 * i as f64 / 120.0))
        .chain((1..=16).map(|i| i as f64 / 16.0))
        .collect();

    match &nl.growth {
        GrowthForm::H3 { s, alpha } => {
            if *s >= p {
                return verdict(
                    HypothesisName::H3,
                    p - s,
                    format!("declared s = {s} must be < p = {p}"),
                );
            }
            let radii: Vec<f64> = (0..=8).map(|i| outer_radius * i as f64 / 8.0).collect();
            let mut min_margin = f64::INFINITY;
            for &l in &radii {
                for &t in &grid {
                    for xi in [t, -t] {
                        let bound = alpha.eval(l) * (1.0 + xi.abs().powf(*s));
                        let val = nl.eval_big_f(Some(l), xi);
                        min_margin = min_margin.min(bound - val);
                    }
                }
            }
            verdict(
                HypothesisName::H3,
                min_margin,
                format!("F(x,xi) <= alpha(x)(1+|xi|^{s}) validated (sampled), min slack {min_margin:.6e}"),
            )
        }
        GrowthForm::H3Prime { s, b } => {
            if *s >= p {
                return verdict(
                    HypothesisName::H3Prime,
                    p - s,
                    format!("declared s = {s} must be < p = {p}"),
                );
            }
            let mut min_margin = f64::INFINITY;
            for &t in &grid {
                for xi in [t, -t] {
                    let bound = b * (1.0 + xi.abs().powf(*s));
                    min_margin = min_margin.min(bound - nl.g_primitive(xi));
                }
            }
            verdict(
                HypothesisName::H3Prime,
                min_margin,
                format!("F(xi) <= {b:.6e}(1+|xi|^{s}) validated (sampled), min slack {min_margin:.6e}"),
            )
        }
        GrowthForm::H3Star { s } => {
            if *s < 1.0 || *s > p {
                return verdict(
                    HypothesisName::H3Star,
                    (p - s).min(s - 1.0),
                    format!("declared s = {s} must lie in [1, p] with p = {p}"),
                );
            }
            // decreasing-tail test on the ratio |f(t)| / |t|^(s-1)
            let tail: Vec<f64> = (0..=40)
                .map(|i| 10f64.powf(6.0 * i as f64 / 40.0))
                .collect();
            let mut peak: f64 = 0.0;
            let mut ratios = Vec::new();
            for &t in &tail {
                let rho = nl.g(t).abs().max(nl.g(-t).abs()) / t.powf(s - 1.0);
                peak = peak.max(rho);
                ratios.push(rho);
            }
            let last = *ratios.last().unwrap();
            let tail_ok = ratios[ratios.len() - 10..]
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
            let margin = if tail_ok {
                0.01 * (1.0 + peak) - last
            } else {
                -last.max(1e-3)
            };
            verdict(
                HypothesisName::H3Star,
                margin,
                format!(
                    "f(t)/|t|^(s-1) -> 0 validated (sampled): peak {peak:.4e}, final {last:.4e}, tail {}",
                    if tail_ok { "decreasing" } else { "not decreasing" }
                ),
            )
        }
    }
}

/// The certified intervals. Requires a positive (h2)-variant margin so
/// that lambda1's denominator is positive; lambda2 is +infinity exactly
/// when the sup-level integral vanishes.
pub fn lambda_interval(spec: &ProblemSpec, c: &Constants) -> Option<IntervalPair> {
    let (phi, psi) = match &c.variant {
        Some(v) => (v.phi_v, v.psi()),
        None => (c.phi_u, c.psi_u()),
    };
    let s = c.sup_level;
    if psi - s <= 0.0 {
        return None;
    }
    let lambda1 = phi / (psi - s);
    let lambda2 = if s == 0.0 {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(c.r / s)
    };
    let denom3 = (c.r / phi) * psi - s;
    if denom3 <= 0.0 {
        return None;
    }
    let lambda3h = spec.h * c.r / denom3;
    let overlap = if lambda3h <= lambda1 {
        Overlap::Disjoint
    } else {
        Overlap::Overlapping
    };
    let nonempty = lambda2.greater_than(lambda1);
    Some(IntervalPair {
        lambda1,
        lambda2,
        lambda3h,
        h: spec.h,
        overlap,
        nonempty,
    })
}

/// Full pipeline: geometry, constants, hypothesis verdicts, intervals.
/// A failed hypothesis yields a report with `granted = false`, not an
/// error; errors are reserved for invalid specs and quadrature failures.
pub fn certify(spec: &ProblemSpec) -> Result<CertificateReport, CertifyError> {
    spec.validate()?;
    let geo = GeometryData::resolve(spec)?;
    let consts = compute_constants(spec, &geo)?;
    let hypotheses = check_hypotheses(spec, &geo, &consts);

    let holds = |name: HypothesisName| hypotheses.iter().any(|v| v.name == name && v.holds);
    let h2_ok = holds(HypothesisName::H2)
        || holds(HypothesisName::H2Prime)
        || holds(HypothesisName::H2Star);
    let growth_ok =
        holds(HypothesisName::H3) || holds(HypothesisName::H3Prime) || holds(HypothesisName::H3Star);
    let granted = holds(HypothesisName::H1) && h2_ok && growth_ok;

    let intervals = if h2_ok {
        lambda_interval(spec, &consts)
    } else {
        None
    };

    let mut notes = vec![
        match geo.k_source {
            KSource::TalentiBound => {
                "k resolved to the Talenti upper bound, evaluated exactly as printed \
                 (with the N(N-2)pi grouping); certified intervals shrink but stay valid"
                    .to_string()
            }
            KSource::UserOverride => {
                "k supplied by the user; the certificate is valid only if it bounds the \
                 true embedding constant from above"
                    .to_string()
            }
        },
        "annulus Laplacian coefficient read as 32*delta; pinned by the Phi(u_delta) \
         quadrature cross-check"
            .to_string(),
        "growth verdicts are validated (sampled), not proven".to_string(),
    ];
    if consts.variant.is_some() {
        notes.push(
            "general-annulus variant in use: (h1) checked with K(r1, r2) and (h2*) replaces (h2)"
                .to_string(),
        );
    }

    let quad_error_budget = consts.sigma.error_estimate
        + consts.sup_level_err
        + consts.annulus_err
        + consts
            .variant
            .as_ref()
            .map(|v| v.sigma_gen.error_estimate + v.annulus_err)
            .unwrap_or(0.0);

    Ok(CertificateReport {
        dim: spec.dim,
        p: spec.p,
        gamma: spec.gamma,
        delta: spec.delta,
        h: spec.h,
        k: geo.k,
        k_source: match geo.k_source {
            KSource::TalentiBound => "talenti_bound".to_string(),
            KSource::UserOverride => "user_override".to_string(),
        },
        tau: geo.tau,
        center: geo.center.clone(),
        meas: geo.meas,
        sigma: consts.sigma.value,
        k_const: consts.k_tau,
        eta: consts.eta,
        r: consts.r,
        phi_u_delta: consts.phi_u,
        sup_level_integral: consts.sup_level,
        annulus_integral: consts.annulus,
        ball_term: consts.ball,
        psi_u_delta: consts.psi_u(),
        variant: consts.variant.as_ref().map(|v| VariantConstants {
            r1: v.r1,
            r2: v.r2,
            sigma_general: v.sigma_gen.value,
            k_general: v.k_gen,
            phi_v_delta: v.phi_v,
            annulus_integral: v.annulus,
            ball_term: v.ball,
        }),
        hypotheses,
        intervals,
        granted,
        quad_error_budget,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{Nonlinearity, PowerTerm, RadialPoly};
    use crate::problem::SolverSettings;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec(nl: Nonlinearity, domain: DomainSpec, dim: usize, p: f64) -> ProblemSpec {
        ProblemSpec {
            dim,
            p,
            domain,
            nonlinearity: nl,
            gamma: 2.0,
            delta: 8.0,
            h: 2.0,
            k_override: None,
            annulus: None,
            quad_tol: 1e-10,
            solver: SolverSettings::default(),
        }
    }

    fn unit_ball(dim: usize) -> DomainSpec {
        DomainSpec::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    #[test]
    fn sup_level_flat_catalog_entry_is_zero() {
        let s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, _) = sup_level_integral(&s, &geo, 2.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn sup_level_linear_f() {
        // f(t) = t: F = xi^2/2, gamma = 1, meas = 2 -> 1
        let nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 1.0, q: 2.0 }]);
        let b = DomainSpec::Box {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 2.0],
        };
        let mut s = spec(nl, b, 2, 2.0);
        s.gamma = 1.0;
        s.k_override = Some(0.5); // N = 2 has no Talenti bound
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, _) = sup_level_integral(&s, &geo, 1.0).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn sup_level_cubic_on_ball() {
        // f(t) = 3t^2: F = xi^3, max on [-2, 2] is 8, meas = 4pi/3
        let nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 3.0, q: 3.0 }]);
        let s = spec(nl, unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, _) = sup_level_integral(&s, &geo, 2.0).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0 * 8.0, max_relative = 1e-8);
    }

    #[test]
    fn annulus_integral_zero_cases() {
        // f identically zero
        let s = spec(
            Nonlinearity::power_sum(vec![]),
            unit_ball(3),
            3,
            2.0,
        );
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, _) = annulus_f_integral(&s, &geo, TestVariant::UDelta).unwrap();
        assert_eq!(v, 0.0);

        // flat catalog entry with delta <= 2: the profile never exceeds 2
        let mut s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        s.delta = 2.0;
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, _) = annulus_f_integral(&s, &geo, TestVariant::UDelta).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn annulus_integral_polynomial_oracle() {
        // f = 1 (F = xi): omega_2 int 16 s^2 (1-s)^2 * s^2 ds over [1/2, 1]
        // = 64 pi * (s^5/5 - 2 s^6/6 + s^7/7 evaluated) = 64 pi * 33/4480
        // = 33 pi / 70
        let nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 1.0, q: 1.0 }]);
        let mut s = spec(nl, unit_ball(3), 3, 2.0);
        s.delta = 1.0;
        let geo = GeometryData::resolve(&s).unwrap();
        let (v, err) = annulus_f_integral(&s, &geo, TestVariant::UDelta).unwrap();
        let oracle = {
            // int_{1/2}^1 (s^4 - 2 s^5 + s^6) ds, term by term
            let term = |c: f64, d: i32| c * (1.0 - 0.5f64.powi(d + 1)) / (d + 1) as f64;
            16.0 * 4.0 * PI * (term(1.0, 4) + term(-2.0, 5) + term(1.0, 6))
        };
        assert_relative_eq!(oracle, 33.0 * PI / 70.0, max_relative = 1e-14);
        assert_relative_eq!(v, oracle, max_relative = 1e-10);
        assert!(err < 1e-8);
    }

    #[test]
    fn ball_term_closed_form() {
        // autonomous: meas(B(tau/2)) * F(delta)
        let mut s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        s.delta = 8.0;
        let expected = ball_measure(3, 0.5) * (2.0 / 3.0) * 6.0f64.powf(1.5);
        assert_relative_eq!(ball_level_term(&s, 0.5), expected, max_relative = 1e-13);
    }

    #[test]
    fn example36_certificate_structure() {
        let s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        let report = certify(&s).unwrap();
        assert!(report.granted);
        assert_eq!(report.sup_level_integral, 0.0);
        let iv = report.intervals.as_ref().unwrap();
        assert!(iv.lambda2.is_infinite());
        assert!(iv.nonempty);
        // lambda_{3,h} = h * lambda1 when the sup-level integral vanishes
        assert_relative_eq!(iv.lambda3h, s.h * iv.lambda1, max_relative = 1e-10);
        // lambda1 equals Phi(u_delta) / Psi(u_delta) here
        assert_relative_eq!(
            iv.lambda1,
            report.phi_u_delta / report.psi_u_delta,
            max_relative = 1e-12
        );
        for name in [
            HypothesisName::H1,
            HypothesisName::H2Prime,
            HypothesisName::H3Star,
            HypothesisName::J1Prime,
            HypothesisName::J2Prime,
        ] {
            assert!(report.verdict(name).unwrap().holds, "{name:?}");
        }
    }

    #[test]
    fn zero_nonlinearity_denied() {
        let s = spec(Nonlinearity::power_sum(vec![]), unit_ball(3), 3, 2.0);
        let report = certify(&s).unwrap();
        assert!(!report.granted);
        assert!(report.intervals.is_none());
        let h2 = report.verdict(HypothesisName::H2Prime).unwrap();
        assert!(!h2.holds);
    }

    #[test]
    fn autonomous_and_wrapped_separable_agree() {
        let auto = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        let wrapped = spec(
            Nonlinearity::example36().with_spatial(RadialPoly::constant(1.0)),
            unit_ball(3),
            3,
            2.0,
        );
        let ra = certify(&auto).unwrap();
        let rw = certify(&wrapped).unwrap();
        assert!(ra.granted && rw.granted);
        for (x, y, what) in [
            (ra.sup_level_integral, rw.sup_level_integral, "sup-level"),
            (ra.annulus_integral, rw.annulus_integral, "annulus"),
            (ra.ball_term, rw.ball_term, "ball"),
            (ra.eta, rw.eta, "eta"),
            (ra.phi_u_delta, rw.phi_u_delta, "phi"),
        ] {
            let denom = x.abs().max(1e-300);
            assert!(
                (x - y).abs() / denom <= 1e-10 || (x == 0.0 && y.abs() < 1e-12),
                "{what}: {x} vs {y}"
            );
        }
        let ia = ra.intervals.unwrap();
        let iw = rw.intervals.unwrap();
        assert_relative_eq!(ia.lambda1, iw.lambda1, max_relative = 1e-10);
    }

    #[test]
    fn variant_reduction_reproduces_base_pipeline() {
        let mut with_variant = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        with_variant.annulus = Some((0.5, 1.0)); // (tau/2, tau)
        let base = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);

        let rv = certify(&with_variant).unwrap();
        let rb = certify(&base).unwrap();
        assert!(rv.granted);

        let variant = rv.variant.as_ref().unwrap();
        assert_relative_eq!(variant.k_general, rb.k_const, max_relative = 1e-10);
        assert_relative_eq!(variant.phi_v_delta, rb.phi_u_delta, max_relative = 1e-10);

        let m_star = rv.verdict(HypothesisName::H2Star).unwrap().margin;
        let m_base = rb.verdict(HypothesisName::H2Prime).unwrap().margin;
        assert_relative_eq!(m_star, m_base, max_relative = 1e-8);

        let iv = rv.intervals.unwrap();
        let ib = rb.intervals.unwrap();
        assert_relative_eq!(iv.lambda1, ib.lambda1, max_relative = 1e-10);
    }

    #[test]
    fn separable_certificate_with_hand_checked_integrals() {
        // a(l) = 1 + l^2 on the unit ball, g flat below 1 with sqrt growth
        let nl = Nonlinearity::flat_then_power(1.0, 0.5, 1.0).with_spatial(RadialPoly {
            coeffs: vec![1.0, 0.0, 1.0],
        });
        let mut s = spec(nl, unit_ball(3), 3, 2.0);
        s.gamma = 1.5;
        s.delta = 3.0;
        let geo = GeometryData::resolve(&s).unwrap();

        // int_Omega a = omega_2 (1/3 + 1/5) = 32 pi / 15; a >= 0 so the
        // sup-level integral is that times max G on [-gamma, gamma]
        let max_g = (2.0 / 3.0) * 0.5f64.powf(1.5);
        let expected_s = 32.0 * PI / 15.0 * max_g;
        let (sv, _) = sup_level_integral(&s, &geo, s.gamma).unwrap();
        assert_relative_eq!(sv, expected_s, max_relative = 1e-9);

        // int_{B(1/2)} a = omega_2 (1/24 + 1/160) = 4 pi 23/480
        let g_delta = (2.0 / 3.0) * 2.0f64.powf(1.5);
        let expected_ball = 4.0 * PI * 23.0 / 480.0 * g_delta;
        assert_relative_eq!(
            ball_level_term(&s, 0.5),
            expected_ball,
            max_relative = 1e-13
        );

        // the full pipeline runs and reports the non-autonomous verdict set
        let report = certify(&s).unwrap();
        assert!(report.verdict(HypothesisName::H2).is_some());
        assert!(report.verdict(HypothesisName::H3).is_some());
        assert!(report.verdict(HypothesisName::J1).is_some());
        assert!(report.verdict(HypothesisName::J2).is_some());
        assert!(report.verdict(HypothesisName::H3).unwrap().holds);
    }

    #[test]
    fn interval_monotonicities() {
        // finite lambda2 setup: flat-then-power with a user k
        let nl = Nonlinearity::flat_then_power(1.0, 0.5, 1.0);
        let mut s = spec(nl, unit_ball(3), 3, 2.0);
        s.gamma = 1.05;
        s.delta = 2.0;
        s.k_override = Some(0.05);
        let r1 = certify(&s).unwrap();
        assert!(r1.granted, "hypotheses: {:?}", r1.hypotheses);
        let i1 = r1.intervals.clone().unwrap();
        let l2_1 = i1.lambda2.finite().unwrap();
        assert!(i1.nonempty && i1.lambda1 < l2_1);

        // lambda2 strictly decreasing in k, lambda1 unchanged
        let mut s_bigger_k = s.clone();
        s_bigger_k.k_override = Some(0.06);
        let r2 = certify(&s_bigger_k).unwrap();
        let i2 = r2.intervals.clone().unwrap();
        assert!(i2.lambda2.finite().unwrap() < l2_1);
        assert_relative_eq!(i2.lambda1, i1.lambda1, max_relative = 1e-10);

        // lambda_{3,h} strictly increasing in h
        let mut s_bigger_h = s.clone();
        s_bigger_h.h = 3.0;
        let r3 = certify(&s_bigger_h).unwrap();
        assert!(r3.intervals.unwrap().lambda3h > i1.lambda3h);
    }

    #[test]
    fn eta_equals_r_over_r_plus_phi() {
        let s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let c = compute_constants(&s, &geo).unwrap();
        assert_relative_eq!(c.eta, c.r / (c.r + c.phi_u), max_relative = 1e-12);
    }

    #[test]
    fn h1_margin_implies_phi_above_r() {
        let s = spec(Nonlinearity::example36(), unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let c = compute_constants(&s, &geo).unwrap();
        let verdicts = check_hypotheses(&s, &geo, &c);
        let h1 = verdicts
            .iter()
            .find(|v| v.name == HypothesisName::H1)
            .unwrap();
        assert!(h1.holds);
        assert!(c.phi_u > c.r);
    }

    #[test]
    fn growth_failure_detected() {
        // f(t) = sign(t) |t|^2 declares s = 2 = p: not sub-p, must fail
        let nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 1.0, q: 3.0 }]);
        let s = spec(nl, unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let c = compute_constants(&s, &geo).unwrap();
        let verdicts = check_hypotheses(&s, &geo, &c);
        let growth = verdicts
            .iter()
            .find(|v| v.name == HypothesisName::H3Prime)
            .unwrap();
        assert!(!growth.holds);
    }

    #[test]
    fn h3star_detects_non_vanishing_ratio() {
        // f(t) = sign(t)|t|^(p-1) with declared s = p: ratio tends to 1
        let mut nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 1.0, q: 2.0 }]);
        nl.growth = crate::nonlinearity::GrowthForm::H3Star { s: 2.0 };
        let s = spec(nl, unit_ball(3), 3, 2.0);
        let geo = GeometryData::resolve(&s).unwrap();
        let c = compute_constants(&s, &geo).unwrap();
        let verdicts = check_hypotheses(&s, &geo, &c);
        let growth = verdicts
            .iter()
            .find(|v| v.name == HypothesisName::H3Star)
            .unwrap();
        assert!(!growth.holds, "constant ratio must not pass the tail test");
    }
}
