//! The nonlinearity catalog: every entry carries an exact primitive and
//! declared growth metadata, so hypothesis checks never run on a black box.
//!
//! Spatial dependence is restricted to the separable form
//! f(x, t) = a(|x - x0|) g(t) with polynomial radial factor `a`; this keeps
//! all certificate integrals one-dimensional and exact to quadrature
//! tolerance.

use crate::numerics;

/// Polynomial in the radial distance l = |x - x0| from the incenter.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoly {
    pub coeffs: Vec<f64>,
}

impl RadialPoly {
    pub fn constant(c: f64) -> Self {
        RadialPoly { coeffs: vec![c] }
    }

    pub fn eval(&self, l: f64) -> f64 {
        // Horner
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * l + c)
    }

    /// Exact value of the weighted moment  int_{r0}^{r1} a(l) l^(n-1) dl.
    pub fn weighted_integral(&self, r0: f64, r1: f64, n: usize) -> f64 {
        let mut total = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate() {
            let d = (n + j) as f64;
            total += c * (r1.powf(d) - r0.powf(d)) / d;
        }
        total
    }

    /// Sign-change abscissas of a(l) inside (lo, hi), for kink splitting of
    /// |a|. Grid scan plus Brent refinement; adequate for the low-degree
    /// factors of the catalog.
    pub fn sign_changes(&self, lo: f64, hi: f64) -> Vec<f64> {
        let samples = 64 * (self.coeffs.len().max(2));
        let mut roots = Vec::new();
        let mut prev_t = lo;
        let mut prev_v = self.eval(lo);
        for i in 1..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            let v = self.eval(t);
            if prev_v == 0.0 {
                roots.push(prev_t);
            } else if prev_v * v < 0.0 {
                if let Ok(r) = numerics::find_root(|x| self.eval(x), prev_t, t, 1e-14) {
                    roots.push(r);
                }
            }
            prev_t = t;
            prev_v = v;
        }
        roots
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1.0
    }
}

/// One power term c sign(t) |t|^(q-1); its exact primitive is c |t|^q / q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub q: f64,
}

/// Continuous piecewise polynomial with exact primitive. `breaks` are the
/// k interior breakpoints; `pieces` holds k+1 coefficient lists (constant
/// term first), the first valid on (-inf, breaks[0]), the last on
/// (breaks[k-1], +inf).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
    primitive_shift: Vec<f64>,
}

fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_primitive_raw(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (i + 1) as f64;
    }
    acc * t
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self, String> {
        if pieces.len() != breaks.len() + 1 {
            return Err(format!(
                "need {} pieces for {} breakpoints, got {}",
                breaks.len() + 1,
                breaks.len(),
                pieces.len()
            ));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err("breakpoints must be strictly increasing".into());
        }
        // continuity of f at each breakpoint, checked numerically
        for (i, &b) in breaks.iter().enumerate() {
            let left = poly_eval(&pieces[i], b);
            let right = poly_eval(&pieces[i + 1], b);
            if (left - right).abs() > 1e-9 * (1.0 + left.abs().max(right.abs())) {
                return Err(format!(
                    "pieces disagree at breakpoint {b}: {left} vs {right}"
                ));
            }
        }
        let mut pw = PiecewisePoly {
            primitive_shift: vec![0.0; pieces.len()],
            breaks,
            pieces,
        };
        pw.assemble_primitive();
        Ok(pw)
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breaks.iter().take_while(|&&b| t >= b).count()
    }

    // Integration constants so that F(0) = 0 exactly and F is continuous
    // across breakpoints.
    fn assemble_primitive(&mut self) {
        let j0 = self.piece_index(0.0);
        self.primitive_shift[j0] = -poly_primitive_raw(&self.pieces[j0], 0.0);
        for j in j0 + 1..self.pieces.len() {
            let b = self.breaks[j - 1];
            let upstream = poly_primitive_raw(&self.pieces[j - 1], b) + self.primitive_shift[j - 1];
            self.primitive_shift[j] = upstream - poly_primitive_raw(&self.pieces[j], b);
        }
        for j in (0..j0).rev() {
            let b = self.breaks[j];
            let upstream = poly_primitive_raw(&self.pieces[j + 1], b) + self.primitive_shift[j + 1];
            self.primitive_shift[j] = upstream - poly_primitive_raw(&self.pieces[j], b);
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        poly_eval(&self.pieces[self.piece_index(t)], t)
    }

    pub fn primitive(&self, t: f64) -> f64 {
        let j = self.piece_index(t);
        poly_primitive_raw(&self.pieces[j], t) + self.primitive_shift[j]
    }

    fn outer_degree(&self) -> usize {
        let deg = |c: &Vec<f64>| c.iter().rposition(|&v| v != 0.0).unwrap_or(0);
        deg(&self.pieces[0]).max(deg(self.pieces.last().unwrap()))
    }
}

/// Catalog entries for the t-factor g.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    /// g(t) = 0 for t < 2 and sqrt(t - 2) for t >= 2
    Example36,
    /// g(t) = sum c sign(t) |t|^(q-1)
    PowerSum(Vec<PowerTerm>),
    /// g(t) = 0 for t < threshold, scale (t - threshold)^exponent above it
    FlatThenPower {
        threshold: f64,
        exponent: f64,
        scale: f64,
    },
    Piecewise(PiecewisePoly),
}

/// Declared growth metadata. The certificate validates these by sampling;
/// it cannot prove them, and reports them as "validated (sampled)".
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthForm {
    /// F(x, xi) <= alpha(x) (1 + |xi|^s) with s < p, alpha integrable
    H3 { s: f64, alpha: RadialPoly },
    /// F(xi) <= b (1 + |xi|^s) with s < p
    H3Prime { s: f64, b: f64 },
    /// f(t) / |t|^(s-1) -> 0 as |t| -> infinity, 1 <= s <= p
    H3Star { s: f64 },
}

impl GrowthForm {
    pub fn s(&self) -> f64 {
        match self {
            GrowthForm::H3 { s, .. } | GrowthForm::H3Prime { s, .. } | GrowthForm::H3Star { s } => {
                *s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    /// optional separable radial factor a(|x - x0|)
    pub spatial: Option<RadialPoly>,
    pub growth: GrowthForm,
}

impl Nonlinearity {
    pub fn example36() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Example36,
            spatial: None,
            // g ~ t^(1/2) at infinity, so g(t)/|t|^(s-1) vanishes for s = 2
            growth: GrowthForm::H3Star { s: 2.0 },
        }
    }

    pub fn power_sum(terms: Vec<PowerTerm>) -> Self {
        let s = terms.iter().map(|t| t.q).fold(1.0_f64, f64::max);
        let b = terms
            .iter()
            .map(|t| t.coeff.abs() / t.q)
            .sum::<f64>()
            .max(1e-300);
        Nonlinearity {
            kind: NonlinearityKind::PowerSum(terms),
            spatial: None,
            growth: GrowthForm::H3Prime { s, b },
        }
    }

    pub fn flat_then_power(threshold: f64, exponent: f64, scale: f64) -> Self {
        let s = exponent + 1.0;
        let b = scale.abs() / (exponent + 1.0);
        Nonlinearity {
            kind: NonlinearityKind::FlatThenPower {
                threshold,
                exponent,
                scale,
            },
            spatial: None,
            growth: GrowthForm::H3Prime { s, b },
        }
    }

    pub fn piecewise(pw: PiecewisePoly) -> Self {
        let s = (pw.outer_degree() + 1) as f64;
        // sampled envelope constant, with headroom; validated later
        let mut b: f64 = 1e-300;
        for i in 0..=240 {
            let t = 10f64.powf(-2.0 + i as f64 / 30.0);
            for xi in [t, -t] {
                b = b.max(pw.primitive(xi) / (1.0 + xi.abs().powf(s)));
            }
        }
        Nonlinearity {
            kind: NonlinearityKind::Piecewise(pw),
            spatial: None,
            growth: GrowthForm::H3Prime { s, b: 2.0 * b },
        }
    }

    pub fn with_spatial(mut self, a: RadialPoly) -> Self {
        if let GrowthForm::H3Prime { s, b } = self.growth {
            // separable primitive a(x) G(xi) gets a constant integrable
            // bound alpha = b sup|a|, sampled with headroom on [0, 16];
            // override via the config for domains beyond that range
            let sup_a = (0..=512)
                .map(|i| a.eval(16.0 * i as f64 / 512.0).abs())
                .fold(0.0f64, f64::max);
            self.growth = GrowthForm::H3 {
                s,
                alpha: RadialPoly::constant(b * sup_a.max(1e-300) * 1.01),
            };
        }
        self.spatial = Some(a);
        self
    }

    pub fn is_autonomous(&self) -> bool {
        match &self.spatial {
            None => true,
            Some(a) => a.is_one(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match &self.kind {
            NonlinearityKind::Example36 => {}
            NonlinearityKind::PowerSum(terms) => {
                if terms.iter().any(|t| t.q < 1.0) {
                    return Err("power terms require q >= 1".into());
                }
            }
            NonlinearityKind::FlatThenPower {
                threshold,
                exponent,
                ..
            } => {
                if *threshold < 0.0 {
                    return Err("flat threshold must be nonnegative".into());
                }
                if *exponent <= 0.0 {
                    return Err("flat-then-power exponent must be positive".into());
                }
            }
            NonlinearityKind::Piecewise(_) => {} // continuity checked on construction
        }
        if self.growth.s() < 1.0 {
            return Err("declared growth exponent s must be at least 1".into());
        }
        if let Some(a) = &self.spatial {
            if a.coeffs.is_empty() {
                return Err("spatial factor needs at least one coefficient".into());
            }
        }
        Ok(())
    }

    /// t-factor g(t); for autonomous entries this is f itself.
    pub fn g(&self, t: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Example36 => {
                if t < 2.0 {
                    0.0
                } else {
                    (t - 2.0).sqrt()
                }
            }
            NonlinearityKind::PowerSum(terms) => terms
                .iter()
                .map(|term| {
                    if t == 0.0 {
                        0.0
                    } else {
                        term.coeff * t.signum() * t.abs().powf(term.q - 1.0)
                    }
                })
                .sum(),
            NonlinearityKind::FlatThenPower {
                threshold,
                exponent,
                scale,
            } => {
                if t < *threshold {
                    0.0
                } else {
                    scale * (t - threshold).powf(*exponent)
                }
            }
            NonlinearityKind::Piecewise(pw) => pw.eval(t),
        }
    }

    /// Exact primitive G(xi) = int_0^xi g; G(0) = 0 for every entry.
    pub fn g_primitive(&self, xi: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Example36 => {
                if xi < 2.0 {
                    0.0
                } else {
                    2.0 * (xi - 2.0).powf(1.5) / 3.0
                }
            }
            NonlinearityKind::PowerSum(terms) => terms
                .iter()
                .map(|term| {
                    if xi == 0.0 {
                        0.0
                    } else {
                        term.coeff * xi.abs().powf(term.q) / term.q
                    }
                })
                .sum(),
            NonlinearityKind::FlatThenPower {
                threshold,
                exponent,
                scale,
            } => {
                if xi < *threshold {
                    0.0
                } else {
                    scale * (xi - threshold).powf(exponent + 1.0) / (exponent + 1.0)
                }
            }
            NonlinearityKind::Piecewise(pw) => pw.primitive(xi),
        }
    }

    /// f(x, t) at radial distance l from the incenter. `l` must be given
    /// exactly when a spatial factor is present.
    pub fn eval_f(&self, l: Option<f64>, t: f64) -> f64 {
        match (&self.spatial, l) {
            (Some(a), Some(l)) => a.eval(l) * self.g(t),
            (Some(_), None) => {
                debug_assert!(false, "spatial nonlinearity evaluated without a point");
                f64::NAN
            }
            (None, _) => self.g(t),
        }
    }

    /// F(x, xi) by exact antiderivative; same point convention as `eval_f`.
    pub fn eval_big_f(&self, l: Option<f64>, xi: f64) -> f64 {
        match (&self.spatial, l) {
            (Some(a), Some(l)) => a.eval(l) * self.g_primitive(xi),
            (Some(_), None) => {
                debug_assert!(false, "spatial nonlinearity evaluated without a point");
                f64::NAN
            }
            (None, _) => self.g_primitive(xi),
        }
    }

    /// Breakpoints where g or G has a kink, used by quadrature callers.
    pub fn g_kinks(&self) -> Vec<f64> {
        match &self.kind {
            NonlinearityKind::Example36 => vec![2.0],
            NonlinearityKind::PowerSum(_) => vec![0.0],
            NonlinearityKind::FlatThenPower { threshold, .. } => vec![*threshold],
            NonlinearityKind::Piecewise(pw) => pw.breaks.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn example36_values() {
        let nl = Nonlinearity::example36();
        assert_eq!(nl.eval_f(None, 1.9), 0.0);
        assert_relative_eq!(nl.eval_f(None, 6.0), 2.0, max_relative = 1e-15);
        assert_eq!(nl.eval_big_f(None, 2.0), 0.0);
        assert_relative_eq!(nl.eval_big_f(None, 3.0), 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(nl.eval_big_f(None, 0.0), 0.0);
    }

    #[test]
    fn power_sum_odd_extension() {
        let nl = Nonlinearity::power_sum(vec![PowerTerm { coeff: 1.0, q: 3.0 }]);
        // sign(t) |t|^2 at t = -2
        assert_relative_eq!(nl.eval_f(None, -2.0), -4.0, max_relative = 1e-15);
        assert_relative_eq!(nl.eval_big_f(None, -2.0), 8.0 / 3.0, max_relative = 1e-15);
        assert_eq!(nl.eval_big_f(None, 0.0), 0.0);
    }

    #[test]
    fn piecewise_primitive_is_continuous() {
        // f(t) = 0 for t < 2, t - 2 for t >= 2 (a C^0 kink at 2)
        let pw = PiecewisePoly::new(vec![2.0], vec![vec![0.0], vec![-2.0, 1.0]]).unwrap();
        let nl = Nonlinearity::piecewise(pw);
        assert_eq!(nl.eval_big_f(None, 0.0), 0.0);
        let below = nl.eval_big_f(None, 2.0 - 1e-9);
        let above = nl.eval_big_f(None, 2.0 + 1e-9);
        assert!((below - above).abs() < 1e-12);
        assert_relative_eq!(nl.eval_big_f(None, 3.0), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn discontinuous_pieces_rejected() {
        assert!(PiecewisePoly::new(vec![1.0], vec![vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let entries = [
            Nonlinearity::example36(),
            Nonlinearity::power_sum(vec![
                PowerTerm { coeff: 1.0, q: 3.0 },
                PowerTerm { coeff: -0.5, q: 1.5 },
            ]),
            Nonlinearity::flat_then_power(1.0, 0.5, 2.0),
        ];
        for nl in &entries {
            for xi in [-3.0, -0.7, 0.0, 0.4, 2.5, 6.0] {
                let (lo, hi) = if xi >= 0.0 { (0.0, xi) } else { (xi, 0.0) };
                let expected = if lo == hi {
                    0.0
                } else {
                    let sign = if xi >= 0.0 { 1.0 } else { -1.0 };
                    sign * crate::numerics::integrate(|t| nl.g(t), lo, hi, 1e-12, &nl.g_kinks())
                        .unwrap()
                        .value
                };
                let got = nl.eval_big_f(None, xi);
                assert!(
                    (got - expected).abs() <= 1e-10 * (1.0 + expected.abs()),
                    "kind {:?} xi {xi}: {got} vs {expected}",
                    nl.kind
                );
            }
        }
    }

    #[test]
    fn example36_primitive_flat_then_nondecreasing() {
        let nl = Nonlinearity::example36();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let xi = -2.0 + 10.0 * i as f64 / 199.0;
            let v = nl.eval_big_f(None, xi);
            if xi <= 2.0 {
                assert_eq!(v, 0.0);
            }
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn radial_poly_integral_and_roots() {
        // a(l) = 1 - 2 l: changes sign at 1/2
        let a = RadialPoly {
            coeffs: vec![1.0, -2.0],
        };
        let roots = a.sign_changes(0.0, 1.0);
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0], 0.5, epsilon = 1e-10);
        // int_0^1 (1 - 2l) l^2 dl = 1/3 - 1/2 = -1/6
        assert_relative_eq!(a.weighted_integral(0.0, 1.0, 3), -1.0 / 6.0, max_relative = 1e-14);
    }
}
