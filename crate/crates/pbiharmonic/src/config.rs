//! Flat key-value config format with optional `[section]` headers.
//!
//! Sections are cosmetic; keys are global and case-sensitive. `#` starts a
//! comment. Vector values are whitespace-separated; power-sum terms are
//! comma-separated `coeff:q` pairs. The full grammar is documented in the
//! repository README.

use crate::nonlinearity::{GrowthForm, Nonlinearity, PiecewisePoly, PowerTerm, RadialPoly};
use crate::problem::{DomainSpec, ProblemSpec, SolverSettings, SpecError, DEFAULT_QUAD_TOL};
use std::collections::BTreeMap;

fn parse_f64(key: &str, value: &str) -> Result<f64, SpecError> {
    value.trim().parse::<f64>().map_err(|_| SpecError::InvalidValue {
        key: key.to_string(),
        reason: format!("expected a number, got `{value}`"),
    })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, SpecError> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| SpecError::InvalidValue {
            key: key.to_string(),
            reason: format!("expected a nonnegative integer, got `{value}`"),
        })
}

fn parse_vec(key: &str, value: &str) -> Result<Vec<f64>, SpecError> {
    value
        .split_whitespace()
        .map(|tok| parse_f64(key, tok))
        .collect()
}

const KNOWN_KEYS: &[&str] = &[
    "N", "p", "domain", "radius", "center", "lower", "upper", "f", "terms", "threshold",
    "exponent", "scale", "breaks", "a", "gamma", "delta", "h", "k", "r1", "r2", "quad_tol",
    "growth", "s", "b", "alpha", "n", "tol", "max_iter", "seed",
];

/// Parses the documented key-value format into a validated ProblemSpec.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, SpecError> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            continue; // cosmetic section header
        }
        let (key, value) = line.split_once('=').ok_or_else(|| SpecError::InvalidValue {
            key: line.to_string(),
            reason: "expected `key = value`".to_string(),
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("piece") {
            return Err(SpecError::UnknownKey(key));
        }
        kv.insert(key, value.trim().to_string());
    }

    let require = |key: &str| -> Result<&String, SpecError> {
        kv.get(key).ok_or_else(|| SpecError::MissingKey(key.into()))
    };

    let dim = parse_usize("N", require("N")?)?;
    let p = parse_f64("p", require("p")?)?;

    let domain = match require("domain")?.as_str() {
        "ball" => {
            let radius = parse_f64("radius", require("radius")?)?;
            let center = match kv.get("center") {
                Some(v) => parse_vec("center", v)?,
                None => vec![0.0; dim],
            };
            DomainSpec::Ball { center, radius }
        }
        "box" => DomainSpec::Box {
            lower: parse_vec("lower", require("lower")?)?,
            upper: parse_vec("upper", require("upper")?)?,
        },
        other => {
            return Err(SpecError::InvalidValue {
                key: "domain".to_string(),
                reason: format!("expected `ball` or `box`, got `{other}`"),
            })
        }
    };

    let mut nonlinearity = match require("f")?.as_str() {
        "example36" => Nonlinearity::example36(),
        "powersum" => {
            let terms = match kv.get("terms") {
                None => Vec::new(),
                Some(spec) if spec.is_empty() => Vec::new(),
                Some(spec) => spec
                    .split(',')
                    .map(|pair| {
                        let (c, q) = pair.trim().split_once(':').ok_or_else(|| {
                            SpecError::InvalidValue {
                                key: "terms".to_string(),
                                reason: format!("expected `coeff:q`, got `{pair}`"),
                            }
                        })?;
                        Ok(PowerTerm {
                            coeff: parse_f64("terms", c)?,
                            q: parse_f64("terms", q)?,
                        })
                    })
                    .collect::<Result<Vec<_>, SpecError>>()?,
            };
            Nonlinearity::power_sum(terms)
        }
        "flatpower" => Nonlinearity::flat_then_power(
            parse_f64("threshold", require("threshold")?)?,
            parse_f64("exponent", require("exponent")?)?,
            parse_f64("scale", require("scale")?)?,
        ),
        "piecewise" => {
            let breaks = parse_vec("breaks", require("breaks")?)?;
            let mut pieces = Vec::new();
            for i in 0..=breaks.len() {
                let key = format!("piece{i}");
                let coeffs = parse_vec(&key, require(&key)?)?;
                pieces.push(coeffs);
            }
            let pw = PiecewisePoly::new(breaks, pieces).map_err(SpecError::Nonlinearity)?;
            Nonlinearity::piecewise(pw)
        }
        other => return Err(SpecError::UnknownKind(other.to_string())),
    };

    if let Some(a) = kv.get("a") {
        nonlinearity = nonlinearity.with_spatial(RadialPoly {
            coeffs: parse_vec("a", a)?,
        });
    }

    if let Some(form) = kv.get("growth") {
        let s = parse_f64("s", require("s")?)?;
        nonlinearity.growth = match form.as_str() {
            "h3star" => GrowthForm::H3Star { s },
            "h3prime" => GrowthForm::H3Prime {
                s,
                b: parse_f64("b", require("b")?)?,
            },
            "h3" => GrowthForm::H3 {
                s,
                alpha: RadialPoly {
                    coeffs: parse_vec("alpha", require("alpha")?)?,
                },
            },
            other => {
                return Err(SpecError::InvalidValue {
                    key: "growth".to_string(),
                    reason: format!("expected h3, h3prime or h3star, got `{other}`"),
                })
            }
        };
    }

    let annulus = match (kv.get("r1"), kv.get("r2")) {
        (Some(r1), Some(r2)) => Some((parse_f64("r1", r1)?, parse_f64("r2", r2)?)),
        (None, None) => None,
        _ => {
            return Err(SpecError::InvalidValue {
                key: "r1/r2".to_string(),
                reason: "both radii must be given together".to_string(),
            })
        }
    };

    let solver = SolverSettings {
        grid_n: match kv.get("n") {
            Some(v) => parse_usize("n", v)?,
            None => SolverSettings::default().grid_n,
        },
        residual_tol: match kv.get("tol") {
            Some(v) => parse_f64("tol", v)?,
            None => SolverSettings::default().residual_tol,
        },
        max_iter: match kv.get("max_iter") {
            Some(v) => parse_usize("max_iter", v)?,
            None => SolverSettings::default().max_iter,
        },
        seed: match kv.get("seed") {
            Some(v) => parse_usize("seed", v)? as u64,
            None => SolverSettings::default().seed,
        },
    };

    let spec = ProblemSpec {
        dim,
        p,
        domain,
        nonlinearity,
        gamma: parse_f64("gamma", require("gamma")?)?,
        delta: parse_f64("delta", require("delta")?)?,
        h: match kv.get("h") {
            Some(v) => parse_f64("h", v)?,
            None => 2.0,
        },
        k_override: match kv.get("k") {
            Some(v) => Some(parse_f64("k", v)?),
            None => None,
        },
        annulus,
        quad_tol: match kv.get("quad_tol") {
            Some(v) => parse_f64("quad_tol", v)?,
            None => DEFAULT_QUAD_TOL,
        },
        solver,
    };
    spec.validate()?;
    Ok(spec)
}

/// The Example-3.6-style reference configuration used across tests and
/// examples: unit ball in R^3, p = 2, flat-below-2 square-root
/// nonlinearity, gamma = 2, delta = 8.
pub const EXAMPLE36_CONFIG: &str = "\
# three-solution certificate for the flat square-root nonlinearity
[problem]
N = 3
p = 2
domain = ball
radius = 1
f = example36
gamma = 2
delta = 8
h = 2

[solver]
n = 200
tol = 1e-8
seed = 42
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::NonlinearityKind;

    #[test]
    fn reference_config_parses() {
        let spec = parse_spec(EXAMPLE36_CONFIG).unwrap();
        assert_eq!(spec.dim, 3);
        assert_eq!(spec.p, 2.0);
        assert!(matches!(spec.nonlinearity.kind, NonlinearityKind::Example36));
        assert_eq!(spec.gamma, 2.0);
        assert_eq!(spec.delta, 8.0);
        assert_eq!(spec.solver.grid_n, 200);
    }

    #[test]
    fn inadmissible_exponent_message() {
        let text = "N = 3\np = 1.4\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\n";
        let err = parse_spec(text).unwrap_err();
        assert_eq!(err.to_string(), "p must exceed max{1, N/2}");
    }

    #[test]
    fn boundary_of_admissibility() {
        // N = 1: max{1, N/2} = 1, so p = 1.1 passes
        let text = "N = 1\np = 1.1\ndomain = box\nlower = 0\nupper = 1\nf = powersum\nterms = 1:2\ngamma = 1\ndelta = 2\nk = 0.5\n";
        assert!(parse_spec(text).is_ok());
    }

    #[test]
    fn missing_and_unknown_keys() {
        let err = parse_spec("N = 3\np = 2\n").unwrap_err();
        assert!(matches!(err, SpecError::MissingKey(_)));

        let err = parse_spec("N = 3\np = 2\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, SpecError::UnknownKey(_)));

        let err = parse_spec(
            "N = 3\np = 2\ndomain = ball\nradius = 1\nf = mystery\ngamma = 2\ndelta = 8\n",
        )
        .unwrap_err();
        assert!(matches!(err, SpecError::UnknownKind(_)));
    }

    #[test]
    fn negative_parameters_rejected() {
        let text = "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = -2\ndelta = 8\n";
        assert!(parse_spec(text).is_err());
        let text = "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nh = 0.9\n";
        assert!(parse_spec(text).is_err());
    }

    #[test]
    fn piecewise_and_spatial_factor() {
        let text = "\
N = 3
p = 2
domain = ball
radius = 1
f = piecewise
breaks = 0
piece0 = 0 1
piece1 = 0 1
a = 1 0 -0.5
gamma = 1
delta = 2
";
        let spec = parse_spec(text).unwrap();
        assert!(spec.nonlinearity.spatial.is_some());
        assert!(!spec.nonlinearity.is_autonomous());
    }

    #[test]
    fn growth_override() {
        let text = "\
N = 3
p = 2
domain = ball
radius = 1
f = flatpower
threshold = 1
exponent = 0.5
scale = 1
growth = h3star
s = 1.8
gamma = 1
delta = 2
";
        let spec = parse_spec(text).unwrap();
        assert!(matches!(
            spec.nonlinearity.growth,
            GrowthForm::H3Star { s } if (s - 1.8).abs() < 1e-15
        ));
    }

    #[test]
    fn annulus_radii_must_come_in_pairs() {
        let text = "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nr1 = 0.5\n";
        assert!(parse_spec(text).is_err());
    }
}
