//! Problem specification: domain, exponent, nonlinearity and the
//! certificate/solver parameters, with all admissibility checks.

use crate::nonlinearity::Nonlinearity;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("p must exceed max{{1, N/2}}")]
    ExponentTooSmall,
    #[error("N must be at least 1")]
    BadDimension,
    #[error("{0} must be strictly positive")]
    NotPositive(&'static str),
    #[error("h must exceed 1")]
    BadH,
    #[error("ball radius must be positive")]
    BadRadius,
    #[error("box side lengths must be strictly positive")]
    BadBox,
    #[error("domain vectors must have length N = {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("annulus radii must satisfy 0 < r1 < r2")]
    BadAnnulus,
    #[error("annulus radius r2 = {r2} exceeds the inradius {tau}; B(x0, r2) must fit inside the domain")]
    AnnulusTooLarge { r2: f64, tau: f64 },
    #[error("nonlinearity: {0}")]
    Nonlinearity(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("unknown nonlinearity kind `{0}`")]
    UnknownKind(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

/// Supported domains. Both admit an exact measure, inradius and incenter.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl DomainSpec {
    pub fn validate(&self, dim: usize) -> Result<(), SpecError> {
        match self {
            DomainSpec::Ball { center, radius } => {
                if center.len() != dim {
                    return Err(SpecError::DimensionMismatch {
                        expected: dim,
                        got: center.len(),
                    });
                }
                if !(*radius > 0.0) {
                    return Err(SpecError::BadRadius);
                }
            }
            DomainSpec::Box { lower, upper } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(SpecError::DimensionMismatch {
                        expected: dim,
                        got: lower.len().max(upper.len()),
                    });
                }
                if lower.iter().zip(upper).any(|(l, u)| !(u - l > 0.0)) {
                    return Err(SpecError::BadBox);
                }
            }
        }
        Ok(())
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, DomainSpec::Ball { .. })
    }
}

/// Knobs for the radial solver and the sweep driver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// interior grid intervals (nodes are 0..=n)
    pub grid_n: usize,
    /// gradient-norm tolerance for accepting a critical point
    pub residual_tol: f64,
    pub max_iter: usize,
    /// seed for multistart initializations
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid_n: 200,
            residual_tol: 1e-8,
            max_iter: 50_000,
            seed: 42,
        }
    }
}

/// A fully validated problem instance. `lambda` is a runtime argument of
/// the solver commands, not part of the spec.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub p: f64,
    pub domain: DomainSpec,
    pub nonlinearity: Nonlinearity,
    pub gamma: f64,
    pub delta: f64,
    pub h: f64,
    pub k_override: Option<f64>,
    /// optional (r1, r2) selecting the general annulus test function
    pub annulus: Option<(f64, f64)>,
    pub quad_tol: f64,
    pub solver: SolverSettings,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

impl ProblemSpec {
    /// Enforces every invariant; called by the parser and by constructors.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.dim < 1 {
            return Err(SpecError::BadDimension);
        }
        if !(self.p > (1.0_f64).max(self.dim as f64 / 2.0)) {
            return Err(SpecError::ExponentTooSmall);
        }
        self.domain.validate(self.dim)?;
        if !(self.gamma > 0.0) {
            return Err(SpecError::NotPositive("gamma"));
        }
        if !(self.delta > 0.0) {
            return Err(SpecError::NotPositive("delta"));
        }
        if !(self.h > 1.0) {
            return Err(SpecError::BadH);
        }
        if let Some(k) = self.k_override {
            if !(k > 0.0) {
                return Err(SpecError::NotPositive("k"));
            }
        }
        if !(self.quad_tol > 0.0) {
            return Err(SpecError::NotPositive("quad_tol"));
        }
        if let Some((r1, r2)) = self.annulus {
            if !(r1 > 0.0 && r2 > r1) {
                return Err(SpecError::BadAnnulus);
            }
            let tau = crate::geometry::inradius_center(&self.domain).0;
            if r2 > tau + 1e-12 {
                return Err(SpecError::AnnulusTooLarge { r2, tau });
            }
        }
        self.nonlinearity
            .validate()
            .map_err(SpecError::Nonlinearity)?;
        Ok(())
    }
}
