//! Report records shared by the certificate and solver pipelines, plus a
//! JSON writer that prints every float with 17 significant digits so that
//! runs are byte-reproducible and cross-checkable from other languages.

use serde::ser::Serializer;
use serde::Serialize;
use std::io;

/// Extended real for interval endpoints; JSON cannot express infinity, so
/// the serialized form is either a number or the string "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PosInf => None,
        }
    }

    /// Comparison against a finite value, treating PosInf as larger than
    /// everything.
    pub fn greater_than(&self, x: f64) -> bool {
        match self {
            ExtReal::Finite(v) => *v > x,
            ExtReal::PosInf => true,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::PosInf => serializer.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisName {
    H1,
    H2,
    H2Star,
    H2Prime,
    H3,
    H3Prime,
    H3Star,
    J1,
    J2,
    J1Prime,
    J2Prime,
}

/// One checked inequality. `margin` is oriented so that positive means
/// satisfied; for strict paper inequalities `holds` is exactly margin > 0
/// after the quadrature error budget has been subtracted.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisVerdict {
    pub name: HypothesisName,
    pub holds: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    Disjoint,
    Overlapping,
}

/// The certified intervals: ]lambda1, lambda2[ plus the bound lambda_{3,h}
/// on the region containing the second interval.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalPair {
    pub lambda1: f64,
    pub lambda2: ExtReal,
    pub lambda3h: f64,
    pub h: f64,
    pub overlap: Overlap,
    pub nonempty: bool,
}

/// Constants of the two-radius (general annulus) pipeline, present only
/// when the spec supplies (r1, r2).
#[derive(Debug, Clone, Serialize)]
pub struct VariantConstants {
    pub r1: f64,
    pub r2: f64,
    pub sigma_general: f64,
    pub k_general: f64,
    pub phi_v_delta: f64,
    pub annulus_integral: f64,
    pub ball_term: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub dim: usize,
    pub p: f64,
    pub gamma: f64,
    pub delta: f64,
    pub h: f64,
    pub k: f64,
    pub k_source: String,
    pub tau: f64,
    pub center: Vec<f64>,
    pub meas: f64,
    /// sigma_{p,N}(tau)
    pub sigma: f64,
    /// K_{p,N}(tau)
    pub k_const: f64,
    pub eta: f64,
    pub r: f64,
    pub phi_u_delta: f64,
    /// int_Omega max_{|xi| <= gamma} F(x, xi) dx
    pub sup_level_integral: f64,
    /// R_F (or G_F in the autonomous case): the annulus part of Psi(u_delta)
    pub annulus_integral: f64,
    /// int_{B(x0, tau/2)} F(x, delta) dx
    pub ball_term: f64,
    /// annulus_integral + ball_term
    pub psi_u_delta: f64,
    pub variant: Option<VariantConstants>,
    pub hypotheses: Vec<HypothesisVerdict>,
    pub intervals: Option<IntervalPair>,
    /// all of (h1), (h2)-variant and the growth check hold
    pub granted: bool,
    /// accumulated quadrature error bound subtracted from margins
    pub quad_error_budget: f64,
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn verdict(&self, name: HypothesisName) -> Option<&HypothesisVerdict> {
        self.hypotheses.iter().find(|v| v.name == name)
    }
}

/// Identifies a run in output files. Timestamps are deliberately absent:
/// identical config and seed must produce byte-identical outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(command: &str, config_text: &str, seed: u64) -> Self {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(config_text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        RunManifest {
            command: command.to_string(),
            config_digest: hex,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        }
    }
}

// serde_json formatter printing floats as d.dddddddddddddddde[+-]e
// (17 significant digits, round-trippable)
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any report value to JSON with fixed float formatting.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

/// Fixed-format float for CSV columns: same 17-significant-digit contract
/// as the JSON writer.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_real_serialization() {
        #[derive(Serialize)]
        struct Wrap {
            a: ExtReal,
            b: ExtReal,
        }
        let s = to_json(&Wrap {
            a: ExtReal::Finite(0.5),
            b: ExtReal::PosInf,
        });
        assert_eq!(s, r#"{"a":5.0000000000000000e-1,"b":"inf"}"#);
    }

    #[test]
    fn floats_round_trip_at_17_digits() {
        for &x in &[std::f64::consts::PI, 83.0 / 1120.0, 1.0e-300, 2.0f64.powi(100)] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "string {s}");
        }
    }

    #[test]
    fn manifest_digest_is_stable() {
        let a = RunManifest::new("certify", "N = 3\np = 2\n", 7);
        let b = RunManifest::new("certify", "N = 3\np = 2\n", 7);
        assert_eq!(a.config_digest, b.config_digest);
        let c = RunManifest::new("certify", "N = 3\np = 2.5\n", 7);
        assert_ne!(a.config_digest, c.config_digest);
    }
}
