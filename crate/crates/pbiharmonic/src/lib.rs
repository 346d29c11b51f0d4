//! Certificates and numerical critical points for Navier boundary-value
//! problems driven by the p-biharmonic operator Delta(|Delta u|^(p-2) Delta u).
//!
//! The crate has two halves:
//!
//! * a certificate calculator that evaluates every constant and hypothesis
//!   of the three-solution multiplicity theorems for
//!   Delta(|Delta u|^(p-2) Delta u) = lambda f(x, u) with u = Delta u = 0 on
//!   the boundary, producing certified lambda-intervals with numeric
//!   margins, and
//! * a radial solver that discretizes the energy J_lambda = Phi - lambda Psi
//!   on balls and exhibits the predicted critical points (minimization, a
//!   Picard path for p = 2, and a mountain-pass search).
//!
//! See the `examples/` directory for one runnable program per capability;
//! the thin `pbh` binary exposes the same pipelines as `certify`, `solve`,
//! `branch` and `testfun` subcommands.

pub mod certificate;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod nonlinearity;
pub mod numerics;
pub mod problem;
pub mod report;
pub mod solver;
pub mod testfun;

pub use certificate::certify;
pub use geometry::GeometryData;
pub use nonlinearity::Nonlinearity;
pub use problem::{DomainSpec, ProblemSpec, SolverSettings};
pub use report::CertificateReport;
