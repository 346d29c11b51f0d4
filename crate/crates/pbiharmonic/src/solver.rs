//! Radial discretization of the energy J_lambda = Phi - lambda Psi on balls
//! and the machinery that exhibits its critical points: preconditioned
//! descent with Armijo backtracking, a damped Picard path for p = 2, a
//! discretized-path mountain-pass search, and lambda-branch sweeps.
//!
//! Only u(R) = 0 is imposed on the discrete space; the second Navier
//! condition Delta u(R) = 0 is natural for the energy and emerges at
//! stationarity.

use crate::nonlinearity::Nonlinearity;
use crate::problem::{DomainSpec, ProblemSpec};
use crate::report::IntervalPair;
use crate::testfun;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver requires ball domain")]
    BallRequired,
    #[error("grid needs at least 8 intervals, got {0}")]
    GridTooCoarse(usize),
    #[error("picard path requires p = 2, got p = {0}")]
    PicardNeedsP2(f64),
    #[error("lambda must be positive")]
    LambdaNotPositive,
}

/// Uniform radial grid on [0, R] with trapezoid-corrected quadrature
/// weights w_i = omega_{N-1} r_i^(N-1) h (halved at both ends) and a
/// second-order discrete Laplacian: centered stencil in the interior, the
/// symmetry closure 2N(u_1 - u_0)/h^2 at the origin (from u'(0) = 0 and
/// Delta u(0) = N u''(0)), and a one-sided second-order stencil at r = R.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub dim: usize,
    pub p: f64,
    pub radius: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, p: f64, radius: f64, n: usize) -> Result<Self, SolverError> {
        if n < 8 {
            return Err(SolverError::GridTooCoarse(n));
        }
        let h = radius / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let omega = crate::geometry::sphere_area(dim);
        let weights: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                if i == 0 {
                    // half-cell measure at the axis: the plain trapezoid
                    // weight r^(N-1) h / 2 vanishes for N >= 2 and would
                    // decouple the center value from the energy
                    omega * (h / 2.0).powf(dim as f64) / dim as f64
                } else if i == n {
                    0.5 * omega * r.powf(dim as f64 - 1.0) * h
                } else {
                    omega * r.powf(dim as f64 - 1.0) * h
                }
            })
            .collect();
        Ok(RadialGrid {
            dim,
            p,
            radius,
            n,
            h,
            nodes,
            weights,
        })
    }

    pub fn for_spec(spec: &ProblemSpec) -> Result<Self, SolverError> {
        match &spec.domain {
            DomainSpec::Ball { radius, .. } => {
                RadialGrid::new(spec.dim, spec.p, *radius, spec.solver.grid_n)
            }
            DomainSpec::Box { .. } => Err(SolverError::BallRequired),
        }
    }

    /// Discrete Laplacian applied to a state (length n+1, u[n] = 0); the
    /// result has one value per node including the one-sided boundary row.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.h;
        let nf = self.dim as f64;
        let mut out = vec![0.0; n + 1];
        out[0] = 2.0 * nf * (u[1] - u[0]) / (h * h);
        for i in 1..n {
            let r = self.nodes[i];
            let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
            out[i] = d2 + (nf - 1.0) * d1 / r;
        }
        // one-sided second-order closure at r = R
        let d2 = (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / (h * h);
        let d1 = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
        out[n] = d2 + (nf - 1.0) * d1 / self.radius;
        out
    }

    /// Transpose of the Laplacian map restricted to the interior unknowns:
    /// given per-row multipliers z, returns sum_i z_i L_(i, j) for
    /// j = 0..n-1 (index n is the fixed boundary value, not an unknown).
    pub fn laplacian_transpose(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.h;
        let nf = self.dim as f64;
        let h2 = h * h;
        let mut out = vec![0.0; n];
        // row 0
        out[0] += -2.0 * nf / h2 * z[0];
        out[1] += 2.0 * nf / h2 * z[0];
        // interior rows
        for i in 1..n {
            let r = self.nodes[i];
            let lower = 1.0 / h2 - (nf - 1.0) / (2.0 * h * r);
            let upper = 1.0 / h2 + (nf - 1.0) / (2.0 * h * r);
            out[i - 1] += lower * z[i];
            out[i] += -2.0 / h2 * z[i];
            if i + 1 < n {
                out[i + 1] += upper * z[i];
            }
        }
        // boundary row couples to the last three interior unknowns
        let zb = z[n];
        out[n - 1] += (-5.0 / h2 - 4.0 * (nf - 1.0) / (2.0 * h * self.radius)) * zb;
        out[n - 2] += (4.0 / h2 + (nf - 1.0) / (2.0 * h * self.radius)) * zb;
        out[n - 3] += (-1.0 / h2) * zb;
        out
    }

    /// Discrete norm per the energy: (sum_i w_i |(Lu)_i|^p)^(1/p).
    pub fn norm(&self, u: &[f64]) -> f64 {
        let lap = self.laplacian(u);
        let mut acc = 0.0;
        for (w, l) in self.weights.iter().zip(&lap) {
            acc += w * pow_abs(*l, self.p);
        }
        acc.powf(1.0 / self.p)
    }
}

fn pow_abs(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p)
    }
}

// |t|^(p-2) t with the exact zero mapped to zero (continuous for p > 1)
fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 2.0) * t
    }
}

/// J_lambda(u) = sum w_i |(Lu)_i|^p / p - lambda sum w_i F(r_i, u_i).
pub fn energy(grid: &RadialGrid, nl: &Nonlinearity, u: &[f64], lambda: f64) -> f64 {
    let lap = grid.laplacian(u);
    let mut phi = 0.0;
    let mut psi = 0.0;
    for i in 0..=grid.n {
        phi += grid.weights[i] * pow_abs(lap[i], grid.p);
        psi += grid.weights[i] * nl.eval_big_f(Some(grid.nodes[i]), u[i]);
    }
    phi / grid.p - lambda * psi
}

/// Exact gradient of the discrete energy with respect to the interior
/// unknowns u_0..u_(n-1):  L^T (w .* |Lu|^(p-2) Lu) - lambda w .* f(u).
pub fn gradient(grid: &RadialGrid, nl: &Nonlinearity, u: &[f64], lambda: f64) -> Vec<f64> {
    let lap = grid.laplacian(u);
    let z: Vec<f64> = lap
        .iter()
        .zip(&grid.weights)
        .map(|(&l, &w)| w * phi_p(l, grid.p))
        .collect();
    let mut g = grid.laplacian_transpose(&z);
    for i in 0..grid.n {
        g[i] -= lambda * grid.weights[i] * nl.eval_f(Some(grid.nodes[i]), u[i]);
    }
    g
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Scale of the applied load lambda Psi'(u): used to report residuals
/// relative to the forces they balance. An absolute gradient threshold is
/// meaningless across problem scales (the paper's own example drives the
/// solution to magnitudes of 10^3, where double precision caps the
/// absolute gradient norm near 1e-4 on fine grids).
pub fn load_scale(grid: &RadialGrid, nl: &Nonlinearity, u: &[f64], lambda: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.n {
        let t = lambda * grid.weights[i] * nl.eval_f(Some(grid.nodes[i]), u[i]);
        acc += t * t;
    }
    1.0 + acc.sqrt()
}

/// Load-relative residual of the energy-critical system:
/// ||grad J|| / (1 + lambda ||W f(u)||).
pub fn relative_residual(grid: &RadialGrid, nl: &Nonlinearity, u: &[f64], lambda: f64) -> f64 {
    norm2(&gradient(grid, nl, u, lambda)) / load_scale(grid, nl, u, lambda)
}

/// Snapshot of a discrete state with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RadialState {
    pub values: Vec<f64>,
    pub lambda: f64,
    pub energy: f64,
    pub grad_norm: f64,
    /// discrete counterpart of the W^(2,p) seminorm
    pub norm: f64,
    pub max_abs: f64,
}

impl RadialState {
    pub fn measure(grid: &RadialGrid, nl: &Nonlinearity, u: Vec<f64>, lambda: f64) -> Self {
        let e = energy(grid, nl, &u, lambda);
        let g = gradient(grid, nl, &u, lambda);
        RadialState {
            energy: e,
            grad_norm: norm2(&g),
            norm: grid.norm(&u),
            max_abs: max_abs(&u),
            values: u,
            lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Trivial,
    Minimizer,
    MountainPassCandidate,
    Other,
}

pub const TRIVIAL_MAX_ABS: f64 = 1e-12;
pub const DISTINCT_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub state: RadialState,
    pub classification: Classification,
    /// load-relative residual of the method's discrete critical-point
    /// system (for descent methods, ||grad J|| / (1 + lambda ||W f(u)||));
    /// the raw gradient norm sits in state.grad_norm
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SolutionRecord {
    fn from_state(
        state: RadialState,
        base: Classification,
        converged: bool,
        iters: usize,
        residual: f64,
    ) -> Self {
        let classification = if state.max_abs <= TRIVIAL_MAX_ABS {
            Classification::Trivial
        } else {
            base
        };
        SolutionRecord {
            residual,
            classification,
            converged,
            iterations: iters,
            state,
        }
    }

    /// max-norm distinctness with the relative floor used everywhere:
    /// distance > tol (1 + larger max norm).
    pub fn is_distinct_from(&self, other: &SolutionRecord) -> bool {
        let d = self
            .state
            .values
            .iter()
            .zip(&other.state.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        d > DISTINCT_REL_TOL * (1.0 + self.state.max_abs.max(other.state.max_abs))
    }
}

/// Initial state for a solve.
#[derive(Debug, Clone)]
pub enum Init {
    Zero,
    /// the certificate's bump with tau = R and the spec's delta
    UDeltaProfile,
    /// explicit nodal values (interpolated if the grid differs)
    Values(Vec<f64>),
}

pub fn initial_state(grid: &RadialGrid, spec: &ProblemSpec, init: &Init) -> Vec<f64> {
    match init {
        Init::Zero => vec![0.0; grid.n + 1],
        Init::UDeltaProfile => grid
            .nodes
            .iter()
            .map(|&r| testfun::eval_u_delta(grid.radius, spec.delta, grid.dim, r).0)
            .collect(),
        Init::Values(v) => {
            if v.len() == grid.n + 1 {
                let mut out = v.clone();
                out[grid.n] = 0.0;
                out
            } else {
                // linear interpolation from the source sampling
                let m = v.len() - 1;
                let mut out: Vec<f64> = (0..=grid.n)
                    .map(|i| {
                        let x = i as f64 / grid.n as f64 * m as f64;
                        let j = (x.floor() as usize).min(m - 1);
                        let t = x - j as f64;
                        v[j] * (1.0 - t) + v[j + 1] * t
                    })
                    .collect();
                out[grid.n] = 0.0;
                out
            }
        }
    }
}

// Tridiagonal Dirichlet Laplacian (rows 0..n-1, unknowns v_0..v_(n-1),
// v_n = 0) solved by the Thomas algorithm.
struct DirichletLaplacian {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl DirichletLaplacian {
    fn new(grid: &RadialGrid) -> Self {
        let n = grid.n;
        let h = grid.h;
        let nf = grid.dim as f64;
        let h2 = h * h;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        diag[0] = -2.0 * nf / h2;
        upper[0] = 2.0 * nf / h2;
        for i in 1..n {
            let r = grid.nodes[i];
            lower[i] = 1.0 / h2 - (nf - 1.0) / (2.0 * h * r);
            diag[i] = -2.0 / h2;
            if i + 1 < n {
                upper[i] = 1.0 / h2 + (nf - 1.0) / (2.0 * h * r);
            }
        }
        DirichletLaplacian { lower, diag, upper }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        thomas(&self.lower, &self.diag, &self.upper, rhs)
    }

    fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        // transpose swaps the off-diagonals
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n - 1 {
            lower[i + 1] = self.upper[i];
            upper[i] = self.lower[i + 1];
        }
        thomas(&lower, &self.diag, &upper, rhs)
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

// Quasi-Newton metric for descent: the exact Hessian L^T W L of the p = 2
// energy, assembled as a pentadiagonal band (the one-sided boundary row
// couples the last three unknowns) and Cholesky-factored once per grid.
// Symmetric positive definite: the weights are positive and the Dirichlet
// Laplacian is nonsingular.
struct Preconditioner {
    // lower-triangular Cholesky factor, band[j][e] = G[j][j - e]
    band: Vec<[f64; 3]>,
}

impl Preconditioner {
    fn new(grid: &RadialGrid) -> Self {
        let n = grid.n;
        let h2 = grid.h * grid.h;
        let nf = grid.dim as f64;
        // rows of the full Laplacian map restricted to unknown columns
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n + 1);
        rows.push(vec![(0, -2.0 * nf / h2), (1, 2.0 * nf / h2)]);
        for i in 1..n {
            let r = grid.nodes[i];
            let mut row = vec![
                (i - 1, 1.0 / h2 - (nf - 1.0) / (2.0 * grid.h * r)),
                (i, -2.0 / h2),
            ];
            if i + 1 < n {
                row.push((i + 1, 1.0 / h2 + (nf - 1.0) / (2.0 * grid.h * r)));
            }
            rows.push(row);
        }
        rows.push(vec![
            (n - 1, -5.0 / h2 - 4.0 * (nf - 1.0) / (2.0 * grid.h * grid.radius)),
            (n - 2, 4.0 / h2 + (nf - 1.0) / (2.0 * grid.h * grid.radius)),
            (n - 3, -1.0 / h2),
        ]);

        // assemble H = sum_i w_i row_i row_i^T in the lower band
        let mut hband = vec![[0.0f64; 3]; n];
        for (i, row) in rows.iter().enumerate() {
            let w = grid.weights[i];
            for &(j, a) in row {
                for &(k, b) in row {
                    if k <= j {
                        hband[j][j - k] += w * a * b;
                    }
                }
            }
        }

        // banded Cholesky, bandwidth 2
        let mut band = vec![[0.0f64; 3]; n];
        for i in 0..n {
            let lo = i.saturating_sub(2);
            for j in lo..=i {
                let mut s = hband[i][i - j];
                let kmin = j.saturating_sub(2).max(lo);
                for k in kmin..j {
                    s -= band[i][i - k] * band[j][j - k];
                }
                if i == j {
                    assert!(s > 0.0, "discrete Hessian lost positive definiteness");
                    band[i][0] = s.sqrt();
                } else {
                    band[i][i - j] = s / band[j][0];
                }
            }
        }
        Preconditioner { band }
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.band.len();
        // forward substitution G y = g
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = g[i];
            for e in 1..=2.min(i) {
                s -= self.band[i][e] * y[i - e];
            }
            y[i] = s / self.band[i][0];
        }
        // backward substitution G^T x = y
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for e in 1..=2usize {
                if i + e < n {
                    s -= self.band[i + e][e] * x[i + e];
                }
            }
            x[i] = s / self.band[i][0];
        }
        x
    }
}

/// Gradient descent on J_lambda with the p = 2 stiffness as quasi-Newton
/// metric and Armijo backtracking; energy decreases monotonically. Once
/// the Armijo phase reaches tolerance or stalls at the floating-point
/// resolution of the energy, a short gradient-norm polish (Newton steps
/// accepted only when they shrink ||grad J||) drives the residual to the
/// attainable floor. Convergence is judged by the load-relative residual.
pub fn minimize(
    grid: &RadialGrid,
    spec: &ProblemSpec,
    lambda: f64,
    init: &Init,
) -> Result<SolutionRecord, SolverError> {
    if !(lambda >= 0.0) {
        return Err(SolverError::LambdaNotPositive);
    }
    let nl = &spec.nonlinearity;
    let tol = spec.solver.residual_tol;
    let max_iter = spec.solver.max_iter;
    let pre = Preconditioner::new(grid);

    let mut u = initial_state(grid, spec, init);
    let mut e = energy(grid, nl, &u, lambda);
    let mut step_memory = 1.0f64;
    let mut iters = 0;
    let mut stagnant = 0usize;

    let finish = |u: Vec<f64>, iters: usize| {
        let rel = relative_residual(grid, nl, &u, lambda);
        let state = RadialState::measure(grid, nl, u, lambda);
        let converged = rel <= spec.solver.residual_tol;
        SolutionRecord::from_state(state, Classification::Minimizer, converged, iters, rel)
    };

    loop {
        let g = gradient(grid, nl, &u, lambda);
        let gnorm = norm2(&g);
        let load = load_scale(grid, nl, &u, lambda);
        if gnorm <= tol * load {
            return Ok(finish(u, iters));
        }
        if iters >= max_iter {
            break;
        }
        iters += 1;

        let mut d = pre.apply(&g);
        for v in d.iter_mut() {
            *v = -*v;
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            // fall back to plain steepest descent scaled to the metric
            let scale = 1.0 / (1.0 + gnorm);
            d = g.iter().map(|x| -x * scale).collect();
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        }

        // Armijo backtracking from an adaptive initial step
        let mut t = (2.0 * step_memory).clamp(1e-12, 4.0);
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = u.clone();
            for (ui, di) in trial.iter_mut().zip(&d) {
                *ui += t * di;
            }
            let et = energy(grid, nl, &trial, lambda);
            if et <= e + 1e-4 * t * slope {
                // count iterations that no longer move the energy beyond
                // its round-off so the polish can take over
                if e - et <= 1e-13 * (1.0 + e.abs()) {
                    stagnant += 1;
                } else {
                    stagnant = 0;
                }
                u = trial;
                e = et;
                step_memory = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || stagnant >= 20 {
            // energy differences fell below the round-off of J; hand over
            // to the gradient polish
            break;
        }
    }

    // polish phase: quasi-Newton steps accepted on gradient-norm decrease
    let mut g = gradient(grid, nl, &u, lambda);
    let mut gnorm = norm2(&g);
    for _ in 0..500 {
        if gnorm <= tol * load_scale(grid, nl, &u, lambda) {
            break;
        }
        let d = pre.apply(&g);
        let mut improved = false;
        let mut t = 1.0f64;
        for _ in 0..8 {
            let mut trial = u.clone();
            for (ui, di) in trial.iter_mut().zip(&d) {
                *ui -= t * di;
            }
            let gt = gradient(grid, nl, &trial, lambda);
            let gtnorm = norm2(&gt);
            if gtnorm < gnorm {
                u = trial;
                g = gt;
                gnorm = gtnorm;
                improved = true;
                break;
            }
            t *= 0.25;
        }
        iters += 1;
        if !improved {
            break;
        }
    }

    Ok(finish(u, iters))
}

/// Damped Picard iteration for p = 2: each sweep solves the composed
/// biharmonic system via two Dirichlet-Laplacian solves
/// (L v = lambda f(u_k) with v(R) = 0, then L u = v with u(R) = 0) and
/// blends u <- (1-theta) u + theta step with an adaptive damping factor.
/// Divergence (residual growing tenfold over 20 sweeps) yields a
/// non-converged record.
pub fn picard_p2(
    grid: &RadialGrid,
    spec: &ProblemSpec,
    lambda: f64,
    init: &Init,
) -> Result<SolutionRecord, SolverError> {
    if (grid.p - 2.0).abs() > 1e-14 {
        return Err(SolverError::PicardNeedsP2(grid.p));
    }
    let nl = &spec.nonlinearity;
    let tol = spec.solver.residual_tol;
    let lap = DirichletLaplacian::new(grid);

    let mut u = initial_state(grid, spec, init);
    let mut theta = 1.0f64;
    let mut history: Vec<f64> = Vec::new();
    let mut iters = 0;

    // residual of the collocation system L(Lu) - lambda f(u) on the
    // interior, in the root-mean-square sense
    let residual = |u: &[f64]| -> f64 {
        let lu = grid.laplacian(u);
        let llu = grid.laplacian(&lu[..grid.n].iter().copied().chain([0.0]).collect::<Vec<_>>());
        let mut acc = 0.0;
        for i in 0..grid.n {
            let r = llu[i] - lambda * nl.eval_f(Some(grid.nodes[i]), u[i]);
            acc += r * r;
        }
        (acc / grid.n as f64).sqrt()
    };

    loop {
        let rhs: Vec<f64> = (0..grid.n)
            .map(|i| lambda * nl.eval_f(Some(grid.nodes[i]), u[i]))
            .collect();
        let v = lap.solve(&rhs);
        let step_int = lap.solve(&v);
        let mut step: Vec<f64> = step_int;
        step.push(0.0);

        let mut next = vec![0.0; grid.n + 1];
        let mut change = 0.0f64;
        for i in 0..=grid.n {
            next[i] = (1.0 - theta) * u[i] + theta * step[i];
            change = change.max((next[i] - u[i]).abs());
        }
        let res_next = residual(&next);
        let res_cur = residual(&u);
        if res_next.is_finite() && (res_next <= res_cur || res_cur == 0.0) {
            theta = (theta * 1.2).min(1.0);
        } else {
            theta = (theta * 0.5).max(1e-3);
        }
        u = next;
        iters += 1;
        history.push(res_next);

        // Converged when the scaled residual is small, or when the
        // fixed-point update stalls below tolerance (the composed operator
        // amplifies round-off like n^4 eps, so the absolute residual has a
        // floor on fine grids).
        let rhs_scale = 1.0 + (rhs.iter().map(|x| x * x).sum::<f64>() / grid.n as f64).sqrt();
        let tiny_step = iters >= 2 && change <= tol * (1.0 + max_abs(&u));
        if res_next <= tol * rhs_scale || tiny_step {
            let state = RadialState::measure(grid, nl, u, lambda);
            return Ok(SolutionRecord::from_state(
                state,
                Classification::Other,
                true,
                iters,
                res_next / rhs_scale,
            ));
        }
        let diverging = history.len() > 20
            && history.last().unwrap() > &(10.0 * history[history.len() - 21]);
        if iters >= spec.solver.max_iter || diverging {
            let state = RadialState::measure(grid, nl, u, lambda);
            return Ok(SolutionRecord::from_state(
                state,
                Classification::Other,
                false,
                iters,
                res_next / rhs_scale,
            ));
        }
    }
}

/// Outcome of the mountain-pass search: either an accepted candidate or a
/// documented failure, always with the initial path maximum for context.
#[derive(Debug)]
pub enum MountainPassResult {
    Candidate {
        record: SolutionRecord,
        initial_path_max: f64,
    },
    Failure {
        reason: String,
        initial_path_max: f64,
    },
}

const MP_PATH_STATES: usize = 19;

/// Discretized-path mountain pass between two states: repeatedly take a
/// descent step on the maximal path state and re-tension the path by
/// arclength, until the maximal state is nearly critical. Fails loudly on
/// path collapse onto an endpoint.
pub fn mountain_pass(
    grid: &RadialGrid,
    spec: &ProblemSpec,
    lambda: f64,
    endpoint_a: &[f64],
    endpoint_b: &[f64],
) -> Result<MountainPassResult, SolverError> {
    let nl = &spec.nonlinearity;
    let tol = (spec.solver.residual_tol * 100.0).max(1e-6);
    let pre = Preconditioner::new(grid);
    let j = |u: &[f64]| energy(grid, nl, u, lambda);

    let dist_inf = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let scale = 1.0 + max_abs(endpoint_a).max(max_abs(endpoint_b));
    if dist_inf(endpoint_a, endpoint_b) <= DISTINCT_REL_TOL * scale {
        return Ok(MountainPassResult::Failure {
            reason: "endpoints are not distinct".into(),
            initial_path_max: j(endpoint_a),
        });
    }

    let m = MP_PATH_STATES;
    let segment = |t: f64| -> Vec<f64> {
        endpoint_a
            .iter()
            .zip(endpoint_b)
            .map(|(x, y)| x * (1.0 - t) + y * t)
            .collect()
    };
    let build_path = |a: &[f64], b: &[f64]| -> Vec<Vec<f64>> {
        (0..=m)
            .map(|k| {
                let t = k as f64 / m as f64;
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x * (1.0 - t) + y * t)
                    .collect()
            })
            .collect()
    };

    let j_a = j(endpoint_a);
    let slack = 1e-9 * (1.0 + j_a.abs());

    // Locate the barrier along the straight segment. With flat-near-zero
    // nonlinearities the well sits at a tiny fraction of the far
    // endpoint's scale, so scan on a log grid and, when the plain path
    // shows no interior barrier, shorten the far endpoint to the earliest
    // energy drop past the rise.
    let mut far: Vec<f64> = endpoint_b.to_vec();
    {
        let plain_path = build_path(endpoint_a, &far);
        let plain: Vec<f64> = plain_path.iter().map(|z| j(z)).collect();
        let plain_max = plain.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if plain_max <= plain[0].max(plain[m]) {
            let mut rise_seen = false;
            let mut replacement = None;
            for i in 0..=600 {
                let t = 10f64.powf(-8.0 + 8.0 * i as f64 / 600.0).min(1.0);
                let state = segment(t);
                let e = j(&state);
                if e > j_a + slack {
                    rise_seen = true;
                }
                if rise_seen && e < j_a - slack {
                    replacement = Some(state);
                    break;
                }
            }
            match replacement {
                Some(b) => far = b,
                None => {
                    return Ok(MountainPassResult::Failure {
                        reason: "initial path has no interior barrier above the endpoints"
                            .into(),
                        initial_path_max: plain_max,
                    });
                }
            }
        }
    }

    let mut path = build_path(endpoint_a, &far);
    let mut energies: Vec<f64> = path.iter().map(|z| j(z)).collect();
    let initial_path_max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if initial_path_max <= energies[0].max(energies[m]) {
        return Ok(MountainPassResult::Failure {
            reason: "no interior barrier even after endpoint rescaling".into(),
            initial_path_max,
        });
    }

    // accept only nontrivial states distinct from both endpoints
    let admissible = |state: &[f64]| -> bool {
        let path_scale = 1.0 + max_abs(endpoint_a).max(max_abs(&far));
        max_abs(state) > 1e-6
            && dist_inf(state, endpoint_a) > DISTINCT_REL_TOL * path_scale
            && dist_inf(state, &far) > DISTINCT_REL_TOL * path_scale
    };

    let candidate = |state: Vec<f64>, rel: f64, iters: usize| -> MountainPassResult {
        let state = RadialState::measure(grid, nl, state, lambda);
        let record = SolutionRecord::from_state(
            state,
            Classification::MountainPassCandidate,
            true,
            iters,
            rel,
        );
        MountainPassResult::Candidate {
            record,
            initial_path_max,
        }
    };

    // phase 1: elastic band: descend on the maximal state, re-tension
    let inner_cap = 4000usize;
    let stall_window = 50usize;
    let mut best_rel = f64::INFINITY;
    let mut since_improvement = 0usize;
    let mut last_max_energy = f64::INFINITY;
    let mut iters = 0usize;

    for iter in 0..inner_cap {
        let k_star = (1..m)
            .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
            .unwrap();
        if energies[k_star] <= energies[0].max(energies[m]) {
            break; // band sagged; hand over to the separatrix phase
        }
        let g = gradient(grid, nl, &path[k_star], lambda);
        let gnorm = norm2(&g);
        let rel = gnorm / load_scale(grid, nl, &path[k_star], lambda);
        best_rel = best_rel.min(rel);
        if std::env::var_os("PBH_MP_TRACE").is_some() && iter % 500 == 0 {
            eprintln!(
                "mp band it {iter}: k*={k_star} J={:.6e} rel={rel:.3e}",
                energies[k_star]
            );
        }
        if rel <= tol && admissible(&path[k_star]) {
            return Ok(candidate(path[k_star].clone(), rel, iters));
        }

        let mut d = pre.apply(&g);
        for v in d.iter_mut() {
            *v = -*v;
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            d = g.iter().map(|x| -x / (1.0 + gnorm)).collect();
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        }
        let e0 = energies[k_star];
        let mut t = 1.0f64;
        for _ in 0..40 {
            let mut trial = path[k_star].clone();
            for (ui, di) in trial.iter_mut().zip(&d) {
                *ui += t * di;
            }
            let et = j(&trial);
            if et <= e0 + 1e-4 * t * slope {
                path[k_star] = trial;
                energies[k_star] = et;
                break;
            }
            t *= 0.5;
        }
        if iter % 8 == 7 {
            retension(&mut path);
            for (k, z) in path.iter().enumerate() {
                energies[k] = j(z);
            }
        }
        iters += 1;

        let current_max = energies[k_star];
        if current_max < last_max_energy - 1e-12 * (1.0 + current_max.abs()) {
            last_max_energy = current_max;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= stall_window {
                break; // band frozen at its resolution
            }
        }
    }

    // phase 2: separatrix bisection along the segment to `far`. Descent
    // flows from the two sides of the barrier fall into different basins;
    // bisecting the basin boundary and then flowing from it tracks the
    // saddle's stable manifold, and the flow's minimal-gradient point is
    // the candidate.
    let j_far = j(&far);
    let basin_threshold = j_a - 0.25 * (j_a - j_far).max(10.0 * slack);
    let descend_steps = |start: &[f64], cap: usize| -> (Vec<f64>, f64, Vec<f64>, f64) {
        // returns (state at min rel-gradient, its rel, final state, final J)
        let mut u = start.to_vec();
        let mut e = j(&u);
        let mut best_state = u.clone();
        let mut best_rel = f64::INFINITY;
        for _ in 0..cap {
            let g = gradient(grid, nl, &u, lambda);
            let gnorm = norm2(&g);
            let rel = gnorm / load_scale(grid, nl, &u, lambda);
            if rel < best_rel && admissible(&u) {
                best_rel = rel;
                best_state = u.clone();
            }
            if e <= basin_threshold {
                break; // fell into the far basin
            }
            let mut d = pre.apply(&g);
            for v in d.iter_mut() {
                *v = -*v;
            }
            let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                d = g.iter().map(|x| -x / (1.0 + gnorm)).collect();
                slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            }
            let mut t = 1.0f64;
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = u.clone();
                for (ui, di) in trial.iter_mut().zip(&d) {
                    *ui += t * di;
                }
                let et = j(&trial);
                if et <= e + 1e-4 * t * slope {
                    u = trial;
                    e = et;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (best_state, best_rel, u, e)
    };
    let falls_far = |t: f64| -> bool {
        let (_, _, _, e) = descend_steps(&segment_scaled(endpoint_a, &far, t), 300);
        e <= basin_threshold
    };

    // bracket the separatrix in the scaled coordinate of the shortened
    // segment
    let mut t_lo = 0.0f64; // near basin
    let mut t_hi = 1.0f64; // far basin (J(far) < J(a) already)
    if !falls_far(t_hi) {
        return Ok(MountainPassResult::Failure {
            reason: format!(
                "separatrix bisection found no far-basin anchor (band best residual {best_rel:.3e})"
            ),
            initial_path_max,
        });
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..90 {
        let t_mid = 0.5 * (t_lo + t_hi);
        if t_mid == t_lo || t_mid == t_hi {
            break; // bisection at floating-point resolution
        }
        let start = segment_scaled(endpoint_a, &far, t_mid);
        let (state, rel, _, e_final) = descend_steps(&start, 600);
        iters += 1;
        if best.as_ref().map_or(true, |(r, _)| rel < *r) && rel.is_finite() {
            best = Some((rel, state));
        }
        if std::env::var_os("PBH_MP_TRACE").is_some() {
            eprintln!("mp bisect t={t_mid:.12e}: flow rel={rel:.3e}");
        }
        if let Some((r, s)) = &best {
            if *r <= tol {
                return Ok(candidate(s.clone(), *r, iters));
            }
        }
        if e_final <= basin_threshold {
            t_hi = t_mid;
        } else {
            t_lo = t_mid;
        }
    }

    let reason = match best {
        Some((rel, _)) => format!(
            "stalled at relative residual {rel:.3e} (tolerance {tol:.1e}) after band and separatrix phases"
        ),
        None => "no admissible near-critical state found".to_string(),
    };
    Ok(MountainPassResult::Failure {
        reason,
        initial_path_max,
    })
}

fn segment_scaled(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * (1.0 - t) + y * t)
        .collect()
}

// redistribute the path states to equal arclength along the polyline
fn retension(path: &mut [Vec<f64>]) {
    let m = path.len() - 1;
    let seg_len: Vec<f64> = (0..m)
        .map(|k| {
            path[k]
                .iter()
                .zip(&path[k + 1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let total: f64 = seg_len.iter().sum();
    if total <= 0.0 {
        return;
    }
    let mut cumulative = vec![0.0];
    for s in &seg_len {
        cumulative.push(cumulative.last().unwrap() + s);
    }
    let old: Vec<Vec<f64>> = path.to_vec();
    for k in 1..m {
        let target = total * k as f64 / m as f64;
        let j = cumulative
            .windows(2)
            .position(|w| target <= w[1])
            .unwrap_or(m - 1);
        let denom = (cumulative[j + 1] - cumulative[j]).max(1e-300);
        let t = (target - cumulative[j]) / denom;
        path[k] = old[j]
            .iter()
            .zip(&old[j + 1])
            .map(|(a, b)| a * (1.0 - t) + b * t)
            .collect();
    }
}

/// One row of a lambda sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BranchRow {
    pub lambda: f64,
    pub in_lambda1: bool,
    pub below_lambda3h: bool,
    pub n_distinct: usize,
    pub solutions: Vec<SolutionRecord>,
    pub non_converged: usize,
}

/// Multistart sweep over a lambda grid: for each lambda, minimize from
/// zero, from the bump profile, and from seeded random smooth states;
/// deduplicate by the max-norm distinctness rule and annotate with the
/// certificate intervals. Rows are computed concurrently but emitted in
/// lambda order, deterministic for a fixed seed.
pub fn branch_sweep(
    spec: &ProblemSpec,
    intervals: Option<&IntervalPair>,
    lambdas: &[f64],
    multistart: usize,
    seed: u64,
) -> Result<Vec<BranchRow>, SolverError> {
    let grid = RadialGrid::for_spec(spec)?;
    let rows: Vec<BranchRow> = lambdas
        .par_iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            sweep_one(&grid, spec, lambda, idx, multistart, seed, intervals)
        })
        .collect();
    Ok(rows)
}

fn sweep_one(
    grid: &RadialGrid,
    spec: &ProblemSpec,
    lambda: f64,
    lambda_idx: usize,
    multistart: usize,
    seed: u64,
    intervals: Option<&IntervalPair>,
) -> BranchRow {
    let mut inits: Vec<Init> = vec![Init::Zero, Init::UDeltaProfile];
    let extra = multistart.saturating_sub(2);
    for j in 0..extra {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (lambda_idx as u64).wrapping_mul(0x9E3779B97F4A7C15)
                ^ (j as u64).wrapping_mul(0xD1B54A32D192ED03),
        );
        // random smooth radial profile vanishing at R
        let c1: f64 = rng.gen_range(-1.0..1.0);
        let c2: f64 = rng.gen_range(-1.0..1.0);
        let c3: f64 = rng.gen_range(-1.0..1.0);
        let amp = spec.delta;
        let values: Vec<f64> = grid
            .nodes
            .iter()
            .map(|&r| {
                let x = r / grid.radius;
                let b = 1.0 - x * x;
                amp * b * (c1 + c2 * x * x + c3 * x * x * x * x) * b
            })
            .collect();
        inits.push(Init::Values(values));
    }

    let mut distinct: Vec<SolutionRecord> = Vec::new();
    let mut non_converged = 0;
    for init in &inits {
        match minimize(grid, spec, lambda, init) {
            Ok(rec) if rec.converged => {
                if distinct.iter().all(|d| d.is_distinct_from(&rec)) {
                    distinct.push(rec);
                }
            }
            Ok(_) => non_converged += 1,
            Err(_) => non_converged += 1,
        }
    }

    let (in_l1, below_l3h) = match intervals {
        Some(iv) => (
            lambda > iv.lambda1 && iv.lambda2.greater_than(lambda),
            lambda <= iv.lambda3h,
        ),
        None => (false, false),
    };
    BranchRow {
        lambda,
        in_lambda1: in_l1,
        below_lambda3h: below_l3h,
        n_distinct: distinct.len(),
        solutions: distinct,
        non_converged,
    }
}
