//! Command-line pipelines behind the thin `pbh` binary: certify, solve,
//! branch and testfun, with the documented exit-code contract
//! (0 ok, 1 usage/config error, 2 certificate denied, 3 non-convergence).

use crate::certificate;
use crate::config::parse_spec;
use crate::geometry::{GeometryData, KSource};
use crate::report::{fmt_f64, to_json, RunManifest};
use crate::solver::{self, Init, RadialGrid};
use crate::testfun;
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DENIED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "pbh",
    version,
    about = "certificates and radial solves for p-biharmonic Navier problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every hypothesis and emit the certificate report as JSON
    Certify {
        config: PathBuf,
        /// output file (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Minimize J_lambda on the ball and write the solution CSV + metadata
    Solve {
        config: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// zero | udelta | file:<path to r,u CSV>
        #[arg(long, default_value = "zero")]
        init: String,
        /// output prefix: writes <prefix>.csv and <prefix>.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Multistart sweep over a lambda range, one CSV row per lambda
    Branch {
        config: PathBuf,
        /// range a:b:n (n evenly spaced values, inclusive)
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value_t = 4)]
        multistart: usize,
        /// overrides the seed from the config
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the explicit test functions and report their constants
    Testfun {
        config: PathBuf,
        /// output prefix: writes <prefix>_udelta.csv (+ _vdelta.csv) and <prefix>.json
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Certify { config, out } => cmd_certify(&config, out.as_deref()),
        Command::Solve {
            config,
            lambda,
            init,
            out,
        } => cmd_solve(&config, lambda, &init, &out),
        Command::Branch {
            config,
            lambdas,
            multistart,
            seed,
            out,
        } => cmd_branch(&config, &lambdas, multistart, seed, &out),
        Command::Testfun { config, out } => cmd_testfun(&config, &out),
    }
}

fn log_manifest(manifest: &RunManifest) {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    eprintln!(
        "[{now}] {} v{} config {} seed {}",
        manifest.command, manifest.tool_version, manifest.config_digest, manifest.seed
    );
}

fn read_config(path: &Path) -> Result<(String, crate::problem::ProblemSpec), String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    Ok((text, spec))
}

#[derive(Serialize)]
struct CertifyOutput {
    manifest: RunManifest,
    report: crate::report::CertificateReport,
}

pub fn cmd_certify(config: &Path, out: Option<&Path>) -> i32 {
    let (text, spec) = match read_config(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let manifest = RunManifest::new("certify", &text, spec.solver.seed);
    log_manifest(&manifest);
    let report = match certificate::certify(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let granted = report.granted;
    let json = to_json(&CertifyOutput { manifest, report });
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
        None => println!("{json}"),
    }
    if granted {
        EXIT_OK
    } else {
        EXIT_DENIED
    }
}

#[derive(Serialize)]
struct SolveMetadata {
    manifest: RunManifest,
    lambda: f64,
    energy: f64,
    residual: f64,
    norm: f64,
    max_abs: f64,
    classification: solver::Classification,
    iterations: usize,
    grid_n: usize,
    converged: bool,
}

fn parse_init(flag: &str) -> Result<Init, String> {
    match flag {
        "zero" => Ok(Init::Zero),
        "udelta" => Ok(Init::UDeltaProfile),
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read init file {path}: {e}"))?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    if i == 0 && line.trim() == "r,u" {
                        continue;
                    }
                    let col = line
                        .split(',')
                        .nth(1)
                        .ok_or_else(|| format!("init file line {} lacks a u column", i + 1))?;
                    values.push(
                        col.trim()
                            .parse::<f64>()
                            .map_err(|e| format!("init file line {}: {e}", i + 1))?,
                    );
                }
                if values.len() < 2 {
                    return Err("init file holds fewer than two nodes".to_string());
                }
                Ok(Init::Values(values))
            }
            None => Err(format!("unknown init `{other}` (zero | udelta | file:<path>)")),
        },
    }
}

pub fn cmd_solve(config: &Path, lambda: f64, init_flag: &str, out_prefix: &Path) -> i32 {
    let (text, spec) = match read_config(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if !(lambda > 0.0) {
        eprintln!("error: lambda must be positive");
        return EXIT_CONFIG;
    }
    let init = match parse_init(init_flag) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let manifest = RunManifest::new("solve", &text, spec.solver.seed);
    log_manifest(&manifest);
    let grid = match RadialGrid::for_spec(&spec) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let record = match solver::minimize(&grid, &spec, lambda, &init) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    let csv_path = out_prefix.with_extension("csv");
    let json_path = out_prefix.with_extension("json");
    let mut csv = String::from("r,u\n");
    for (r, u) in grid.nodes.iter().zip(&record.state.values) {
        csv.push_str(&fmt_f64(*r));
        csv.push(',');
        csv.push_str(&fmt_f64(*u));
        csv.push('\n');
    }
    let meta = SolveMetadata {
        manifest,
        lambda,
        energy: record.state.energy,
        residual: record.residual,
        norm: record.state.norm,
        max_abs: record.state.max_abs,
        classification: record.classification,
        iterations: record.iterations,
        grid_n: grid.n,
        converged: record.converged,
    };
    if let Err(e) = fs::write(&csv_path, csv) {
        eprintln!("error: cannot write {}: {e}", csv_path.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = fs::write(&json_path, to_json(&meta)) {
        eprintln!("error: cannot write {}: {e}", json_path.display());
        return EXIT_CONFIG;
    }
    if record.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn parse_range(range: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("malformed range `{range}`, expected a:b:n"));
    }
    let a: f64 = parts[0].parse().map_err(|_| format!("bad range start `{}`", parts[0]))?;
    let b: f64 = parts[1].parse().map_err(|_| format!("bad range end `{}`", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad range count `{}`", parts[2]))?;
    if n == 0 {
        return Err("range needs at least one point".to_string());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

pub fn cmd_branch(
    config: &Path,
    range: &str,
    multistart: usize,
    seed_flag: Option<u64>,
    out: &Path,
) -> i32 {
    let (text, spec) = match read_config(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let lambdas = match parse_range(range) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let seed = seed_flag.unwrap_or(spec.solver.seed);
    let manifest = RunManifest::new("branch", &text, seed);
    log_manifest(&manifest);

    let intervals = match certificate::certify(&spec) {
        Ok(report) => report.intervals,
        Err(e) => {
            eprintln!("note: certificate unavailable ({e}); interval annotations will be false");
            None
        }
    };
    let rows = match solver::branch_sweep(&spec, intervals.as_ref(), &lambdas, multistart, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    let mut csv = String::from("lambda,in_lambda1,below_lambda3h,n_distinct");
    for j in 1..=multistart.max(1) {
        csv.push_str(&format!(",sol{j}_energy,sol{j}_norm,sol{j}_residual"));
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(&fmt_f64(row.lambda));
        csv.push_str(&format!(
            ",{},{},{}",
            row.in_lambda1, row.below_lambda3h, row.n_distinct
        ));
        for j in 0..multistart.max(1) {
            match row.solutions.get(j) {
                Some(sol) => csv.push_str(&format!(
                    ",{},{},{}",
                    fmt_f64(sol.state.energy),
                    fmt_f64(sol.state.norm),
                    fmt_f64(sol.residual)
                )),
                None => csv.push_str(",,,"),
            }
        }
        csv.push('\n');
    }
    if let Err(e) = fs::write(out, csv) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    EXIT_OK
}

#[derive(Serialize)]
struct TestfunOutput {
    manifest: RunManifest,
    tau: f64,
    k: f64,
    k_source: String,
    sigma: f64,
    k_const: f64,
    eta: f64,
    phi_u_delta: f64,
    r: f64,
    /// Phi recomputed as a norm quadrature of the closed-form Laplacian
    phi_quadrature: f64,
    /// |closed form - quadrature|
    discrepancy: f64,
    variant: Option<TestfunVariant>,
}

#[derive(Serialize)]
struct TestfunVariant {
    r1: f64,
    r2: f64,
    sigma_general: f64,
    k_general: f64,
    phi_v_delta: f64,
}

pub fn cmd_testfun(config: &Path, out_prefix: &Path) -> i32 {
    let (text, spec) = match read_config(config) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let manifest = RunManifest::new("testfun", &text, spec.solver.seed);
    log_manifest(&manifest);

    let geo = match GeometryData::resolve(&spec) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (p, n, tau, delta, k) = (spec.p, spec.dim, geo.tau, spec.delta, geo.k);

    let sigma = match testfun::sigma(p, n, tau, spec.quad_tol) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let phi_closed = testfun::phi_u_delta_with_sigma(p, n, tau, delta, sigma.value);
    let phi_quad = match crate::numerics::integrate(
        |s| {
            let (_, lap) = testfun::eval_u_delta(tau, delta, n, s);
            lap.abs().powf(p) * s.powf(n as f64 - 1.0)
        },
        tau / 2.0,
        tau,
        spec.quad_tol,
        &[],
    ) {
        Ok(q) => crate::geometry::sphere_area(n) * q.value / p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    let variant = match spec.annulus {
        None => None,
        Some((r1, r2)) => {
            let sg = match testfun::sigma_general(p, n, r1, r2, spec.quad_tol) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            Some(TestfunVariant {
                r1,
                r2,
                sigma_general: sg.value,
                k_general: testfun::k_general_with_sigma(p, n, r1, r2, k, sg.value),
                phi_v_delta: testfun::phi_v_delta_with_sigma(p, n, r1, r2, delta, k, sg.value),
            })
        }
    };

    // u_delta samples over [0, tau]
    let samples = 512usize;
    let mut csv = String::from("l,value,laplacian\n");
    for i in 0..=samples {
        let l = tau * i as f64 / samples as f64;
        let (v, lap) = testfun::eval_u_delta(tau, delta, n, l);
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(l),
            fmt_f64(v),
            fmt_f64(lap)
        ));
    }
    let udelta_path = path_with_suffix(out_prefix, "_udelta.csv");
    if let Err(e) = fs::write(&udelta_path, csv) {
        eprintln!("error: cannot write {}: {e}", udelta_path.display());
        return EXIT_CONFIG;
    }

    if let Some((r1, r2)) = spec.annulus {
        let mut csv = String::from("l,value,laplacian\n");
        for i in 0..=samples {
            let l = r2 * i as f64 / samples as f64;
            let v = testfun::eval_v_delta(r1, r2, delta, l);
            let lap = testfun::v_delta_laplacian(r1, r2, delta, n, l);
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(l),
                fmt_f64(v),
                fmt_f64(lap)
            ));
        }
        let vdelta_path = path_with_suffix(out_prefix, "_vdelta.csv");
        if let Err(e) = fs::write(&vdelta_path, csv) {
            eprintln!("error: cannot write {}: {e}", vdelta_path.display());
            return EXIT_CONFIG;
        }
    }

    let output = TestfunOutput {
        manifest,
        tau,
        k,
        k_source: match geo.k_source {
            KSource::TalentiBound => "talenti_bound".to_string(),
            KSource::UserOverride => "user_override".to_string(),
        },
        sigma: sigma.value,
        k_const: testfun::k_const_with_sigma(p, n, tau, k, sigma.value),
        eta: testfun::eta_with_sigma(spec.gamma, delta, p, n, tau, k, sigma.value),
        phi_u_delta: phi_closed,
        r: testfun::r_level(spec.gamma, p, k),
        phi_quadrature: phi_quad,
        discrepancy: (phi_closed - phi_quad).abs(),
        variant,
    };
    let json_path = out_prefix.with_extension("json");
    if let Err(e) = fs::write(&json_path, to_json(&output)) {
        eprintln!("error: cannot write {}: {e}", json_path.display());
        return EXIT_CONFIG;
    }
    EXIT_OK
}

fn path_with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    prefix.with_file_name(name)
}
