//! End-to-end checks of the `pbh` binary: exit codes, file formats, the
//! published report schema, and output determinism.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pbh")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const EXAMPLE36: &str = "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nh = 2\nn = 64\nseed = 5\n";

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

// Minimal structural validator for the subset of JSON Schema the shipped
// schema uses: type (possibly a union), properties, required, items, enum.
fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(allowed) = schema.get("enum") {
        let ok = allowed
            .as_array()
            .unwrap()
            .iter()
            .any(|candidate| candidate == value);
        if !ok {
            return Err(format!("{path}: {value} not in enum {allowed}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().map(|v| v.as_str().unwrap()).collect(),
            _ => vec![],
        };
        let matches = names.iter().any(|name| match *name {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !matches {
            return Err(format!("{path}: type mismatch, want {names:?}"));
        }
        if value.is_null() && names.contains(&"null") {
            return Ok(()); // nothing further to check on a null
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
            for key in required {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required key `{key}`"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(arr) = value.as_array() {
        if let Some(items) = schema.get("items") {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[test]
fn certify_grants_and_validates_against_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let out = dir.path().join("report.json");
    let result = run(&["certify", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));

    let text = std::fs::read_to_string(&out).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    validate(&schema, &value, "$").unwrap();

    // headline facts of the reference example
    assert_eq!(value["report"]["sup_level_integral"].as_f64().unwrap(), 0.0);
    assert_eq!(value["report"]["intervals"]["lambda2"], Value::String("inf".into()));
    assert_eq!(value["report"]["granted"], Value::Bool(true));
}

#[test]
fn certify_denies_zero_nonlinearity_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.cfg",
        "N = 3\np = 2\ndomain = ball\nradius = 1\nf = powersum\ngamma = 2\ndelta = 8\n",
    );
    let out = dir.path().join("report.json");
    let result = run(&["certify", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    // the report is still written, with denial encoded
    let value: Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(value["report"]["granted"], Value::Bool(false));
    assert!(value["report"]["intervals"].is_null());
}

#[test]
fn bad_exponent_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "N = 3\np = 1.4\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\n",
    );
    let result = run(&["certify", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("p must exceed max{1, N/2}"), "stderr: {stderr}");
}

#[test]
fn solve_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let prefix = dir.path().join("sol");
    let result = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--lambda",
        "5000",
        "--init",
        "udelta",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let csv = std::fs::read_to_string(dir.path().join("sol.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "r,u");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 65); // n + 1 nodes
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 0.0);
    // 17 significant digits in scientific notation
    assert!(first[1].contains('e'), "row format: {}", rows[0]);
    let last: Vec<&str> = rows[64].split(',').collect();
    assert_eq!(last[1].parse::<f64>().unwrap(), 0.0); // boundary value

    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sol.json")).unwrap())
            .unwrap();
    for key in [
        "lambda",
        "energy",
        "residual",
        "norm",
        "max_abs",
        "classification",
        "iterations",
        "grid_n",
        "converged",
    ] {
        assert!(meta.get(key).is_some(), "metadata missing {key}");
    }
    assert_eq!(meta["converged"], Value::Bool(true));
    assert!(meta["energy"].as_f64().unwrap() < 0.0);
}

#[test]
fn solve_zero_init_gives_trivial_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let prefix = dir.path().join("triv");
    let result = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--lambda",
        "5000",
        "--init",
        "zero",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("triv.json")).unwrap())
            .unwrap();
    assert_eq!(meta["classification"], Value::String("trivial".into()));
    assert_eq!(meta["residual"].as_f64().unwrap(), 0.0);
    let csv = std::fs::read_to_string(dir.path().join("triv.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(u, 0.0);
    }
}

#[test]
fn solve_rejects_bad_lambda_and_box_domain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let prefix = dir.path().join("x");
    let result = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--lambda",
        "0",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("lambda must be positive"));

    let box_cfg = write_config(
        dir.path(),
        "box.cfg",
        "N = 3\np = 2\ndomain = box\nlower = 0 0 0\nupper = 1 1 1\nf = example36\ngamma = 2\ndelta = 8\n",
    );
    let result = run(&[
        "solve",
        box_cfg.to_str().unwrap(),
        "--lambda",
        "10",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("ball domain"));
}

#[test]
fn solve_accepts_file_init() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let first = dir.path().join("first");
    assert_eq!(
        run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--lambda",
            "5000",
            "--init",
            "udelta",
            "--out",
            first.to_str().unwrap(),
        ])
        .status
        .code(),
        Some(0)
    );
    let second = dir.path().join("second");
    let init_arg = format!("file:{}", dir.path().join("first.csv").display());
    assert_eq!(
        run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--lambda",
            "5000",
            "--init",
            &init_arg,
            "--out",
            second.to_str().unwrap(),
        ])
        .status
        .code(),
          Some(0)
    );
    // restarting from the converged state lands on the same solution
    let a: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("first.json")).unwrap())
            .unwrap();
    let b: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("second.json")).unwrap())
            .unwrap();
    let ea = a["energy"].as_f64().unwrap();
    let eb = b["energy"].as_f64().unwrap();
    assert!((ea - eb).abs() <= 1e-6 * ea.abs());
}

#[test]
fn branch_table_annotations_flip_at_lambda1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);

    // fetch lambda1 from a certify run
    let report_path = dir.path().join("report.json");
    run(&[
        "certify",
        cfg.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let lambda1 = report["report"]["intervals"]["lambda1"].as_f64().unwrap();

    let out = dir.path().join("branch.csv");
    let range = format!("{}:{}:5", 0.5 * lambda1, 2.0 * lambda1);
    let result = run(&[
        "branch",
        cfg.to_str().unwrap(),
        "--lambdas",
        &range,
        "--multistart",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("lambda,in_lambda1,below_lambda3h,n_distinct"));
    let mut flips = Vec::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let lambda: f64 = cols[0].parse().unwrap();
        let in_l1: bool = cols[1].parse().unwrap();
        assert_eq!(in_l1, lambda > lambda1, "annotation at lambda = {lambda}");
        flips.push(in_l1);
    }
    assert!(flips.contains(&false) && flips.contains(&true));
}

#[test]
fn branch_single_point_and_malformed_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e36.cfg", EXAMPLE36);
    let out = dir.path().join("one.csv");
    let result = run(&[
        "branch",
        cfg.to_str().unwrap(),
        "--lambdas",
        "100:100:1",
        "--multistart",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2); // header + one row

    let result = run(&[
        "branch",
        cfg.to_str().unwrap(),
        "--lambdas",
        "nonsense",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn testfun_outputs_profile_and_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e36.cfg",
        "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nr1 = 0.5\nr2 = 1\n",
    );
    let prefix = dir.path().join("tf");
    let result = run(&["testfun", cfg.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0));

    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tf.json")).unwrap())
            .unwrap();
    // sigma_{2,3}(1) = 83/1120
    let sigma = json["sigma"].as_f64().unwrap();
    assert!((sigma - 83.0 / 1120.0).abs() / (83.0 / 1120.0) <= 1e-9);
    // closed form vs quadrature discrepancy below the quadrature tolerance
    let disc = json["discrepancy"].as_f64().unwrap();
    let phi = json["phi_u_delta"].as_f64().unwrap();
    assert!(disc <= 1e-10 * phi.max(1.0), "discrepancy {disc:.3e}");
    assert!(json["variant"].is_object());

    let csv = std::fs::read_to_string(dir.path().join("tf_udelta.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "l,value,laplacian");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    // l spans [0, tau]; value is delta on the inner ball and 0 at tau
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][1], 8.0);
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert_eq!(last[1], 0.0);
    for row in &rows {
        if row[0] <= 0.5 {
            assert_eq!(row[1], 8.0);
        }
    }
    assert!(dir.path().join("tf_vdelta.csv").exists());
}

#[test]
fn solve_nonconvergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // an iteration budget of 1 cannot reach the tolerance from the bump
    let cfg = write_config(
        dir.path(),
        "tight.cfg",
        "N = 3\np = 2\ndomain = ball\nradius = 1\nf = example36\ngamma = 2\ndelta = 8\nn = 64\nmax_iter = 1\ntol = 1e-14\n",
    );
    let prefix = dir.path().join("nc");
    let result = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--lambda",
        "5000",
        "--init",
        "udelta",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(3));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("nc.json")).unwrap())
            .unwrap();
    assert_eq!(meta["converged"], Value::Bool(false));
}
