//! End-to-end tests of the command-line interface through the built binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_curveop")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn cubic_config(dir: &Path, out: &Path) -> PathBuf {
    write_config(
        dir,
        "cubic.json",
        &format!(
            r#"{{"m":1,"phi":[1.0,1.0,-1.0,1.0],"weight":{{"family":"legendre"}},
                "n_max":12,"out":"{}"}}"#,
            out.display()
        ),
    )
}

#[test]
fn build_writes_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");
    let config = cubic_config(tmp.path(), &out);
    let result = run(&["build", config.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    for file in ["C.mtx", "Jx.mtx", "Jy.mtx", "summary.json", "sparsity.csv", "config.json"] {
        assert!(out.join(file).exists(), "{} missing", file);
    }
    let header = fs::read_to_string(out.join("C.mtx")).unwrap();
    assert!(header.starts_with("%%MatrixMarket matrix coordinate real general"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n_max"], 12);
    assert_eq!(summary["bandwidth_expected"], 1);
    assert_eq!(summary["bandwidth_lambda"], 1);
}

#[test]
fn build_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    let c1 = cubic_config(tmp.path(), &out1);
    assert!(run(&["build", c1.to_str().unwrap()]).status.success());
    let c2 = write_config(
        tmp.path(),
        "cubic2.json",
        &fs::read_to_string(&c1)
            .unwrap()
            .replace(&out1.display().to_string(), &out2.display().to_string()),
    );
    assert!(run(&["build", c2.to_str().unwrap()]).status.success());
    for file in ["C.mtx", "Jx.mtx", "Jy.mtx", "sparsity.csv"] {
        let a = fs::read(out1.join(file)).unwrap();
        let b = fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{} differs between identical runs", file);
    }
}

#[test]
fn emitted_matrices_reparse_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");
    let config = cubic_config(tmp.path(), &out);
    assert!(run(&["build", config.to_str().unwrap()]).status.success());
    // verify --from re-reads C.mtx and audits it
    let result = run(&["verify", config.to_str().unwrap(), "--from", out.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&result.stdout)
    );
}

#[test]
fn verify_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("check");
    let config = cubic_config(tmp.path(), &out);
    let result = run(&["verify", config.to_str().unwrap(), "--oracle"]);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(result.status.success(), "stdout: {}", stdout);
    assert!(stdout.contains("PASS orthonormality"));
    assert!(stdout.contains("PASS oracle_span"));
    assert!(out.join("report.json").exists());
}

#[test]
fn shifted_parabola_verifies_clean() {
    // y^2 = x + 1 on [-1, 1]: an explicit quadric arrangement
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("parabola");
    let config = write_config(
        tmp.path(),
        "parabola.json",
        &format!(
            r#"{{"m":2,"phi":[1.0,1.0],"weight":{{"family":"legendre"}},
                "n_max":10,"out":"{}"}}"#,
            out.display()
        ),
    );
    let result = run(&["verify", config.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&result.stdout)
    );
}

#[test]
fn even_curve_has_roughly_half_the_sparsity_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let count_entries = |name: &str, phi: &str| -> usize {
        let out = tmp.path().join(name);
        let config = write_config(
            tmp.path(),
            &format!("{}.json", name),
            &format!(
                r#"{{"m":1,"phi":{},"weight":{{"family":"legendre"}},
                    "n_max":20,"out":"{}"}}"#,
                phi,
                out.display()
            ),
        );
        assert!(run(&["build", config.to_str().unwrap()]).status.success());
        fs::read_to_string(out.join("sparsity.csv"))
            .unwrap()
            .lines()

            .count()
            - 1
    };
    // even sextic vs a dense sextic of the same degree
    let even = count_entries("even", "[1.0,0.0,-1.0,0.0,-1.0,0.0,1.0]");
    let dense = count_entries("dense", "[0.1,0.1,-0.1,0.1,-0.1,0.1,0.1]");
    assert!(
        (even as f64) < 0.65 * dense as f64,
        "even {} vs dense {}",
        even,
        dense
    );
}

#[test]
fn corrupted_connection_file_fails_orthogonality() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("artifacts");
    let config = cubic_config(tmp.path(), &out);
    assert!(run(&["build", config.to_str().unwrap()]).status.success());
    // corrupt one coefficient
    let path = out.join("C.mtx");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.last_mut().unwrap();
    let mut parts: Vec<&str> = last.split_whitespace().collect();
    let bumped = format!("{}", parts[2].parse::<f64>().unwrap() + 0.5);
    parts[2] = &bumped;
    *last = parts.join(" ");
    fs::write(&path, lines.join("\n")).unwrap();

    let result = run(&["verify", config.to_str().unwrap(), "--from", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("FAIL orthogonality"), "stdout: {}", stdout);
}

#[test]
fn no_reorth_verification_fails_at_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("unstable");
    let config = write_config(
        tmp.path(),
        "sextic.json",
        &format!(
            r#"{{"m":1,"phi":[0.1,0.1,-0.1,0.1,-0.1,0.1,0.1],"weight":{{"family":"legendre"}},
                "n_max":40,"out":"{}"}}"#,
            out.display()
        ),
    );
    let result = run(&["verify", config.to_str().unwrap(), "--no-reorth"]);
    assert_eq!(result.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("FAIL orthonormality"), "stdout: {}", stdout);
}

#[test]
fn eval_skips_off_curve_points_and_keeps_constant_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("eval-out");
    let config = write_config(
        tmp.path(),
        "circle.json",
        &format!(
            r#"{{"m":2,"phi":[1.0,0.0,-1.0],"weight":{{"family":"legendre"}},
                "n_max":6,"out":"{}"}}"#,
            out.display()
        ),
    );
    let points = write_config(
        tmp.path(),
        "points.csv",
        "0.0,1.0\n0.6,0.8\n0.6,-0.8\n0.5,0.9\n",
    );
    let result = run(&["eval", config.to_str().unwrap(), points.to_str().unwrap()]);
    assert!(result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("off curve"), "stderr: {}", stderr);
    let body = fs::read_to_string(out.join("eval.csv")).unwrap();
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(rows.len(), 4, "header plus three valid points");
    // Y_{0,1} is the normalized constant: identical in every row
    let first_vals: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for v in &first_vals {
        assert!((v - first_vals[0]).abs() < 1e-15);
    }
}

#[test]
fn explicit_case_emits_identity_pattern() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("quadric");
    let config = write_config(
        tmp.path(),
        "circle.json",
        &format!(
            r#"{{"m":2,"phi":[1.0,0.0,-1.0],"weight":{{"family":"legendre"}},
                "n_max":8,"out":"{}"}}"#,
            out.display()
        ),
    );
    assert!(run(&["build", config.to_str().unwrap()]).status.success());
    let t = fs::read_to_string(out.join("C.mtx")).unwrap();
    for (i, line) in t.lines().enumerate() {
        if i < 2 {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(parts[0], parts[1], "identity pattern broken: {}", line);
        assert_eq!(parts[2].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn scaling_emits_table_and_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scale");
    let config = write_config(
        tmp.path(),
        "quartic.json",
        &format!(
            r#"{{"m":1,"phi":[1.0,1.0,-1.0,1.0,1.0],"weight":{{"family":"legendre"}},
                "n_max":8,"out":"{}"}}"#,
            out.display()
        ),
    );
    let result = run(&[
        "scaling",
        config.to_str().unwrap(),
        "--n-values",
        "8,16",
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("scaling.json")).unwrap()).unwrap();
    assert!(summary["slope_n"].is_number());
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn trivial_budget_still_emits_valid_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tiny");
    let config = write_config(
        tmp.path(),
        "tiny.json",
        &format!(
            r#"{{"m":1,"phi":[1.0,1.0,-1.0,1.0],"weight":{{"family":"legendre"}},
                "n_max":1,"out":"{}"}}"#,
            out.display()
        ),
    );
    assert!(run(&["build", config.to_str().unwrap()]).status.success());
    let t = fs::read_to_string(out.join("C.mtx")).unwrap();
    assert!(t.lines().count() >= 3);
    let result = run(&["verify", config.to_str().unwrap(), "--from", out.to_str().unwrap()]);
    assert!(result.status.success());
}

#[test]
fn invalid_curve_is_a_clean_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let config = write_config(
        tmp.path(),
        "bad.json",
        &format!(
            r#"{{"m":2,"phi":[-2.0,0.0,1.0],"weight":{{"family":"legendre"}},
                "n_max":6,"out":"{}"}}"#,
            out.display()
        ),
    );
    let result = run(&["build", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("invalid curve"), "stderr: {}", stderr);
    assert!(!out.exists(), "failed builds must not leave artifacts");
}

#[test]
fn cross_check_flag_accepts_clean_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("xc");
    let config = cubic_config(tmp.path(), &out);
    let result = run(&["build", config.to_str().unwrap(), "--cross-check"]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["cross_check_deviation"].as_f64().unwrap() < 1e-6);
}
