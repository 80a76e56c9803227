//! End-to-end tests of the binary: file formats, determinism, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monotone-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const FIG1B_CONFIG: &str = r#"{
  "schema_version": 1,
  "distribution": {
    "points": [{"x": 1.0, "y": 1.0}, {"x": 0.1, "y": 1.0}],
    "probs": [0.1, 0.9]
  },
  "learner": {"kind": "linear_absolute"},
  "loss": {"kind": "absolute"},
  "n_range": {"start": 1, "end": 40}
}"#;

#[test]
fn curve_csv_format_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", FIG1B_CONFIG);
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let output = run(&["curve", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(output.status.success(), "{output:?}");
    }
    let text = std::fs::read_to_string(&out1).unwrap();
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,expected_risk,limit_risk"));
    let mut count = 0;
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3, "line: {line}");
        assert_eq!(fields[0], (i + 1).to_string());
        for value in &fields[1..] {
            // 17 significant digits in scientific notation, '.' separator.
            assert!(
                value.contains('.') && value.contains('e'),
                "field not full-precision scientific: {value}"
            );
            let mantissa = value.split('e').next().unwrap();
            assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{value}");
            value.parse::<f64>().unwrap();
        }
        count += 1;
    }
    assert_eq!(count, 40);
    assert!(!text.contains('\r'));
}

#[test]
fn curve_json_and_range_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", FIG1B_CONFIG);
    let out = dir.path().join("curve.json");
    let output = run(&[
        "curve",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
        "--n-start",
        "3",
        "--n-end",
        "7",
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["n_start"], 3);
    assert_eq!(doc["n_end"], 7);
    assert_eq!(doc["entries"].as_array().unwrap().len(), 5);
    assert!(doc["limit_risk"].as_f64().unwrap() > 0.0);
}

#[test]
fn curve_with_monte_carlo_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", FIG1B_CONFIG);
    let out = dir.path().join("curve.csv");
    let output = run(&[
        "curve",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--n-end",
        "5",
        "--mc-replicates",
        "2000",
        "--seed",
        "9",
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,expected_risk,limit_risk,mc_estimate,mc_std_error\n"));
    // The estimate must sit within a few standard errors of the exact value.
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        let (exact, mc, se) = (f[0], f[2], f[3]);
        assert!((exact - mc).abs() <= 6.0 * se, "{line}");
    }
}

#[test]
fn check_reports_sawtooth_violations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", FIG1B_CONFIG);
    let out = dir.path().join("report.json");
    let output = run(&["check", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["verdict"], "violations-found");
    let ns: Vec<u64> = doc["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, vec![11, 22, 33]);
    assert_eq!(doc["deltas"].as_array().unwrap().len(), 40);
}

#[test]
fn check_single_point_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "single.json",
        r#"{
          "schema_version": 1,
          "distribution": {"points": [{"x": 1.0, "y": 1.0}], "probs": [1.0]},
          "learner": {"kind": "linear_squared"},
          "loss": {"kind": "squared"},
          "n_range": {"start": 1, "end": 10}
        }"#,
    );
    let out = dir.path().join("report.json");
    let output = run(&["check", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["verdict"], "monotone-on-range");
    assert_eq!(doc["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_code_one_for_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{\"schema_version\": 1}");
    let out = dir.path().join("x.csv");
    let output = run(&["curve", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("configuration error"));

    let missing = dir.path().join("missing.json");
    let output = run(&[
        "curve",
        "--config",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));

    // Unknown flags are configuration errors too.
    let output = run(&["curve", "--bogus"]);
    assert_eq!(output.status.code(), Some(1));

    let output = run(&[
        "reproduce",
        "fig9",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn exit_code_two_for_engine_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "big.json",
        r#"{
          "schema_version": 1,
          "distribution": {
            "points": [{"x": 1.0, "y": 1.0}, {"x": 0.5, "y": 1.0},
                       {"x": 0.2, "y": -1.0}, {"x": 0.1, "y": 1.0}],
            "probs": [0.25, 0.25, 0.25, 0.25]
          },
          "learner": {"kind": "linear_squared"},
          "loss": {"kind": "squared"},
          "n_range": {"start": 5000, "end": 5000}
        }"#,
    );
    let out = dir.path().join("x.csv");
    let output = run(&["curve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("capacity"));
}

#[test]
fn exit_code_three_for_fit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "degenerate.json",
        r#"{
          "schema_version": 1,
          "distribution": {"points": [{"z": 0.0}, {"z": 1.0}], "probs": [0.5, 0.5]},
          "learner": {"kind": "gaussian_variance_mle"},
          "loss": {"kind": "nll_gaussian_variance"},
          "n_range": {"start": 2, "end": 2}
        }"#,
    );
    let out = dir.path().join("x.csv");
    let output = run(&["curve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("fit error"));
}

#[test]
fn lemma_prints_margin_and_counterexample() {
    let output = run(&[
        "lemma",
        "--a",
        "1,1",
        "--b",
        "0.001,1",
        "--n",
        "5",
        "--learner",
        "linear-squared",
        "--find-q",
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(doc["margin"].as_f64().unwrap() > 0.99);
    assert_eq!(doc["not_locally_monotone"], true);
    assert_eq!(doc["losses_at_b"]["pure_b"], 0.0);
    assert!(doc["counterexample"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn find_q_succeeds_and_fails_where_expected() {
    let output = run(&[
        "find-q",
        "--a",
        "1",
        "--b",
        "0.001",
        "--n",
        "4",
        "--learner",
        "gaussian-variance",
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["found"], true);
    assert!(doc["counterexample"]["q"].as_f64().unwrap() > 0.0);

    // The mean estimator is monotone: no q exists.
    let output = run(&[
        "find-q",
        "--a",
        "0",
        "--b",
        "1",
        "--n",
        "2",
        "--learner",
        "gaussian-mean",
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(doc["found"], false);
    assert!(doc["counterexample"].is_null());
}

#[test]
fn reproduce_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("fig1b");
    let output = run(&["reproduce", "fig1b", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(out_dir.join("fig1b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101); // header + n in [1, 100]
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(doc["figure"], "fig1b");
    let curves = doc["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 1);
    let teeth: Vec<u64> = curves[0]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["n"].as_u64().unwrap())
        .collect();
    // Sawtooth rises at every multiple of 11 inside the range.
    assert_eq!(teeth, vec![11, 22, 33, 44, 55, 66, 77, 88, 99]);

    // Byte-identical on a second run.
    let out_dir2 = dir.path().join("again");
    let output = run(&[
        "reproduce",
        "fig1b",
        "--out-dir",
        out_dir2.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(
        std::fs::read(out_dir.join("fig1b.csv")).unwrap(),
        std::fs::read(out_dir2.join("fig1b.csv")).unwrap()
    );
}

#[test]
fn reproduce_fig1d_shows_violations_despite_intercept() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("fig1d");
    let output = run(&[
        "reproduce",
        "fig1d",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--n-end",
        "40",
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(doc["curves"][0]["verdict"], "violations-found");
}

#[test]
fn thread_cap_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", FIG1B_CONFIG);
    let out = dir.path().join("capped.csv");
    let output = bin()
        .env("MONOTONE_LAB_THREADS", "1")
        .args(["curve", "--config", &config, "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    // Same bytes as an uncapped run.
    let out2 = dir.path().join("uncapped.csv");
    let output = run(&[
        "curve",
        "--config",
        &config,
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn help_exits_zero() {
    let output = run(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&output.stdout).contains("curve"));
}
