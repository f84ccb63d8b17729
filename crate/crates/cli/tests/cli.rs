use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_alphaport");

const FIG_B1_NETLIST: &str = "\
# bridge with two meshes
.input a b
.branch a b
.branch a o
.branch o b
.branch o x
.branch x b
.mesh m1 2 3 -1
.mesh m2 4 5 -3
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ALPHAPORT_MAX_ITERS")
        .output()
        .expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("ALPHAPORT_MAX_ITERS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&run(&full))).expect("valid JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

#[test]
fn superpose_bridge_json() {
    let v = json(&["superpose", "--canonical", "fig_a1", "--f", "1:1,1:3", "--vin", "1"]);
    assert!((num(&v, "F") - 2.7452378).abs() < 1e-6);
    assert!((num(&v, "G") - 2.73252).abs() < 5e-4);
    assert!((num(&v, "eta") - 0.0046).abs() < 1e-4);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["v_in", "F", "G", "eta", "eta_nonlinear", "nonlinearity_degree", "bound", "per_term"]
    );
    let terms = v["per_term"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert!((num(&terms[0], "phi") - 1.6).abs() < 1e-8);
}

#[test]
fn ladder_csv_line() {
    let text = stdout(&run(&["ladder", "--alpha", "3", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,lambda,phi"));
    assert!(lines.next().unwrap().starts_with("3,3.024688"));
}

#[test]
fn alpha_test_bridge_phi() {
    let v = json(&["alpha-test", "--canonical", "fig4", "--alpha", "2"]);
    let phi = v["profiles"][0]["phi"].as_f64().unwrap();
    assert!((phi - 11.0 / 9.0).abs() < 1e-8);
}

#[test]
fn text_output_lists_summary_then_table() {
    let text = stdout(&run(&["superpose", "--canonical", "fig_a1", "--f", "1:1,1:3"]));
    assert!(text.starts_with("circuit"));
    assert!(text.contains("\n\n"));
    assert!(text.lines().any(|l| l.trim_start().starts_with("v_in")));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["ladder", "--alphas", ""][..],
        &["superpose", "--canonical", "fig_a1", "--f", "1:x"],
        &["superpose", "--canonical", "nope", "--f", "1:1"],
        &["analyze", "--canonical", "fig3", "--f", "1:1", "--vin", "-1"],
        &["sweep", "--canonical", "fig3", "--f", "1:1"],
        &["analyze", "--netlist", "/nonexistent/x.net", "--f", "1:1"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn solver_failure_exits_two() {
    let out = Command::new(BIN)
        .args(["analyze", "--canonical", "fig3", "--f", "1:1,1:3", "--vin", "3"])
        .env("ALPHAPORT_MAX_ITERS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converge"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sweep", "--canonical", "fig_a1", "--f", "1:1,1:3", "--vins", "0.1,1,3", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["analyze", "--canonical", "fig4", "--f", "1:1,1:3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn meta_goes_to_stderr_only() {
    let args = ["ladder", "--alpha", "2", "--format", "json"];
    let plain = run(&args);
    let mut with = args.to_vec();
    with.push("--meta");
    let meta = run(&with);
    assert_eq!(plain.stdout, meta.stdout);
    assert!(plain.stderr.is_empty());
    assert!(String::from_utf8_lossy(&meta.stderr).starts_with("alphaport "));
}

#[test]
fn every_command_matches_the_schema() {
    let validator = schema();
    let cases: &[&[&str]] = &[
        &["analyze", "--canonical", "fig3", "--f", "1:1,1:3", "--vin", "2"],
        &["alpha-test", "--canonical", "fig4", "--alpha", "2"],
        &["alpha-test", "--canonical", "ladder", "--sections", "4", "--alphas", "1,2,3"],
        &["superpose", "--canonical", "fig_a1", "--f", "1:1,1:3"],
        &["superpose", "--canonical", "fig3", "--f", "1:1,1:2,1:3"],
        &["ladder", "--alphas", "1,2,3"],
        &["ladder", "--alpha", "2", "--central", "--sections", "6"],
        &["mesh", "--alpha", "2"],
        &["mesh", "--canonical", "fig_b1", "--f", "1:1,2:3", "--iin", "0.5"],
        &["sweep", "--canonical", "fig3", "--alphas", "1,2,3"],
        &["sweep", "--canonical", "fig_a1", "--f", "1:1,1:3", "--vins", "0.1,1"],
        &["sweep", "--table1"],
    ];
    for args in cases {
        let v = json(args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
    // a stray key is rejected
    let mut v = json(cases[3]);
    v["extra"] = Value::from(1);
    assert!(!validator.is_valid(&v));
}

#[test]
fn drive_sweep_ratio_increases() {
    let v = json(&["sweep", "--canonical", "fig_a1", "--f", "1:1,1:3", "--vins", "0.01,0.1,1,3,10"]);
    let columns: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    let k = columns.iter().position(|&c| c == "d_o").unwrap();
    let d: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[k].as_f64().unwrap())
        .collect();
    assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
    // between the linear and the cubic realizations
    assert!(d[0] > 0.4 - 1e-4 && d[4] < 0.5);
}

#[test]
fn precision_table_rows() {
    let v = json(&["sweep", "--table1"]);
    let rows = v["rows"].as_array().unwrap();
    let errors: Vec<(String, f64)> = rows
        .iter()
        .map(|r| (r[0].as_str().unwrap().to_string(), r[3].as_f64().unwrap()))
        .collect();
    let expect = [("fig_a1", 0.0046, 2e-4), ("ladder", 0.037, 1e-3), ("ladder_central", 0.004, 2e-4)];
    assert_eq!(errors.len(), expect.len());
    for ((name, e), (want_name, want, tol)) in errors.iter().zip(expect) {
        assert_eq!(name, want_name);
        assert!((e - want).abs() < tol, "{name}: {e}");
    }
}

#[test]
fn netlist_from_file_matches_canonical() {
    let path = std::env::temp_dir().join(format!("alphaport-cli-{}.net", std::process::id()));
    std::fs::write(&path, ".input a b\n.branch a b\n.branch a o\n.branch o b w=2\n.f 1:1,1:3\n").unwrap();
    let from_file = json(&["superpose", "--netlist", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    // a + (o with a double branch to b): F = f(1) + series solution
    let f = |v: f64| v + v.powi(3);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // current into o from a equals twice the current from o to b
        if f(1.0 - mid) > 2.0 * f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = f(1.0) + f(1.0 - lo);
    assert!((num(&from_file, "F") - oracle).abs() < 1e-7 * oracle);
}

#[test]
fn mesh_netlist_from_stdin() {
    let args = ["mesh", "--netlist", "-", "--alpha", "2", "--format", "json"];
    let v: Value = serde_json::from_str(&stdout(&run_stdin(&args, FIG_B1_NETLIST))).unwrap();
    let canonical = json(&["mesh", "--canonical", "fig_b1", "--alpha", "2"]);
    assert!((num(&v, "phi_meshes") - num(&canonical, "phi_meshes")).abs() < 1e-8);
    assert!((num(&v, "phi_meshes") - num(&v, "phi_via_nodes")).abs() < 1e-7);
    // linear bridge: input resistance 5/8
    let linear = json(&["mesh", "--alpha", "1"]);
    assert!((num(&linear, "phi_meshes") - 0.625).abs() < 1e-9);
}

#[test]
fn mesh_without_meshes_is_a_usage_error() {
    let out = run(&["mesh", "--canonical", "fig3", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
