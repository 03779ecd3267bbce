use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcstab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (serde_json::Value, i32) {
    let out = run(args);
    let v =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (v, out.status.code().unwrap())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let path = std::env::temp_dir().join(format!("arcstab-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

#[test]
fn weight_reports_both_orders() {
    let (v, code) = json(&["--json", "weight", &fixture("quadratic_unstable.json"), "--arc", "lambda"]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "weight");
    assert_eq!(v["weight"], v["specialization_weight"]);
    assert_eq!(v["specialization_agrees"], true);
    assert_eq!(v["weight"].as_i64().unwrap(), v["m_v"].as_i64().unwrap() - v["m_w"].as_i64().unwrap());
}

#[test]
fn unipotent_norm_is_two() {
    let (v, code) = json(&["--json", "norm", &fixture("unipotent.json"), "--arc", "unipotent"]);
    assert_eq!(code, 0);
    assert_eq!(v["norm"], 2);
    assert_eq!(v["slot_order"], "analytic");
    let (v, _) = json(&["--json", "norm", &fixture("unipotent.json"), "--arc", "unipotent", "--slot-order", "paper"]);
    assert_eq!(v["norm"], -2);
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let uni = fixture("unipotent.json");
    let (v, code) = json(&["--json", "check", "stable", &uni]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"]["status"], "destabilized");
    assert_eq!(v["verdict"]["arc"], "unipotent");
    assert_eq!(v["epsilon"], "1/2");
    let (v, code) = json(&["--json", "check", "semistable", &uni]);
    assert_eq!(code, 0);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    let (v, _) = json(&["--json", "check", "stable", &uni, "--epsilon", "1/3"]);
    assert_eq!(v["epsilon"], "1/3");
    assert_eq!(run(&["check", "stable", &uni, "--epsilon", "0"]).status.code(), Some(2));
}

#[test]
fn polystable_needs_properness() {
    let file = fixture("rank2_reduced_norm.json");
    let out = run(&["check", "polystable", &file]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("proper"), "{}", stderr(&out));
    assert_eq!(run(&["check", "polystable", &file, "--allow-improper"]).status.code(), Some(0));
}

#[test]
fn reduced_norm_fixture() {
    let (v, code) = json(&["--json", "reduced-norm", &fixture("rank2_reduced_norm.json"), "--arc", "identity"]);
    assert_eq!(code, 0);
    assert_eq!(v["reduced_norm"], "0/1");
    assert_eq!(v["proper"], false);
    assert_eq!(v["attained"], true);
}

#[test]
fn scan_finds_the_destabilizing_cocharacter() {
    let (v, code) = json(&["--json", "scan-1ps", &fixture("quadratic_unstable.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["min_weight"], -2);
    let (v, code) = json(&["--json", "scan-1ps", &fixture("quadratic_semistable.json"), "--box", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["min_weight"], 0);
}

#[test]
fn snf_exponents_sum_to_the_determinant_order() {
    let (v, code) = json(&["--json", "snf", &fixture("cocharacter_slope.json"), "--arc", "lambda"]);
    assert_eq!(code, 0);
    let e: Vec<i64> = v["exponents"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
    assert_eq!(e.iter().sum::<i64>(), 0);
    let mut sorted = e.clone();
    sorted.sort();
    assert_eq!(sorted, vec![-1, 1]);
}

#[test]
fn slope_writes_plot_data() {
    let plot = std::env::temp_dir().join(format!("arcstab-cli-{}-plot.dat", std::process::id()));
    let plot_s = plot.display().to_string();
    let (v, code) =
        json(&["--json", "slope", &fixture("cocharacter_slope.json"), "--arc", "lambda", "--plot-data", &plot_s]);
    assert_eq!(code, 0);
    assert_eq!(v["within_tolerance"], true);
    assert!((v["slope"].as_f64().unwrap() + 2.0).abs() < 0.05);
    let data = std::fs::read_to_string(&plot).unwrap();
    let rows: Vec<&str> = data.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), v["samples"].as_array().unwrap().len());
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 2));
}

#[test]
fn text_output_is_key_value() {
    let out = run(&["weight", &fixture("unipotent.json"), "--arc", "unipotent"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "weight: 0"), "{text}");
    assert!(text.lines().any(|l| l == "command: weight"), "{text}");
}

#[test]
fn sequential_matches_parallel() {
    let file = fixture("quadratic_semistable.json");
    let a = run(&["--json", "scan-1ps", &file, "--box", "3"]);
    let b = run(&["--json", "--sequential", "scan-1ps", &file, "--box", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn errors_exit_two_with_a_location() {
    let out = run(&["weight", "/nonexistent/problem.json", "--arc", "lambda"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let out = run(&["weight", &fixture("unipotent.json"), "--arc", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope"));

    let truncated = scratch("truncated.json", "{\"group_dim\": 2,\n  \"V\": \"std(2)\"");
    let out = run(&["weight", &truncated, "--arc", "a"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let bad_series = scratch(
        "series.json",
        r#"{"group_dim": 2, "V": "std(2)", "W": "std(2)", "v": {"e1": "1"}, "w": {"e1": "1"},
            "arcs": [{"name": "a", "matrix": [["1", "z^"], ["0", "1"]]}]}"#,
    );
    let out = run(&["weight", &bad_series, "--arc", "a"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("entry (1, 2)"), "{}", stderr(&out));

    let singular = scratch(
        "singular.json",
        r#"{"group_dim": 2, "V": "std(2)", "W": "std(2)", "v": {"e1": "1"}, "w": {"e1": "1"},
            "arcs": [{"name": "a", "matrix": [["1", "z"], ["1", "z"]]}]}"#,
    );
    assert_eq!(run(&["weight", &singular, "--arc", "a"]).status.code(), Some(2));
}
