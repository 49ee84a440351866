use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lamvoc_cli::output::parse_kv;

const BIN: &str = env!("CARGO_BIN_EXE_lamvoc");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lamvoc-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("s.scn");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn empty_scenario_names_first_missing_key() {
    let dir = scratch("empty");
    let p = write_scenario(&dir, "");
    let out = run(&["simulate", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing key: network.n"));
}

#[test]
fn negative_conductance_rejected() {
    let dir = scratch("neg");
    let text = fs::read_to_string(scenario("three_converter.scn"))
        .unwrap()
        .replace("conductance = 0.5         # S", "conductance = -1.0");
    let p = write_scenario(&dir, &text);
    let out = run(&["check-stability", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conductance must be positive"));
}

#[test]
fn missing_file_is_a_scenario_error() {
    let out = run(&["steady-state", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_stability_failure_exits_four() {
    let s = scenario("three_converter.scn");
    let plain = run(&["check-stability", "--scenario", s.to_str().unwrap()]);
    assert_eq!(plain.status.code(), Some(0));
    let strict = run(&["check-stability", "--strict", "--scenario", s.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn stability_kv_flags_match_reported_numbers() {
    let dir = scratch("kv");
    let s = scenario("three_converter.scn");
    let out = run(&["check-stability", "--scenario", s.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let kv = parse_kv(&fs::read_to_string(dir.join("three_converter.stability.kv")).unwrap());
    let get = |k: &str| kv.iter().find(|e| e.0 == k).map(|e| e.1.clone()).unwrap();
    let num = |k: &str| get(k).parse::<f64>().unwrap();
    assert_eq!(get("assumption1_ok") == "true", num("tau") < num("tau_star"));
    assert_eq!(get("cond_13a_ok") == "true", num("alpha_max") < num("alpha_star"));
    assert_eq!(get("cond_13b_ok") == "true", 0.0 < num("xi1"));
    assert_eq!(get("cond_13c_ok") == "true", num("epsilon") < num("cond_13c_rhs"));
}

#[test]
fn runs_are_byte_identical() {
    let s = scenario("three_converter.scn");
    let mut files = Vec::new();
    for tag in ["det-a", "det-b"] {
        let dir = scratch(tag);
        let out = run(&[
            "load-step",
            "--scenario",
            s.to_str().unwrap(),
            "--frame",
            "dq",
            "--dt",
            "1e-5",
            "--t-end",
            "0.6",
            "--with-lines",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        files.push(fs::read(dir.join("three_converter.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn csv_rows_are_consistent() {
    let dir = scratch("csv");
    let s = scenario("perturbed_start.scn");
    let out = run(&[
        "simulate",
        "--scenario",
        s.to_str().unwrap(),
        "--frame",
        "alphabeta",
        "--t-end",
        "0.02",
        "--with-lines",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join("perturbed_start.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 3 * 9 + 3 * 2);
    assert_eq!(header[5], "r_1");
    assert_eq!(header[7], "theta_err_1");
    assert_eq!(header[28], "i_alpha_1");
    let mut rows = 0;
    for line in lines {
        let x: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(x.len(), header.len());
        for k in 0..3 {
            let b = 1 + 9 * k;
            let r = x[b].hypot(x[b + 1]);
            // twelve significant digits per field bound the agreement
            assert!((x[b + 4] - r).abs() <= 1e-11 * r, "row {rows} node {k}");
            let p = x[b] * x[b + 2] + x[b + 1] * x[b + 3];
            assert!((x[b + 7] - p).abs() <= 1e-9 * p.abs().max(1.0));
        }
        rows += 1;
    }
    assert_eq!(rows, 2001);
    assert!(dir.join("perturbed_start.resolved.scn").exists());
}

#[test]
fn sweep_writes_one_row_per_scale() {
    let dir = scratch("sweep");
    let s = scenario("perturbed_start.scn");
    let out = run(&[
        "sweep-epsilon",
        "--scenario",
        s.to_str().unwrap(),
        "--scales",
        "1,0.5",
        "--t-end",
        "0.005",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join("perturbed_start.sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn bad_step_argument_is_usage_error() {
    let s = scenario("three_converter.scn");
    let out = run(&["load-step", "--scenario", s.to_str().unwrap(), "--step-g", "0:1:0.5"]);
    assert_eq!(out.status.code(), Some(2));
}
