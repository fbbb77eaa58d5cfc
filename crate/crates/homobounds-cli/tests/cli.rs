use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homobounds"))
        .args(args)
        .env_remove("HOMOBOUNDS_TOL")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn close(v: &Value, x: f64, tol: f64) -> bool {
    (v.as_f64().expect("number") - x).abs() <= tol
}

const LAM_A: &str = "[[1.3333333333333333,0],[0,1.5]]";

#[test]
fn gset_check_corner() {
    let out = run(&["gset", "check", "--a", "1,2", "--theta", "0.5", "--astar", "[[1.3333333333,0],[0,1.5]]"]);
    assert_eq!(json_of(&out)["report"]["verdict"], "corner");
}

#[test]
fn gset_near_equal_phases_rejected() {
    let out = run(&["gset", "check", "--a", "1,1.0000001", "--theta", "0", "--astar", "[[1,0],[0,1]]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gset_outside_with_assert_exits_one() {
    let args = ["gset", "check", "--a", "1,2", "--theta", "0.5", "--astar", "[[1.1,0],[0,1.1]]"];
    assert_eq!(json_of(&run(&args))["report"]["verdict"], "outside");
    let mut with = args.to_vec();
    with.push("--assert");
    assert_eq!(run(&with).status.code(), Some(1));
}

#[test]
fn gset_sample_upper_rows_on_boundary() {
    let out = run(&["gset", "sample", "--side", "upper", "--n", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda1,lambda2,verdict"));
    let verdicts: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(verdicts.len(), 50);
    // the two ends of the curve are the laminate corners
    assert_eq!(verdicts[0], "corner");
    assert_eq!(verdicts[49], "corner");
    assert!(verdicts[1..49].iter().all(|v| *v == "boundary_upper"));
}

#[test]
fn pair_check_laminate_and_round_trip() {
    let out = run(&["pair", "check", "--a", "1,2,0.5", "--b", "1,3,0.5", "--astar", LAM_A, "--bsharp", "[[1.5555555555555556,0],[0,2]]"]);
    let v = json_of(&out);
    assert_eq!(v["report"]["region"], "L1U1");
    assert!(close(&v["report"]["li_slack"], 0.0, 1e-12));
    let path = tmp("pair_out.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = run(&["pair", "check", "--input", path.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn pair_chain_violation_asserts() {
    let args = ["pair", "check", "--a", "1,2,0.5", "--b", "1,3,0.5", "--astar", LAM_A, "--bsharp", "[[0.5,0],[0,2]]", "--assert"];
    assert_eq!(run(&args).status.code(), Some(1));
    assert_eq!(run(&args[..args.len() - 1]).status.code(), Some(0));
}

#[test]
fn pair_sweep_deterministic() {
    let args = ["pair", "sweep", "--seed", "7", "--count", "500", "--assert"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 501);
    let other = run(&["pair", "sweep", "--seed", "8", "--count", "500"]);
    assert_ne!(other.stdout, text.as_bytes());
}

#[test]
fn pair_sweep_file_output_matches_stdout() {
    let path = tmp("sweep.csv");
    let out = run(&["pair", "sweep", "--seed", "3", "--count", "50", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), run(&["pair", "sweep", "--seed", "3", "--count", "50"]).stdout);
}

#[test]
fn oned_bounds_interval() {
    let v = json_of(&run(&["oned", "bounds", "--a", "1,2,0.5", "--b", "1,3,0.5"]));
    assert!(close(&v["bounds"]["lower"], 14.0 / 9.0, 1e-14));
    assert!(close(&v["bounds"]["upper"], 26.0 / 9.0, 1e-14));
}

#[test]
fn oned_invert_quarter() {
    let v = json_of(&run(&["oned", "invert", "--target", "2.2222222222"]));
    assert!(close(&v["thetaAB"], 0.25, 1e-9));
}

#[test]
fn oned_converge_table() {
    let path = tmp("nested.json");
    std::fs::write(&path, r#"{"cells":[{"len":0.5,"inA":true,"inB":true},{"len":0.5,"inA":false,"inB":false}],"periods":1}"#).unwrap();
    let out = run(&["oned", "converge", "--profile", path.to_str().unwrap(), "--periods", "4,16,64,256", "--assert-rel", "0.02"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let rel: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!(last.starts_with("256,") && rel <= 0.02);
    let strict = run(&["oned", "converge", "--periods", "4", "--assert-rel", "1e-12"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn tolerance_from_environment() {
    let args = ["gset", "check", "--a", "1,1.01", "--theta", "0", "--astar", "[[1.01,0],[0,1.01]]"];
    let default = run(&args);
    assert!(default.status.success());
    let loose = Command::new(env!("CARGO_BIN_EXE_homobounds")).args(args).env("HOMOBOUNDS_TOL", "1e-3").output().unwrap();
    assert_eq!(loose.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["nope"]).status.code(), Some(2));
    assert_eq!(run(&["gset", "check", "--astar", "[[1,2]]"]).status.code(), Some(2));
    assert_eq!(run(&["oned", "bounds", "--a", "1"]).status.code(), Some(2));
    assert_eq!(run(&["oned", "invert", "--target", "5"]).status.code(), Some(2));
}

#[test]
fn laminate_and_hashin_saturate() {
    let v = json_of(&run(&["laminate", "seq", "--a", "1,2,0.5", "--b", "1,3,0.25", "--relation", "B_subset_A", "--assert"]));
    assert!(close(&v["report"]["li_slack"], 0.0, 1e-10));
    let v = json_of(&run(&["hashin", "--case", "const", "--core", "a1", "--b-const", "1", "--oracle", "2000", "--assert"]));
    assert!(close(&v["m"], 10.0 / 7.0, 1e-12));
    assert!(close(&v["b"], 51.0 / 49.0, 1e-12));
    assert!(close(&v["oracle_b"], 51.0 / 49.0, 1e-6));
    assert!(close(&v["report"]["li_slack"], 0.0, 1e-10));
}

#[test]
fn oodp_brute_meets_relaxed() {
    let v = json_of(&run(&["oodp", "--assert"]));
    assert_eq!(v["brute"]["evaluated"], 853_776);
    let (b, r) = (v["brute"]["value"].as_f64().unwrap(), v["relaxed"]["value"].as_f64().unwrap());
    assert!(b >= r - 1e-9 && b < 7.0 / 96.0);
}

#[test]
fn phase_grid_regions() {
    let out = run(&["phase", "--grid", "3", "--format", "json"]);
    let v = json_of(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[4]["region"], "L1U1");
    assert!(close(&rows[4]["bsharp_lower"], 14.0 / 9.0, 1e-14));
}
