use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybrid-rcg")).args(args).env_remove("HYBRID_RCG_OUT_DIR").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn solve_small_rayleigh() {
    let out = run(&["solve", "--problem", "rayleigh", "--n", "8", "--seed", "1", "--beta", "hybrid1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("converged") && stdout.contains("true"));
}

#[test]
fn unknown_beta_is_a_usage_error() {
    assert_eq!(code(&run(&["solve", "--problem", "rayleigh", "--beta", "bogus"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn iteration_cap_gives_not_converged_code() {
    assert_eq!(code(&run(&["solve", "--problem", "brockett", "--small", "--max-iters", "1"])), 2);
}

#[test]
fn solve_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let out = run(&[
        "solve",
        "--problem",
        "off_diagonal",
        "--small",
        "--beta",
        "hybrid2",
        "--trace-out",
        trace.to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("k,f,grad_norm,alpha,beta,r_k,l_k,scale,zoutendijk\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["beta"], "hybrid2");
}

#[test]
fn check_suites() {
    assert_eq!(code(&run(&["check", "--trials", "10"])), 0);
    assert_eq!(code(&run(&["check", "--suite", "geometry", "--trials", "10"])), 0);
    assert_eq!(code(&run(&["check", "--suite", "gradients", "--trials", "5", "--corrupt-gradient"])), 2);
    assert_eq!(code(&run(&["check", "--suite", "nope"])), 1);
}

fn assert_bench_outputs(dir: &Path) {
    for name in ["records.csv", "stats.csv", "profile_iterations.csv", "profile_time.csv", "profile_iterations.svg"] {
        assert!(dir.join(name).is_file(), "missing {name}");
    }
    let records = fs::read_to_string(dir.join("records.csv")).unwrap();
    assert!(records.starts_with("problem,seed,algorithm,converged,iterations,elapsed_s,final_grad_norm,restarts\n"));
    // small grid: 7 problems, 10 seeds, 4 algorithms
    assert_eq!(records.lines().count(), 281);
}

#[test]
fn bench_then_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["bench", "--small", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_bench_outputs(&out_dir);

    let again = tmp.path().join("again");
    let out = run(&[
        "profile",
        "--records",
        out_dir.join("records.csv").to_str().unwrap(),
        "--out-dir",
        again.to_str().unwrap(),
        "--metric",
        "iterations",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(again.join("profile_iterations.csv")).unwrap(),
        fs::read(out_dir.join("profile_iterations.csv")).unwrap()
    );
}

#[test]
fn bench_with_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("grid.json");
    fs::write(&cfg, r#"{"problems": ["rayleigh"], "seeds": [1, 2], "algorithms": ["dy", "hybrid1"], "small": true}"#)
        .unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["bench", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 5);

    fs::write(&cfg, r#"{"problemz": []}"#).unwrap();
    assert_eq!(code(&run(&["bench", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()])), 1);
}

#[test]
fn bench_missing_parent_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("no/such/dir");
    let out = run(&["bench", "--small", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(!out.stderr.is_empty());
}
