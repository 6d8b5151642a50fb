use std::path::Path;
use std::process::{Command, Output};

fn mixreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixreg"))
        .args(args)
        .env_remove("MIXREG_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bound_json(s: &str, v: &str) -> serde_json::Value {
    let o = mixreg(&["bound", "--S", s, "--V", v, "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn bound_picks_the_branch_from_the_ratio() {
    assert_eq!(bound_json("0", "1")["report"]["branch"], "B1_interior");
    assert_eq!(bound_json("4", "4")["report"]["branch"], "B2_lil");
    assert_eq!(bound_json("10", "4")["report"]["branch"], "B3_boundary");
    assert_eq!(bound_json("-10", "4")["report"]["branch"], "B3_boundary");
    let b = bound_json("4", "4");
    assert!(b["report"]["pathwise_bound"].as_f64().unwrap() > 0.0);
    assert!(b["ville_threshold"]["v_alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn text_output_is_human_readable() {
    let o = mixreg(&["bound", "--S", "1", "--V", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("pathwise bound"));
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stdout).is_err());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&mixreg(&["bound", "--S", "1", "--V", "0"])), 1);
    assert_eq!(code(&mixreg(&["bound", "--S", "1", "--V", "-2"])), 1);
    assert_eq!(code(&mixreg(&["--alpha", "1.5", "bound", "--S", "1", "--V", "1"])), 2);
    assert_eq!(code(&mixreg(&["--rho", "0.3", "bound", "--S", "1", "--V", "1"])), 2);
    assert_eq!(code(&mixreg(&["--c", "3", "bound", "--S", "1", "--V", "1"])), 2);
    assert_eq!(code(&mixreg(&["--prior", "laplace", "wealth", "--S", "1", "--V", "1"])), 2);
    assert_eq!(code(&mixreg(&["frobnicate"])), 2);
    assert_eq!(code(&mixreg(&["simulate", "--model", "adversarial:warp"])), 2);
}

#[test]
fn wealth_matches_closed_form_for_the_gaussian_prior() {
    let o = mixreg(&["--prior", "gaussian:2", "wealth", "--S", "3", "--V", "4", "--json"]);
    assert_eq!(code(&o), 0);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let want = 2.0 * 9.0 / (2.0 * 9.0) - 0.5 * 9f64.ln();
    assert!((j["ln_z"].as_f64().unwrap() - want).abs() < 1e-12);
    assert!((j["regret"].as_f64().unwrap() - j["regret_closed_form"].as_f64().unwrap()).abs() < 1e-12);
}

fn replay(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_replay_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = replay(dir.path(), "ok.txt", "# dS dV\n1 1\n0.5, 1\n-3 2\n\n1e3 1e3\n");
    assert_eq!(code(&mixreg(&["verify-replay", &ok])), 0);
    assert_eq!(code(&mixreg(&["--prior", "gaussian:1", "verify-replay", &ok])), 0);

    let empty = replay(dir.path(), "empty.txt", "");
    assert_eq!(code(&mixreg(&["verify-replay", &empty])), 0);

    let neg = replay(dir.path(), "neg.txt", "1 1\n1 1\n1 -0.5\n");
    let o = mixreg(&["verify-replay", &neg]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3:") && err.contains("NegativeVarianceIncrement"), "{err}");

    let bad = replay(dir.path(), "bad.txt", "1 1\n2\n");
    let o = mixreg(&["verify-replay", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    let missing = dir.path().join("nope.txt");
    assert_ne!(code(&mixreg(&["verify-replay", missing.to_str().unwrap()])), 0);
}

#[test]
fn simulate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = mixreg(&["--seed", "4", "--out", out.to_str().unwrap(), "simulate", "--T", "300"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "paths.csv", "trace.csv", "runtime.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
    assert!(trace.starts_with("path_id,t,S,V,ln_Z,R,branch,bound"));
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn coverage_reports_are_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = mixreg(&[
            "--seed", "9", "--threads", threads, "--out", out.to_str().unwrap(), "coverage", "--n-paths", "30", "--T", "200",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (mut ra, mut rb) = (report(&a), report(&b));
    assert_ne!(ra["config"]["output"], rb["config"]["output"]);
    ra["config"]["output"] = serde_json::Value::Null;
    rb["config"]["output"] = serde_json::Value::Null;
    assert_eq!(ra, rb);
    assert_eq!(ra["paths"], 30);
}

#[test]
fn config_file_and_environment_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = replay(dir.path(), "run.conf", "# settings\nseed = 5\nn-paths = 12\nT = 50\n");
    let run = |extra: &[&str], env_seed: Option<&str>, name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        args.extend(["coverage", "--n-paths", "3"]);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixreg"));
        cmd.args(&args).env_remove("MIXREG_SEED");
        if let Some(s) = env_seed {
            cmd.env("MIXREG_SEED", s);
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = report(&out);
        (r["config"]["seed"].as_u64().unwrap(), r["paths"].as_u64().unwrap(), r["config"]["horizon"].as_u64().unwrap())
    };
    assert_eq!(run(&["--config", &cfg], None, "file"), (5, 3, 50));
    assert_eq!(run(&["--config", &cfg, "--seed", "8"], Some("77"), "flag"), (8, 3, 50));
    assert_eq!(run(&["--config", &cfg], Some("77"), "file_over_env"), (5, 3, 50));
    assert_eq!(run(&[], Some("77"), "env").0, 77);

    let bad = replay(dir.path(), "bad.conf", "bogus = 1\n");
    assert_eq!(code(&mixreg(&["--config", &bad, "bound", "--S", "1", "--V", "1"])), 2);
}

#[test]
fn lil_writes_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lil");
    let o = mixreg(&["--out", out.to_str().unwrap(), "lil", "--n-paths", "3", "--T", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("lil.csv").exists() && out.join("lil_report.json").exists());
    assert!(stdout(&o).contains("R/lnlnV"));
}

#[test]
fn selftest_passes() {
    let o = mixreg(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
