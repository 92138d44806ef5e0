use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit-radar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn run_with_defaults_and_seed_override() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = cli(&["run", "--out", out.to_str().unwrap(), "--seed", "17"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "spectrum_sparse.csv",
        "spectrum_completed.csv",
        "residuals.csv",
        "report.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let r = report(&out);
    assert_eq!(r["seed"], 17);
    assert_eq!(r["config"]["seed"], 17);
    assert_eq!(r["peaks"].as_array().unwrap().len(), 2);
}

#[test]
fn toml_config_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "seed = 3\n[scene]\nsnr_db = 10.0\n[[scene.targets]]\nazimuth_deg = 12.0\n[solver]\nmax_iters = 50\n",
    );
    let out = tmp.path().join("o");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert_eq!(r["seed"], 3);
    assert_eq!(r["peaks"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    let unknown = write(tmp.path(), "a.json", r#"{"bogus": 1}"#);
    let empty = write(tmp.path(), "b.json", r#"{"scene": {"targets": []}}"#);
    let bad_step = write(tmp.path(), "c.json", r#"{"solver": {"step": -1.0}}"#);
    for cfg in [
        unknown.as_str(),
        empty.as_str(),
        bad_step.as_str(),
        "/nonexistent/config.json",
    ] {
        for verb in ["run", "montecarlo", "rank-check"] {
            let o = cli(&[verb, "--config", cfg, "--out", out]);
            assert_eq!(
                o.status.code(),
                Some(1),
                "{verb} {cfg}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let theory = write(tmp.path(), "t.json", r#"{"trials": 0}"#);
    assert_eq!(
        cli(&["validate-theory", "--config", &theory, "--out", out])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn divergence_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.json",
        r#"{"solver": {"threshold": 0.0, "step": 50.0}}"#,
    );
    let out = tmp.path().join("o");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn montecarlo_rank_check_and_theory_verbs() {
    let tmp = tempfile::tempdir().unwrap();
    let mc = tmp.path().join("mc");
    let o = cli(&[
        "montecarlo",
        "--trials",
        "2",
        "--seed",
        "40",
        "--out",
        mc.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&mc);
    assert_eq!(r["trials"], 2);
    assert_eq!(r["base_seed"], 40);
    assert_eq!(r["outcomes"][1]["report"]["seed"], 41);

    let rc = tmp.path().join("rc");
    assert_eq!(
        cli(&["rank-check", "--out", rc.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(report(&rc)["rank"]["rank"], 2);

    let cfg = write(tmp.path(), "t.toml", "trials = 3\nn1 = 10\nn2 = 10\n");
    let th = tmp.path().join("th");
    let o = cli(&[
        "validate-theory",
        "--config",
        &cfg,
        "--seed",
        "9",
        "--out",
        th.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&th);
    assert_eq!(r["trials"].as_array().unwrap().len(), 3);
    assert_eq!(r["config"]["base_seed"], 9);
}
