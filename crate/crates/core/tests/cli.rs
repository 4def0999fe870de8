use std::path::Path;
use std::process::{Command, Output};

use aacsim::harness::{builtin, read_csv, Scenario};

fn aacsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aacsim")).args(args).output().unwrap()
}

fn save(dir: &Path, scn: &Scenario) -> String {
    let path = dir.join(format!("{}.json", scn.name));
    scn.save(&path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn lists_all_builtins() {
    let out = aacsim(&["list-builtins"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().any(|l| l.starts_with("fig1e ")));
}

#[test]
fn run_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scn = save(dir.path(), &builtin("fig1c").unwrap());
    let csv = dir.path().join("out.csv");
    let out = aacsim(&[
        "run", "--scenario", &scn, "--out", csv.to_str().unwrap(), "--t-end", "0.5", "--dt", "0.002", "--seed", "9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = read_csv(&csv).unwrap();
    assert_eq!(series.rows.last().unwrap().t, 0.5);
    assert!((series.rows[1].t - 0.02).abs() < 1e-12);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = builtin("zero").unwrap();
    ok.t_end = 4.0;
    let out = aacsim(&["verify", "--scenario", &save(dir.path(), &ok)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    // a bound no run can meet
    let mut bad = builtin("fig1a").unwrap();
    bad.name = "impossible".into();
    bad.t_end = 4.0;
    bad.checks.ultimate_bound = Some(1e-30);
    let path = save(dir.path(), &bad);
    let out = aacsim(&["verify", "--scenario", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let out = aacsim(&["verify", "--scenario", &path, "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["scenario"], "impossible");
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = aacsim(&["verify", "--scenario", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"name\": \"x\"}").unwrap();
    let out = aacsim(&["run", "--scenario", broken.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_all_writes_three_artifacts_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = aacsim(&["run-all", "--builtin", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig1a", "fig4", "zero"] {
        for ext in ["json", "csv", "py"] {
            assert!(dir.path().join(format!("{name}.{ext}")).is_file(), "{name}.{ext}");
        }
    }
    let script = std::fs::read_to_string(dir.path().join("fig4.py")).unwrap();
    assert!(script.contains("\"fig4.csv\"") && script.contains("h_switch"));
}
