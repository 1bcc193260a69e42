use std::path::PathBuf;
use std::process::{Command, Output};

fn qbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbc")).args(args).output().expect("qbc runs")
}

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qbc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn toy_attack_writes_both_reports() {
    let dir = out_dir("toy");
    let out = qbc(&[
        "attack",
        "--fixture",
        "toy",
        "--alpha",
        "0,pi/8,pi/4",
        "--trials",
        "500",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("schema_version,command,fixture,"));
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 3);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches(": ok").count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn format_selects_outputs() {
    let dir = out_dir("csv-only");
    let out = qbc(&["oracle", "--n", "1..2", "--trials", "200", "--format", "csv", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("report.csv").exists());
    assert!(!dir.join("report.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn same_seed_same_files() {
    let a = out_dir("seed-a");
    let b = out_dir("seed-b");
    for d in [&a, &b] {
        let out = qbc(&["audit", "--n", "1,2", "--trials", "300", "--seed", "7", "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["report.json", "report.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    std::fs::remove_dir_all(&a).unwrap();
    std::fs::remove_dir_all(&b).unwrap();
}

#[test]
fn config_errors_exit_2() {
    let dir = out_dir("bad");
    let d = dir.to_str().unwrap();
    for args in [
        vec!["audit", "--fixture", "rsa", "--out", d],
        vec!["audit", "--n", "0", "--out", d],
        vec!["audit", "--n", "3..1", "--out", d],
        vec!["attack", "--fixture", "toy", "--alpha", "2", "--out", d],
        vec!["oracle", "--mode", "guess", "--out", d],
        vec!["oracle", "--format", "xml", "--out", d],
        vec!["oracle", "--trials", "0", "--out", d],
    ] {
        let out = qbc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    assert!(!dir.exists());
}

#[test]
fn resource_caps_exit_3() {
    let dir = out_dir("cap");
    let d = dir.to_str().unwrap();
    for args in [
        vec!["audit", "--n", "3", "--mode", "enumerate", "--branch-cap", "10", "--out", d],
        vec!["attack", "--fixture", "toy", "--register-cap", "1", "--out", d],
    ] {
        let out = qbc(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn demo_prints_the_walkthrough() {
    let out = qbc(&["demo-bb84"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("F(rho_B(0), rho_B(1)) = 1.000000000000"));
    assert!(text.contains("|<psi_0|psi_1>| = 1.000000000000"));
}
