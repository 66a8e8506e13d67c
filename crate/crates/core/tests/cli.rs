use std::path::Path;
use std::process::{Command, Output};

fn stefan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = "grid.nr = 12\ngrid.ntheta = 12\ntime.dt = 0.002\ntime.t_end = 0.02\n";

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "time.dt = -1.0\n");
    let out = stefan(dir.path(), &["--config", &cfg, "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("time.dt"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.rings = 12\n");
    let out = stefan(dir.path(), &["--config", &cfg, "eig"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = stefan(
        dir.path(),
        &["--config", &cfg, "--out", "run", "--snapshot-stride", "4", "simulate"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let snaps = (0..).take_while(|i| run.join(format!("snap_{i}.dat")).exists()).count();
    assert_eq!(snaps, 4);
    let table = std::fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    assert_eq!(table.lines().count(), 12);
    assert!(table.starts_with("t,chi,E_disc,D_disc,S_proxy,conserved,max_q,h_l2,h_h45,beta_hat,qt_sign\n"));

    let fit = stefan(dir.path(), &["--out", "run", "fit"]);
    assert!(fit.status.success());
    let report: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert_eq!(report["samples"], 6);
    assert!(report["chi_rate"].as_f64().unwrap() < 0.0);
}

#[test]
fn eig_reports_the_disk_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.nr = 16\ngrid.ntheta = 16\n");
    let out = stefan(dir.path(), &["--config", &cfg, "--out", "e", "eig"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["lambda"].as_f64().unwrap() - 5.783185962946784).abs() < 1e-8);
    assert!(report["hopf_margin"].as_f64().unwrap() > 1e-3);
    assert!(dir.path().join("e/eig.json").exists());
}

#[test]
fn pucci_eig_takes_the_class_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = stefan(
        dir.path(),
        &["pucci-eig", "--mu1", "2", "--mu2", "2", "--nr", "16", "--ntheta", "16"],
    );
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let l1 = report["lambda1"].as_f64().unwrap();
    assert!((l1 - 2.0 * 5.783185962946784).abs() < 1e-3, "{l1}");

    let bad = stefan(dir.path(), &["pucci-eig", "--mu1", "2", "--mu2", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}
