//! End-to-end checks of the experiment runner: exit codes, artifact
//! headers, and byte-stable reproducibility.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riccati"))
}

fn tmp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("riccati-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn unknown_experiment_exits_2() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_representation_file_exits_3_without_artifacts() {
    let dir = tmp_dir("missing-rep");
    let out = bin()
        .args([
            "lyapunov",
            "--representation",
            "/nonexistent/rep.representation",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!Path::new(&dir).exists(), "no partial artifacts on failure");
}

#[test]
fn malformed_config_file_exits_4() {
    let dir = tmp_dir("bad-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "this is not a key value line\n").unwrap();
    let out = bin()
        .args(["canonical-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let d1 = tmp_dir("repro-1");
    let d2 = tmp_dir("repro-2");
    for d in [&d1, &d2] {
        let out = bin()
            .args([
                "canonical-check",
                "--samples",
                "15",
                "--seed",
                "99",
                "--out",
            ])
            .arg(d)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(d1.join("canonical-check.csv")).unwrap();
    let b = std::fs::read(d2.join("canonical-check.csv")).unwrap();
    assert_eq!(a, b, "artifacts must be byte-identical for a fixed seed");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# config_hash = "));
    assert!(text.contains("# seed = 99"));
    assert!(text.contains("# version = riccati "));
    let _ = std::fs::remove_dir_all(&d1);
    let _ = std::fs::remove_dir_all(&d2);
}

#[test]
fn non_positive_parameters_exit_4() {
    for args in [
        vec!["lyapunov", "--T", "-5"],
        vec!["srb", "--orbits", "0"],
        vec!["cusp-integrability", "--n", "1"],
        vec!["cusp-integrability", "--kind", "hyperbolic", "--lambda", "0.5"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(4), "args {args:?}");
    }
}

#[test]
fn certify_runs_on_shipped_preset_file() {
    let dir = tmp_dir("certify");
    let preset = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets/schottky-pair.schottky");
    let out = bin()
        .args(["certify", "--schottky"])
        .arg(&preset)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("certificate.txt")).unwrap();
    assert!(text.contains("certified"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn surface_preset_file_loads() {
    let dir = tmp_dir("surface-file");
    let preset = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets/once-punctured-torus.surface");
    let out = bin()
        .args(["canonical-check", "--samples", "5", "--surface"])
        .arg(&preset)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(&dir);
}
