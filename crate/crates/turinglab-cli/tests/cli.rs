//! End-to-end tests of the `turinglab` binary: exit codes, output files,
//! verdicts, and byte-determinism.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_turinglab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

#[test]
fn check_passes_for_swift_hohenberg() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check",
        "--model",
        "swift-hohenberg",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("hypotheses: PASS"));

    let report = read(dir.path(), "hypotheses.json");
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["all_pass"], serde_json::json!(true));
    let manifest = read(dir.path(), "manifest.json");
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    // every output references the manifest hash that produced it
    assert_eq!(v["manifest"], m["hash"]);
}

#[test]
fn check_fails_for_heat_scalar() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check",
        "--model",
        "heat-scalar",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("(H2) FAIL"));
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "model = \"swift-hohenberg\"\nparams = {\n").unwrap();
    let out = run(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "no location in: {stderr}");
}

#[test]
fn unknown_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "cgl",
        "--model",
        "no-such-model",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn wave_out_of_range_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "wave",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn cgl_prints_bands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "cgl",
        "--model",
        "swift-hohenberg",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("kappa_S"));
    assert!(stdout.contains("stable sideband band exists"));
    let v: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "cgl.json")).unwrap();
    let ks2 = v["cgl"]["kappa_s_sq"].as_f64().unwrap();
    assert!((ks2 - 1.0 / 12.0).abs() < 1e-4);
}

#[test]
fn wave_writes_csv_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "wave",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.02",
        "--kappa",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let modes = read(dir.path(), "wave_modes.csv");
    let mut lines = modes.lines();
    assert!(lines.next().unwrap().starts_with("# manifest="));
    assert_eq!(lines.next().unwrap(), "eta,re_u0,im_u0");
    let profile = read(dir.path(), "wave_profile.csv");
    assert!(profile.lines().nth(1).unwrap().starts_with("xi,u0"));
    assert!(read(dir.path(), "wave.json").contains("alpha_measured"));
}

#[test]
fn spectrum_verdicts_and_determinism() {
    let stable = tempfile::tempdir().unwrap();
    let out = run(&[
        "spectrum",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.02",
        "--kappa",
        "0.2",
        "--out",
        stable.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("diffusively-stable"));
    let csv = read(stable.path(), "spectrum.csv");
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "sigma,re_lambda1,im_lambda1,re_lambda2,im_lambda2,max_re_remainder"
    );

    // identical invocation produces byte-identical outputs
    let again = tempfile::tempdir().unwrap();
    let out2 = run(&[
        "spectrum",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.02",
        "--kappa",
        "0.2",
        "--out",
        again.path().to_str().unwrap(),
    ]);
    assert_eq!(out2.status.code(), Some(0));
    assert_eq!(csv, read(again.path(), "spectrum.csv"));
    assert_eq!(
        read(stable.path(), "verdict.json"),
        read(again.path(), "verdict.json")
    );

    let unstable = tempfile::tempdir().unwrap();
    let out3 = run(&[
        "spectrum",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.02",
        "--kappa",
        "0.34",
        "--out",
        unstable.path().to_str().unwrap(),
    ]);
    assert_eq!(out3.status.code(), Some(0), "{out3:?}");
    assert!(String::from_utf8_lossy(&out3.stdout).contains("unstable"));
}

#[test]
fn validate_passes_for_swift_hohenberg() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "validate",
        "--model",
        "swift-hohenberg",
        "--eps",
        "0.04,0.02",
        "--kappa",
        "0.15",
        "--draws",
        "100",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let v: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "agreement.json")).unwrap();
    assert_eq!(v["all_pass"], serde_json::json!(true));
    assert_eq!(v["random_suite"]["draws"], serde_json::json!(100));
}
