use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdd-mimo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

const CONFIG: &str = r#"
name = "small"
trials = 20
seed = 3
schemes = ["bf", "zf"]

[system]
n_rx = 16
n_tx = 4
n_users = 4
snr_db = 20
feedback_bits = 16

[sweep]
feedback_bits = [0, 16, 32]
"#;

#[test]
fn bounds_json_has_known_values() {
    let out = run(&["bounds", "--cu", "4", "--ct", "10", "--cf-t", "10", "--snr-db", "30", "--json"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["floor_fast_nt"].as_f64().unwrap() - 1.449501586816404).abs() < 1e-9);
    assert!((v["limit_distortion"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["balancing_ratio"], serde_json::Value::Null);
}

#[test]
fn bounds_prints_balancing_ratio() {
    let out = run(&["bounds", "--T", "180", "--nt", "8"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("22.5"), "{}", text(&out.stdout));
}

#[test]
fn fig2_writes_csv_manifest_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["fig2", "--trials", "3", "--n-list", "8,16", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(csv.lines().skip(1).all(|l| !l.ends_with(',')), "bound_floor missing:\n{csv}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiments"].as_array().unwrap().len(), 3);
    assert!(text(&out.stdout).contains("sum_rate_ratio"));
}

#[test]
fn fig3_skips_invalid_points_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["fig3", "--trials", "2", "--n-list", "4", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(text(&out.stderr).contains("skipped"), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn custom_config_and_manifest_replay_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let first = dir.path().join("first.csv");
    let out = bin().args(["custom", "--config"]).arg(&cfg).arg("--out").arg(&first).output().unwrap();
    assert!(out.status.success(), "{}", text(&out.stderr));

    let replay = dir.path().join("replay.csv");
    let out = bin()
        .args(["custom", "--config"])
        .arg(first.with_extension("manifest.json"))
        .arg("--out")
        .arg(&replay)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", text(&out.stderr));
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&replay).unwrap());
    assert_eq!(text(&a).lines().count(), 1 + 3 * 2);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, CONFIG.replace("n_users = 4", "n_users = 4\nn_userz = 4")).unwrap();
    let out_csv = dir.path().join("out.csv");
    let out = bin().args(["custom", "--config"]).arg(&cfg).arg("--out").arg(&out_csv).output().unwrap();
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("n_userz"), "{}", text(&out.stderr));
    assert!(!Path::new(&out_csv).exists());
}

#[test]
fn bad_thread_cap_is_rejected() {
    let out = bin().args(["bounds"]).env("FDD_MIMO_THREADS", "many").output().unwrap();
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("FDD_MIMO_THREADS"));
}
