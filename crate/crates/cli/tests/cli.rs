//! Black-box tests of the `irs-track` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irs-track"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("sim.toml");
    std::fs::write(
        &path,
        r#"
m_y = 10
m_z = 10
q_y = 20
q_z = 20
l_bs = 2
l_ue = 2
ptx_dbm = [10.0]
drops = 2
seed = 31
cache_dir = "CACHE_DIR"
"#
        .replace("CACHE_DIR", &dir.join("cache").display().to_string()),
    )
    .unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_writes_csv_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--drops",
            "2",
            "--ptx-dbm",
            "10",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["proposed.csv", "fs.csv", "fullopt.csv", "drops.csv", "summary.csv", "manifest.toml"]
    {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("scheme,ptx_dbm,gamma,mean_eff_rate_bpshz,ci95"));
    assert_eq!(summary.lines().count(), 4); // header + 3 schemes x 1 power
    let proposed = std::fs::read_to_string(out_dir.join("proposed.csv")).unwrap();
    assert!(proposed.starts_with(
        "drop,scheme,t_s,ptx_dbm,m_y,m_z,theta_true_deg,phi_true_deg,theta_pred_deg,phi_pred_deg,snr_db,rate_bpshz"
    ));
    assert!(proposed.lines().count() > 10);
    // No partial directories left behind.
    assert!(std::fs::read_dir(&out_dir)
        .unwrap()
        .all(|e| !e.unwrap().file_name().to_string_lossy().starts_with(".partial")));
}

#[test]
fn missing_config_fails_and_names_the_path() {
    let out = bin()
        .args(["run", "--config", "/nonexistent/sim.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/sim.toml"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "emmy = 70\n").unwrap();
    let out = bin()
        .args(["run", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("emmy"));
}

#[test]
fn single_trace_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let run = || {
        let out = bin()
            .args([
                "single",
                "--config",
                config.to_str().unwrap(),
                "--seed",
                "7",
                "--ptx-dbm",
                "10",
                "--max-blocks",
                "2",
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let first = run();
    let second = run();
    assert!(!first.is_empty());
    assert_eq!(first, second);
    let text = String::from_utf8_lossy(&first);
    assert!(text.contains("# seed 7"));
    assert!(text.lines().last().unwrap().starts_with("# seed"));
}

#[test]
fn codebook_cache_builds_then_reuses() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let first = bin()
        .args(["codebook-cache", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(first.status.success());
    assert!(stdout(&first).contains("built"));
    let second = bin()
        .args(["codebook-cache", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(stdout(&second).contains("already cached"));
    assert!(dir.path().join("cache").exists());
}
