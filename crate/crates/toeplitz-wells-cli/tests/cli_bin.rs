//! End-to-end tests of the compiled binary: flag handling, exit codes, the
//! output-directory precedence chain, and the printed summary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toeplitz-wells"))
}

fn temp_path(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    std::env::temp_dir().join(format!(
        "toeplitz-wells-bin-{tag}-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ))
}

fn write_config(tag: &str, text: &str) -> PathBuf {
    let path = temp_path(tag).with_extension("json");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const MODEL_CONFIG: &str = r#"{"well": {"a": [1.0], "q": [1.0, 0.0, 0.0, 1.0]}, "levels": 3}"#;

fn cleanup(paths: &[&Path]) {
    for p in paths {
        let _ = std::fs::remove_file(p);
        let _ = std::fs::remove_dir_all(p);
    }
}

#[test]
fn model_spectrum_lists_the_first_levels_on_stdout() {
    let config = write_config("list", MODEL_CONFIG);
    let out_dir = temp_path("list-out");
    let out = bin()
        .args(["model-spectrum", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2, 4, 6"), "stdout: {text}");
    assert!(text.contains("[PASS] truncation-agreement"), "stdout: {text}");
    cleanup(&[&config, &out_dir]);
}

#[test]
fn quiet_suppresses_the_summary() {
    let config = write_config("quiet", MODEL_CONFIG);
    let out_dir = temp_path("quiet-out");
    let out = bin()
        .args(["model-spectrum", "--quiet", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "stdout not empty: {}", stdout(&out));
    assert!(out_dir.join("report.json").exists());
    cleanup(&[&config, &out_dir]);
}

#[test]
fn missing_config_file_exits_two_without_artifacts() {
    let out_dir = temp_path("missing-out");
    let out = bin()
        .args(["model-spectrum", "--config", "/no/such/config.json"])
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read config"));
    assert!(!out_dir.exists(), "no artifacts may be written");
}

#[test]
fn invalid_config_exits_two_naming_the_key() {
    let config = write_config(
        "badflux",
        r#"{"field": {"family": "constant", "m": 1.5}, "p": [4]}"#,
    );
    let out_dir = temp_path("badflux-out");
    let out = bin()
        .args(["landau-levels", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("field.m"), "stderr: {}", stderr(&out));
    assert!(!out_dir.exists());
    cleanup(&[&config]);
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().arg("model-spectrum").output().unwrap();
    // clap reports the missing --config flag.
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"));
}

#[test]
fn out_dir_env_is_used_and_the_flag_wins() {
    let config = write_config("env", MODEL_CONFIG);

    let env_dir = temp_path("env-out");
    let out = bin()
        .args(["model-spectrum", "--quiet", "--config"])
        .arg(&config)
        .env("TOEPLITZ_WELLS_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(env_dir.join("report.json").exists());

    let flag_dir = temp_path("flag-out");
    let ignored_env = temp_path("ignored-env");
    let out = bin()
        .args(["model-spectrum", "--quiet", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&flag_dir)
        .env("TOEPLITZ_WELLS_OUT", &ignored_env)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("report.json").exists());
    assert!(!ignored_env.exists(), "the flag must win over the environment");

    cleanup(&[&config, &env_dir, &flag_dir]);
}

#[test]
fn failed_verdicts_exit_one_with_artifacts_retained() {
    let config = write_config(
        "tight",
        r#"{"well": {"a": [1.0], "q": [1.0, 0.0, 0.0, 1.0]}, "levels": 3,
            "truncation_tol": 1e-300}"#,
    );
    let out_dir = temp_path("tight-out");
    let out = bin()
        .args(["model-spectrum", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("[FAIL] truncation-agreement"));
    assert!(out_dir.join("report.json").exists());
    cleanup(&[&config, &out_dir]);
}

#[test]
fn jobs_flag_does_not_change_the_report() {
    let config = write_config(
        "jobs",
        r#"{"field": {"family": "constant", "m": 1}, "p": [2], "grid": {"fixed": 16}}"#,
    );
    let (dir_one, dir_two) = (temp_path("jobs-1"), temp_path("jobs-2"));
    for (dir, jobs) in [(&dir_one, "1"), (&dir_two, "2")] {
        let out = bin()
            .args(["landau-levels", "--quiet", "--jobs", jobs, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let one = std::fs::read(dir_one.join("report.json")).unwrap();
    let two = std::fs::read(dir_two.join("report.json")).unwrap();
    assert_eq!(one, two, "worker count leaked into report.json");
    cleanup(&[&config, &dir_one, &dir_two]);
}

#[test]
fn grid_override_flag_reaches_the_report() {
    let config = write_config(
        "override",
        r#"{"field": {"family": "constant", "m": 1}, "p": [2]}"#,
    );
    let out_dir = temp_path("override-out");
    let out = bin()
        .args(["landau-levels", "--quiet", "--grid-override", "16", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["grid"], serde_json::json!({ "fixed": 16 }));
    assert_eq!(report["results"]["per_p"][0]["grid_n"], 16);
    cleanup(&[&config, &out_dir]);
}
