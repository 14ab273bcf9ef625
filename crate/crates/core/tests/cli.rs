use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dualtilt::record::load_record;

fn dualtilt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualtilt"))
        .args(args)
        .env("DUALTILT_OUT", out)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_record_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let o = dualtilt(&["run", &config("hover.toml"), "--duration", "0.05"], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = load_record(&out.path().join("hover/record.csv")).unwrap();
    assert_eq!(rec.len(), 51);
    let summary = std::fs::read_to_string(out.path().join("hover/summary.txt")).unwrap();
    assert!(summary.contains("max |e_p|"));
    assert!(stdout(&o).contains("hover: 51 rows"));
}

#[test]
fn out_flag_overrides_env() {
    let env_root = tempfile::tempdir().unwrap();
    let flag_root = tempfile::tempdir().unwrap();
    let flag = flag_root.path().display().to_string();
    let o = dualtilt(&["--out", &flag, "--dt", "0.002", "--duration", "0.01", "run", &config("hover.toml")], env_root.path());
    assert!(o.status.success());
    assert_eq!(load_record(&flag_root.path().join("hover/record.csv")).unwrap().len(), 6);
    assert!(!env_root.path().join("hover").exists());
}

#[test]
fn compare_and_tables() {
    let out = tempfile::tempdir().unwrap();
    for c in ["circle_gj0.toml", "table1_gj10.toml"] {
        assert!(dualtilt(&["run", &config(c), "--duration", "0.2"], out.path()).status.success());
    }
    let a = out.path().join("circle_gj0/record.csv").display().to_string();
    let b = out.path().join("table1_gj10/record.csv").display().to_string();
    let csv = out.path().join("diff.csv");
    let o = dualtilt(&["compare", &a, &b, "--csv", &csv.display().to_string()], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv.exists());

    let o = dualtilt(&["tables", &a, &b, "--window", "0", "--frequency", "40"], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("table1_gj10"));
}

#[test]
fn batch_runs_directory() {
    let out = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for c in ["hover.toml", "circle_gj0.toml"] {
        std::fs::copy(config(c), dir.path().join(c)).unwrap();
    }
    let o = dualtilt(&["batch", &dir.path().display().to_string(), "--duration", "0.02"], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.path().join("hover/record.csv").exists());
    assert!(out.path().join("circle_gj0/summary.txt").exists());
}

#[test]
fn errors_exit_nonzero() {
    let out = tempfile::tempdir().unwrap();
    let o = dualtilt(&["run", "/nonexistent.toml"], out.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = dualtilt(&["run", &config("hover.toml"), "--dt=-1"], out.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dt"));
}
