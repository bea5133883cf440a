//! End-to-end checks of the compiled binary: argument handling, exit codes,
//! artifact layout, and the thread-cap environment variable.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatcert"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("heatcert-bin-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn usage_error_exits_one() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["run", "/nonexistent/config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_config_exits_one() {
    let dir = scratch("badcfg");
    let cfg = write_config(&dir, "bad.cfg", "gamma = 7\nnot a key value line\n");
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn successful_run_exits_zero_and_writes_artifacts() {
    let dir = scratch("ok");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "run.cfg",
        &format!(
            "gamma = 2\np = 2\nd = 2\nN = 3\nalpha = 3/8\nmu = 70\nT = 0.02\n\
             tau0 = 0.005\nmode = grouped\nsolver_tol = 1e-12\n\
             export_snapshots = true\noutput_dir = {}\n",
            outdir.display()
        ),
    );
    let out = bin()
        .args(["run", cfg.to_str().unwrap()])
        .env("HEATCERT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["certificates.csv", "rho_vs_t.csv", "run_summary.txt", "snapshots.csv"] {
        assert!(outdir.join(f).exists(), "missing {f}");
    }
    let snaps = std::fs::read_to_string(outdir.join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,m_1,m_2,coefficient"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn early_stop_exits_two_with_artifacts() {
    let dir = scratch("early");
    let outdir = dir.join("out");
    // a large seed error at a fixed step cannot verify; exit code 2 with
    // artifacts still written
    let cfg = write_config(
        &dir,
        "run.cfg",
        &format!(
            "gamma = 7\np = 2\nd = 2\nN = 5\nalpha = 3/8\nmu = 70\nT = 0.25\n\
             tau0 = 0.01\nmode = grouped\nadaptive = false\neps0 = 10.0\n\
             output_dir = {}\n",
            outdir.display()
        ),
    );
    let out = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(outdir.join("certificates.csv").exists());
    assert!(outdir.join("run_summary.txt").exists());
    let summary = std::fs::read_to_string(outdir.join("run_summary.txt")).unwrap();
    assert!(summary.contains("reached_target = false"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn compare_subcommand_reports_further_run() {
    let dir = scratch("cmp");
    let mut dirs = Vec::new();
    for (name, mode) in [("a", "grouped"), ("b", "naive")] {
        let outdir = dir.join(name);
        let cfg = write_config(
            &dir,
            &format!("{name}.cfg"),
            &format!(
                "gamma = 7\np = 2\nd = 2\nN = 5\nalpha = 3/8\nmu = 70\nT = 0.25\n\
                 tau0 = 0.01\nmode = {mode}\nadaptive = false\nsubsteps = 4\n\
                 output_dir = {}\n",
                outdir.display()
            ),
        );
        let _ = bin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
        dirs.push(outdir);
    }
    let out = bin()
        .args(["compare", dirs[0].to_str().unwrap(), dirs[1].to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verified further"), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("t,rho_a")), "{stdout}");
    let _ = std::fs::remove_dir_all(&dir);
}
