use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wpr-secrecy"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn single_rate(args: &[&str]) -> f64 {
    let o = run(args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == "secrecy_rate_bps_hz").unwrap();
    let rec = r.records().next().unwrap().unwrap();
    rec[idx].parse().unwrap()
}

#[test]
fn single_is_deterministic() {
    let a = run(&["single", "--alg", "goa", "--seed", "7"]);
    let b = run(&["single", "--alg", "goa", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 2);
    assert!(stderr(&a).contains("wall_time_s="));
}

#[test]
fn single_goa_dominates_loa() {
    for seed in ["3", "7", "11"] {
        let g = single_rate(&["single", "--alg", "goa", "--seed", seed, "--epsilon", "1e-4"]);
        let l = single_rate(&["single", "--alg", "loa", "--seed", seed, "--epsilon", "1e-4"]);
        assert!(g >= l - 1e-6, "seed {seed}: goa {g} loa {l}");
    }
}

#[test]
fn single_antenna_needs_one_antenna() {
    let o = run(&["single", "--alg", "single"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("n_r = 1"), "{}", stderr(&o));

    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_r": 1}"#);
    assert!(single_rate(&["single", "--alg", "single", "--config", &cfg]) >= 0.0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["single", "--alg", "bogus"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["sweep", "--threads", "0", "--trials", "1"])), 64);
    assert_eq!(code(&run(&["single", "--epsilon", "0.5"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);

    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"eta": 1.5}"#);
    let o = run(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("eta"), "{}", stderr(&o));
}

#[test]
fn io_errors_exit_1() {
    assert_eq!(code(&run(&["single", "--config", "/nonexistent/cfg.json"])), 1);

    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = run(&["fig2", "--points", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn sweep_writes_csv_and_reproduces_from_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"snr_grid": [10, 40], "p_d_grid": [40], "n_trials": 3, "algorithms": ["goa", "loa", "epr"]}"#,
    );
    let out1 = dir.path().join("a");
    let o = run(&["sweep", "--config", &cfg, "--out", out1.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let (header, rows) = read_csv(&out1.join("sweep.csv"));
    assert_eq!(
        header,
        [
            "p_s_dbm",
            "p_d_dbm",
            "algorithm",
            "trial",
            "secrecy_rate_bps_hz",
            "relay_power_mw",
            "rho_star",
            "wall_time_s",
            "status"
        ]
    );
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows.iter().all(|r| r[8] == "ok"));

    let manifest = out1.join("manifest.json");
    let out2 = dir.path().join("b");
    let o = run(&["sweep", "--config", manifest.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, again) = read_csv(&out2.join("sweep.csv"));
    let strip = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().enumerate().filter(|(i, _)| *i != 7).map(|(_, v)| v.clone()).collect())
            .collect()
    };
    assert_eq!(strip(&rows), strip(&again));
}

#[test]
fn sweep_records_single_failures_without_aborting() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"snr_grid": [30], "p_d_grid": [40], "n_trials": 2, "algorithms": ["single", "goa"]}"#);
    let o = run(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().filter(|r| r[2] == "single").all(|r| r[8].starts_with("failed")));
    assert!(rows.iter().filter(|r| r[2] == "goa").all(|r| r[8] == "ok"));
}

#[test]
fn fig2_schema() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig2", "--points", "101", "--seed", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("fig2.csv"));
    assert_eq!(header, ["rho", "r_sr", "dr_sr_drho"]);
    assert_eq!(rows.len(), 102);
    assert!(rows[..101].iter().all(|r| r[0].parse::<f64>().is_ok()));
    let star = &rows[101];
    assert!(star[0].starts_with('*'));
    let rho: f64 = star[0][1..].parse().unwrap();
    assert!((0.0..=1.0).contains(&rho));
    // the optimum is at least as good as every grid point
    let best: f64 = rows[..101].iter().map(|r| r[1].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(star[1].parse::<f64>().unwrap() >= best - 1e-12);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn timing_table_shape() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_trials": 1, "timing_route": "closed"}"#);
    let o = run(&["timing", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("timing.csv"));
    assert_eq!(header[0], "algorithm");
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| r[0] == "goa").count(), 3);
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn single_manifest_replays_arguments() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let first = run(&[
        "single", "--alg", "loa", "--p-s", "30", "--p-d", "50", "--seed", "4", "--trial", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert!(out.join("single.csv").exists());
    let replay = run(&["single", "--config", out.join("manifest.json").to_str().unwrap()]);
    assert_eq!(code(&replay), 0, "{}", stderr(&replay));
    assert_eq!(first.stdout, replay.stdout);
}
