use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use wpr_secrecy::sim::{
    fig2_trace, gen_channels, run_cell, run_sweep, summarize, timing_experiment, Algorithm, ScenarioConfig,
};

use crate::config::{parse_config, Loaded};
use crate::error::CliError;
use crate::output::{ensure_dir, num, write_csv, write_manifest, RunArgs, RunManifest};

pub const SWEEP_HEADER: [&str; 9] = [
    "p_s_dbm",
    "p_d_dbm",
    "algorithm",
    "trial",
    "secrecy_rate_bps_hz",
    "relay_power_mw",
    "rho_star",
    "wall_time_s",
    "status",
];
pub const FIG2_HEADER: [&str; 3] = ["rho", "r_sr", "dr_sr_drho"];
pub const TIMING_HEADER: [&str; 7] = [
    "algorithm",
    "epsilon",
    "trials",
    "failures",
    "mean_wall_time_s",
    "mean_per_restart_s",
    "mean_secrecy_rate_bps_hz",
];
pub const SINGLE_HEADER: [&str; 10] = [
    "algorithm",
    "p_s_dbm",
    "p_d_dbm",
    "seed",
    "trial",
    "rho_star",
    "secrecy_rate_bps_hz",
    "relay_power_mw",
    "budget_mw",
    "iterations",
];

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub trials: Option<usize>,
}

fn load(ov: &Overrides) -> Result<Loaded, CliError> {
    let mut loaded = match &ov.config {
        Some(p) => parse_config(p)?,
        None => Loaded::default(),
    };
    let cfg = &mut loaded.config;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(e) = ov.epsilon {
        cfg.epsilon = e;
        cfg.timing_epsilons = vec![e];
    }
    if let Some(t) = ov.trials {
        cfg.n_trials = t;
    }
    cfg.validate()?;
    Ok(loaded)
}

fn finish(dir: &Path, mut manifest: RunManifest, outputs: &[&str]) -> Result<(), CliError> {
    manifest.outputs = outputs.iter().map(|s| s.to_string()).collect();
    write_manifest(dir, &manifest)
}

#[derive(Debug, Clone, Default)]
pub struct SingleArgs {
    pub algorithm: Option<Algorithm>,
    pub p_s_dbm: Option<f64>,
    pub p_d_dbm: Option<f64>,
    pub trial: Option<u64>,
    pub out: Option<PathBuf>,
}

/// One algorithm on one channel draw. Prints a one-row CSV on stdout and
/// the wall time on stderr.
pub fn cmd_single(ov: &Overrides, args: &SingleArgs) -> Result<(), CliError> {
    let started = SystemTime::now();
    let loaded = load(ov)?;
    let cfg = &loaded.config;
    let saved = loaded.args.unwrap_or_default();
    let run = RunArgs {
        algorithm: Some(args.algorithm.or(saved.algorithm).unwrap_or(Algorithm::Goa)),
        p_s_dbm: Some(args.p_s_dbm.or(saved.p_s_dbm).unwrap_or(cfg.fig2_p_s_dbm)),
        p_d_dbm: Some(args.p_d_dbm.or(saved.p_d_dbm).unwrap_or(cfg.fig2_p_d_dbm)),
        trial: Some(args.trial.or(saved.trial).unwrap_or(0)),
    };
    let (alg, p_s, p_d, trial) = (
        run.algorithm.unwrap(),
        run.p_s_dbm.unwrap(),
        run.p_d_dbm.unwrap(),
        run.trial.unwrap(),
    );
    if alg == Algorithm::Single && cfg.n_r != 1 {
        return Err(CliError::Usage(format!(
            "--alg single requires n_r = 1 in the config, got n_r = {}",
            cfg.n_r
        )));
    }
    for (name, v) in [("--p-s", p_s), ("--p-d", p_d)] {
        if !v.is_finite() {
            return Err(CliError::Usage(format!("{name} must be finite, got {v}")));
        }
    }

    let params = cfg.params(p_s, p_d)?;
    let ch = gen_channels(cfg.seed, trial, cfg);
    let clock = Instant::now();
    let (res, budget) = run_cell(cfg, alg, &params, &ch, trial)?;
    let wall = clock.elapsed();

    let row = vec![
        alg.to_string(),
        num(p_s),
        num(p_d),
        cfg.seed.to_string(),
        trial.to_string(),
        num(res.rho_star.value()),
        num(res.secrecy_rate),
        num(res.relay_power(&params, &ch)),
        num(budget),
        res.diagnostics.iterations.to_string(),
    ];
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", SINGLE_HEADER.join(",")).map_err(|e| CliError::io("stdout", e))?;
    writeln!(stdout, "{}", row.join(",")).map_err(|e| CliError::io("stdout", e))?;
    eprintln!("wall_time_s={:.6}", wall.as_secs_f64());

    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_csv(&dir.join("single.csv"), &SINGLE_HEADER, [row])?;
        finish(dir, RunManifest::new("single", cfg, run, started), &["single.csv"])?;
    }
    Ok(())
}

/// Full Monte Carlo sweep. Failed trials are kept in the CSV with their
/// status and do not change the exit code.
pub fn cmd_sweep(ov: &Overrides, algorithms: &[Algorithm], out: &Path) -> Result<(), CliError> {
    let started = SystemTime::now();
    let mut cfg: ScenarioConfig = load(ov)?.config;
    if !algorithms.is_empty() {
        cfg.algorithms = algorithms.to_vec();
    }
    ensure_dir(out)?;
    let records = run_sweep(&cfg)?;
    for s in summarize(&records) {
        log::info!(
            "P_s={} dBm P_d={} dBm {}: mean R_sr {:.4} (se {:.4}), mean relay power {:.1} mW, {} ok, {} failed",
            s.p_s_dbm,
            s.p_d_dbm,
            s.algorithm,
            s.mean_secrecy_rate,
            s.stderr_secrecy_rate,
            s.mean_relay_power_mw,
            s.successes,
            s.failures
        );
    }
    let rows = records.iter().map(|r| {
        vec![
            num(r.p_s_dbm),
            num(r.p_d_dbm),
            r.algorithm.to_string(),
            r.trial.to_string(),
            num(r.secrecy_rate),
            num(r.relay_power_mw),
            num(r.rho_star),
            num(r.wall_time_s),
            r.status.clone(),
        ]
    });
    write_csv(&out.join("sweep.csv"), &SWEEP_HEADER, rows)?;
    finish(out, RunManifest::new("sweep", &cfg, RunArgs::default(), started), &["sweep.csv"])
}

#[derive(Debug, Clone, Default)]
pub struct Fig2Args {
    pub p_s_dbm: Option<f64>,
    pub p_d_dbm: Option<f64>,
    pub trial: Option<u64>,
    pub points: Option<usize>,
}

/// Single-antenna rate and derivative over ρ. The relay is forced to one
/// antenna. The last row holds the located optimum with its ρ starred.
pub fn cmd_fig2(ov: &Overrides, args: &Fig2Args, out: &Path) -> Result<(), CliError> {
    let started = SystemTime::now();
    let loaded = load(ov)?;
    let mut cfg = loaded.config;
    let saved = loaded.args.unwrap_or_default();
    cfg.n_r = 1;
    if let Some(p) = args.p_s_dbm {
        cfg.fig2_p_s_dbm = p;
    }
    if let Some(p) = args.p_d_dbm {
        cfg.fig2_p_d_dbm = p;
    }
    if let Some(n) = args.points {
        cfg.fig2_points = n;
    }
    cfg.validate()?;
    let trial = args.trial.or(saved.trial).unwrap_or(0);

    ensure_dir(out)?;
    let params = cfg.params(cfg.fig2_p_s_dbm, cfg.fig2_p_d_dbm)?;
    let ch = gen_channels(cfg.seed, trial, &cfg);
    let trace = fig2_trace(&params, &ch, cfg.fig2_points)?;
    log::info!(
        "fig2: rho* = {:.6}, R_sr = {:.6} bits/s/Hz",
        trace.optimum.rho,
        trace.optimum.r_sr
    );
    let opt = trace.optimum;
    let rows = trace
        .points
        .iter()
        .map(|p| vec![num(p.rho), num(p.r_sr), num(p.dr_sr)])
        .chain(std::iter::once(vec![format!("*{}", num(opt.rho)), num(opt.r_sr), num(opt.dr_sr)]));
    write_csv(&out.join("fig2.csv"), &FIG2_HEADER, rows)?;
    let run = RunArgs {
        trial: Some(trial),
        ..RunArgs::default()
    };
    finish(out, RunManifest::new("fig2", &cfg, run, started), &["fig2.csv"])
}

/// Wall-time table for GOA and LOA over the configured epsilons.
pub fn cmd_timing(ov: &Overrides, out: &Path) -> Result<(), CliError> {
    let started = SystemTime::now();
    let cfg = load(ov)?.config;
    ensure_dir(out)?;
    let rows = timing_experiment(&cfg)?;
    for r in &rows {
        log::info!(
            "{} eps={:e}: {:.4e} s per realization ({:.4e} s per restart), {} failed",
            r.algorithm,
            r.epsilon,
            r.mean_wall_time_s,
            r.mean_per_restart_s,
            r.failures
        );
    }
    let csv_rows = rows.iter().map(|r| {
        vec![
            r.algorithm.to_string(),
            num(r.epsilon),
            r.trials.to_string(),
            r.failures.to_string(),
            num(r.mean_wall_time_s),
            num(r.mean_per_restart_s),
            num(r.mean_secrecy_rate),
        ]
    });
    write_csv(&out.join("timing.csv"), &TIMING_HEADER, csv_rows)?;
    finish(out, RunManifest::new("timing", &cfg, RunArgs::default(), started), &["timing.csv"])
}
