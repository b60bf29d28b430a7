//! Monte Carlo harness: seeded channel draws, sweeps over source and jammer
//! power, the externally powered relay baseline, timing runs and the
//! single-antenna rate trace.

use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    goa, loa, single_antenna_optimize, AlgorithmError, Diagnostics, GoaConfig, LoaConfig, SingleAntennaModel,
    SolveResult, TracePoint,
};
use crate::model::{dbm_to_mw, t_of_rho, Beamformer, ChannelSet, PsRatio, SystemParams};
use crate::sampling::complex_gaussian_vector;
use crate::solver::{solve_inner, InnerProblem, InnerRoute, DEFAULT_SDP_TOL, MAX_DIM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SimError {
    SimError::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Goa,
    Loa,
    Epr,
    Single,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Goa => "goa",
            Algorithm::Loa => "loa",
            Algorithm::Epr => "epr",
            Algorithm::Single => "single",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "goa" => Ok(Algorithm::Goa),
            "loa" => Ok(Algorithm::Loa),
            "epr" => Ok(Algorithm::Epr),
            "single" => Ok(Algorithm::Single),
            other => Err(format!("unknown algorithm `{other}` (expected goa, loa, epr or single)")),
        }
    }
}

/// Experiment description. Powers are in dBm, distances are relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub d_sr: f64,
    pub d_dr: f64,
    pub d_rd: f64,
    pub n_r: usize,
    /// Common noise power at the relay, its conversion stage and the destination.
    pub noise_dbm: f64,
    pub eta: f64,
    /// Source powers `P_s`, dBm.
    pub snr_grid: Vec<f64>,
    /// Jamming powers `P_d`, dBm.
    pub p_d_grid: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// GOA grid step.
    pub epsilon: f64,
    /// LOA stopping tolerance; defaults to `epsilon`.
    pub loa_epsilon: Option<f64>,
    pub loa_restarts: usize,
    pub loa_max_iters: usize,
    /// Fixed relay power of the externally powered baseline, dBm.
    pub epr_p_r_dbm: f64,
    pub inner_route: InnerRoute,
    pub sdp_tol: f64,
    pub timing_epsilons: Vec<f64>,
    pub timing_p_s_dbm: f64,
    pub timing_p_d_dbm: f64,
    pub timing_route: InnerRoute,
    pub fig2_points: usize,
    pub fig2_p_s_dbm: f64,
    pub fig2_p_d_dbm: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            d_sr: 1.0,
            d_dr: 1.0,
            d_rd: 1.0,
            n_r: 2,
            noise_dbm: 0.0,
            eta: 1.0,
            snr_grid: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            p_d_grid: vec![40.0, 50.0],
            n_trials: 100,
            seed: 1,
            algorithms: vec![Algorithm::Goa, Algorithm::Loa, Algorithm::Epr],
            epsilon: 1e-3,
            loa_epsilon: None,
            loa_restarts: 5,
            loa_max_iters: 200,
            epr_p_r_dbm: 43.0,
            inner_route: InnerRoute::Closed,
            sdp_tol: DEFAULT_SDP_TOL,
            timing_epsilons: vec![1e-2, 1e-3, 1e-4],
            timing_p_s_dbm: 30.0,
            timing_p_d_dbm: 40.0,
            timing_route: InnerRoute::Sdr,
            fig2_points: 1001,
            fig2_p_s_dbm: 40.0,
            fig2_p_d_dbm: 40.0,
        }
    }
}

fn check_finite(field: &str, v: f64) -> Result<(), SimError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn check_epsilon(field: &str, v: f64) -> Result<(), SimError> {
    if (1e-6..=1e-1).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in [1e-6, 1e-1], got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, d) in [("d_sr", self.d_sr), ("d_dr", self.d_dr), ("d_rd", self.d_rd)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid(name, format!("distance must be positive, got {d}")));
            }
        }
        let max_nr = (MAX_DIM as f64).sqrt() as usize;
        if self.n_r == 0 || self.n_r > max_nr {
            return Err(invalid("n_r", format!("must lie in 1..={max_nr}, got {}", self.n_r)));
        }
        check_finite("noise_dbm", self.noise_dbm)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        for (name, grid) in [("snr_grid", &self.snr_grid), ("p_d_grid", &self.p_d_grid)] {
            if grid.is_empty() {
                return Err(invalid(name, "must be nonempty"));
            }
            for (i, &v) in grid.iter().enumerate() {
                check_finite(&format!("{name}[{i}]"), v)?;
            }
        }
        if self.n_trials == 0 {
            return Err(invalid("n_trials", "must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "must be nonempty"));
        }
        check_epsilon("epsilon", self.epsilon)?;
        if let Some(e) = self.loa_epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(invalid("loa_epsilon", format!("must lie in (0, 1), got {e}")));
            }
        }
        if self.loa_restarts == 0 {
            return Err(invalid("loa_restarts", "must be >= 1"));
        }
        if self.loa_max_iters == 0 {
            return Err(invalid("loa_max_iters", "must be >= 1"));
        }
        check_finite("epr_p_r_dbm", self.epr_p_r_dbm)?;
        if !(1e-10..=1e-4).contains(&self.sdp_tol) {
            return Err(invalid("sdp_tol", format!("must lie in [1e-10, 1e-4], got {}", self.sdp_tol)));
        }
        if self.timing_epsilons.is_empty() {
            return Err(invalid("timing_epsilons", "must be nonempty"));
        }
        for (i, &e) in self.timing_epsilons.iter().enumerate() {
            check_epsilon(&format!("timing_epsilons[{i}]"), e)?;
        }
        check_finite("timing_p_s_dbm", self.timing_p_s_dbm)?;
        check_finite("timing_p_d_dbm", self.timing_p_d_dbm)?;
        if self.fig2_points < 2 {
            return Err(invalid("fig2_points", "must be >= 2"));
        }
        check_finite("fig2_p_s_dbm", self.fig2_p_s_dbm)?;
        check_finite("fig2_p_d_dbm", self.fig2_p_d_dbm)?;
        Ok(())
    }

    /// System parameters at one grid cell.
    pub fn params(&self, p_s_dbm: f64, p_d_dbm: f64) -> Result<SystemParams, SimError> {
        SystemParams::with_common_noise(
            dbm_to_mw(p_s_dbm),
            dbm_to_mw(p_d_dbm),
            dbm_to_mw(self.noise_dbm),
            self.eta,
            self.n_r,
        )
        .map_err(|e| SimError::Algorithm(e.into()))
    }

    pub fn loa_config(&self, seed: u64) -> LoaConfig {
        LoaConfig {
            epsilon: self.loa_epsilon.unwrap_or(self.epsilon),
            j_restarts: self.loa_restarts,
            max_iters: self.loa_max_iters,
            seed,
            route: self.inner_route,
            sdp_tol: self.sdp_tol,
        }
    }

    pub fn goa_config(&self) -> GoaConfig {
        GoaConfig {
            epsilon: self.epsilon,
            route: self.inner_route,
            sdp_tol: self.sdp_tol,
        }
    }
}

/// Rayleigh channels with path loss `d⁻²`, drawn from ChaCha20 stream
/// `trial` of `seed`. Draw order is `h_sr`, `h_dr`, `h_rd`.
pub fn gen_channels(seed: u64, trial: u64, cfg: &ScenarioConfig) -> ChannelSet {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let n = cfg.n_r;
    let h_sr = complex_gaussian_vector(&mut rng, n, cfg.d_sr.powi(-2));
    let h_dr = complex_gaussian_vector(&mut rng, n, cfg.d_dr.powi(-2));
    let h_rd = complex_gaussian_vector(&mut rng, n, cfg.d_rd.powi(-2));
    ChannelSet::new(h_sr, h_dr, h_rd).expect("Gaussian draws are finite and equally sized")
}

/// Seed of the LOA restarts for one trial, independent of the channel stream.
pub fn loa_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rand::RngCore::next_u64(&mut rng)
}

/// Externally powered relay: no power splitting (`ρ = 0`) and a fixed
/// relay budget `p_r_mw`.
pub fn epr_baseline(
    params: &SystemParams,
    ch: &ChannelSet,
    p_r_mw: f64,
    route: InnerRoute,
    sdp_tol: f64,
) -> Result<SolveResult, AlgorithmError> {
    if !(p_r_mw >= 0.0) {
        return Err(AlgorithmError::InvalidConfig(format!("relay power must be >= 0, got {p_r_mw}")));
    }
    params.validate()?;
    ch.check_params(params)?;
    let start = Instant::now();
    let prob = InnerProblem::with_budget(PsRatio::ZERO, p_r_mw, params, ch);
    let sol = solve_inner(&prob, route, sdp_tol)?;
    let (t, _) = t_of_rho(PsRatio::ZERO, params, ch);
    let obj = (1.0 + prob.ratio(&sol.f_star)) / t;
    let f = Beamformer::from_vec(params.n_r, &sol.f_star)?;
    let diagnostics = Diagnostics {
        route: Some(route),
        wall_time: start.elapsed(),
        ..Diagnostics::default()
    };
    Ok(SolveResult::new(PsRatio::ZERO, f, obj, diagnostics))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub p_s_dbm: f64,
    pub p_d_dbm: f64,
    pub algorithm: Algorithm,
    pub trial: u64,
    pub secrecy_rate: f64,
    pub relay_power_mw: f64,
    /// Budget available to the relay: harvested power, or the fixed EPR power.
    pub budget_mw: f64,
    pub rho_star: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Runs one algorithm at one cell.
pub fn run_cell(
    cfg: &ScenarioConfig,
    algorithm: Algorithm,
    params: &SystemParams,
    ch: &ChannelSet,
    trial: u64,
) -> Result<(SolveResult, f64), AlgorithmError> {
    match algorithm {
        Algorithm::Goa => {
            let r = goa(params, ch, &cfg.goa_config())?;
            let budget = r.harvested_power(params, ch);
            Ok((r, budget))
        }
        Algorithm::Loa => {
            let r = loa(params, ch, &cfg.loa_config(loa_seed(cfg.seed, trial)))?;
            let budget = r.harvested_power(params, ch);
            Ok((r, budget))
        }
        Algorithm::Single => {
            let r = single_antenna_optimize(params, ch)?.solve;
            let budget = r.harvested_power(params, ch);
            Ok((r, budget))
        }
        Algorithm::Epr => {
            let p_r = dbm_to_mw(cfg.epr_p_r_dbm);
            Ok((epr_baseline(params, ch, p_r, cfg.inner_route, cfg.sdp_tol)?, p_r))
        }
    }
}

/// Every `(P_s, P_d, algorithm, trial)` cell, in that nesting order. Trials
/// run in parallel; each trial's channels and LOA starts come from streams
/// keyed by the trial index, so the output does not depend on scheduling.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRecord>, SimError> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &p_s in &cfg.snr_grid {
        for &p_d in &cfg.p_d_grid {
            for &alg in &cfg.algorithms {
                for trial in 0..cfg.n_trials as u64 {
                    cells.push((p_s, p_d, alg, trial));
                }
            }
        }
    }
    let records = cells
        .into_par_iter()
        .map(|(p_s, p_d, alg, trial)| {
            let ch = gen_channels(cfg.seed, trial, cfg);
            let mut rec = SweepRecord {
                p_s_dbm: p_s,
                p_d_dbm: p_d,
                algorithm: alg,
                trial,
                secrecy_rate: 0.0,
                relay_power_mw: 0.0,
                budget_mw: 0.0,
                rho_star: f64::NAN,
                wall_time_s: 0.0,
                seed: cfg.seed,
                status: "ok".into(),
            };
            let outcome = cfg
                .params(p_s, p_d)
                .map_err(|e| e.to_string())
                .and_then(|params| run_cell(cfg, alg, &params, &ch, trial).map(|r| (params, r)).map_err(|e| e.to_string()));
            match outcome {
                Ok((params, (res, budget))) => {
                    rec.secrecy_rate = res.secrecy_rate;
                    rec.relay_power_mw = res.relay_power(&params, &ch);
                    rec.budget_mw = budget;
                    rec.rho_star = res.rho_star.value();
                    rec.wall_time_s = res.diagnostics.wall_time.as_secs_f64();
                }
                Err(e) => {
                    log::warn!("sweep: p_s={p_s} p_d={p_d} {alg} trial {trial} failed: {e}");
                    rec.status = format!("failed: {e}");
                }
            }
            rec
        })
        .collect();
    Ok(records)
}

/// Per-cell statistics over successful trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub p_s_dbm: f64,
    pub p_d_dbm: f64,
    pub algorithm: Algorithm,
    pub successes: usize,
    pub failures: usize,
    pub mean_secrecy_rate: f64,
    pub stderr_secrecy_rate: f64,
    pub mean_relay_power_mw: f64,
}

/// Groups records by `(P_s, P_d, algorithm)` in order of first appearance.
pub fn summarize(records: &[SweepRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(f64, f64, Algorithm)> = Vec::new();
    for r in records {
        let k = (r.p_s_dbm, r.p_d_dbm, r.algorithm);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(p_s, p_d, alg)| {
            let cell: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.p_s_dbm == p_s && r.p_d_dbm == p_d && r.algorithm == alg)
                .collect();
            let ok: Vec<&SweepRecord> = cell.iter().copied().filter(|r| r.ok()).collect();
            let n = ok.len() as f64;
            let mean = |f: &dyn Fn(&SweepRecord) -> f64| if ok.is_empty() { f64::NAN } else { ok.iter().map(|r| f(r)).sum::<f64>() / n };
            let mean_rate = mean(&|r| r.secrecy_rate);
            let stderr = if ok.len() > 1 {
                let var = ok.iter().map(|r| (r.secrecy_rate - mean_rate).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            CellSummary {
                p_s_dbm: p_s,
                p_d_dbm: p_d,
                algorithm: alg,
                successes: ok.len(),
                failures: cell.len() - ok.len(),
                mean_secrecy_rate: mean_rate,
                stderr_secrecy_rate: stderr,
                mean_relay_power_mw: mean(&|r| r.relay_power_mw),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub trials: usize,
    pub failures: usize,
    /// Mean wall time per channel realization, all LOA restarts included.
    pub mean_wall_time_s: f64,
    /// Mean wall time of one LOA restart; equals the total for GOA.
    pub mean_per_restart_s: f64,
    pub mean_secrecy_rate: f64,
}

/// Mean wall time per realization of GOA and LOA at every epsilon, run
/// sequentially on the calling thread.
pub fn timing_experiment(cfg: &ScenarioConfig) -> Result<Vec<TimingRow>, SimError> {
    cfg.validate()?;
    let params = cfg.params(cfg.timing_p_s_dbm, cfg.timing_p_d_dbm)?;
    let mut rows = Vec::new();
    for alg in [Algorithm::Goa, Algorithm::Loa] {
        for &eps in &cfg.timing_epsilons {
            let mut total = Duration::ZERO;
            let mut per_restart = 0.0;
            let mut rate = 0.0;
            let mut ok = 0usize;
            for trial in 0..cfg.n_trials as u64 {
                let ch = gen_channels(cfg.seed, trial, cfg);
                let res = match alg {
                    Algorithm::Goa => goa(
                        &params,
                        &ch,
                        &GoaConfig {
                            epsilon: eps,
                            route: cfg.timing_route,
                            sdp_tol: cfg.sdp_tol,
                        },
                    ),
                    _ => {
                        let lc = LoaConfig {
                            epsilon: eps,
                            route: cfg.timing_route,
                            ..cfg.loa_config(loa_seed(cfg.seed, trial))
                        };
                        loa(&params, &ch, &lc)
                    }
                };
                match res {
                    Ok(r) => {
                        let restarts = r.diagnostics.restarts.max(1) as f64;
                        total += r.diagnostics.wall_time;
                        per_restart += r.diagnostics.wall_time.as_secs_f64() / restarts;
                        rate += r.secrecy_rate;
                        ok += 1;
                    }
                    Err(e) => log::warn!("timing: {alg} eps={eps} trial {trial} failed: {e}"),
                }
            }
            let n = ok.max(1) as f64;
            rows.push(TimingRow {
                algorithm: alg,
                epsilon: eps,
                trials: cfg.n_trials,
                failures: cfg.n_trials - ok,
                mean_wall_time_s: total.as_secs_f64() / n,
                mean_per_restart_s: per_restart / n,
                mean_secrecy_rate: rate / n,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Trace {
    pub points: Vec<TracePoint>,
    /// Located optimum (derivative root), or the zero-rate point.
    pub optimum: TracePoint,
}

/// `(ρ, R_sr, dR_sr/dρ)` on a uniform grid of `[0, 1]` plus the optimum
/// found by the root search.
pub fn fig2_trace(params: &SystemParams, ch: &ChannelSet, n_points: usize) -> Result<Fig2Trace, AlgorithmError> {
    let model = SingleAntennaModel::new(params, ch)?;
    let res = single_antenna_optimize(params, ch)?;
    Ok(Fig2Trace {
        points: model.trace(n_points),
        optimum: model.trace_point(res.solve.rho_star.value()),
    })
}
