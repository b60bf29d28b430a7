use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rho::{rho_update, RhoProfile};
use super::{check_inputs, AlgorithmError, Diagnostics, SolveResult};
use crate::model::{harvested_power, objective, relay_power_used, Beamformer, ChannelSet, PsRatio, SystemParams};
use crate::sampling::complex_gaussian_vector;
use crate::solver::{solve_inner, InnerProblem, InnerRoute, DEFAULT_SDP_TOL};

const START_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoaConfig {
    /// Relative objective change that stops a restart.
    pub epsilon: f64,
    pub j_restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub route: InnerRoute,
    pub sdp_tol: f64,
}

impl Default for LoaConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            j_restarts: 5,
            max_iters: 200,
            seed: 0,
            route: InnerRoute::Closed,
            sdp_tol: DEFAULT_SDP_TOL,
        }
    }
}

impl LoaConfig {
    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if !(self.epsilon > 0.0) {
            return Err(AlgorithmError::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.j_restarts == 0 {
            return Err(AlgorithmError::InvalidConfig("j_restarts must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(AlgorithmError::InvalidConfig("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// One block-ascent run from a single start.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub start_rho: f64,
    pub rho_star: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the start and after every half step (ρ update, then F update).
    pub half_steps: Vec<f64>,
    pub wall_time: Duration,
}

struct Outcome {
    rho: PsRatio,
    f: Beamformer,
    trace: RestartTrace,
}

/// Scales `f` so the relay power constraint is active at `rho`.
fn scale_to_budget(f: &Beamformer, rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> Beamformer {
    let used = relay_power_used(f, rho, params, ch);
    if used > 0.0 {
        f.scaled((harvested_power(rho, params, ch) / used).sqrt())
    } else {
        f.clone()
    }
}

fn random_start(
    rng: &mut ChaCha8Rng,
    params: &SystemParams,
    ch: &ChannelSet,
) -> Result<(PsRatio, Beamformer), AlgorithmError> {
    let rho = PsRatio::new(rng.random_range(0.05..0.95))?;
    let n = params.n_r;
    let raw = Beamformer::from_vec(n, &complex_gaussian_vector(rng, n * n, 1.0))?;
    let mut f = scale_to_budget(&raw, rho, params, ch);
    for _ in 0..START_ATTEMPTS {
        // budget scaling puts ρ_min on ρ up to rounding
        if super::feasible_rho_min(&f, params, ch) <= rho.value() * (1.0 + 1e-12) {
            return Ok((rho, f));
        }
        f = f.scaled(0.5);
    }
    Err(AlgorithmError::Infeasible {
        rho_min: super::feasible_rho_min(&f, params, ch),
    })
}

fn run_restart(
    rho0: PsRatio,
    f0: Beamformer,
    params: &SystemParams,
    ch: &ChannelSet,
    cfg: &LoaConfig,
) -> Result<Outcome, AlgorithmError> {
    let start = Instant::now();
    let mut rho = rho0;
    let mut f = f0;
    let mut value = RhoProfile::new(&f, params, ch)?.value(rho.value());
    let mut half_steps = vec![value];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        iterations += 1;
        let prev = value;

        // ρ block. An F that only fits at ρ = 1 leaves nothing to move.
        match rho_update(&f, params, ch) {
            Ok(step) if step.value >= value => {
                rho = step.rho;
                value = step.value;
            }
            Ok(_) | Err(AlgorithmError::Infeasible { .. }) => {}
            Err(e) => return Err(e),
        }
        half_steps.push(value);

        // F block: the incumbent stays feasible at the new ρ, so the exact
        // solve cannot lose ground; the comparison only guards rounding.
        let prob = InnerProblem::new(rho, params, ch);
        let sol = solve_inner(&prob, cfg.route, cfg.sdp_tol)?;
        let candidate = Beamformer::from_vec(params.n_r, &sol.f_star)?;
        let cand_value = RhoProfile::new(&candidate, params, ch)?.value(rho.value());
        if cand_value >= value {
            f = candidate;
            value = cand_value;
        }
        half_steps.push(value);

        let delta = (value - prev) / value.abs();
        if delta.max(0.0) <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok(Outcome {
        rho,
        f,
        trace: RestartTrace {
            start_rho: rho0.value(),
            rho_star: rho.value(),
            objective: value,
            iterations,
            converged,
            half_steps,
            wall_time: start.elapsed(),
        },
    })
}

fn finish(outcomes: Vec<Outcome>, params: &SystemParams, ch: &ChannelSet, cfg: &LoaConfig, start: Instant) -> SolveResult {
    let iterations = outcomes.iter().map(|o| o.trace.iterations).sum();
    let restarts = outcomes.len();
    let best = outcomes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.trace.objective.total_cmp(&b.1.trace.objective).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let rho = outcomes[best].rho;
    let f = outcomes[best].f.clone();
    let (obj, _) = objective(rho, &f, params, ch);
    let diagnostics = Diagnostics {
        iterations,
        restarts,
        route: Some(cfg.route),
        restart_traces: outcomes.into_iter().map(|o| o.trace).collect(),
        wall_time: start.elapsed(),
        ..Diagnostics::default()
    };
    SolveResult::new(rho, f, obj, diagnostics)
}

/// Multi-start block coordinate ascent. Restart `j` draws its start from
/// the stream `(cfg.seed, j)`, so results do not depend on execution order.
pub fn loa(params: &SystemParams, ch: &ChannelSet, cfg: &LoaConfig) -> Result<SolveResult, AlgorithmError> {
    cfg.validate()?;
    check_inputs(params, ch)?;
    params.common_noise()?;
    let start = Instant::now();
    let mut outcomes = Vec::with_capacity(cfg.j_restarts);
    for j in 0..cfg.j_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(j as u64);
        let (rho0, f0) = random_start(&mut rng, params, ch)?;
        outcomes.push(run_restart(rho0, f0, params, ch, cfg)?);
    }
    Ok(finish(outcomes, params, ch, cfg, start))
}

/// Single block-ascent run from a given feasible start.
pub fn loa_from_start(
    params: &SystemParams,
    ch: &ChannelSet,
    cfg: &LoaConfig,
    rho0: PsRatio,
    f0: &Beamformer,
) -> Result<SolveResult, AlgorithmError> {
    cfg.validate()?;
    check_inputs(params, ch)?;
    params.common_noise()?;
    let rho_min = super::feasible_rho_min(f0, params, ch);
    if rho_min > rho0.value() * (1.0 + 1e-12) {
        return Err(AlgorithmError::Infeasible { rho_min });
    }
    let start = Instant::now();
    let outcome = run_restart(rho0, f0.clone(), params, ch, cfg)?;
    Ok(finish(vec![outcome], params, ch, cfg, start))
}
