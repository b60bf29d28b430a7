use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_inputs, AlgorithmError, Diagnostics, SolveResult};
use crate::model::{t_of_rho, Beamformer, ChannelSet, PsRatio, SystemParams};
use crate::solver::{solve_inner, InnerProblem, InnerRoute, DEFAULT_SDP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoaConfig {
    /// Grid step; the grid has `M = round(1/epsilon)` cells.
    pub epsilon: f64,
    pub route: InnerRoute,
    /// Interior-point tolerance on the SDR route.
    pub sdp_tol: f64,
}

impl Default for GoaConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            route: InnerRoute::Closed,
            sdp_tol: DEFAULT_SDP_TOL,
        }
    }
}

impl GoaConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if !(1e-6..=1e-1).contains(&self.epsilon) {
            return Err(AlgorithmError::InvalidConfig(format!(
                "epsilon must lie in [1e-6, 1e-1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        (1.0 / self.epsilon).round() as usize
    }
}

/// Grid search over ρ. Each interior grid point gets an exact beamforming
/// solve; ρ = 1 scores objective 1 (zero secrecy) and ρ = 0 is dominated by
/// it, so neither endpoint reaches the inner solver.
pub fn goa(params: &SystemParams, ch: &ChannelSet, cfg: &GoaConfig) -> Result<SolveResult, AlgorithmError> {
    cfg.validate()?;
    check_inputs(params, ch)?;
    let start = Instant::now();
    let m = cfg.grid_size();

    let mut best_rho = PsRatio::ONE;
    let mut best_f = Beamformer::zeros(params.n_r);
    let mut best_obj = 1.0;
    let mut failed = 0;
    for j in 1..m {
        let rho = PsRatio::new(j as f64 / m as f64)?;
        let prob = InnerProblem::new(rho, params, ch);
        let sol = match solve_inner(&prob, cfg.route, cfg.sdp_tol) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("goa: grid point rho = {rho} skipped: {e}");
                failed += 1;
                continue;
            }
        };
        let (t, _) = t_of_rho(rho, params, ch);
        let obj = (1.0 + prob.ratio(&sol.f_star)) / t;
        if obj > best_obj {
            best_obj = obj;
            best_rho = rho;
            best_f = Beamformer::from_vec(params.n_r, &sol.f_star)?;
        }
    }

    let diagnostics = Diagnostics {
        grid_points: m.saturating_sub(1),
        failed_points: failed,
        route: Some(cfg.route),
        wall_time: start.elapsed(),
        ..Diagnostics::default()
    };
    Ok(SolveResult::new(best_rho, best_f, best_obj, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{harvested_power, objective, relay_power_used};
    use crate::sampling::{random_channels, random_params};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SystemParams, ChannelSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = SystemParams::with_common_noise(1e4, 1e4, 1.0, 1.0, 2).unwrap();
        (params, random_channels(&mut rng, 2, 1.0))
    }

    #[test]
    fn result_is_consistent_and_feasible() {
        for seed in 0..10 {
            let (params, ch) = setup(seed);
            let res = goa(&params, &ch, &GoaConfig::with_epsilon(1e-2)).unwrap();
            let (direct, _) = objective(res.rho_star, &res.f_star, &params, &ch);
            assert!((direct - res.objective).abs() <= 1e-9 * direct);
            assert!((res.secrecy_rate - 0.5 * res.objective.log2().max(0.0)).abs() <= 1e-12);
            let used = relay_power_used(&res.f_star, res.rho_star, &params, &ch);
            assert!(used <= harvested_power(res.rho_star, &params, &ch) * (1.0 + 1e-8));
            assert_eq!(res.diagnostics.grid_points, 99);
        }
    }

    #[test]
    fn unreachable_destination_gives_zero() {
        let (params, mut ch) = setup(1);
        ch.h_rd.fill(Complex64::new(0.0, 0.0));
        let res = goa(&params, &ch, &GoaConfig::with_epsilon(1e-2)).unwrap();
        assert_eq!(res.secrecy_rate, 0.0);
    }

    #[test]
    fn refined_grid_never_worse() {
        for seed in 0..5 {
            let (params, ch) = setup(10 + seed);
            let coarse = goa(&params, &ch, &GoaConfig::with_epsilon(1e-2)).unwrap();
            let fine = goa(&params, &ch, &GoaConfig::with_epsilon(1e-3)).unwrap();
            assert!(fine.objective >= coarse.objective * (1.0 - 1e-7));
        }
    }

    #[test]
    fn beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let params = random_params(&mut rng, 2);
            let ch = random_channels(&mut rng, 2, 1.0);
            let res = goa(&params, &ch, &GoaConfig::with_epsilon(1e-3)).unwrap();
            for _ in 0..100 {
                use rand::Rng;
                let rho = PsRatio::new(rng.random_range(0.0..1.0)).unwrap();
                let bf = crate::sampling::random_beamformer(&mut rng, 2);
                let used = relay_power_used(&bf, rho, &params, &ch);
                let bf = bf.scaled((harvested_power(rho, &params, &ch) / used).sqrt());
                let (v, _) = objective(rho, &bf, &params, &ch);
                assert!(res.objective >= v - 1e-6 * v);
            }
        }
    }

    #[test]
    fn sdr_route_agrees_with_closed_form() {
        let (params, ch) = setup(3);
        let closed = goa(&params, &ch, &GoaConfig::with_epsilon(1e-1)).unwrap();
        let sdr = goa(
            &params,
            &ch,
            &GoaConfig {
                route: InnerRoute::Sdr,
                ..GoaConfig::with_epsilon(1e-1)
            },
        )
        .unwrap();
        assert_eq!(closed.rho_star, sdr.rho_star);
        assert!((closed.objective - sdr.objective).abs() <= 1e-5 * closed.objective);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let (params, ch) = setup(0);
        for eps in [0.5, 1e-7, f64::NAN] {
            assert!(goa(&params, &ch, &GoaConfig::with_epsilon(eps)).is_err());
        }
    }
}
