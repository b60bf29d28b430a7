//! End-to-end optimizers over `(ρ, F)`.
//!
//! - [`goa`]: uniform grid over ρ with an exact fixed-ρ beamforming solve at
//!   every grid point.
//! - [`loa`]: multi-start block coordinate ascent alternating an exact ρ
//!   update (derivative roots plus interval endpoints) with the fixed-ρ
//!   beamforming solve.
//! - [`single_antenna_optimize`]: the scalar-relay case, where the relay gain
//!   is fixed by the power budget and only ρ remains.

mod goa;
mod loa;
mod rho;
mod roots;
mod single;

pub use goa::{goa, GoaConfig};
pub use loa::{loa, loa_from_start, LoaConfig, RestartTrace};
pub use rho::{feasible_rho_min, objective_drho, rho_subproblem, rho_update, DerivativeParts, RhoProfile, RhoStep};
pub use roots::{bisect, scan_roots, ROOT_SCAN_SAMPLES};
pub use single::{single_antenna_optimize, SingleAntennaModel, SingleAntennaResult, TracePoint};

use std::time::Duration;
use thiserror::Error;

use crate::model::{
    harvested_power, relay_power_used, secrecy_from_objective, Beamformer, ChannelSet, ModelError, PsRatio,
    SystemParams,
};
use crate::solver::{InnerRoute, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("derivative requested at endpoint rho = {0}; endpoints are handled analytically")]
    EndpointRho(f64),
    #[error("beamformer is infeasible for every rho (rho_min = {rho_min})")]
    Infeasible { rho_min: f64 },
    #[error("single-antenna solver requires n_r = 1, got n_r = {0}")]
    NotSingleAntenna(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Total block-ascent iterations (LOA) or root-scan samples (single).
    pub iterations: usize,
    /// Grid points evaluated (GOA).
    pub grid_points: usize,
    /// Grid points whose inner solve failed and were skipped.
    pub failed_points: usize,
    pub restarts: usize,
    pub route: Option<InnerRoute>,
    pub wall_time: Duration,
    /// Per-restart traces (LOA only).
    pub restart_traces: Vec<RestartTrace>,
}

/// Optimized operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub rho_star: PsRatio,
    pub f_star: Beamformer,
    /// `½[log₂ objective]⁺`, bits/s/Hz.
    pub secrecy_rate: f64,
    /// Unclamped joint objective `2^(R_d - R_r)`.
    pub objective: f64,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    pub(crate) fn new(rho: PsRatio, f_star: Beamformer, objective: f64, diagnostics: Diagnostics) -> Self {
        Self {
            rho_star: rho,
            f_star,
            secrecy_rate: secrecy_from_objective(objective),
            objective,
            diagnostics,
        }
    }

    /// Relay power spent at the solution, mW.
    pub fn relay_power(&self, params: &SystemParams, ch: &ChannelSet) -> f64 {
        relay_power_used(&self.f_star, self.rho_star, params, ch)
    }

    /// Power harvested at the solution's splitting ratio, mW.
    pub fn harvested_power(&self, params: &SystemParams, ch: &ChannelSet) -> f64 {
        harvested_power(self.rho_star, params, ch)
    }
}

pub(crate) fn check_inputs(params: &SystemParams, ch: &ChannelSet) -> Result<(), AlgorithmError> {
    params.validate()?;
    ch.check_params(params)?;
    Ok(())
}
