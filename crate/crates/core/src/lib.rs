//! Joint power-splitting and secure relay beamforming for a wireless-powered
//! untrusted amplify-and-forward relay.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameters, channels, rates, harvested power and the lifted
//!   quadratic forms of the joint problem.
//! - [`solver`]: the fixed-ρ beamforming subproblem, solved in closed form or
//!   through a semidefinite relaxation with rank-one recovery.
//! - [`algorithms`]: grid-search global optimizer, block coordinate ascent
//!   local optimizer and the single-antenna closed form.
//! - [`sim`]: seeded Monte Carlo harness producing sweep, trace and timing
//!   data.

pub mod algorithms;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod sim;
pub mod solver;

pub use algorithms::{goa, loa, single_antenna_optimize, GoaConfig, LoaConfig, SolveResult};
pub use model::{Beamformer, ChannelSet, PsRatio, SystemParams};
pub use solver::InnerRoute;
