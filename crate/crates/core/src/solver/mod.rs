//! Fixed-ρ beamforming subproblem
//!
//! ```text
//! maximize  fᴴBf / (fᴴ(C+E)f + σ²)   subject to  fᴴTf ≤ p_eh
//! ```
//!
//! solved two ways: a closed form ([`solve_inner_closed`]) and the
//! semidefinite relaxation with Charnes–Cooper linearization and rank-one
//! recovery ([`solve_inner_sdr`]). The two routes certify each other.

mod decompose;
mod ipm;
mod sdp;

pub use decompose::{numerical_rank, psd_factors, rank_one_decompose, PSD_TOLERANCE, RANK_CUTOFF};
pub use sdp::{min_eigenvalue, solve_sdp, SdpDiagnostics, SdpProblem, SdpSolution, MAX_DIM, XI_MIN};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{quad_form, solve_hpd, CVector};
use crate::model::{harvested_power, lifted_matrices, ChannelSet, LiftedMatrices, PsRatio, SystemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("tolerance {0:e} outside [1e-10, 1e-4]")]
    Tolerance(f64),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("SDP solver did not converge ({status}): {diagnostics:?}")]
    SdpNotConverged { status: String, diagnostics: SdpDiagnostics },
    #[error("singular system in closed-form solve")]
    Singular,
}

/// Which algorithm solved a fixed-ρ subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerRoute {
    /// Tight-constraint reduction to a rank-one Rayleigh quotient.
    #[default]
    Closed,
    /// SDP relaxation plus rank-one recovery.
    Sdr,
}

impl std::fmt::Display for InnerRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InnerRoute::Closed => "closed",
            InnerRoute::Sdr => "sdr",
        })
    }
}

/// Beamforming subproblem at a fixed splitting ratio.
#[derive(Debug, Clone)]
pub struct InnerProblem {
    pub lifted: LiftedMatrices,
    /// Harvested power budget, mW.
    pub p_eh: f64,
    /// Destination noise variance, mW.
    pub sigma2: f64,
    pub rho_bar: PsRatio,
    /// Source power, mW; `B = p_s (1-ρ) b bᴴ`.
    pub p_s: f64,
}

impl InnerProblem {
    /// The wireless-powered subproblem: budget is the power harvested at `rho`.
    pub fn new(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> Self {
        Self::with_budget(rho, harvested_power(rho, params, ch), params, ch)
    }

    /// Subproblem with an explicit relay budget.
    pub fn with_budget(rho: PsRatio, p_eh: f64, params: &SystemParams, ch: &ChannelSet) -> Self {
        Self {
            lifted: lifted_matrices(rho, params, ch),
            p_eh,
            sigma2: params.sigma_d2,
            rho_bar: rho,
            p_s: params.p_s,
        }
    }

    pub fn dim(&self) -> usize {
        self.lifted.dim()
    }

    /// `fᴴBf / (fᴴ(C+E)f + σ²)`.
    pub fn ratio(&self, f: &CVector) -> f64 {
        let num = quad_form(f, &self.lifted.b).max(0.0);
        let den = quad_form(f, &self.lifted.c) + quad_form(f, &self.lifted.e) + self.sigma2;
        num / den
    }

    pub fn power(&self, f: &CVector) -> f64 {
        quad_form(f, &self.lifted.t)
    }
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub f_star: CVector,
    /// Subproblem objective at `f_star`.
    pub ratio_value: f64,
    pub route: InnerRoute,
    /// Rank of the relaxed solution before recovery (1 for the closed form).
    pub recovered_rank: usize,
    /// Set when the budget is zero and the only feasible point is `f = 0`.
    pub degenerate: bool,
    /// SDP optimum `Tr(BZ)` on the SDR route.
    pub sdp_objective: Option<f64>,
    pub sdp_diagnostics: Option<SdpDiagnostics>,
}

impl InnerSolution {
    fn zero(dim: usize, route: InnerRoute) -> Self {
        Self {
            f_star: CVector::zeros(dim),
            ratio_value: 0.0,
            route,
            recovered_rank: 0,
            degenerate: true,
            sdp_objective: None,
            sdp_diagnostics: None,
        }
    }
}

/// Rotates `f` so that `bᴴf = h_rdᴴ F h_sr` is real and nonnegative.
fn normalize_phase(f: &mut CVector, b_vec: &CVector) {
    let s = b_vec.dotc(f);
    if s.norm() > 0.0 {
        let rot = s.conj() / s.norm();
        *f *= rot;
    }
}

/// Closed-form maximizer. The budget is active at the optimum, so
/// `σ² ≥ (σ²/p_eh) fᴴTf` with equality there, and the problem becomes the
/// Rayleigh quotient `fᴴBf / fᴴDf` with `D = C + E + (σ²/p_eh) T`. Since `B`
/// is rank one the maximizer is `D⁻¹b`, rescaled onto the budget.
pub fn solve_inner_closed(prob: &InnerProblem) -> Result<InnerSolution, SolverError> {
    let n = prob.dim();
    if prob.p_eh <= 0.0 {
        return Ok(InnerSolution::zero(n, InnerRoute::Closed));
    }
    let l = &prob.lifted;
    let d = &l.c + &l.e + l.t.scale(prob.sigma2 / prob.p_eh);
    let x = solve_hpd(&d, &l.b_vec).ok_or(SolverError::Singular)?;
    let power = quad_form(&x, &l.t);
    let mut f = if power > 0.0 {
        x.scale((prob.p_eh / power).sqrt())
    } else {
        CVector::zeros(n)
    };
    normalize_phase(&mut f, &l.b_vec);
    let gain = prob.p_s * prob.rho_bar.info_fraction();
    let ratio_value = (gain * l.b_vec.dotc(&x).re).max(0.0);
    Ok(InnerSolution {
        f_star: f,
        ratio_value,
        route: InnerRoute::Closed,
        recovered_rank: 1,
        degenerate: false,
        sdp_objective: None,
        sdp_diagnostics: None,
    })
}

/// Builds the linearized relaxation in `(Z, ξ)`.
pub fn assemble_cc_sdp(prob: &InnerProblem) -> SdpProblem {
    SdpProblem {
        b: prob.lifted.b.clone(),
        ce: prob.lifted.noise_form(),
        sigma2: prob.sigma2,
        t: prob.lifted.t.clone(),
        p_eh: prob.p_eh,
    }
}

/// SDP relaxation route: solve for `(Z, ξ)`, form `X = Z/ξ`, and recover a
/// rank-one `f` either directly (rank one) or through the two-target
/// rank-one decomposition against `C + E` and `T`.
pub fn solve_inner_sdr(prob: &InnerProblem, tol: f64) -> Result<InnerSolution, SolverError> {
    let n = prob.dim();
    if prob.p_eh <= 0.0 {
        return Ok(InnerSolution::zero(n, InnerRoute::Sdr));
    }
    let sdp = assemble_cc_sdp(prob);
    let sol = solve_sdp(&sdp, tol)?;
    let x = sol.x();

    let mut factors = psd_factors(&x)?;
    let rank = factors.len();
    let mut f = if rank == 1 {
        factors.pop().expect("rank one")
    } else {
        let ys = rank_one_decompose(&x, &sdp.ce, &sdp.t)?;
        // Each y_j carries Tr(A_i X)/r, so √r·y_j matches the relaxed
        // constraint values; the best one attains at least Tr(BX).
        let best = ys
            .into_iter()
            .max_by(|a, b| quad_form(a, &sdp.b).total_cmp(&quad_form(b, &sdp.b)))
            .expect("rank >= 1");
        best * Complex64::new((rank as f64).sqrt(), 0.0)
    };
    // Rounding can leave f a hair outside the budget.
    let power = prob.power(&f);
    if power > prob.p_eh {
        f = f.scale((prob.p_eh / power).sqrt());
    }
    normalize_phase(&mut f, &prob.lifted.b_vec);
    Ok(InnerSolution {
        ratio_value: prob.ratio(&f),
        f_star: f,
        route: InnerRoute::Sdr,
        recovered_rank: rank,
        degenerate: false,
        sdp_objective: Some(sol.objective),
        sdp_diagnostics: Some(sol.diagnostics),
    })
}

/// Dispatches to the requested route.
pub fn solve_inner(prob: &InnerProblem, route: InnerRoute, tol: f64) -> Result<InnerSolution, SolverError> {
    match route {
        InnerRoute::Closed => solve_inner_closed(prob),
        InnerRoute::Sdr => solve_inner_sdr(prob, tol),
    }
}

/// Default interior-point tolerance for the SDR route.
pub const DEFAULT_SDP_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::model::{check_beamformer, Beamformer};
    use crate::sampling::{complex_gaussian_vector, random_channels, random_params};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, n: usize, rho: f64) -> (SystemParams, ChannelSet, InnerProblem) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_params(&mut rng, n);
        let ch = random_channels(&mut rng, n, 1.0);
        let prob = InnerProblem::new(PsRatio::new(rho).unwrap(), &params, &ch);
        (params, ch, prob)
    }

    /// Best ratio over random directions scaled onto the power boundary.
    fn sampled_best(prob: &InnerProblem, rng: &mut ChaCha8Rng, samples: usize) -> f64 {
        let n = prob.dim();
        let mut best = 0.0f64;
        for _ in 0..samples {
            let d = complex_gaussian_vector(rng, n, 1.0);
            let f = d.scale((prob.p_eh / prob.power(&d)).sqrt());
            best = best.max(prob.ratio(&f));
        }
        best
    }

    #[test]
    fn closed_form_scalar_case_is_amplifier_gain() {
        let (params, ch, prob) = instance(1, 1, 0.4);
        let sol = solve_inner_closed(&prob).unwrap();
        let t = prob.lifted.t[(0, 0)].re;
        assert!((sol.f_star[0].norm() - (prob.p_eh / t).sqrt()).abs() < 1e-12);
        // matches the single-antenna amplification factor
        let keep = 0.6;
        let alpha2 = prob.p_eh
            / (keep * (params.p_s * ch.h_sr[0].norm_sqr() + params.p_d * ch.h_dr[0].norm_sqr() + params.sigma_r2)
                + params.sigma_c2);
        assert!((sol.f_star[0].norm_sqr() - alpha2).abs() < 1e-12 * alpha2);
    }

    #[test]
    fn closed_form_reported_value_matches_direct_evaluation() {
        for seed in 0..20 {
            let (_, _, prob) = instance(seed, 1 + (seed as usize) % 3, 0.1 + 0.04 * seed as f64);
            let sol = solve_inner_closed(&prob).unwrap();
            let direct = prob.ratio(&sol.f_star);
            assert!((direct - sol.ratio_value).abs() <= 1e-10 * direct.max(1e-300));
            assert!((prob.power(&sol.f_star) - prob.p_eh).abs() <= 1e-8 * prob.p_eh);
            let s = prob.lifted.b_vec.dotc(&sol.f_star);
            assert!(s.im.abs() <= 1e-12 * s.norm() && s.re >= 0.0);
        }
    }

    #[test]
    fn closed_form_beats_random_boundary_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for seed in 0..3 {
            let (_, _, prob) = instance(100 + seed, 2, 0.5);
            let sol = solve_inner_closed(&prob).unwrap();
            let best = sampled_best(&prob, &mut rng, 100_000);
            assert!(sol.ratio_value >= best * (1.0 - 1e-12));
        }
    }

    #[test]
    fn full_split_and_zero_budget() {
        let (_, _, prob) = instance(3, 2, 1.0);
        let sol = solve_inner_closed(&prob).unwrap();
        assert_eq!(sol.ratio_value, 0.0);
        assert!(prob.power(&sol.f_star) <= prob.p_eh * (1.0 + 1e-8));
        let sdr = solve_inner_sdr(&prob, 1e-9).unwrap();
        assert!(sdr.ratio_value.abs() < 1e-12);

        let (_, _, prob) = instance(3, 2, 0.0);
        assert_eq!(prob.p_eh, 0.0);
        let sol = solve_inner_closed(&prob).unwrap();
        assert!(sol.degenerate);
        assert_eq!(sol.ratio_value, 0.0);
        assert_eq!(sol.f_star.norm(), 0.0);
    }

    #[test]
    fn charnes_cooper_correspondence() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let (_, _, prob) = instance(8, 2, 0.35);
        let sdp = assemble_cc_sdp(&prob);
        // Z = 0, ξ = 1/σ² is feasible
        let (obj, eq, ineq) = sdp.evaluate(&CMatrix::zeros(4, 4), 1.0 / prob.sigma2);
        assert_eq!(obj, 0.0);
        assert!(eq.abs() < 1e-15);
        assert!(ineq <= 0.0);
        for _ in 0..20 {
            let d = complex_gaussian_vector(&mut rng, 4, 1.0);
            let f = d.scale((rng.random_range(0.1..1.0) * prob.p_eh / prob.power(&d)).sqrt());
            let den = quad_form(&f, &sdp.ce) + prob.sigma2;
            let z = (&f * f.adjoint()).unscale(den);
            let xi = 1.0 / den;
            let (obj, eq, ineq) = sdp.evaluate(&z, xi);
            assert!(eq.abs() < 1e-12);
            assert!(ineq <= 1e-12 * prob.p_eh);
            assert!((obj - prob.ratio(&f)).abs() <= 1e-12 * obj);
            // X = Z/ξ reproduces the fractional relaxation objective
            let x = z.unscale(xi);
            let frac = (&sdp.b * &x).trace().re / ((&sdp.ce * &x).trace().re + prob.sigma2);
            assert!((frac - obj).abs() <= 1e-12 * obj);
        }
    }

    #[test]
    fn sdp_matches_closed_form_and_scales_with_b() {
        for seed in 0..10 {
            let n = 1 + (seed as usize) % 3;
            let (_, _, prob) = instance(200 + seed, n, 0.15 + 0.07 * seed as f64);
            let closed = solve_inner_closed(&prob).unwrap();
            let sdp = assemble_cc_sdp(&prob);
            let sol = solve_sdp(&sdp, 1e-9).unwrap();
            assert!((sol.objective - closed.ratio_value).abs() <= 1e-5 * closed.ratio_value);
            let (_, eq, ineq) = sdp.evaluate(&sol.z, sol.xi);
            assert!(eq.abs() <= 1e-7);
            assert!(ineq <= 1e-7);
            assert!(min_eigenvalue(&sol.z) >= -1e-8 * sol.z.trace().re);

            let scaled = SdpProblem {
                b: sdp.b.scale(10.0),
                ..sdp.clone()
            };
            let s2 = solve_sdp(&scaled, 1e-9).unwrap();
            assert!((s2.objective - 10.0 * sol.objective).abs() <= 1e-6 * s2.objective);
        }
    }

    #[test]
    fn sdp_with_zero_objective() {
        let (_, _, prob) = instance(5, 2, 1.0);
        let sol = solve_sdp(&assemble_cc_sdp(&prob), 1e-9).unwrap();
        assert!(sol.objective.abs() < 1e-12);
    }

    #[test]
    fn sdr_route_agrees_with_closed_form() {
        for seed in 0..30 {
            let n = 1 + (seed as usize) % 3;
            let (params, _, prob) = instance(300 + seed, n, 0.1 + 0.8 * (seed as f64 / 30.0));
            let closed = solve_inner_closed(&prob).unwrap();
            let sdr = solve_inner_sdr(&prob, 1e-9).unwrap();
            assert_eq!(sdr.route, InnerRoute::Sdr);
            assert!(
                (sdr.ratio_value - closed.ratio_value).abs() <= 1e-5 * closed.ratio_value,
                "seed {seed}: {} vs {}",
                sdr.ratio_value,
                closed.ratio_value
            );
            assert!(sdr.ratio_value >= (1.0 - 1e-5) * sdr.sdp_objective.unwrap());
            assert!(prob.power(&sdr.f_star) <= prob.p_eh * (1.0 + 1e-8));
            let bf = Beamformer::from_vec(n, &sdr.f_star).unwrap();
            assert!(check_beamformer(&bf, &params).is_ok());
        }
    }
}
