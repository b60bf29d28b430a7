//! The splitting-ratio block: objective and derivative in ρ for a fixed
//! beamformer, the feasible ρ interval, and the exact ρ update.

use super::roots::{scan_roots, ROOT_SCAN_SAMPLES};
use super::AlgorithmError;
use crate::linalg::norm_sqr;
use crate::model::{t_factors, Beamformer, ChannelSet, ChannelTerms, PsRatio, SystemParams};

/// Breakdown of `∂f/∂ρ = ∂f₁/∂ρ · f₂ + ∂f₂/∂ρ · f₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeParts {
    pub df: f64,
    pub f1: f64,
    pub f2: f64,
    pub t: f64,
    pub df1: f64,
    pub df2: f64,
    pub dt: f64,
    pub m: f64,
    pub n: f64,
    pub dm: f64,
    pub dn: f64,
}

/// Scalar summary of `f(ρ, F)` for a fixed `F`: every ρ-dependence reduces
/// to a handful of quadratic forms computed once.
#[derive(Debug, Clone, Copy)]
pub struct RhoProfile {
    p_s: f64,
    p_d: f64,
    sigma2: f64,
    terms: ChannelTerms,
    /// `|h_rdᴴ F h_sr|²`
    qb0: f64,
    /// `‖Fᴴ h_rd‖²`
    q_fwd: f64,
}

impl RhoProfile {
    /// Requires a common noise variance.
    pub fn new(bf: &Beamformer, params: &SystemParams, ch: &ChannelSet) -> Result<Self, AlgorithmError> {
        let sigma2 = params.common_noise()?;
        bf.check(params)?;
        let f = bf.matrix();
        Ok(Self {
            p_s: params.p_s,
            p_d: params.p_d,
            sigma2,
            terms: ChannelTerms::new(ch),
            qb0: ch.h_rd.dotc(&(f * &ch.h_sr)).norm_sqr(),
            q_fwd: norm_sqr(&(f.adjoint() * &ch.h_rd)),
        })
    }

    /// `f(ρ) = f₁(ρ) / t(ρ)` on the closed interval `[0, 1]`.
    pub fn value(&self, rho: f64) -> f64 {
        let (f1, t, _) = self.f1_t(rho);
        f1 / t
    }

    fn f1_t(&self, rho: f64) -> (f64, f64, (f64, f64)) {
        let keep = 1.0 - rho;
        let s2 = self.sigma2;
        let num = keep * self.p_s * self.qb0;
        let den = (keep * s2 + s2) * self.q_fwd + s2;
        let fac = t_factors(rho, self.p_s, self.p_d, s2, &self.terms);
        (1.0 + num / den, 1.0 + fac.m * fac.n, (fac.m, fac.n))
    }

    /// Analytic derivative. Finite on all of `[0, 1]`; the public
    /// [`objective_drho`] restricts to the open interval.
    pub fn derivative(&self, rho: f64) -> DerivativeParts {
        let (f1, t, (m, n)) = self.f1_t(rho);
        let s2 = self.sigma2;
        let keep = 1.0 - rho;
        let qc = keep * s2 * self.q_fwd;
        let qe = s2 * self.q_fwd;
        let den = qc + qe + s2;
        let df1 = -self.p_s * self.qb0 * (qe + s2) / (den * den);

        let d = (2.0 - rho) * s2 + keep * self.p_d * self.terms.hdr2;
        let dn = -self.p_s * s2 / (d * d);
        let dm = self.p_d * (self.terms.cross2 - self.terms.hdr2 * self.terms.hsr2) / ((2.0 - rho).powi(2) * s2);
        let dt = dn * m + dm * n;
        let f2 = 1.0 / t;
        let df2 = -dt / (t * t);
        DerivativeParts {
            df: df1 * f2 + df2 * f1,
            f1,
            f2,
            t,
            df1,
            df2,
            dt,
            m,
            n,
            dm,
            dn,
        }
    }
}

/// `∂f/∂ρ` at an interior ρ for a fixed beamformer.
pub fn objective_drho(
    rho: PsRatio,
    bf: &Beamformer,
    params: &SystemParams,
    ch: &ChannelSet,
) -> Result<(f64, DerivativeParts), AlgorithmError> {
    if rho.is_endpoint() {
        return Err(AlgorithmError::EndpointRho(rho.value()));
    }
    let parts = RhoProfile::new(bf, params, ch)?.derivative(rho.value());
    Ok((parts.df, parts))
}

/// Smallest ρ at which `F` fits the harvested budget. The relay power is
/// `(1-ρ)a + b` and the budget is `ρc`, so the feasible set is
/// `[(a+b)/(a+c), 1]`. Values above 1 mean `F` never fits.
pub fn feasible_rho_min(bf: &Beamformer, params: &SystemParams, ch: &ChannelSet) -> f64 {
    if bf.is_zero() {
        return 0.0;
    }
    let f = bf.matrix();
    let fro2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let a = params.p_s * norm_sqr(&(f * &ch.h_sr)) + params.p_d * norm_sqr(&(f * &ch.h_dr)) + params.sigma_r2 * fro2;
    let b = params.sigma_c2 * fro2;
    let c = params.eta
        * (params.p_s * norm_sqr(&ch.h_sr) + params.p_d * norm_sqr(&ch.h_dr) + params.sigma_r2 * ch.n_r() as f64);
    (a + b) / (a + c)
}

/// Outcome of the exact ρ update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoStep {
    pub rho: PsRatio,
    /// `f(ρ, F)` at the returned ρ.
    pub value: f64,
    pub rho_min: f64,
    /// Interior derivative roots found.
    pub roots: usize,
}

/// Maximizes `f(ρ, F)` over the feasible interval `[ρ_min, 1]`: scans the
/// derivative for sign changes, bisects each, and compares every root with
/// both endpoints.
pub fn rho_subproblem(bf: &Beamformer, params: &SystemParams, ch: &ChannelSet) -> Result<RhoStep, AlgorithmError> {
    maximize_rho(bf, params, ch, true)
}

/// The ρ block of the local algorithm. Same search as [`rho_subproblem`]
/// but ρ = 1 is never a candidate: it forwards nothing decodable, so its
/// objective is pinned at 1 (zero secrecy) and a poor `F` would otherwise
/// park the iteration there for good. Without an interior root the
/// constraint boundary `ρ_min` is returned.
pub fn rho_update(bf: &Beamformer, params: &SystemParams, ch: &ChannelSet) -> Result<RhoStep, AlgorithmError> {
    maximize_rho(bf, params, ch, false)
}

fn maximize_rho(
    bf: &Beamformer,
    params: &SystemParams,
    ch: &ChannelSet,
    include_one: bool,
) -> Result<RhoStep, AlgorithmError> {
    let rho_min = feasible_rho_min(bf, params, ch);
    if !(rho_min < 1.0) {
        return Err(AlgorithmError::Infeasible { rho_min });
    }
    let profile = RhoProfile::new(bf, params, ch)?;
    let lo = rho_min.max(0.0);
    let roots: Vec<f64> = scan_roots(&|r| profile.derivative(r).df, lo, 1.0, ROOT_SCAN_SAMPLES)
        .into_iter()
        .filter(|&r| r < 1.0)
        .collect();

    let mut best = (lo, profile.value(lo));
    let upper = include_one.then_some(1.0);
    for r in roots.iter().copied().chain(upper) {
        let v = profile.value(r);
        if v > best.1 {
            best = (r, v);
        }
    }
    Ok(RhoStep {
        rho: PsRatio::new(best.0)?,
        value: best.1,
        rho_min,
        roots: roots.len(),
    })
}
