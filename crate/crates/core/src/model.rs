//! System model of the wireless-powered untrusted relay link.
//!
//! A source `S` sends to a destination `D` through an untrusted
//! amplify-and-forward relay `R` with `n_r` antennas. While `S` transmits,
//! `D` jams the relay with artificial noise. The relay splits the received
//! power: a fraction `ρ` is harvested and powers the second hop, the rest is
//! processed by the relay matrix `F` and forwarded.
//!
//! Every quantity here is a closed-form function of its inputs. Powers are
//! linear milliwatts throughout; dBm only appears at I/O boundaries through
//! [`dbm_to_mw`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::linalg::{hermitian_part, norm_sqr, outer, quad_form, solve_hpd, CMatrix, CVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("channel `{field}` has length {got}, expected {expected}")]
    ChannelLength {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("channel `{0}` has non-finite entries")]
    NonFiniteChannel(&'static str),
    #[error("power-splitting ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("requires equal noise variances (sigma_r2 = sigma_c2 = sigma_d2)")]
    UnequalNoise,
    #[error("beamformer dimension {got} does not match relay antenna count {expected}")]
    BeamformerSize { expected: usize, got: usize },
}

/// Converts a power in dBm to milliwatts.
pub fn dbm_to_mw(p_dbm: f64) -> f64 {
    10f64.powf(p_dbm / 10.0)
}

/// Converts a power in milliwatts to dBm.
pub fn mw_to_dbm(p_mw: f64) -> f64 {
    10.0 * p_mw.log10()
}

/// Transmit powers, noise variances and relay hardware constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Source transmit power, mW.
    pub p_s: f64,
    /// Destination artificial-noise power, mW.
    pub p_d: f64,
    /// Relay antenna noise variance, mW.
    pub sigma_r2: f64,
    /// Passband-to-baseband conversion noise variance at the relay, mW.
    pub sigma_c2: f64,
    /// Destination receiver noise variance, mW.
    pub sigma_d2: f64,
    /// Energy conversion efficiency in (0, 1].
    pub eta: f64,
    /// Relay antenna count.
    pub n_r: usize,
}

impl SystemParams {
    pub fn new(
        p_s: f64,
        p_d: f64,
        sigma_r2: f64,
        sigma_c2: f64,
        sigma_d2: f64,
        eta: f64,
        n_r: usize,
    ) -> Result<Self, ModelError> {
        let params = Self {
            p_s,
            p_d,
            sigma_r2,
            sigma_c2,
            sigma_d2,
            eta,
            n_r,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with one common noise variance at every receiver.
    pub fn with_common_noise(
        p_s: f64,
        p_d: f64,
        sigma2: f64,
        eta: f64,
        n_r: usize,
    ) -> Result<Self, ModelError> {
        Self::new(p_s, p_d, sigma2, sigma2, sigma2, eta, n_r)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        fn bad(field: &'static str, reason: &str) -> ModelError {
            ModelError::InvalidParameter {
                field,
                reason: reason.to_string(),
            }
        }
        if !(self.p_s.is_finite() && self.p_s > 0.0) {
            return Err(bad("p_s", "must be finite and > 0"));
        }
        if !(self.p_d.is_finite() && self.p_d >= 0.0) {
            return Err(bad("p_d", "must be finite and >= 0"));
        }
        for (field, v) in [
            ("sigma_r2", self.sigma_r2),
            ("sigma_c2", self.sigma_c2),
            ("sigma_d2", self.sigma_d2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(field, "must be finite and > 0"));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(bad("eta", "must lie in (0, 1]"));
        }
        if self.n_r == 0 {
            return Err(bad("n_r", "must be at least 1"));
        }
        Ok(())
    }

    /// True iff all three noise variances are identical.
    pub fn equal_noise(&self) -> bool {
        self.sigma_r2 == self.sigma_c2 && self.sigma_c2 == self.sigma_d2
    }

    /// The common noise variance, or an error when the variances differ.
    pub fn common_noise(&self) -> Result<f64, ModelError> {
        if self.equal_noise() {
            Ok(self.sigma_r2)
        } else {
            Err(ModelError::UnequalNoise)
        }
    }
}

/// The three relay-side channel vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Source to relay.
    pub h_sr: CVector,
    /// Destination to relay.
    pub h_dr: CVector,
    /// Relay to destination.
    pub h_rd: CVector,
}

impl ChannelSet {
    pub fn new(h_sr: CVector, h_dr: CVector, h_rd: CVector) -> Result<Self, ModelError> {
        let n = h_sr.len();
        if n == 0 {
            return Err(ModelError::ChannelLength {
                field: "h_sr",
                expected: 1,
                got: 0,
            });
        }
        for (field, v) in [("h_dr", &h_dr), ("h_rd", &h_rd)] {
            if v.len() != n {
                return Err(ModelError::ChannelLength {
                    field,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for (field, v) in [("h_sr", &h_sr), ("h_dr", &h_dr), ("h_rd", &h_rd)] {
            if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(ModelError::NonFiniteChannel(field));
            }
        }
        Ok(Self { h_sr, h_dr, h_rd })
    }

    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_pairs(
        h_sr: &[(f64, f64)],
        h_dr: &[(f64, f64)],
        h_rd: &[(f64, f64)],
    ) -> Result<Self, ModelError> {
        let conv = |v: &[(f64, f64)]| {
            CVector::from_iterator(v.len(), v.iter().map(|&(re, im)| Complex64::new(re, im)))
        };
        Self::new(conv(h_sr), conv(h_dr), conv(h_rd))
    }

    pub fn n_r(&self) -> usize {
        self.h_sr.len()
    }

    pub fn check_params(&self, params: &SystemParams) -> Result<(), ModelError> {
        if self.n_r() != params.n_r {
            return Err(ModelError::ChannelLength {
                field: "h_sr",
                expected: params.n_r,
                got: self.n_r(),
            });
        }
        Ok(())
    }
}

/// Power-splitting ratio: the fraction of received power sent to the
/// energy harvester.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PsRatio(f64);

impl PsRatio {
    pub const ZERO: PsRatio = PsRatio(0.0);
    pub const ONE: PsRatio = PsRatio(1.0);

    pub fn new(rho: f64) -> Result<Self, ModelError> {
        if (0.0..=1.0).contains(&rho) {
            Ok(Self(rho))
        } else {
            Err(ModelError::RatioOutOfRange(rho))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Fraction kept for information processing, `1 - ρ`.
    pub fn info_fraction(self) -> f64 {
        1.0 - self.0
    }

    pub fn is_endpoint(self) -> bool {
        self.0 == 0.0 || self.0 == 1.0
    }
}

impl TryFrom<f64> for PsRatio {
    type Error = ModelError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        PsRatio::new(v)
    }
}

impl From<PsRatio> for f64 {
    fn from(r: PsRatio) -> f64 {
        r.0
    }
}

impl fmt::Display for PsRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Relay processing matrix `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    matrix: CMatrix,
}

impl Beamformer {
    pub fn new(matrix: CMatrix) -> Result<Self, ModelError> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(ModelError::BeamformerSize {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn zeros(n_r: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(n_r, n_r),
        }
    }

    /// Inverse of [`Beamformer::vec`]: column-major reshape of a length
    /// `n_r²` vector.
    pub fn from_vec(n_r: usize, f: &CVector) -> Result<Self, ModelError> {
        if f.len() != n_r * n_r {
            return Err(ModelError::BeamformerSize {
                expected: n_r * n_r,
                got: f.len(),
            });
        }
        Ok(Self {
            matrix: CMatrix::from_column_slice(n_r, n_r, f.as_slice()),
        })
    }

    /// Column-stacked `vec(F)`, so that `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
    pub fn vec(&self) -> CVector {
        CVector::from_column_slice(self.matrix.as_slice())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_r(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            matrix: self.matrix.scale(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub(crate) fn check(&self, params: &SystemParams) -> Result<(), ModelError> {
        if self.n_r() != params.n_r {
            return Err(ModelError::BeamformerSize {
                expected: params.n_r,
                got: self.n_r(),
            });
        }
        Ok(())
    }
}

/// `A(ρ) = (1-ρ)P_d h_dr h_drᴴ + ((1-ρ)σ_r² + σ_c²) I`, the covariance of
/// everything except the source signal at the relay's information branch.
pub fn matrix_a(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> CMatrix {
    let keep = rho.info_fraction();
    let n = ch.n_r();
    let diag = keep * params.sigma_r2 + params.sigma_c2;
    let mut a = outer(&ch.h_dr).scale(keep * params.p_d);
    for i in 0..n {
        a[(i, i)] += Complex64::new(diag, 0.0);
    }
    hermitian_part(&a)
}

/// Closed-form `A⁻¹(ρ)` via the Sherman–Morrison–Woodbury identity. Only
/// valid when all noise variances share a common value `σ²`.
pub fn inverse_a_smw(
    rho: PsRatio,
    params: &SystemParams,
    ch: &ChannelSet,
) -> Result<CMatrix, ModelError> {
    let sigma2 = params.common_noise()?;
    let r = rho.value();
    let hdr2 = norm_sqr(&ch.h_dr);
    let base = (2.0 - r) * sigma2;
    let k = (1.0 - r) / base * params.p_d;
    let n = ch.n_r();
    let mut inv = outer(&ch.h_dr).scale(-k);
    for i in 0..n {
        inv[(i, i)] += Complex64::new(1.0 + k * hdr2, 0.0);
    }
    let denom = base + (1.0 - r) * params.p_d * hdr2;
    Ok(hermitian_part(&inv.unscale(denom)))
}

/// `h_srᴴ A⁻¹(ρ) h_sr` by a dense positive-definite solve.
fn hsr_ainv_hsr(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> f64 {
    let a = matrix_a(rho, params, ch);
    let x = solve_hpd(&a, &ch.h_sr).expect("A(rho) is positive definite when sigma_c2 > 0");
    ch.h_sr.dotc(&x).re
}

/// Information rate leaked to the untrusted relay, bits/s/Hz.
pub fn relay_rate(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> f64 {
    if rho.value() == 1.0 {
        return 0.0;
    }
    let sinr = rho.info_fraction() * params.p_s * hsr_ainv_hsr(rho, params, ch);
    (1.0 + sinr.max(0.0)).log2()
}

/// Power harvested at the relay, mW.
pub fn harvested_power(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> f64 {
    params.eta
        * rho.value()
        * (params.p_s * norm_sqr(&ch.h_sr)
            + params.p_d * norm_sqr(&ch.h_dr)
            + params.sigma_r2 * ch.n_r() as f64)
}

/// Destination rate after self-interference (its own AN) cancellation.
pub fn destination_rate(
    bf: &Beamformer,
    rho: PsRatio,
    params: &SystemParams,
    ch: &ChannelSet,
) -> f64 {
    let f = bf.matrix();
    let keep = rho.info_fraction();
    let signal = ch.h_rd.dotc(&(f * &ch.h_sr)).norm_sqr();
    let numer = keep * params.p_s * signal;
    if numer == 0.0 {
        return 0.0;
    }
    let fwd_noise = norm_sqr(&(f.adjoint() * &ch.h_rd));
    let denom = (keep * params.sigma_r2 + params.sigma_c2) * fwd_noise + params.sigma_d2;
    (1.0 + numer / denom).log2()
}

/// Two-slot secrecy rate `½[R_d - R_r]⁺`.
pub fn secrecy_rate(bf: &Beamformer, rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> f64 {
    let diff = destination_rate(bf, rho, params, ch) - relay_rate(rho, params, ch);
    0.5 * diff.max(0.0)
}

/// Left-hand side of the relay power constraint: total power the relay
/// spends forwarding with matrix `F`.
pub fn relay_power_used(
    bf: &Beamformer,
    rho: PsRatio,
    params: &SystemParams,
    ch: &ChannelSet,
) -> f64 {
    let f = bf.matrix();
    let keep = rho.info_fraction();
    let fro2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    keep * params.p_s * norm_sqr(&(f * &ch.h_sr))
        + keep * params.p_d * norm_sqr(&(f * &ch.h_dr))
        + (keep * params.sigma_r2 + params.sigma_c2) * fro2
}

/// Kronecker-lifted Hermitian forms in `f = vec(F)`.
///
/// With `b = conj(h_sr) ⊗ h_rd`:
/// `fᴴBf = (1-ρ)P_s|h_rdᴴ F h_sr|²`, `fᴴCf = (1-ρ)σ_r²‖Fᴴh_rd‖²`,
/// `fᴴEf = σ_c²‖Fᴴh_rd‖²`, and `fᴴTf` is the relay power.
#[derive(Debug, Clone)]
pub struct LiftedMatrices {
    pub rho: PsRatio,
    pub b: CMatrix,
    pub c: CMatrix,
    pub e: CMatrix,
    pub g: CMatrix,
    pub j: CMatrix,
    pub t: CMatrix,
    /// Rank-one generator of `B`, `conj(h_sr) ⊗ h_rd`.
    pub b_vec: CVector,
}

impl LiftedMatrices {
    /// `C + E`, the noise part of the destination SINR denominator.
    pub fn noise_form(&self) -> CMatrix {
        &self.c + &self.e
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }
}

pub fn lifted_matrices(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> LiftedMatrices {
    let n = ch.n_r();
    let keep = rho.info_fraction();
    let eye_n = CMatrix::identity(n, n);
    let eye_f = CMatrix::identity(n * n, n * n);

    let rd_outer = outer(&ch.h_rd);
    let i_kron_rd = eye_n.kronecker(&rd_outer);
    let b_vec = ch.h_sr.map(|z| z.conj()).kronecker(&ch.h_rd);

    let b = hermitian_part(&outer(&b_vec).scale(params.p_s * keep));
    let c = hermitian_part(&i_kron_rd.scale(keep * params.sigma_r2));
    let e = hermitian_part(&i_kron_rd.scale(params.sigma_c2));
    let g = hermitian_part(&outer(&ch.h_sr).transpose().kronecker(&eye_n).scale(keep * params.p_s));
    let j = hermitian_part(&outer(&ch.h_dr).transpose().kronecker(&eye_n).scale(keep * params.p_d));
    let t = hermitian_part(&(&g + &j + eye_f.scale(keep * params.sigma_r2 + params.sigma_c2)));

    LiftedMatrices {
        rho,
        b,
        c,
        e,
        g,
        j,
        t,
        b_vec,
    }
}

/// Appendix-style factorization `t(ρ) = 1 + m·n` of the relay SINR term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TFactors {
    pub m: f64,
    pub n: f64,
}

/// Decomposition of the joint objective `f = f₁ · f₂` with `f₂ = 1/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    /// `1 + SINR_d`.
    pub f1: f64,
    /// `1 / t`.
    pub f2: f64,
    /// `1 + SINR_r`.
    pub t: f64,
    /// Present when the parameters have a common noise variance.
    pub factors: Option<TFactors>,
}

/// Channel scalars entering `t(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTerms {
    /// `‖h_sr‖²`
    pub hsr2: f64,
    /// `‖h_dr‖²`
    pub hdr2: f64,
    /// `|h_srᴴ h_dr|²`
    pub cross2: f64,
}

impl ChannelTerms {
    pub fn new(ch: &ChannelSet) -> Self {
        Self {
            hsr2: norm_sqr(&ch.h_sr),
            hdr2: norm_sqr(&ch.h_dr),
            cross2: ch.h_sr.dotc(&ch.h_dr).norm_sqr(),
        }
    }
}

/// `m(ρ)` and `n(ρ)` with `t(ρ) = 1 + m n` under a common noise variance.
pub fn t_factors(rho: f64, p_s: f64, p_d: f64, sigma2: f64, terms: &ChannelTerms) -> TFactors {
    let keep = 1.0 - rho;
    let base = (2.0 - rho) * sigma2;
    let k = keep / base * p_d;
    let m = terms.hsr2 + k * terms.hdr2 * terms.hsr2 - k * terms.cross2;
    let n = keep * p_s / (base + keep * p_d * terms.hdr2);
    TFactors { m, n }
}

/// `t(ρ) = 1 + (1-ρ)P_s h_srᴴ A⁻¹(ρ) h_sr`, with its Appendix factors when
/// the noise variances coincide.
pub fn t_of_rho(rho: PsRatio, params: &SystemParams, ch: &ChannelSet) -> (f64, Option<TFactors>) {
    if rho.value() == 1.0 {
        return (1.0, None);
    }
    match params.common_noise() {
        Ok(sigma2) => {
            let fac = t_factors(rho.value(), params.p_s, params.p_d, sigma2, &ChannelTerms::new(ch));
            (1.0 + fac.m * fac.n, Some(fac))
        }
        Err(_) => {
            let q = hsr_ainv_hsr(rho, params, ch);
            (1.0 + rho.info_fraction() * params.p_s * q, None)
        }
    }
}

/// The unclamped joint objective `f(ρ, f) = f₁ · f₂ = 2^(R_d - R_r)`,
/// evaluated through the lifted quadratic forms.
pub fn objective(
    rho: PsRatio,
    bf: &Beamformer,
    params: &SystemParams,
    ch: &ChannelSet,
) -> (f64, ObjectiveParts) {
    debug_assert!(bf.check(params).is_ok());
    let lifted = lifted_matrices(rho, params, ch);
    objective_lifted(&lifted, &bf.vec(), params, ch)
}

/// Objective for a vectorized beamformer against precomputed lifted forms.
pub fn objective_lifted(
    lifted: &LiftedMatrices,
    f: &CVector,
    params: &SystemParams,
    ch: &ChannelSet,
) -> (f64, ObjectiveParts) {
    let num = quad_form(f, &lifted.b).max(0.0);
    let den = quad_form(f, &lifted.c) + quad_form(f, &lifted.e) + params.sigma_d2;
    let f1 = 1.0 + num / den;
    let (t, factors) = t_of_rho(lifted.rho, params, ch);
    let f2 = 1.0 / t;
    (f1 * f2, ObjectiveParts { f1, f2, t, factors })
}

/// Secrecy rate implied by an objective value, `½[log₂ f]⁺`.
pub fn secrecy_from_objective(value: f64) -> f64 {
    0.5 * value.log2().max(0.0)
}

/// Validates that a beamformer matches the parameter set.
pub fn check_beamformer(bf: &Beamformer, params: &SystemParams) -> Result<(), ModelError> {
    bf.check(params)
}
