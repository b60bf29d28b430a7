//! Single-antenna relay. The relay gain is pinned by the harvested budget,
//! `α² = P_EH / ((1-ρ)K + σ_c²)` with `K = P_s|h_sr|² + P_d|h_dr|² + σ_r²`,
//! so the secrecy rate is a scalar function of ρ.

use std::f64::consts::LN_2;
use std::time::Instant;

use num_complex::Complex64;

use super::roots::{scan_roots, ROOT_SCAN_SAMPLES};
use super::{check_inputs, AlgorithmError, Diagnostics, SolveResult};
use crate::linalg::CMatrix;
use crate::model::{Beamformer, ChannelSet, PsRatio, SystemParams};

/// One `(ρ, R_sr, dR_sr/dρ)` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub rho: f64,
    pub r_sr: f64,
    pub dr_sr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAntennaModel {
    p_s: f64,
    sr2: f64,
    rd2: f64,
    dr2: f64,
    p_d: f64,
    sigma_r2: f64,
    sigma_c2: f64,
    sigma_d2: f64,
    eta: f64,
    k: f64,
}

struct Snr {
    d: f64,
    dd: f64,
    r: f64,
    dr: f64,
}

impl SingleAntennaModel {
    pub fn new(params: &SystemParams, ch: &ChannelSet) -> Result<Self, AlgorithmError> {
        check_inputs(params, ch)?;
        if ch.n_r() != 1 {
            return Err(AlgorithmError::NotSingleAntenna(ch.n_r()));
        }
        let sr2 = ch.h_sr[0].norm_sqr();
        let dr2 = ch.h_dr[0].norm_sqr();
        Ok(Self {
            p_s: params.p_s,
            sr2,
            rd2: ch.h_rd[0].norm_sqr(),
            dr2,
            p_d: params.p_d,
            sigma_r2: params.sigma_r2,
            sigma_c2: params.sigma_c2,
            sigma_d2: params.sigma_d2,
            eta: params.eta,
            k: params.p_s * sr2 + params.p_d * dr2 + params.sigma_r2,
        })
    }

    /// Relay gain `α²` at `rho`.
    pub fn gain(&self, rho: f64) -> f64 {
        self.eta * rho * self.k / ((1.0 - rho) * self.k + self.sigma_c2)
    }

    fn snr(&self, rho: f64) -> Snr {
        let keep = 1.0 - rho;
        let den_a = keep * self.k + self.sigma_c2;
        let a = self.eta * rho * self.k / den_a;
        let da = self.eta * self.k * (self.k + self.sigma_c2) / (den_a * den_a);

        let g = self.rd2 * self.sr2;
        let nd = a * keep * self.p_s * g;
        let dnd = self.p_s * g * (da * keep - a);
        let noise = keep * self.sigma_r2 + self.sigma_c2;
        let dd_ = a * self.rd2 * noise + self.sigma_d2;
        let ddd = self.rd2 * (da * noise - a * self.sigma_r2);

        let u = self.p_s * self.sr2;
        let dr_ = keep * (self.p_d * self.dr2 + self.sigma_r2) + self.sigma_c2;
        Snr {
            d: nd / dd_,
            dd: (dnd * dd_ - nd * ddd) / (dd_ * dd_),
            r: keep * u / dr_,
            dr: -u * self.sigma_c2 / (dr_ * dr_),
        }
    }

    /// `½(R_d - R_r)` before clamping.
    pub fn rate_gap(&self, rho: f64) -> f64 {
        let s = self.snr(rho);
        0.5 * ((1.0 + s.d).log2() - (1.0 + s.r).log2())
    }

    /// Analytic derivative of [`rate_gap`](Self::rate_gap).
    pub fn rate_gap_derivative(&self, rho: f64) -> f64 {
        let s = self.snr(rho);
        0.5 * (s.dd / (1.0 + s.d) - s.dr / (1.0 + s.r)) / LN_2
    }

    pub fn secrecy_rate(&self, rho: f64) -> f64 {
        self.rate_gap(rho).max(0.0)
    }

    /// Sample at `rho`; the derivative is that of the clamped rate.
    pub fn trace_point(&self, rho: f64) -> TracePoint {
        let gap = self.rate_gap(rho);
        TracePoint {
            rho,
            r_sr: gap.max(0.0),
            dr_sr: if gap > 0.0 { self.rate_gap_derivative(rho) } else { 0.0 },
        }
    }

    /// Uniform trace over `[0, 1]` with `n_points` samples.
    pub fn trace(&self, n_points: usize) -> Vec<TracePoint> {
        let last = n_points.saturating_sub(1).max(1) as f64;
        (0..n_points).map(|i| self.trace_point(i as f64 / last)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleAntennaResult {
    pub solve: SolveResult,
    /// Interior derivative roots found by the scan.
    pub roots: Vec<f64>,
    /// The scan samples.
    pub trace: Vec<TracePoint>,
}

/// Locates every interior root of `dR_sr/dρ` and keeps the one with the
/// largest secrecy rate. Without a root of positive rate the result is the
/// zero-rate point `ρ = 1`, `F = 0`.
pub fn single_antenna_optimize(params: &SystemParams, ch: &ChannelSet) -> Result<SingleAntennaResult, AlgorithmError> {
    let start = Instant::now();
    let model = SingleAntennaModel::new(params, ch)?;
    let roots = scan_roots(&|r| model.rate_gap_derivative(r), 0.0, 1.0, ROOT_SCAN_SAMPLES);
    let best = roots
        .iter()
        .map(|&r| (r, model.rate_gap(r)))
        .filter(|&(r, gap)| gap > 0.0 && r > 0.0 && r < 1.0)
        .max_by(|a, b| a.1.total_cmp(&b.1));

    let (rho, f, objective) = match best {
        Some((r, gap)) => {
            let alpha = model.gain(r).sqrt();
            let f = Beamformer::new(CMatrix::from_element(1, 1, Complex64::new(alpha, 0.0)))?;
            (PsRatio::new(r)?, f, 2f64.powf(2.0 * gap))
        }
        None => (PsRatio::ONE, Beamformer::zeros(1), 1.0),
    };
    let trace = (0..=ROOT_SCAN_SAMPLES)
        .map(|i| model.trace_point(i as f64 / ROOT_SCAN_SAMPLES as f64))
        .collect();
    let diagnostics = Diagnostics {
        iterations: ROOT_SCAN_SAMPLES + 1,
        wall_time: start.elapsed(),
        ..Diagnostics::default()
    };
    Ok(SingleAntennaResult {
        solve: SolveResult::new(rho, f, objective, diagnostics),
        roots,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{destination_rate, harvested_power, relay_power_used, relay_rate, secrecy_rate};
    use crate::sampling::random_channels;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (SystemParams, ChannelSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = SystemParams::with_common_noise(1e4, 1e4, 1.0, 1.0, 1).unwrap();
        (params, random_channels(&mut rng, 1, 1.0))
    }

    #[test]
    fn matches_general_model() {
        for seed in 0..20 {
            let (params, ch) = setup(seed);
            let model = SingleAntennaModel::new(&params, &ch).unwrap();
            for r in [0.1, 0.4, 0.8] {
                let rho = PsRatio::new(r).unwrap();
                let alpha = model.gain(r).sqrt();
                let bf = Beamformer::new(CMatrix::from_element(1, 1, Complex64::new(alpha, 0.0))).unwrap();
                let want = 0.5 * (destination_rate(&bf, rho, &params, &ch) - relay_rate(rho, &params, &ch));
                assert!((model.rate_gap(r) - want).abs() < 1e-10);
                // the gain saturates the budget
                let used = relay_power_used(&bf, rho, &params, &ch);
                assert!((used - harvested_power(rho, &params, &ch)).abs() <= 1e-10 * used);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for seed in 0..50 {
            let (params, ch) = setup(100 + seed);
            let model = SingleAntennaModel::new(&params, &ch).unwrap();
            for i in 1..20 {
                let r = i as f64 / 20.0;
                let h = 1e-6;
                let fd = (model.rate_gap(r + h) - model.rate_gap(r - h)) / (2.0 * h);
                let d = model.rate_gap_derivative(r);
                assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{d} vs {fd}");
            }
        }
    }

    #[test]
    fn optimum_matches_dense_grid() {
        for seed in 0..10 {
            let (params, ch) = setup(200 + seed);
            let res = single_antenna_optimize(&params, &ch).unwrap();
            let model = SingleAntennaModel::new(&params, &ch).unwrap();
            let n = 100_000;
            let (gr, gv) = (0..=n)
                .map(|i| i as f64 / n as f64)
                .map(|r| (r, model.secrecy_rate(r)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if gv > 0.0 {
                assert!((res.solve.rho_star.value() - gr).abs() <= 1e-3);
            }
            assert!(res.solve.secrecy_rate >= gv - 1e-12);
            let direct = secrecy_rate(&res.solve.f_star, res.solve.rho_star, &params, &ch);
            assert!((direct - res.solve.secrecy_rate).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_destination_gives_zero() {
        let (params, mut ch) = setup(3);
        ch.h_rd[0] = Complex64::new(0.0, 0.0);
        let res = single_antenna_optimize(&params, &ch).unwrap();
        assert_eq!(res.solve.secrecy_rate, 0.0);
    }

    #[test]
    fn weak_source_link_gives_zero() {
        let params = SystemParams::with_common_noise(1e3, 0.0, 1.0, 1.0, 1).unwrap();
        let ch = ChannelSet::from_pairs(&[(1.0, 0.0)], &[(1.0, 0.0)], &[(1e-3, 0.0)]).unwrap();
        let model = SingleAntennaModel::new(&params, &ch).unwrap();
        assert!((0..=10_000).all(|i| model.rate_gap(i as f64 / 1e4) <= 0.0));
        assert_eq!(single_antenna_optimize(&params, &ch).unwrap().solve.secrecy_rate, 0.0);
    }

    #[test]
    fn rejects_multi_antenna() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = SystemParams::with_common_noise(1.0, 1.0, 1.0, 1.0, 2).unwrap();
        let ch = random_channels(&mut rng, 2, 1.0);
        assert!(matches!(
            single_antenna_optimize(&params, &ch),
            Err(AlgorithmError::NotSingleAntenna(2))
        ));
    }

    #[test]
    fn trace_endpoints_are_zero() {
        let (params, ch) = setup(5);
        let tr = SingleAntennaModel::new(&params, &ch).unwrap().trace(101);
        assert_eq!(tr.len(), 101);
        assert_eq!(tr[0].r_sr, 0.0);
        assert_eq!(tr[100].r_sr, 0.0);
    }
}
