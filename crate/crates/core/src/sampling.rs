//! Random instance generators shared by the optimizers, the simulation
//! harness and the test suites.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::model::{dbm_to_mw, Beamformer, ChannelSet, SystemParams};

/// One circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, var: f64) -> CVector {
    CVector::from_iterator(len, (0..len).map(|_| complex_gaussian(rng, var)))
}

/// Rayleigh channels with unit-mean gain scaled by `gain`.
pub fn random_channels<R: Rng + ?Sized>(rng: &mut R, n_r: usize, gain: f64) -> ChannelSet {
    let h_sr = complex_gaussian_vector(rng, n_r, gain);
    let h_dr = complex_gaussian_vector(rng, n_r, gain);
    let h_rd = complex_gaussian_vector(rng, n_r, gain);
    ChannelSet::new(h_sr, h_dr, h_rd).expect("generated channels are well formed")
}

/// `F` with i.i.d. standard complex Gaussian entries.
pub fn random_beamformer<R: Rng + ?Sized>(rng: &mut R, n_r: usize) -> Beamformer {
    let m = CMatrix::from_fn(n_r, n_r, |_, _| complex_gaussian(rng, 1.0));
    Beamformer::new(m).expect("square matrix")
}

/// Moderate-power parameters with a common noise variance:
/// `P_s, P_d ∈ [-10, 30] dBm`, `σ² ∈ [-10, 5] dBm`, `η ∈ [0.3, 1]`.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R, n_r: usize) -> SystemParams {
    let p_s = dbm_to_mw(rng.random_range(-10.0..30.0));
    let p_d = dbm_to_mw(rng.random_range(-10.0..30.0));
    let sigma2 = dbm_to_mw(rng.random_range(-10.0..5.0));
    let eta = rng.random_range(0.3..=1.0);
    SystemParams::with_common_noise(p_s, p_d, sigma2, eta, n_r).expect("sampled parameters are valid")
}
