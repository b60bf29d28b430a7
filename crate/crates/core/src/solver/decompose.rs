//! Rank-one decomposition of a PSD matrix matching two trace targets.
//!
//! Given `X ⪰ 0` of rank `r` and Hermitian `A1`, `A2`, produce vectors
//! `y_1..y_r` with `Σ y_j y_jᴴ = X` and, for every `j`,
//! `y_jᴴ A_i y_j = Tr(A_i X) / r`.
//!
//! Start from `X = Σ p_i p_iᴴ` with `p_i = √λ_i v_i`. Any unitary mix of two
//! vectors, `u = cos θ p_i + sin θ e^{iφ} p_j`, `w = -sin θ e^{-iφ} p_i + cos θ p_j`,
//! leaves `p_i p_iᴴ + p_j p_jᴴ` unchanged. A first pass uses real rotations
//! (`φ = 0`) to bring every vector onto the `A1` target. A second pass picks
//! `φ` so the `A1` cross term vanishes, which keeps both vectors on the `A1`
//! target for every `θ`, then solves for `θ` to hit the `A2` target. Each
//! rotation pins at least one more vector, so each pass needs at most
//! `r - 1` rotations.

use num_complex::Complex64;

use super::SolverError;
use crate::linalg::{hermitian_eigen_desc, quad_form, CMatrix, CVector};

/// Eigenvalues below this fraction of `Tr(X)` are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-9;
/// Eigenvalues below `-PSD_TOLERANCE · Tr(X)` reject the input.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Numerical rank of a Hermitian PSD matrix and its scaled eigenvector
/// factors `√λ_i v_i`, largest first.
pub fn psd_factors(x: &CMatrix) -> Result<Vec<CVector>, SolverError> {
    let (vals, vecs) = hermitian_eigen_desc(x);
    let trace: f64 = vals.iter().sum();
    if !(trace > 0.0) {
        return Err(SolverError::NotPsd(format!("trace {trace} is not positive")));
    }
    if let Some(&lmin) = vals.last() {
        if lmin < -PSD_TOLERANCE * trace {
            return Err(SolverError::NotPsd(format!("eigenvalue {lmin:e} below tolerance")));
        }
    }
    Ok(vals
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l >= RANK_CUTOFF * trace)
        .map(|(i, &l)| vecs.column(i).into_owned() * Complex64::new(l.sqrt(), 0.0))
        .collect())
}

/// Numerical rank with the [`RANK_CUTOFF`] rule.
pub fn numerical_rank(x: &CMatrix) -> Result<usize, SolverError> {
    psd_factors(x).map(|f| f.len())
}

/// Smallest positive `τ` with `a τ² + 2 c τ + d = 0`, for `a < 0 < d`.
fn positive_root(a: f64, c: f64, d: f64) -> f64 {
    let disc = (c * c - a * d).max(0.0).sqrt();
    if c >= 0.0 {
        (c + disc) / -a
    } else {
        d / (disc - c)
    }
}

/// Mixes `p[i]` (above target) and `p[j]` (below target) so that the new
/// `p[i]` hits `target` under `a`, using phase `phase` on the `p[j]` term.
fn rotate(p: &mut [CVector], i: usize, j: usize, a: &CMatrix, target: f64, phase: Complex64) {
    let aii = quad_form(&p[i], a) - target;
    let ajj = quad_form(&p[j], a) - target;
    let aij = p[i].dotc(&(a * &p[j]));
    let cross = (phase * aij).re;
    let tau = positive_root(ajj, cross, aii);
    let norm = (1.0 + tau * tau).sqrt();
    let (cos, sin) = (1.0 / norm, tau / norm);
    let u = &p[i] * Complex64::new(cos, 0.0) + &p[j] * (phase * sin);
    let w = &p[i] * (-phase.conj() * sin) + &p[j] * Complex64::new(cos, 0.0);
    p[i] = u;
    p[j] = w;
}

/// Rotates pairs until every vector meets `target` under `a`. When `keep` is
/// given, the phase of each rotation is chosen so the `keep` cross term is
/// purely imaginary, preserving `keep`-targets already met.
fn equalize(p: &mut [CVector], a: &CMatrix, target: f64, keep: Option<&CMatrix>, scale: f64) {
    let tol = 1e-13 * scale;
    for _ in 0..p.len() {
        let vals: Vec<f64> = p.iter().map(|v| quad_form(v, a) - target).collect();
        let (hi, &vhi) = vals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        let (lo, &vlo) = vals
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        if vhi <= tol && vlo >= -tol {
            return;
        }
        if vhi <= 0.0 || vlo >= 0.0 {
            // Residual sum is zero up to rounding; nothing left to pair.
            return;
        }
        let phase = match keep {
            Some(k) => {
                let kij = p[hi].dotc(&(k * &p[lo]));
                if kij.norm() > 0.0 {
                    Complex64::i() * kij.conj() / kij.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }
            None => Complex64::new(1.0, 0.0),
        };
        rotate(p, hi, lo, a, target, phase);
    }
}

/// Decomposes `x` into rank-one terms that each carry an equal share of
/// `Tr(A1 X)` and `Tr(A2 X)`.
pub fn rank_one_decompose(x: &CMatrix, a1: &CMatrix, a2: &CMatrix) -> Result<Vec<CVector>, SolverError> {
    let n = x.nrows();
    if a1.nrows() != n || a2.nrows() != n {
        return Err(SolverError::Dimension("decomposition operands differ in size".into()));
    }
    let mut p = psd_factors(x)?;
    let r = p.len() as f64;
    if p.len() == 1 {
        return Ok(p);
    }
    let target1 = p.iter().map(|v| quad_form(v, a1)).sum::<f64>() / r;
    let target2 = p.iter().map(|v| quad_form(v, a2)).sum::<f64>() / r;
    let scale1 = p.iter().map(|v| quad_form(v, a1).abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let scale2 = p.iter().map(|v| quad_form(v, a2).abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    equalize(&mut p, a1, target1, None, scale1);
    equalize(&mut p, a2, target2, Some(a1), scale2);
    Ok(p)
}
