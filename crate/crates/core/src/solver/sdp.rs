//! The linearized fractional SDP in `(Z, ξ)`:
//!
//! ```text
//! maximize   Tr(B Z)
//! subject to Tr((C+E) Z) + ξ σ² = 1
//!            Tr(T Z) ≤ ξ · p_eh
//!            Z ⪰ 0,  ξ ≥ ξ_min
//! ```
//!
//! Hermitian `Z` is handled through its real symmetric embedding
//! `[[Re Z, -Im Z], [Im Z, Re Z]]`, and `Tr(H Z) = ½⟨emb(H), emb(Z)⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ipm::{self, BlockSdp, IpmStatus};
use super::SolverError;
use crate::linalg::{frobenius, hermitian_eigen_desc, hermitian_part, max_asymmetry, CMatrix};

/// Closure of the strict `ξ > 0` constraint.
pub const XI_MIN: f64 = 1e-12;
/// Largest lifted dimension the dense engine accepts.
pub const MAX_DIM: usize = 64;
const MAX_ITER: usize = 150;

#[derive(Debug, Clone)]
pub struct SdpProblem {
    /// Objective matrix.
    pub b: CMatrix,
    /// Equality-constraint matrix `C + E`.
    pub ce: CMatrix,
    /// Scalar multiplying `ξ` in the equality constraint.
    pub sigma2: f64,
    /// Inequality-constraint matrix.
    pub t: CMatrix,
    /// Power budget multiplying `ξ` in the inequality.
    pub p_eh: f64,
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.dim();
        for (name, m) in [("b", &self.b), ("ce", &self.ce), ("t", &self.t)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(SolverError::Dimension(format!("`{name}` is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
            }
            let scale = frobenius(m).max(1.0);
            if max_asymmetry(m) > 1e-10 * scale {
                return Err(SolverError::Dimension(format!("`{name}` is not Hermitian")));
            }
        }
        if n == 0 || n > MAX_DIM {
            return Err(SolverError::Dimension(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if !(self.sigma2 > 0.0) || !(self.p_eh >= 0.0) {
            return Err(SolverError::Dimension("sigma2 must be > 0 and p_eh >= 0".into()));
        }
        Ok(())
    }

    /// `(Tr(BZ), Tr((C+E)Z) + ξσ² - 1, Tr(TZ) - ξ p_eh)`.
    pub fn evaluate(&self, z: &CMatrix, xi: f64) -> (f64, f64, f64) {
        let tr = |m: &CMatrix| (m * z).trace().re;
        (
            tr(&self.b),
            tr(&self.ce) + xi * self.sigma2 - 1.0,
            tr(&self.t) - xi * self.p_eh,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpDiagnostics {
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub z: CMatrix,
    pub xi: f64,
    /// `Tr(B Z)` at the returned point.
    pub objective: f64,
    pub diagnostics: SdpDiagnostics,
}

impl SdpSolution {
    /// `X = Z / ξ`, the solution of the un-linearized fractional relaxation.
    pub fn x(&self) -> CMatrix {
        self.z.unscale(self.xi)
    }
}

fn embed(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Hermitian `Z` represented by a real symmetric `Y` (its projection onto
/// the embedding subspace).
fn unembed(y: &DMatrix<f64>) -> CMatrix {
    let n = y.nrows() / 2;
    let z = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (y[(i, j)] + y[(i + n, j + n)]),
            0.5 * (y[(i + n, j)] - y[(i, j + n)]),
        )
    });
    hermitian_part(&z)
}

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// Solves the problem with the dense interior-point engine. `tol` bounds the
/// relative primal infeasibility, dual infeasibility and duality gap of the
/// internally equilibrated problem.
pub fn solve_sdp(sdp: &SdpProblem, tol: f64) -> Result<SdpSolution, SolverError> {
    if !(1e-10..=1e-4).contains(&tol) {
        return Err(SolverError::Tolerance(tol));
    }
    sdp.validate()?;

    // Variables: Y (real embedding of Z), ξ' = ξ - ξ_min ≥ 0, slack s ≥ 0.
    let eb = embed(&sdp.b) * 0.5;
    let ece = embed(&sdp.ce) * 0.5;
    let et = embed(&sdp.t) * 0.5;
    let dim2 = eb.nrows();

    let obj_scale = if eb.norm() > 0.0 { eb.norm() } else { 1.0 };
    let row0 = (ece.norm_squared() + sdp.sigma2 * sdp.sigma2).sqrt();
    let row1 = (et.norm_squared() + sdp.p_eh * sdp.p_eh + 1.0).sqrt();

    let prob = BlockSdp {
        c: vec![eb * (-1.0 / obj_scale), scalar(0.0), scalar(0.0)],
        a: vec![
            vec![ece / row0, scalar(sdp.sigma2 / row0), scalar(0.0)],
            vec![et / row1, scalar(-sdp.p_eh / row1), scalar(1.0 / row1)],
        ],
        b: DVector::from_vec(vec![
            (1.0 - sdp.sigma2 * XI_MIN) / row0,
            sdp.p_eh * XI_MIN / row1,
        ]),
    };
    debug_assert_eq!(prob.a[0][0].nrows(), dim2);

    let out = ipm::solve(&prob, tol, MAX_ITER);
    let diagnostics = SdpDiagnostics {
        iterations: out.iterations,
        primal_infeasibility: out.primal_infeasibility,
        dual_infeasibility: out.dual_infeasibility,
        relative_gap: out.relative_gap,
    };
    if out.status != IpmStatus::Converged {
        return Err(SolverError::SdpNotConverged {
            status: format!("{:?}", out.status),
            diagnostics,
        });
    }

    let z = unembed(&out.x[0]);
    let xi = out.x[1][(0, 0)].max(0.0) + XI_MIN;
    let objective = (&sdp.b * &z).trace().re;
    Ok(SdpSolution {
        z,
        xi,
        objective,
        diagnostics,
    })
}

/// Minimum eigenvalue of a Hermitian matrix, used for PSD checks.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen_desc(m);
    vals.last().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;

    #[test]
    fn embedding_preserves_trace_inner_product() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, -0.25),
                Complex64::new(0.5, 0.25),
                Complex64::new(-2.0, 0.0),
            ],
        );
        let v = CVector::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.9)]);
        let z = &v * v.adjoint();
        let direct = (&h * &z).trace().re;
        let via = 0.5 * embed(&h).dot(&embed(&z));
        assert!((direct - via).abs() < 1e-14);
        assert!((unembed(&embed(&z)) - z).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_tolerance_and_size() {
        let eye = CMatrix::identity(2, 2);
        let sdp = SdpProblem {
            b: eye.clone(),
            ce: eye.clone(),
            sigma2: 1.0,
            t: eye.clone(),
            p_eh: 1.0,
        };
        assert!(matches!(solve_sdp(&sdp, 1e-2), Err(SolverError::Tolerance(_))));
        let bad = SdpProblem {
            t: CMatrix::identity(3, 3),
            ..sdp
        };
        assert!(matches!(solve_sdp(&bad, 1e-8), Err(SolverError::Dimension(_))));
    }

    #[test]
    fn diagonal_instance_has_known_optimum() {
        // max z11 s.t. z11 + z22 + ξ = 1, z11 + z22 ≤ ξ.
        // Optimum z11 = ξ = 1/2.
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]));
        let eye = CMatrix::identity(2, 2);
        let sdp = SdpProblem {
            b,
            ce: eye.clone(),
            sigma2: 1.0,
            t: eye,
            p_eh: 1.0,
        };
        let sol = solve_sdp(&sdp, 1e-9).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-7);
        assert!((sol.xi - 0.5).abs() < 1e-7);
        let (_, eq, ineq) = sdp.evaluate(&sol.z, sol.xi);
        assert!(eq.abs() < 1e-7);
        assert!(ineq < 1e-7);
    }
}
