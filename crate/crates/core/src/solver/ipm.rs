//! Primal–dual path-following method for small dense block-diagonal SDPs
//! in standard form
//!
//! ```text
//! minimize ⟨C, X⟩  subject to  ⟨A_i, X⟩ = b_i,  X ⪰ 0,
//! ```
//!
//! where `X` is block diagonal with real symmetric blocks. Uses the HKM
//! search direction with a Mehrotra predictor–corrector step, starting from
//! an infeasible scaled identity. Everything is dense; the Schur complement
//! is `m × m` with `m` the number of equality constraints.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub(crate) type Blocks = Vec<DMatrix<f64>>;

#[derive(Debug, Clone)]
pub(crate) struct BlockSdp {
    pub c: Blocks,
    /// `a[i][k]`: block `k` of constraint matrix `i`.
    pub a: Vec<Blocks>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Converged,
    MaxIterations,
    Stalled,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmOutcome {
    pub x: Blocks,
    pub status: IpmStatus,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn scaled_identity(sizes: &[usize], v: f64) -> Blocks {
    sizes.iter().map(|&n| DMatrix::identity(n, n) * v).collect()
}

impl BlockSdp {
    fn sizes(&self) -> Vec<usize> {
        self.c.iter().map(|m| m.nrows()).collect()
    }

    fn apply(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ai| inner(ai, x)))
    }

    fn apply_adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.c.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect();
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            for (o, blk) in out.iter_mut().zip(ai) {
                *o += blk * yi;
            }
        }
        out
    }
}

/// Largest `α` such that `X + α dX ⪰ 0` for positive definite `X`.
fn max_step(x: &Blocks, dx: &Blocks) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 1 {
            let (v, d) = (xb[(0, 0)], db[(0, 0)]);
            if d < 0.0 {
                alpha = alpha.min(-v / d);
            }
            continue;
        }
        let chol = xb.clone().cholesky()?;
        let l = chol.l();
        let linv = l.try_inverse()?;
        let w = sym(&(&linv * db * linv.transpose()));
        let lmin = SymmetricEigen::new(w).eigenvalues.min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    Some(alpha)
}

struct Direction {
    dx: Blocks,
    dy: DVector<f64>,
    ds: Blocks,
}

struct Iterate<'a> {
    prob: &'a BlockSdp,
    x: &'a Blocks,
    s_inv: &'a Blocks,
    rp: &'a DVector<f64>,
    rd: &'a Blocks,
    schur: &'a nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Iterate<'_> {
    /// HKM direction targeting `X S = τ I`, with an optional second-order
    /// correction `K` added to the complementarity equation.
    fn direction(&self, tau: f64, corr: Option<&Blocks>) -> Direction {
        let nb = self.x.len();
        let mut base: Blocks = Vec::with_capacity(nb);
        for k in 0..nb {
            let (x, si) = (&self.x[k], &self.s_inv[k]);
            let mut m = si * tau - x - x * &self.rd[k] * si;
            if let Some(kc) = corr {
                m -= &kc[k] * si;
            }
            base.push(m);
        }
        let rhs = self.rp - self.prob.apply(&base);
        let dy = self.schur.solve(&rhs);
        let aty = self.prob.apply_adjoint(&dy);
        let ds: Blocks = self.rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
        let mut dx: Blocks = Vec::with_capacity(nb);
        for k in 0..nb {
            let (x, si) = (&self.x[k], &self.s_inv[k]);
            let mut t = x * &ds[k];
            if let Some(kc) = corr {
                t += &kc[k];
            }
            dx.push(sym(&(si * tau - x - t * si)));
        }
        Direction { dx, dy, ds }
    }
}

pub(crate) fn solve(prob: &BlockSdp, tol: f64, max_iter: usize) -> IpmOutcome {
    let sizes = prob.sizes();
    let n_total: usize = sizes.iter().sum();
    let nf = n_total as f64;
    let m = prob.b.len();

    let norm_b = prob.b.norm();
    let norm_c = fro(&prob.c);
    let norm_a: Vec<f64> = prob.a.iter().map(fro).collect();

    let mut x0 = 10f64.max(nf.sqrt());
    for i in 0..m {
        x0 = x0.max(nf.sqrt() * (1.0 + prob.b[i].abs()) / (1.0 + norm_a[i]));
    }
    let mut s0 = 10f64.max(nf.sqrt()).max(norm_c);
    for &na in &norm_a {
        s0 = s0.max(na);
    }
    let mut x = scaled_identity(&sizes, x0);
    let mut s = scaled_identity(&sizes, s0);
    let mut y = DVector::zeros(m);

    let mut outcome = IpmOutcome {
        x: x.clone(),
        status: IpmStatus::MaxIterations,
        iterations: 0,
        primal_infeasibility: f64::INFINITY,
        dual_infeasibility: f64::INFINITY,
        relative_gap: f64::INFINITY,
    };
    let mut stalls = 0;

    for iter in 0..=max_iter {
        let rp = &prob.b - prob.apply(&x);
        let aty = prob.apply_adjoint(&y);
        let rd: Blocks = prob
            .c
            .iter()
            .zip(&s)
            .zip(&aty)
            .map(|((c, s), a)| c - s - a)
            .collect();
        let pobj = inner(&prob.c, &x);
        let dobj = prob.b.dot(&y);
        let mu = inner(&x, &s) / nf;

        outcome.x = x.clone();
        outcome.iterations = iter;
        outcome.primal_infeasibility = rp.norm() / (1.0 + norm_b);
        outcome.dual_infeasibility = fro(&rd) / (1.0 + norm_c);
        outcome.relative_gap = (pobj - dobj).abs().max(mu * nf) / (1.0 + pobj.abs() + dobj.abs());

        if outcome.primal_infeasibility <= tol
            && outcome.dual_infeasibility <= tol
            && outcome.relative_gap <= tol
        {
            outcome.status = IpmStatus::Converged;
            return outcome;
        }
        if iter == max_iter {
            break;
        }

        let mut s_inv: Blocks = Vec::with_capacity(s.len());
        for sb in &s {
            match sb.clone().cholesky() {
                Some(ch) => s_inv.push(sym(&ch.inverse())),
                None => {
                    outcome.status = IpmStatus::NumericalFailure;
                    return outcome;
                }
            }
        }

        let g: Vec<Blocks> = prob
            .a
            .iter()
            .map(|aj| x.iter().zip(aj).zip(&s_inv).map(|((xb, ab), si)| xb * ab * si).collect())
            .collect();
        let schur_m = DMatrix::from_fn(m, m, |i, j| 0.5 * (inner(&prob.a[i], &g[j]) + inner(&prob.a[j], &g[i])));
        let schur = match schur_m.cholesky() {
            Some(ch) => ch,
            None => {
                outcome.status = IpmStatus::NumericalFailure;
                return outcome;
            }
        };

        let it = Iterate {
            prob,
            x: &x,
            s_inv: &s_inv,
            rp: &rp,
            rd: &rd,
            schur: &schur,
        };

        let pred = it.direction(0.0, None);
        let (Some(ap_max), Some(ad_max)) = (max_step(&x, &pred.dx), max_step(&s, &pred.ds)) else {
            outcome.status = IpmStatus::NumericalFailure;
            return outcome;
        };
        let ap = ap_max.min(1.0);
        let ad = ad_max.min(1.0);
        let x_aff: Blocks = x.iter().zip(&pred.dx).map(|(a, d)| a + d * ap).collect();
        let s_aff: Blocks = s.iter().zip(&pred.ds).map(|(a, d)| a + d * ad).collect();
        let mu_aff = inner(&x_aff, &s_aff) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let corr: Blocks = pred.dx.iter().zip(&pred.ds).map(|(a, b)| a * b).collect();
        let dir = it.direction(sigma * mu, Some(&corr));
        let (Some(ap_max), Some(ad_max)) = (max_step(&x, &dir.dx), max_step(&s, &dir.ds)) else {
            outcome.status = IpmStatus::NumericalFailure;
            return outcome;
        };
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);

        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                outcome.status = IpmStatus::Stalled;
                return outcome;
            }
        } else {
            stalls = 0;
        }

        for (xb, d) in x.iter_mut().zip(&dir.dx) {
            *xb += d * ap;
        }
        y += &dir.dy * ad;
        for (sb, d) in s.iter_mut().zip(&dir.ds) {
            *sb += d * ad;
            *sb = sym(sb);
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min ⟨C, X⟩ s.t. tr(X) = 1, X ⪰ 0 has optimum λ_min(C).
    #[test]
    fn minimal_eigenvalue_sdp() {
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let prob = BlockSdp {
            c: vec![c.clone()],
            a: vec![vec![DMatrix::identity(3, 3)]],
            b: DVector::from_element(1, 1.0),
        };
        let out = solve(&prob, 1e-10, 100);
        assert_eq!(out.status, IpmStatus::Converged);
        let lmin = SymmetricEigen::new(c.clone()).eigenvalues.min();
        assert!((out.x[0].dot(&c) - lmin).abs() < 1e-8);
    }

    /// Pure LP with 1×1 blocks: min x1 + 2 x2 s.t. x1 + x2 = 1.
    #[test]
    fn linear_program_blocks() {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        let prob = BlockSdp {
            c: vec![one(1.0), one(2.0)],
            a: vec![vec![one(1.0), one(1.0)]],
            b: DVector::from_element(1, 1.0),
        };
        let out = solve(&prob, 1e-10, 100);
        assert_eq!(out.status, IpmStatus::Converged);
        assert!((out.x[0][(0, 0)] - 1.0).abs() < 1e-8);
        assert!(out.x[1][(0, 0)].abs() < 1e-8);
    }
}
