//! Basis pursuit `min ‖θ‖₁ s.t. A θ = y` by ADMM.
//!
//! Iteration (scaled form):
//!
//! ```text
//! x ← Π(z − u)            projection onto {θ : Aθ = y}
//! z ← S_{1/ρ}(x + u)      soft thresholding
//! u ← u + x − z
//! ```
//!
//! The penalty `ρ` is adapted by residual balancing. Iterates `x` are
//! always feasible, so the returned coefficients satisfy the constraint up
//! to the accuracy of the projection even when the iteration cap is hit.
//! After the loop, a least-squares re-fit on the support of `z` replaces
//! `x` if it is feasible and has no larger ℓ1 norm.

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use super::cg::conjugate_gradient;
use super::config::{SolverConfig, SparseSolution};
use crate::error::{check_len, Error, Result};
use crate::tensor::vecops::{dist2, norm1, norm2};
use crate::tensor::LinearOperator;

/// Largest row count handled by a dense Cholesky factorization.
const DENSE_MAX_ROWS: usize = 512;
/// Largest support for which the operator path extracts columns to try a
/// certificate.
const OPERATOR_CERTIFY_MAX: usize = 256;
const BALANCE_RATIO: f64 = 10.0;
/// Over-relaxation factor.
const RELAXATION: f64 = 1.6;
/// Iterations with an unchanged support of `z` before a certificate is tried.
const STABLE_SUPPORT: usize = 20;
const DUAL_SLACK: f64 = 1e-9;
const BALANCE_FACTOR: f64 = 2.0;

/// Feasible set `{θ : A θ = y}` with a projection oracle.
trait AffineSet {
    fn dim(&self) -> usize;
    fn constraints(&self) -> usize;
    fn project(&mut self, v: &[f64], out: &mut [f64]);
    fn residual_norm(&self, theta: &[f64]) -> f64;
    /// Least-squares coefficients on `support` plus the dual certificate
    /// `max_j |(Aᵀλ)_j|` off the support. See [`certify`].
    fn certify(&self, support: &[usize]) -> Option<Certificate>;
}

struct Certificate {
    coefficients: Vec<f64>,
    dual_max: f64,
}

/// Least-squares fit on `support` and the minimum-norm multiplier `λ` with
/// `A_Sᵀ λ = sign(θ_S)`. If `θ_S` is feasible and `|Aᵀ λ| ≤ 1` off the
/// support, `θ` is an exact basis pursuit minimizer: for any feasible `θ'`,
/// `‖θ'‖₁ ≥ ⟨Aᵀλ, θ'⟩ = ⟨λ, y⟩ = ‖θ‖₁`.
fn certify(
    cols: &DMatrix<f64>,
    rhs: &[f64],
    support: &[usize],
    adjoint: impl FnOnce(&[f64], &mut [f64]),
    n: usize,
) -> Option<Certificate> {
    let gram = cols.tr_mul(cols);
    let chol = gram.cholesky()?;
    let coef = chol.solve(&cols.tr_mul(&DVector::from_column_slice(rhs)));
    if coef.iter().any(|c| *c == 0.0 || !c.is_finite()) {
        return None;
    }
    let signs = coef.map(f64::signum);
    let lambda = cols * chol.solve(&signs);
    let mut corr = vec![0.0; n];
    adjoint(lambda.as_slice(), &mut corr);
    let mut on_support = vec![false; n];
    support.iter().for_each(|&j| on_support[j] = true);
    let dual_max = corr
        .iter()
        .zip(&on_support)
        .filter(|(_, on)| !**on)
        .fold(0.0f64, |m, (c, _)| m.max(c.abs()));
    Some(Certificate {
        coefficients: coef.data.into(),
        dual_max,
    })
}

/// Precomputed factorization of a dense `M × N` system matrix `A`:
/// `A Aᵀ = L Lᵀ` and `Q = L⁻¹ A` (orthonormal rows). Reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    l: DMatrix<f64>,
    q: DMatrix<f64>,
}

impl DenseSystem {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() > a.ncols() {
            return Err(Error::invalid(format!(
                "dense system needs 0 < rows <= cols, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let gram = a * a.transpose();
        let chol = gram.cholesky().ok_or(Error::Singular)?;
        let l = chol.l();
        let q = l
            .solve_lower_triangular(a)
            .ok_or(Error::Singular)?;
        Ok(DenseSystem { l, q })
    }

    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.q.ncols()
    }

    /// Basis pursuit for right-hand side `y`.
    pub fn solve(&self, y: &[f64], cfg: &SolverConfig) -> Result<SparseSolution> {
        check_len(self.nrows(), y.len())?;
        let y_norm = norm2(y);
        if y_norm == 0.0 {
            return Ok(SparseSolution::zero(self.ncols()));
        }
        let b = self
            .l
            .solve_lower_triangular(&DVector::from_column_slice(y))
            .ok_or(Error::Singular)?;
        let mut set = DenseSet {
            sys: self,
            b: b.data.into(),
            scratch: vec![0.0; self.nrows()],
        };
        Ok(admm(&mut set, y_norm, cfg))
    }
}

struct DenseSet<'a> {
    sys: &'a DenseSystem,
    b: Vec<f64>,
    scratch: Vec<f64>,
}

impl DenseSet<'_> {
    /// `Q θ − b`
    fn constraint_gap(&self, theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        let mut o = DVectorViewMut::from_slice(out, self.b.len());
        o.gemv(1.0, &self.sys.q, &DVectorView::from_slice(theta, theta.len()), -1.0);
    }
}

impl AffineSet for DenseSet<'_> {
    fn dim(&self) -> usize {
        self.sys.ncols()
    }

    fn constraints(&self) -> usize {
        self.sys.nrows()
    }

    fn project(&mut self, v: &[f64], out: &mut [f64]) {
        let mut gap = std::mem::take(&mut self.scratch);
        self.constraint_gap(v, &mut gap);
        out.copy_from_slice(v);
        let mut o = DVectorViewMut::from_slice(out, v.len());
        o.gemv_tr(-1.0, &self.sys.q, &DVectorView::from_slice(&gap, gap.len()), 1.0);
        self.scratch = gap;
    }

    fn residual_norm(&self, theta: &[f64]) -> f64 {
        // A θ − y = L (Q θ − b)
        let mut gap = vec![0.0; self.b.len()];
        self.constraint_gap(theta, &mut gap);
        (&self.sys.l * DVector::from_vec(gap)).norm()
    }

    fn certify(&self, support: &[usize]) -> Option<Certificate> {
        let cols = self.sys.q.select_columns(support);
        let q = &self.sys.q;
        certify(
            &cols,
            &self.b,
            support,
            |mu, out| {
                let mut o = DVectorViewMut::from_slice(out, q.ncols());
                o.gemv_tr(1.0, q, &DVectorView::from_slice(mu, mu.len()), 0.0);
            },
            self.dim(),
        )
    }
}

/// Projection through conjugate gradient on `A Aᵀ`, warm-started from the
/// previous multiplier.
struct OperatorSet<'a> {
    op: &'a dyn LinearOperator,
    y: &'a [f64],
    multiplier: Vec<f64>,
    cg_tol: f64,
    cg_max_iter: usize,
}

impl AffineSet for OperatorSet<'_> {
    fn dim(&self) -> usize {
        self.op.ncols()
    }

    fn constraints(&self) -> usize {
        self.op.nrows()
    }

    fn project(&mut self, v: &[f64], out: &mut [f64]) {
        let mut gap = vec![0.0; self.y.len()];
        self.op.apply_into(v, &mut gap);
        for (g, yi) in gap.iter_mut().zip(self.y) {
            *g -= yi;
        }
        let op = self.op;
        conjugate_gradient(
            |p, o| op.gram_into(p, o),
            &gap,
            &mut self.multiplier,
            self.cg_tol,
            self.cg_max_iter,
        );
        self.op.adjoint_into(&self.multiplier, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = vi - *o;
        }
    }

    fn residual_norm(&self, theta: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.y.len()];
        self.op.apply_into(theta, &mut ax);
        dist2(&ax, self.y)
    }

    fn certify(&self, support: &[usize]) -> Option<Certificate> {
        if support.len() > OPERATOR_CERTIFY_MAX {
            return None;
        }
        let mut cols = DMatrix::zeros(self.y.len(), support.len());
        for (k, &j) in support.iter().enumerate() {
            cols.column_mut(k).copy_from_slice(&self.op.column(j));
        }
        certify(&cols, self.y, support, |l, out| self.op.adjoint_into(l, out), self.dim())
    }
}

fn soft_threshold(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

fn support_of(z: &[f64]) -> Vec<usize> {
    (0..z.len()).filter(|&j| z[j] != 0.0).collect()
}

fn scatter(n: usize, support: &[usize], values: &[f64]) -> Vec<f64> {
    let mut theta = vec![0.0; n];
    for (&j, v) in support.iter().zip(values) {
        theta[j] = *v;
    }
    theta
}

/// Indices of the `min(nnz, limit)` largest entries of `|z|`, ascending.
fn leading_support(z: &[f64], limit: usize) -> Vec<usize> {
    let mut idx = support_of(z);
    if idx.len() > limit {
        idx.select_nth_unstable_by(limit, |&a, &b| z[b].abs().total_cmp(&z[a].abs()));
        idx.truncate(limit);
        idx.sort_unstable();
    }
    idx
}

/// The refit on `support` when its dual certificate holds.
fn certified_minimizer(set: &impl AffineSet, support: &[usize]) -> Option<Vec<f64>> {
    let cert = set.certify(support)?;
    (cert.dual_max <= 1.0 + DUAL_SLACK).then(|| scatter(set.dim(), support, &cert.coefficients))
}

fn admm(set: &mut impl AffineSet, y_norm: f64, cfg: &SolverConfig) -> SparseSolution {
    let n = set.dim();
    let eps = cfg.bp_tolerance(y_norm);
    let mut rho = cfg.bp_rho;
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut z_old = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut candidate: Vec<usize> = Vec::new();
    let mut stable = 0;
    let mut iterations = 0;

    while iterations < cfg.bp_max_iter {
        iterations += 1;
        for ((vi, zi), ui) in v.iter_mut().zip(&z).zip(&u) {
            *vi = zi - ui;
        }
        set.project(&v, &mut x);
        z_old.copy_from_slice(&z);
        let kappa = 1.0 / rho;
        for ((zi, xi), ui) in z.iter_mut().zip(&x).zip(u.iter_mut()) {
            let relaxed = RELAXATION * xi + (1.0 - RELAXATION) * *zi;
            *zi = soft_threshold(relaxed + *ui, kappa);
            *ui += relaxed - *zi;
        }
        let primal = dist2(&x, &z);
        let dual = rho * dist2(&z, &z_old);
        if primal <= eps && dual <= eps {
            break;
        }

        // The minimizer is generically supported on at most m entries; once
        // the m largest entries of z settle, test them for optimality.
        let leading = leading_support(&z, set.constraints());
        if leading == candidate {
            stable += 1;
        } else {
            candidate = leading;
            stable = 0;
        }
        if stable == STABLE_SUPPORT && !candidate.is_empty() {
            if let Some(theta) = certified_minimizer(&*set, &candidate) {
                let residual_norm = set.residual_norm(&theta);
                if residual_norm <= eps {
                    return SparseSolution {
                        theta,
                        iterations_used: iterations,
                        residual_norm,
                        converged: true,
                    };
                }
            }
        }

        if primal > BALANCE_RATIO * dual {
            rho *= BALANCE_FACTOR;
            u.iter_mut().for_each(|ui| *ui /= BALANCE_FACTOR);
        } else if dual > BALANCE_RATIO * primal {
            rho /= BALANCE_FACTOR;
            u.iter_mut().for_each(|ui| *ui *= BALANCE_FACTOR);
        }
    }
    let residuals_small = iterations < cfg.bp_max_iter || {
        let primal = dist2(&x, &z);
        let dual = rho * dist2(&z, &z_old);
        primal <= eps && dual <= eps
    };

    // x is feasible; prefer the least-squares fit on supp(z) when it is
    // feasible and no larger in ℓ1.
    let mut theta = x;
    let mut residual_norm = set.residual_norm(&theta);
    let nnz = z.iter().filter(|v| **v != 0.0).count();
    if nnz > 0 && nnz <= set.constraints() {
        let support = support_of(&z);
        if let Some(cert) = set.certify(&support) {
            let candidate = scatter(n, &support, &cert.coefficients);
            let cand_residual = set.residual_norm(&candidate);
            if cand_residual <= eps && norm1(&candidate) <= norm1(&theta) * (1.0 + 1e-12) {
                theta = candidate;
                residual_norm = cand_residual;
            }
        }
    }
    SparseSolution {
        theta,
        iterations_used: iterations,
        residual_norm,
        converged: residuals_small && residual_norm <= eps,
    }
}

/// Solves `min ‖θ‖₁ s.t. A θ = y`.
///
/// Operators that expose a dense matrix with at most 512 rows are
/// factorized once (Cholesky of `A Aᵀ`); everything else is projected with
/// conjugate gradient on `A Aᵀ`. Non-convergence within `bp_max_iter` is
/// reported through [`SparseSolution::converged`]; the returned iterate is
/// still feasible.
pub fn basis_pursuit(
    a: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<SparseSolution> {
    cfg.validate()?;
    check_len(a.nrows(), y.len())?;
    let y_norm = norm2(y);
    if y_norm == 0.0 {
        return Ok(SparseSolution::zero(a.ncols()));
    }
    match a.as_dense() {
        Some(dense) if dense.nrows() <= DENSE_MAX_ROWS => DenseSystem::new(dense)?.solve(y, cfg),
        _ => {
            let mut set = OperatorSet {
                op: a,
                y,
                multiplier: vec![0.0; y.len()],
                cg_tol: cfg.cg_tol,
                cg_max_iter: cfg.cg_max_iter,
            };
            Ok(admm(&mut set, y_norm, cfg))
        }
    }
}
