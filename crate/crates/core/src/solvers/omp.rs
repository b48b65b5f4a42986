use nalgebra::{DMatrix, DVector};

use super::config::{SolverConfig, SparseSolution};
use crate::error::{check_len, Result};
use crate::tensor::vecops::{axpy, dot, norm2};
use crate::tensor::LinearOperator;

/// Orthogonal matching pursuit. See [`omp_with_history`].
pub fn omp(a: &dyn LinearOperator, y: &[f64], cfg: &SolverConfig) -> Result<SparseSolution> {
    omp_with_history(a, y, cfg).map(|(sol, _)| sol)
}

/// Orthogonal matching pursuit, also returning the residual norm after each
/// step (entry 0 is `‖y‖₂`).
///
/// Each step selects the column with the largest absolute correlation with
/// the residual (lowest index on ties) and re-fits all active coefficients
/// by least squares. The active columns are kept as an orthonormal basis
/// (modified Gram-Schmidt, applied twice) with the triangular factor, so
/// the re-fit is a projection update. Stops when `‖r‖₂ ≤ omp_res_tol·‖y‖₂`
/// (converged) or when the atom cap is reached. Re-selecting an active
/// atom or adding a dependent one ends the run unconverged.
pub fn omp_with_history(
    a: &dyn LinearOperator,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<(SparseSolution, Vec<f64>)> {
    cfg.validate()?;
    check_len(a.nrows(), y.len())?;
    let n = a.ncols();
    let max_atoms = cfg
        .omp_max_atoms
        .unwrap_or(a.nrows() / 2)
        .clamp(1, a.nrows().min(n));
    let y_norm = norm2(y);
    let target = cfg.omp_res_tol * y_norm;

    let mut residual = y.to_vec();
    let mut history = vec![y_norm];
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; n];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    // column k holds the coefficients of atom k in the orthonormal basis
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut correlation = vec![0.0; n];
    let mut converged = y_norm == 0.0;

    while !converged && active.len() < max_atoms {
        a.adjoint_into(&residual, &mut correlation);
        let (best, best_abs) = correlation
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bj, bv), (j, c)| {
                if c.abs() > bv {
                    (j, c.abs())
                } else {
                    (bj, bv)
                }
            });
        if in_active[best] || best_abs == 0.0 {
            break;
        }
        let atom = a.column(best);
        let atom_norm = norm2(&atom);
        let mut q = atom;
        let mut coef = vec![0.0; basis.len() + 1];
        for _ in 0..2 {
            for (k, b) in basis.iter().enumerate() {
                let c = dot(b, &q);
                coef[k] += c;
                axpy(-c, b, &mut q);
            }
        }
        let q_norm = norm2(&q);
        if q_norm <= 1e-10 * atom_norm {
            break;
        }
        q.iter_mut().for_each(|v| *v /= q_norm);
        coef[basis.len()] = q_norm;
        let c = dot(&q, &residual);
        axpy(-c, &q, &mut residual);

        coords.push(c);
        basis.push(q);
        r_cols.push(coef);
        active.push(best);
        in_active[best] = true;

        let r_norm = norm2(&residual);
        history.push(r_norm);
        converged = r_norm <= target;
    }

    let k = active.len();
    let mut theta = vec![0.0; n];
    if k > 0 {
        let r = DMatrix::from_fn(k, k, |i, j| if i <= j { r_cols[j][i] } else { 0.0 });
        let sol = r
            .solve_upper_triangular(&DVector::from_vec(coords))
            .expect("diagonal of R is positive");
        for (&j, v) in active.iter().zip(sol.iter()) {
            theta[j] = *v;
        }
    }
    let residual_norm = *history.last().unwrap();
    Ok((
        SparseSolution {
            theta,
            iterations_used: k,
            residual_norm,
            converged,
        },
        history,
    ))
}
