use itertools::Itertools;
use nalgebra::DMatrix;

use super::config::SparseSolution;
use super::lstsq::svd_solve;
use crate::error::{check_len, Error, Result};
use crate::tensor::vecops::dist2;

const FEASIBLE: f64 = 1e-9;

/// Exhaustive ℓ0 minimization for tiny problems (`N ≤ 20`, `k_max ≤ 4`).
///
/// Supports are tried by increasing size and, within a size, in
/// lexicographic order; the first whose least-squares fit leaves a
/// residual `≤ 1e-9` is returned.
pub fn l0_oracle(a: &DMatrix<f64>, y: &[f64], k_max: usize) -> Result<SparseSolution> {
    let n = a.ncols();
    check_len(a.nrows(), y.len())?;
    if n > 20 || k_max > 4 {
        return Err(Error::invalid(format!(
            "ℓ0 enumeration limited to N <= 20 and k_max <= 4 (N = {n}, k_max = {k_max})"
        )));
    }
    let mut tried = 0;
    for k in 0..=k_max.min(n) {
        for support in (0..n).combinations(k) {
            tried += 1;
            let mut theta = vec![0.0; n];
            if k > 0 {
                let Some(coef) = svd_solve(&a.select_columns(&support), y) else {
                    continue;
                };
                for (&j, c) in support.iter().zip(coef) {
                    theta[j] = c;
                }
            }
            let fit: Vec<f64> = (a * nalgebra::DVector::from_column_slice(&theta)).data.into();
            let residual_norm = dist2(&fit, y);
            if residual_norm <= FEASIBLE {
                return Ok(SparseSolution {
                    theta,
                    iterations_used: tried,
                    residual_norm,
                    converged: true,
                });
            }
        }
    }
    Err(Error::Infeasible { k_max })
}
