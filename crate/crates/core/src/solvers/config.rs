use crate::error::{Error, Result};

/// Tolerances and caps for the sparse solvers.
///
/// The OMP stopping rule (`omp_max_atoms`, `omp_res_tol`) has no canonical
/// value; the defaults stop at half the number of measurements or when
/// the residual falls below `1e-6·‖y‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Primal/dual residual tolerance for basis pursuit, scaled by `max(1, ‖y‖₂)`.
    pub bp_abs_tol: f64,
    pub bp_max_iter: usize,
    /// Initial ADMM penalty; adapted by residual balancing.
    pub bp_rho: f64,
    /// Atom cap for OMP. `None` means half the number of measurements.
    pub omp_max_atoms: Option<usize>,
    /// OMP stops once `‖r‖₂ ≤ omp_res_tol·‖y‖₂`.
    pub omp_res_tol: f64,
    /// Relative residual target of the inner conjugate-gradient solves.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            bp_abs_tol: 1e-6,
            bp_max_iter: 2000,
            bp_rho: 1.0,
            omp_max_atoms: None,
            omp_res_tol: 1e-6,
            cg_tol: 1e-12,
            cg_max_iter: 1000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bp_abs_tol", self.bp_abs_tol),
            ("bp_rho", self.bp_rho),
            ("omp_res_tol", self.omp_res_tol),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.bp_max_iter == 0 || self.cg_max_iter == 0 || self.omp_max_atoms == Some(0) {
            return Err(Error::invalid("iteration and atom caps must be at least 1"));
        }
        Ok(())
    }

    /// Absolute feasibility tolerance for measurements `y`.
    pub fn bp_tolerance(&self, y_norm: f64) -> f64 {
        self.bp_abs_tol * y_norm.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub theta: Vec<f64>,
    pub iterations_used: usize,
    /// Final `‖A θ − y‖₂`.
    pub residual_norm: f64,
    pub converged: bool,
}

impl SparseSolution {
    pub(crate) fn zero(n: usize) -> Self {
        SparseSolution {
            theta: vec![0.0; n],
            iterations_used: 0,
            residual_norm: 0.0,
            converged: true,
        }
    }

    /// Indices with `|θ_j| > threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.theta
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > threshold)
            .map(|(j, _)| j)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_positive() {
        let mut cfg = SolverConfig {
            bp_abs_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.bp_abs_tol = 1e-6;
        cfg.bp_max_iter = 0;
        assert!(cfg.validate().is_err());
        cfg.bp_max_iter = 1;
        cfg.omp_max_atoms = Some(0);
        assert!(cfg.validate().is_err());
    }
}
