//! Sparse recovery: equality-constrained basis pursuit (ADMM), orthogonal
//! matching pursuit, and an exhaustive ℓ0 search for test-scale problems.

mod admm;
mod cg;
mod config;
mod lstsq;
mod omp;
mod oracle;

pub use admm::{basis_pursuit, DenseSystem};
pub use cg::{conjugate_gradient, CgOutcome};
pub use config::{SolverConfig, SparseSolution};
pub use omp::{omp, omp_with_history};
pub use oracle::l0_oracle;
