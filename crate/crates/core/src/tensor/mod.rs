//! Random sensing matrices, sparsity bases and matrix-free operators.

mod basis;
mod ensemble;
mod operator;
pub(crate) mod vecops;

pub use basis::{dct_synthesis, BasisKind, SparsityBasis};
pub use ensemble::{gaussian_row_matrix, row_seed, splitmix64, SensingEnsemble};
pub use operator::{
    block_diag_operator, kron_synthesis_operator, BlockDiagonal, Composed, DenseOperator,
    KronSynthesis, LinearOperator,
};
