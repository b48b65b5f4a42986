//! Line-by-line compressed sensing of 2D images.
//!
//! Rows of an image are measured independently with per-row Gaussian
//! sensing matrices ([`acquisition::acquire`]). The decoder recovers each
//! row by basis pursuit, then repeatedly predicts every row from its
//! neighbours and recovers only the (sparser) prediction error in the
//! measurement domain ([`reconstruction::reconstruct`]). A joint
//! Kronecker-structured initialization and an OMP baseline are included,
//! together with a small benchmark harness.
//!
//! Conventions used throughout:
//!
//! * images are row-major, pixels on a `[0, 1]` scale;
//! * sparsity bases are orthonormal synthesis matrices, `x = Ψ θ`;
//! * stacked 2D vectors list image rows one after the other (`vec(Xᵀ)`);
//! * all arithmetic is `f64`.

pub mod acquisition;
pub mod bench;
pub mod error;
pub mod metrics;
pub mod predictors;
pub mod reconstruction;
pub mod solvers;
pub mod tensor;

pub use acquisition::{acquire, Image, MeasurementSet};
pub use error::{Error, Result};
pub use predictors::{predict, PredictorKind};
pub use reconstruction::{reconstruct, InitKind, ReconstructionConfig, ReconstructionTrace};
pub use solvers::{basis_pursuit, l0_oracle, omp, SolverConfig, SparseSolution};
pub use tensor::{BasisKind, LinearOperator, SensingEnsemble, SparsityBasis};
