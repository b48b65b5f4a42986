use nalgebra::{DMatrix, DVectorView};
use rayon::prelude::*;

use crate::acquisition::{Image, MeasurementSet};
use crate::error::{check_len, Error, Result};
use crate::predictors::{apply_stencil, PredictorKind};
use crate::solvers::{basis_pursuit, DenseSystem, SolverConfig};
use crate::tensor::vecops::{dist2, norm2};
use crate::tensor::{
    kron_synthesis_operator, BasisKind, BlockDiagonal, Composed, LinearOperator, SparsityBasis,
};

/// An image estimate plus the rows whose solve did not converge.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub image: Image,
    pub unconverged_rows: Vec<usize>,
}

struct RowSystem {
    phi: DMatrix<f64>,
    system: DenseSystem,
}

/// Per-row sensing matrices and factorized `Φⁱ Ψ` systems, built once and
/// shared by every sweep of a reconstruction.
pub struct RowDecoder<'a> {
    ms: &'a MeasurementSet,
    basis: SparsityBasis,
    rows: Vec<RowSystem>,
}

struct RowResult {
    row: Vec<f64>,
    converged: bool,
}

impl<'a> RowDecoder<'a> {
    pub fn new(ms: &'a MeasurementSet, basis: BasisKind) -> Result<Self> {
        let ens = ms.ensemble();
        let basis = SparsityBasis::new(basis, ens.n_col());
        let rows = (0..ens.n_row())
            .into_par_iter()
            .map(|i| {
                let phi = ens.row_matrix(i)?;
                let system = match basis.kind() {
                    BasisKind::Identity => DenseSystem::new(&phi)?,
                    BasisKind::Dct => DenseSystem::new(&(&phi * basis.matrix()))?,
                };
                Ok(RowSystem { phi, system })
            })
            .collect::<Result<_>>()?;
        Ok(RowDecoder { ms, basis, rows })
    }

    pub fn measurements(&self) -> &MeasurementSet {
        self.ms
    }

    pub fn basis(&self) -> &SparsityBasis {
        &self.basis
    }

    /// `‖Φⁱ xᵢ − yᵢ‖₂` for every row of `image`.
    pub fn row_residuals(&self, image: &Image) -> Result<Vec<f64>> {
        self.check_shape(image)?;
        Ok(self
            .rows
            .iter()
            .enumerate()
            .map(|(i, rs)| {
                let yx = &rs.phi * DVectorView::from_slice(image.row(i), image.n_col());
                dist2(yx.as_slice(), self.ms.row(i))
            })
            .collect())
    }

    fn check_shape(&self, image: &Image) -> Result<()> {
        let ens = self.ms.ensemble();
        check_len(ens.n_row(), image.n_row())?;
        check_len(ens.n_col(), image.n_col())
    }

    /// Recovers `x = x_p + Ψ e` where `e` solves basis pursuit on the
    /// measurement residual `yᵢ − Φⁱ x_p`.
    fn correct(&self, i: usize, x_p: Vec<f64>, solver: &SolverConfig) -> Result<RowResult> {
        let rs = &self.rows[i];
        let y_p = &rs.phi * DVectorView::from_slice(&x_p, x_p.len());
        let e_y: Vec<f64> = self
            .ms
            .row(i)
            .iter()
            .zip(y_p.iter())
            .map(|(y, p)| y - p)
            .collect();
        let sol = rs.system.solve(&e_y, solver)?;
        let e_x = self.basis.synthesize(&sol.theta);
        let row = x_p.iter().zip(&e_x).map(|(p, e)| p + e).collect();
        Ok(RowResult {
            row,
            converged: sol.converged,
        })
    }

    fn assemble(&self, results: Vec<(usize, RowResult)>) -> Result<Estimate> {
        let ens = self.ms.ensemble();
        let mut image = Image::zeros(ens.n_row(), ens.n_col());
        let mut unconverged_rows = Vec::new();
        for (i, r) in results {
            image.row_mut(i).copy_from_slice(&r.row);
            if !r.converged {
                unconverged_rows.push(i);
            }
        }
        unconverged_rows.sort_unstable();
        Ok(Estimate {
            image,
            unconverged_rows,
        })
    }

    pub fn init_separate_rows(&self, solver: &SolverConfig) -> Result<Estimate> {
        solver.validate()?;
        let n_col = self.ms.ensemble().n_col();
        let results = (0..self.rows.len())
            .into_par_iter()
            .map(|i| Ok((i, self.correct(i, vec![0.0; n_col], solver)?)))
            .collect::<Result<Vec<_>>>()?;
        self.assemble(results)
    }

    pub fn init_kcs(&self, solver: &SolverConfig) -> Result<Estimate> {
        let ens = self.ms.ensemble();
        let kind = self.basis.kind();
        let sensing = BlockDiagonal::from_blocks(self.rows.iter().map(|r| r.phi.clone()).collect());
        let synthesis = kron_synthesis_operator(
            SparsityBasis::new(kind, ens.n_row()),
            SparsityBasis::new(kind, ens.n_col()),
        );
        let op = Composed::new(sensing, synthesis);
        let sol = basis_pursuit(&op, self.ms.values(), solver)?;
        let pixels = op.inner.apply(&sol.theta)?;
        let unconverged_rows = if sol.converged {
            Vec::new()
        } else {
            (0..ens.n_row()).collect()
        };
        Ok(Estimate {
            image: Image::new(ens.n_row(), ens.n_col(), pixels)?,
            unconverged_rows,
        })
    }

    /// One Jacobi sweep over all rows.
    pub fn iterate(
        &self,
        prev: &Image,
        predictor: PredictorKind,
        solver: &SolverConfig,
    ) -> Result<Estimate> {
        let order: Vec<usize> = (0..self.rows.len()).collect();
        self.iterate_in_order(prev, predictor, solver, &order)
    }

    /// As [`RowDecoder::iterate`], visiting rows in `order` (a permutation
    /// of `0..N_ROW`). The result does not depend on the order.
    pub fn iterate_in_order(
        &self,
        prev: &Image,
        predictor: PredictorKind,
        solver: &SolverConfig,
        order: &[usize],
    ) -> Result<Estimate> {
        solver.validate()?;
        self.check_shape(prev)?;
        let n_row = prev.n_row();
        let mut seen = vec![false; n_row];
        for &i in order {
            if i >= n_row || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("row order is not a permutation"));
            }
        }
        check_len(n_row, order.len())?;

        let stencil = predictor.stencil();
        let results = order
            .par_iter()
            .map(|&i| {
                let x_p = if i == 0 || i + 1 == n_row {
                    prev.row(i).to_vec()
                } else {
                    let mut p = vec![0.0; prev.n_col()];
                    apply_stencil(stencil, prev.row(i - 1), prev.row(i + 1), &mut p);
                    p
                };
                Ok((i, self.correct(i, x_p, solver)?))
            })
            .collect::<Result<Vec<_>>>()?;
        self.assemble(results)
    }
}

/// `max_i ‖next_i − prev_i‖₂ / max(1e-12, ‖next_i‖₂)`.
pub fn max_relative_change(prev: &Image, next: &Image) -> f64 {
    prev.rows()
        .zip(next.rows())
        .map(|(p, n)| dist2(p, n) / norm2(n).max(1e-12))
        .fold(0.0, f64::max)
}
