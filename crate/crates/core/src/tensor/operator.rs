use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, DVectorView, DVectorViewMut};
use rayon::prelude::*;

use super::basis::SparsityBasis;
use super::ensemble::{gaussian_row_matrix, SensingEnsemble};
use crate::error::{check_len, Result};

/// A linear map given by its forward and adjoint actions.
///
/// The `*_into` methods assume correctly sized slices and panic otherwise;
/// [`LinearOperator::apply`] and [`LinearOperator::adjoint`] are the checked
/// entry points.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `out = A x`
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// `out = Aᵀ y`
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]);

    /// `out = A Aᵀ y`
    fn gram_into(&self, y: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.ncols()];
        self.adjoint_into(y, &mut tmp);
        self.apply_into(&tmp, out);
    }

    /// Whether `Aᵀ A = A Aᵀ = I`.
    fn is_orthogonal(&self) -> bool {
        false
    }

    /// Column `j`, i.e. `A e_j`.
    fn column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.ncols()];
        e[j] = 1.0;
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(&e, &mut out);
        out
    }

    /// The explicit matrix, when the operator already stores one.
    fn as_dense(&self) -> Option<&DMatrix<f64>> {
        None
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.ncols(), x.len())?;
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nrows(), y.len())?;
        let mut out = vec![0.0; self.ncols()];
        self.adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Materializes the operator column by column. Test-scale only.
    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for j in 0..self.ncols() {
            m.column_mut(j).copy_from_slice(&self.column(j));
        }
        m
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).apply_into(x, out)
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).adjoint_into(y, out)
    }
    fn gram_into(&self, y: &[f64], out: &mut [f64]) {
        (**self).gram_into(y, out)
    }
    fn is_orthogonal(&self) -> bool {
        (**self).is_orthogonal()
    }
    fn column(&self, j: usize) -> Vec<f64> {
        (**self).column(j)
    }
    fn as_dense(&self) -> Option<&DMatrix<f64>> {
        (**self).as_dense()
    }
}

fn gemv_into(a: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    let xv = DVectorView::from_slice(x, x.len());
    let mut ov = DVectorViewMut::from_slice(out, a.nrows());
    ov.gemv(1.0, a, &xv, 0.0);
}

fn gemv_tr_into(a: &DMatrix<f64>, y: &[f64], out: &mut [f64]) {
    let yv = DVectorView::from_slice(y, y.len());
    let mut ov = DVectorViewMut::from_slice(out, a.ncols());
    ov.gemv_tr(1.0, a, &yv, 0.0);
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }
    fn ncols(&self) -> usize {
        self.0.ncols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        gemv_into(&self.0, x, out);
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        gemv_tr_into(&self.0, y, out);
    }
    fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }
    fn as_dense(&self) -> Option<&DMatrix<f64>> {
        Some(&self.0)
    }
}

/// Block-diagonal sensing of a whole image: block `i` is the sensing matrix
/// of row `i`, acting on the `i`-th slice of a stacked-rows vector.
#[derive(Debug, Clone)]
pub struct BlockDiagonal {
    blocks: Vec<DMatrix<f64>>,
    m: usize,
    n_col: usize,
}

impl BlockDiagonal {
    /// All blocks must share one shape.
    pub fn from_blocks(blocks: Vec<DMatrix<f64>>) -> Self {
        let (m, n_col) = blocks.first().map_or((0, 0), |b| b.shape());
        assert!(
            blocks.iter().all(|b| b.shape() == (m, n_col)),
            "blocks must share one shape"
        );
        BlockDiagonal { blocks, m, n_col }
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }
}

/// Block-diagonal operator of shape `(N_ROW·M) × (N_ROW·N_COL)` built from
/// the ensemble's row matrices.
pub fn block_diag_operator(ensemble: &SensingEnsemble) -> BlockDiagonal {
    let blocks = (0..ensemble.n_row())
        .into_par_iter()
        .map(|i| gaussian_row_matrix(ensemble, i).expect("row index within ensemble"))
        .collect();
    BlockDiagonal::from_blocks(blocks)
}

impl LinearOperator for BlockDiagonal {
    fn nrows(&self) -> usize {
        self.blocks.len() * self.m
    }
    fn ncols(&self) -> usize {
        self.blocks.len() * self.n_col
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.ncols());
        for ((block, xi), oi) in self
            .blocks
            .iter()
            .zip(x.chunks_exact(self.n_col))
            .zip(out.chunks_exact_mut(self.m))
        {
            gemv_into(block, xi, oi);
        }
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.nrows());
        for ((block, yi), oi) in self
            .blocks
            .iter()
            .zip(y.chunks_exact(self.m))
            .zip(out.chunks_exact_mut(self.n_col))
        {
            gemv_tr_into(block, yi, oi);
        }
    }
    fn gram_into(&self, y: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.n_col];
        for ((block, yi), oi) in self
            .blocks
            .iter()
            .zip(y.chunks_exact(self.m))
            .zip(out.chunks_exact_mut(self.m))
        {
            gemv_tr_into(block, yi, &mut tmp);
            gemv_into(block, &tmp, oi);
        }
    }
}

/// Separable 2D synthesis `X = Ψ_row Θ Ψ_colᵀ` acting on stacked rows:
/// `vec(Xᵀ) = (Ψ_row ⊗ Ψ_col) vec(Θᵀ)`. The Kronecker product is never formed.
#[derive(Debug, Clone)]
pub struct KronSynthesis {
    psi_row: SparsityBasis,
    psi_col: SparsityBasis,
    psi_row_t: DMatrix<f64>,
    psi_col_t: DMatrix<f64>,
}

pub fn kron_synthesis_operator(psi_row: SparsityBasis, psi_col: SparsityBasis) -> KronSynthesis {
    let psi_row_t = psi_row.matrix().transpose();
    let psi_col_t = psi_col.matrix().transpose();
    KronSynthesis {
        psi_row,
        psi_col,
        psi_row_t,
        psi_col_t,
    }
}

impl KronSynthesis {
    pub fn n_row(&self) -> usize {
        self.psi_row.n()
    }

    pub fn n_col(&self) -> usize {
        self.psi_col.n()
    }

    // With a stacked-rows vector read column-major as the n_col × n_row
    // matrix Θᵀ, the map is Xᵀ = left · Θᵀ · right.
    fn sandwich(&self, left: &DMatrix<f64>, right: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
        let (nr, nc) = (self.n_row(), self.n_col());
        assert_eq!(x.len(), nr * nc);
        let t = DMatrixView::from_slice(x, nc, nr);
        let tmp = left * t;
        let mut o = DMatrixViewMut::from_slice(out, nc, nr);
        o.gemm(1.0, &tmp, right, 0.0);
    }
}

impl LinearOperator for KronSynthesis {
    fn nrows(&self) -> usize {
        self.n_row() * self.n_col()
    }
    fn ncols(&self) -> usize {
        self.nrows()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.sandwich(self.psi_col.matrix(), &self.psi_row_t, x, out);
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.sandwich(&self.psi_col_t, self.psi_row.matrix(), y, out);
    }
    fn gram_into(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
    fn is_orthogonal(&self) -> bool {
        true
    }
    fn column(&self, j: usize) -> Vec<f64> {
        let nc = self.n_col();
        let (r, c) = (j / nc, j % nc);
        let pr = self.psi_row.matrix().column(r);
        let pc = self.psi_col.matrix().column(c);
        let mut out = Vec::with_capacity(self.nrows());
        for a in pr.iter() {
            out.extend(pc.iter().map(|b| a * b));
        }
        out
    }
}

/// `outer ∘ inner`.
#[derive(Debug, Clone)]
pub struct Composed<A, B> {
    pub outer: A,
    pub inner: B,
}

impl<A: LinearOperator, B: LinearOperator> Composed<A, B> {
    pub fn new(outer: A, inner: B) -> Self {
        assert_eq!(outer.ncols(), inner.nrows(), "composition shape");
        Composed { outer, inner }
    }
}

impl<A: LinearOperator, B: LinearOperator> LinearOperator for Composed<A, B> {
    fn nrows(&self) -> usize {
        self.outer.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.inner.nrows()];
        self.inner.apply_into(x, &mut tmp);
        self.outer.apply_into(&tmp, out);
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; self.outer.ncols()];
        self.outer.adjoint_into(y, &mut tmp);
        self.inner.adjoint_into(&tmp, out);
    }
    fn gram_into(&self, y: &[f64], out: &mut [f64]) {
        if self.inner.is_orthogonal() {
            self.outer.gram_into(y, out);
        } else {
            let mut tmp = vec![0.0; self.ncols()];
            self.adjoint_into(y, &mut tmp);
            self.apply_into(&tmp, out);
        }
    }
    fn is_orthogonal(&self) -> bool {
        self.outer.is_orthogonal() && self.inner.is_orthogonal()
    }
    fn column(&self, j: usize) -> Vec<f64> {
        let inner = self.inner.column(j);
        let mut out = vec![0.0; self.nrows()];
        self.outer.apply_into(&inner, &mut out);
        out
    }
}
