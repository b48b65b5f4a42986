use nalgebra::{DMatrix, DVector};

/// Minimum-norm least squares through the SVD; robust to rank deficiency.
pub(crate) fn svd_solve(cols: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let svd = cols.clone().svd(true, true);
    let t = svd
        .solve(&DVector::from_column_slice(rhs), 1e-12)
        .ok()?;
    Some(t.data.into())
}
