//! Per-row measurement of images and the image / measurement file formats.

mod image;
mod msfile;
mod pgm;

use rayon::prelude::*;

pub use image::Image;
pub use msfile::{decode_measurements, encode_measurements, read_measurements, write_measurements};
pub use pgm::{decode_pgm, encode_pgm, load_pgm, write_pgm, write_pgm_as, PgmEncoding};

use crate::error::{check_len, Error, Result};
use crate::tensor::{gaussian_row_matrix, SensingEnsemble};

/// Per-row measurements `Y` (`N_ROW × M`, row-major) and the ensemble that
/// produced them. This is all a decoder gets to see.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    ensemble: SensingEnsemble,
    y: Vec<f64>,
}

impl MeasurementSet {
    pub fn new(ensemble: SensingEnsemble, y: Vec<f64>) -> Result<Self> {
        check_len(ensemble.n_row() * ensemble.m(), y.len())?;
        Ok(MeasurementSet { ensemble, y })
    }

    pub fn ensemble(&self) -> &SensingEnsemble {
        &self.ensemble
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Measurements of row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.ensemble.m();
        &self.y[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.y.chunks_exact(self.ensemble.m())
    }
}

/// Measures every row `i` of `image` as `Φⁱ xᵢ`, with `Φⁱ` drawn from the
/// ensemble `(master_seed, m, N_COL, N_ROW)`.
pub fn acquire(image: &Image, m: usize, master_seed: u64) -> Result<MeasurementSet> {
    if m == 0 || m >= image.n_col() {
        return Err(Error::invalid(format!(
            "M must satisfy 0 < M < N_COL (M = {m}, N_COL = {})",
            image.n_col()
        )));
    }
    let ensemble = SensingEnsemble::new(master_seed, m, image.n_col(), image.n_row())?;
    let rows: Vec<Vec<f64>> = (0..image.n_row())
        .into_par_iter()
        .map(|i| {
            let phi = gaussian_row_matrix(&ensemble, i)?;
            let x = nalgebra::DVectorView::from_slice(image.row(i), image.n_col());
            Ok((phi * x).data.into())
        })
        .collect::<Result<_>>()?;
    MeasurementSet::new(ensemble, rows.concat())
}
