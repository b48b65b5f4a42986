use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Everything needed to regenerate the per-row sensing matrices on the
/// decoder side. Matrices themselves are never stored or transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensingEnsemble {
    master_seed: u64,
    m: usize,
    n_col: usize,
    n_row: usize,
}

impl SensingEnsemble {
    pub fn new(master_seed: u64, m: usize, n_col: usize, n_row: usize) -> Result<Self> {
        if m == 0 || m >= n_col {
            return Err(Error::invalid(format!(
                "measurements per row must satisfy 0 < M < N_COL (M = {m}, N_COL = {n_col})"
            )));
        }
        if n_row == 0 {
            return Err(Error::invalid("image must have at least one row"));
        }
        Ok(SensingEnsemble {
            master_seed,
            m,
            n_col,
            n_row,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Measurements per row.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_col(&self) -> usize {
        self.n_col
    }

    pub fn n_row(&self) -> usize {
        self.n_row
    }

    /// `N_COL / M`.
    pub fn compression_ratio(&self) -> f64 {
        self.n_col as f64 / self.m as f64
    }

    /// Sensing matrix of row `row` (0-based). See [`gaussian_row_matrix`].
    pub fn row_matrix(&self, row: usize) -> Result<DMatrix<f64>> {
        gaussian_row_matrix(self, row)
    }
}

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator for one row: `splitmix64(splitmix64(master) ^ row)`.
///
/// Each row's matrix depends only on `(master_seed, row)`, so rows can be
/// regenerated independently and in any order.
pub fn row_seed(master_seed: u64, row: usize) -> u64 {
    splitmix64(splitmix64(master_seed) ^ row as u64)
}

/// Draws the `M × N_COL` sensing matrix of row `row` (0-based).
///
/// Entries are i.i.d. `N(0, 1/M)`: standard normals from `rand_distr`'s
/// ziggurat sampler over a ChaCha8 stream seeded with [`row_seed`], drawn
/// in row-major order and scaled by `1/√M`.
pub fn gaussian_row_matrix(ensemble: &SensingEnsemble, row: usize) -> Result<DMatrix<f64>> {
    if row >= ensemble.n_row {
        return Err(Error::IndexOutOfRange {
            index: row,
            len: ensemble.n_row,
        });
    }
    let (m, n) = (ensemble.m, ensemble.n_col);
    let scale = 1.0 / (m as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(row_seed(ensemble.master_seed, row));
    let entries: Vec<f64> = (0..m * n)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v * scale
        })
        .collect();
    Ok(DMatrix::from_row_slice(m, n, &entries))
}
