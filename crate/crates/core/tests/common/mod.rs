#![allow(dead_code)]

use std::path::PathBuf;

use linescan::acquisition::load_pgm;
use linescan::{Image, SensingEnsemble};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian `m×n` matrix with entries of variance `1/m`.
pub fn gaussian(seed: u64, m: usize, n: usize) -> DMatrix<f64> {
    SensingEnsemble::new(seed, m, n, 1).unwrap().row_matrix(0).unwrap()
}

/// `k`-sparse vector with standard normal values on a uniform support.
pub fn sparse(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for j in sample(rng, n, k) {
        let v: f64 = rng.sample(StandardNormal);
        x[j] = v.signum() * (v.abs() + 0.1);
    }
    x
}

pub fn mul(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (a * DVector::from_column_slice(x)).data.into()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn natural_image() -> Image {
    load_pgm(data_path("astronaut-512.pgm")).unwrap()
}

pub fn correlated_image() -> Image {
    load_pgm(data_path("moon-135x90.pgm")).unwrap()
}
