use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Identity,
    #[default]
    Dct,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Identity => "identity",
            BasisKind::Dct => "dct",
        })
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "id" => Ok(BasisKind::Identity),
            "dct" => Ok(BasisKind::Dct),
            other => Err(Error::invalid(format!("unknown basis '{other}'"))),
        }
    }
}

/// Orthonormal `n × n` synthesis matrix `Ψ` (signal `x = Ψ θ`).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityBasis {
    kind: BasisKind,
    matrix: DMatrix<f64>,
}

impl SparsityBasis {
    pub fn new(kind: BasisKind, n: usize) -> Self {
        match kind {
            BasisKind::Identity => SparsityBasis {
                kind,
                matrix: DMatrix::identity(n, n),
            },
            BasisKind::Dct => dct_synthesis(n),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `Ψ θ`
    pub fn synthesize(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.n(), "coefficient length");
        match self.kind {
            BasisKind::Identity => theta.to_vec(),
            BasisKind::Dct => {
                let mut out = DVector::zeros(self.n());
                out.gemv(1.0, &self.matrix, &DVector::from_column_slice(theta), 0.0);
                out.data.into()
            }
        }
    }

    /// `Ψᵀ x`
    pub fn analyze(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n(), "signal length");
        match self.kind {
            BasisKind::Identity => x.to_vec(),
            BasisKind::Dct => {
                let mut out = DVector::zeros(self.n());
                out.gemv_tr(1.0, &self.matrix, &DVector::from_column_slice(x), 0.0);
                out.data.into()
            }
        }
    }
}

/// Orthonormal DCT synthesis matrix: column `k` is the `k`-th DCT-II basis
/// vector, so `Ψᵀ x` is the orthonormal type-II DCT of `x` and `Ψ θ` its
/// inverse (type-III).
pub fn dct_synthesis(n: usize) -> SparsityBasis {
    let nf = n as f64;
    let matrix = DMatrix::from_fn(n, n, |j, k| {
        let alpha = if k == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        alpha * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos()
    });
    SparsityBasis {
        kind: BasisKind::Dct,
        matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(b: &SparsityBasis) -> f64 {
        let m = b.matrix();
        let g = m.transpose() * m - DMatrix::identity(b.n(), b.n());
        g.amax()
    }

    #[test]
    fn constant_signal_has_only_dc() {
        let c = 0.7;
        let theta = dct_synthesis(4).analyze(&[c; 4]);
        assert!((theta[0] - 2.0 * c).abs() < 1e-15);
        assert!(theta[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn dct_is_orthonormal() {
        for n in [1, 2, 3, 8, 17, 64] {
            assert!(orthonormality_error(&dct_synthesis(n)) < 1e-12, "n = {n}");
        }
        let psi = dct_synthesis(8);
        let m = psi.matrix();
        assert!((m * m.transpose() - DMatrix::identity(8, 8)).amax() < 1e-12);
    }

    #[test]
    fn dct_orthonormal_at_full_scale() {
        assert!(orthonormality_error(&dct_synthesis(512)) < 1e-12);
    }

    #[test]
    fn impulse_keeps_unit_norm() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let theta = dct_synthesis(8).analyze(&x);
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthesis_inverts_analysis() {
        let psi = dct_synthesis(11);
        let x: Vec<f64> = (0..11).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = psi.synthesize(&psi.analyze(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("DCT".parse::<BasisKind>().unwrap(), BasisKind::Dct);
        assert_eq!("identity".parse::<BasisKind>().unwrap(), BasisKind::Identity);
        assert!("wavelet".parse::<BasisKind>().is_err());
    }
}
