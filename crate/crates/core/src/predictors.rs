//! Inter-row linear predictors.
//!
//! Each predictor estimates pixel `j` of a row from pixels `j-1, j, j+1` of
//! the rows above and below, with weight `diagonal` on the four diagonal
//! neighbours and `vertical` on the two vertical ones:
//!
//! | kind | diagonal       | vertical       |
//! |------|----------------|----------------|
//! | P1   | 0              | 1/2            |
//! | P2   | 1/6            | 1/6            |
//! | P3   | (2 − √2)/4     | (√2 − 1)/2     |
//!
//! P3 weights neighbours by inverse distance. All weight sets sum to one.
//! Columns outside the row are replaced by the nearest edge column.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    /// Mean of the vertical neighbours.
    P1,
    /// Mean of the six neighbours.
    P2,
    /// Distance-weighted mean of the six neighbours.
    #[default]
    P3,
}

/// Symmetric 2×3 stencil weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub diagonal: f64,
    pub vertical: f64,
}

impl Stencil {
    /// `4·diagonal + 2·vertical`
    pub fn weight_sum(&self) -> f64 {
        4.0 * self.diagonal + 2.0 * self.vertical
    }
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [PredictorKind::P1, PredictorKind::P2, PredictorKind::P3];

    pub fn stencil(self) -> Stencil {
        match self {
            PredictorKind::P1 => Stencil {
                diagonal: 0.0,
                vertical: 0.5,
            },
            PredictorKind::P2 => Stencil {
                diagonal: 1.0 / 6.0,
                vertical: 1.0 / 6.0,
            },
            PredictorKind::P3 => {
                let sqrt2 = std::f64::consts::SQRT_2;
                Stencil {
                    diagonal: (2.0 - sqrt2) / 4.0,
                    vertical: (sqrt2 - 1.0) / 2.0,
                }
            }
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictorKind::P1 => "p1",
            PredictorKind::P2 => "p2",
            PredictorKind::P3 => "p3",
        })
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(PredictorKind::P1),
            "p2" => Ok(PredictorKind::P2),
            "p3" => Ok(PredictorKind::P3),
            other => Err(Error::invalid(format!("unknown predictor '{other}'"))),
        }
    }
}

/// Border handling: out-of-range column indices map to the nearest edge.
#[inline]
fn neighbour(j: usize, offset: isize, n: usize) -> usize {
    (j as isize + offset).clamp(0, n as isize - 1) as usize
}

/// Applies `stencil` to the rows above and below, writing into `out`.
pub fn apply_stencil(stencil: Stencil, upper: &[f64], lower: &[f64], out: &mut [f64]) {
    let n = upper.len();
    assert!(lower.len() == n && out.len() == n, "row lengths differ");
    for (j, o) in out.iter_mut().enumerate() {
        let (l, r) = (neighbour(j, -1, n), neighbour(j, 1, n));
        let diag = upper[l] + upper[r] + lower[l] + lower[r];
        let vert = upper[j] + lower[j];
        *o = stencil.diagonal * diag + stencil.vertical * vert;
    }
}

/// Predicts a row from its upper and lower neighbours.
pub fn predict(kind: PredictorKind, upper: &[f64], lower: &[f64]) -> Result<Vec<f64>> {
    check_len(upper.len(), lower.len())?;
    if upper.is_empty() {
        return Err(Error::invalid("rows must not be empty"));
    }
    let mut out = vec![0.0; upper.len()];
    apply_stencil(kind.stencil(), upper, lower, &mut out);
    Ok(out)
}
