//! Error measures.

use crate::acquisition::Image;
use crate::error::{check_len, Error, Result};

/// Mean squared pixel difference.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_len(a.n_row(), b.n_row())?;
    check_len(a.n_col(), b.n_col())?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

/// `10·log10(mse_init / mse_final)`.
pub fn gain_db(mse_init: f64, mse_final: f64) -> Result<f64> {
    if !(mse_init > 0.0 && mse_final > 0.0) {
        return Err(Error::invalid(format!(
            "gain needs positive MSE values, got {mse_init} and {mse_final}"
        )));
    }
    Ok(10.0 * (mse_init / mse_final).log10())
}

/// Like [`gain_db`], but 0 when either value is not positive.
pub(crate) fn gain_db_or_zero(mse_init: f64, mse_final: f64) -> f64 {
    gain_db(mse_init, mse_final).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let ones = Image::from_fn(3, 4, |_, _| 1.0);
        let zeros = Image::zeros(3, 4);
        assert_eq!(mse(&ones, &ones).unwrap(), 0.0);
        assert_eq!(mse(&zeros, &ones).unwrap(), 1.0);
        let a = Image::new(1, 2, vec![0.0, 0.0]).unwrap();
        let b = Image::new(1, 2, vec![0.3, 0.4]).unwrap();
        assert!((mse(&a, &b).unwrap() - 0.125).abs() < 1e-15);
        assert!(mse(&a, &ones).is_err());
    }

    #[test]
    fn gain_examples() {
        assert!((gain_db(4.16e-2, 3.96e-3).unwrap() - 10.2).abs() < 0.05);
        assert!((gain_db(2.17e-2, 1.56e-3).unwrap() - 11.4).abs() < 0.05);
        assert_eq!(gain_db(0.3, 0.3).unwrap(), 0.0);
        assert!(gain_db(0.0, 1.0).is_err());
        assert!(gain_db(1.0, -1.0).is_err());
    }

    #[test]
    fn gain_is_antisymmetric() {
        for (a, b) in [(1e-3, 2e-2), (0.5, 0.25), (7.0, 7.5)] {
            assert!((gain_db(a, b).unwrap() + gain_db(b, a).unwrap()).abs() < 1e-12);
        }
    }
}
