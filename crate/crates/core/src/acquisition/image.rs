use crate::error::{check_len, Error, Result};

/// Row-major grayscale image. Loaded images are scaled to `[0, 1]`;
/// estimates produced by the decoder may leave that range.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n_row: usize,
    n_col: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(n_row: usize, n_col: usize, pixels: Vec<f64>) -> Result<Self> {
        if n_row == 0 || n_col == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        check_len(n_row * n_col, pixels.len())?;
        Ok(Image {
            n_row,
            n_col,
            pixels,
        })
    }

    pub fn zeros(n_row: usize, n_col: usize) -> Self {
        Image::from_fn(n_row, n_col, |_, _| 0.0)
    }

    pub fn from_fn(n_row: usize, n_col: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n_row > 0 && n_col > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(n_row * n_col);
        for i in 0..n_row {
            for j in 0..n_col {
                pixels.push(f(i, j));
            }
        }
        Image {
            n_row,
            n_col,
            pixels,
        }
    }

    /// Builds an image from equally long rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_row = rows.len();
        let n_col = rows.first().map_or(0, Vec::len);
        for r in &rows {
            check_len(n_col, r.len())?;
        }
        Image::new(n_row, n_col, rows.concat())
    }

    pub fn n_row(&self) -> usize {
        self.n_row
    }

    pub fn n_col(&self) -> usize {
        self.n_col
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.n_col + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.pixels[i * self.n_col..(i + 1) * self.n_col]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.pixels[i * self.n_col..(i + 1) * self.n_col]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.pixels.chunks_exact(self.n_col)
    }

    /// Rows `start..end` as a new image.
    pub fn crop_rows(&self, start: usize, end: usize) -> Result<Image> {
        if start >= end || end > self.n_row {
            return Err(Error::invalid(format!(
                "row range {start}..{end} outside 0..{}",
                self.n_row
            )));
        }
        Image::new(
            end - start,
            self.n_col,
            self.pixels[start * self.n_col..end * self.n_col].to_vec(),
        )
    }
}
