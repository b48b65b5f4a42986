//! Python bindings. Images and vectors cross the boundary as plain lists
//! of floats; matrices as lists of rows.

use pyo3::exceptions::{PyIOError, PyValueError};
use nalgebra::DMatrix;
use pyo3::prelude::*;

use linescan_core as core;
use linescan_core::acquisition::{load_pgm as load, read_measurements, write_measurements, write_pgm as write};
use linescan_core::{BasisKind, InitKind, PredictorKind, ReconstructionConfig, SolverConfig};

fn to_py(e: core::Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> PyResult<T> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {s:?}")))
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_row_iterator(
        n_rows,
        n_cols,
        rows.into_iter().flatten(),
    ))
}

/// Grayscale image with pixels on a [0, 1] scale.
#[pyclass(module = "linescan", frozen)]
struct Image(core::Image);

#[pymethods]
impl Image {
    #[new]
    fn new(n_row: usize, n_col: usize, pixels: Vec<f64>) -> PyResult<Self> {
        core::Image::new(n_row, n_col, pixels).map(Image).map_err(to_py)
    }

    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        core::Image::from_rows(rows).map(Image).map_err(to_py)
    }

    #[getter]
    fn n_row(&self) -> usize {
        self.0.n_row()
    }

    #[getter]
    fn n_col(&self) -> usize {
        self.0.n_col()
    }

    #[getter]
    fn pixels(&self) -> Vec<f64> {
        self.0.pixels().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.0.n_row() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.0.row(i).to_vec())
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().map(<[f64]>::to_vec).collect()
    }

    fn __repr__(&self) -> String {
        format!("Image(n_row={}, n_col={})", self.0.n_row(), self.0.n_col())
    }
}

/// Measurements of every row plus the ensemble that produced them.
#[pyclass(module = "linescan", frozen)]
struct MeasurementSet(core::MeasurementSet);

#[pymethods]
impl MeasurementSet {
    #[getter]
    fn n_row(&self) -> usize {
        self.0.ensemble().n_row()
    }

    #[getter]
    fn n_col(&self) -> usize {
        self.0.ensemble().n_col()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.ensemble().m()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.ensemble().master_seed()
    }

    #[getter]
    fn compression_ratio(&self) -> f64 {
        self.0.ensemble().compression_ratio()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.n_row() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.0.row(i).to_vec())
    }

    /// Sensing matrix of row `i` as a list of rows.
    fn sensing_matrix(&self, i: usize) -> PyResult<Vec<Vec<f64>>> {
        let phi = self.0.ensemble().row_matrix(i).map_err(to_py)?;
        Ok(phi.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        write_measurements(&self.0, path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        read_measurements(path).map(MeasurementSet).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "MeasurementSet(n_row={}, n_col={}, m={}, seed={})",
            self.n_row(),
            self.n_col(),
            self.m(),
            self.seed()
        )
    }
}

#[pyfunction]
fn load_pgm(path: std::path::PathBuf) -> PyResult<Image> {
    load(path).map(Image).map_err(to_py)
}

#[pyfunction]
fn write_pgm(image: &Image, path: std::path::PathBuf) -> PyResult<()> {
    write(&image.0, path).map_err(to_py)
}

#[pyfunction]
fn acquire(image: &Image, m: usize, seed: u64) -> PyResult<MeasurementSet> {
    core::acquire(&image.0, m, seed).map(MeasurementSet).map_err(to_py)
}

/// Returns `(image, trace)` where `trace` is a list of
/// `(iteration, mse or None, max_row_change or None)`.
#[pyfunction]
#[pyo3(signature = (ms, *, init="srr", predictor="p3", basis="dct", max_iter=30, tol=1e-4, bp_max_iter=None, reference=None))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn reconstruct(
    py: Python<'_>,
    ms: &MeasurementSet,
    init: &str,
    predictor: &str,
    basis: &str,
    max_iter: usize,
    tol: f64,
    bp_max_iter: Option<usize>,
    reference: Option<&Image>,
) -> PyResult<(Image, Vec<(usize, Option<f64>, Option<f64>)>)> {
    let mut cfg = ReconstructionConfig {
        init: parse::<InitKind>("init", init)?,
        predictor: parse::<PredictorKind>("predictor", predictor)?,
        basis: parse::<BasisKind>("basis", basis)?,
        max_iterations: max_iter,
        conv_tol: tol,
        ..Default::default()
    };
    if let Some(cap) = bp_max_iter {
        cfg.solver.bp_max_iter = cap;
    }
    let reference = reference.map(|r| &r.0);
    let (image, trace) = py
        .detach(|| core::reconstruct(&ms.0, &cfg, reference))
        .map_err(to_py)?;
    let points = trace
        .records
        .iter()
        .map(|r| (r.iteration, r.mse, r.max_row_change))
        .collect();
    Ok((Image(image), points))
}

#[pyfunction]
fn predict(kind: &str, upper: Vec<f64>, lower: Vec<f64>) -> PyResult<Vec<f64>> {
    core::predict(parse("predictor", kind)?, &upper, &lower).map_err(to_py)
}

#[pyfunction]
fn mse(a: &Image, b: &Image) -> PyResult<f64> {
    core::metrics::mse(&a.0, &b.0).map_err(to_py)
}

#[pyfunction]
fn gain_db(mse_init: f64, mse_final: f64) -> PyResult<f64> {
    core::metrics::gain_db(mse_init, mse_final).map_err(to_py)
}

/// `min ‖θ‖₁` subject to `A θ = y`. Returns `(theta, converged)`.
#[pyfunction]
#[pyo3(signature = (a, y, *, max_iter=None))]
fn basis_pursuit(a: Vec<Vec<f64>>, y: Vec<f64>, max_iter: Option<usize>) -> PyResult<(Vec<f64>, bool)> {
    let a = matrix(a)?;
    let mut cfg = SolverConfig::default();
    if let Some(cap) = max_iter {
        cfg.bp_max_iter = cap;
    }
    let op = core::tensor::DenseOperator(a);
    let sol = core::basis_pursuit(&op, &y, &cfg).map_err(to_py)?;
    Ok((sol.theta, sol.converged))
}

/// Orthogonal matching pursuit. Returns `(theta, converged)`.
#[pyfunction]
fn omp(a: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<(Vec<f64>, bool)> {
    let op = core::tensor::DenseOperator(matrix(a)?);
    let sol = core::omp(&op, &y, &SolverConfig::default()).map_err(to_py)?;
    Ok((sol.theta, sol.converged))
}

#[pymodule]
fn linescan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Image>()?;
    m.add_class::<MeasurementSet>()?;
    m.add_function(wrap_pyfunction!(load_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(write_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(acquire, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(gain_db, m)?)?;
    m.add_function(wrap_pyfunction!(basis_pursuit, m)?)?;
    m.add_function(wrap_pyfunction!(omp, m)?)?;
    Ok(())
}
