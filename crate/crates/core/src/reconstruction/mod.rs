//! Joint decoding of line-by-line measurements.
//!
//! The estimate starts from either independent per-row basis pursuit or
//! a joint Kronecker-structured solve, then repeatedly:
//!
//! 1. predicts each row from the previous estimate of its neighbours (the
//!    first and last rows reuse their own previous estimate);
//! 2. measures the prediction with the row's sensing matrix;
//! 3. recovers the prediction error from the measurement residual by basis
//!    pursuit and adds it back.
//!
//! Every row of an iteration reads only the previous iterate (Jacobi
//! sweep), so rows are solved independently and in parallel.

mod config;
mod decoder;

use std::time::Instant;

pub use config::{InitKind, IterationRecord, ReconstructionConfig, ReconstructionTrace, RowFlag};
pub use decoder::{max_relative_change, Estimate, RowDecoder};

use crate::acquisition::{Image, MeasurementSet};
use crate::error::{check_len, Result};
use crate::metrics::mse;

/// Independent basis pursuit on every row.
pub fn init_separate_rows(ms: &MeasurementSet, cfg: &ReconstructionConfig) -> Result<Estimate> {
    cfg.validate()?;
    RowDecoder::new(ms, cfg.basis)?.init_separate_rows(&cfg.solver)
}

/// One basis pursuit over the whole image with the block-diagonal sensing
/// operator composed with the separable 2D synthesis.
pub fn init_kcs(ms: &MeasurementSet, cfg: &ReconstructionConfig) -> Result<Estimate> {
    cfg.validate()?;
    RowDecoder::new(ms, cfg.basis)?.init_kcs(&cfg.solver)
}

/// A single prediction/correction sweep over all rows.
pub fn iterate_once(
    x_prev: &Image,
    ms: &MeasurementSet,
    cfg: &ReconstructionConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    RowDecoder::new(ms, cfg.basis)?.iterate(x_prev, cfg.predictor, &cfg.solver)
}

/// Full decoder: initialization followed by sweeps until the largest
/// relative row change drops below `conv_tol` or `max_iterations` sweeps
/// have run. With a `reference`, the trace records the MSE of every
/// iterate.
pub fn reconstruct(
    ms: &MeasurementSet,
    cfg: &ReconstructionConfig,
    reference: Option<&Image>,
) -> Result<(Image, ReconstructionTrace)> {
    cfg.validate()?;
    let start = Instant::now();
    let decoder = RowDecoder::new(ms, cfg.basis)?;
    let init = match cfg.init {
        InitKind::SeparateRows => decoder.init_separate_rows(&cfg.solver)?,
        InitKind::Kcs => decoder.init_kcs(&cfg.solver)?,
    };
    refine(&decoder, init, cfg, reference, start)
}

/// Runs the sweeps of [`reconstruct`] from an existing initialization.
/// Trace times are measured from `start`.
pub fn refine(
    decoder: &RowDecoder<'_>,
    init: Estimate,
    cfg: &ReconstructionConfig,
    reference: Option<&Image>,
    start: Instant,
) -> Result<(Image, ReconstructionTrace)> {
    refine_observed(decoder, init, cfg, reference, start, |_, _| Ok(()))
}

/// As [`refine`], calling `observe(n, &estimate)` on the initialization
/// (`n = 0`) and after every sweep. An error from `observe` aborts the run.
pub fn refine_observed(
    decoder: &RowDecoder<'_>,
    init: Estimate,
    cfg: &ReconstructionConfig,
    reference: Option<&Image>,
    start: Instant,
    mut observe: impl FnMut(usize, &Estimate) -> Result<()>,
) -> Result<(Image, ReconstructionTrace)> {
    cfg.validate()?;
    let ens = decoder.measurements().ensemble();
    if let Some(r) = reference {
        check_len(ens.n_row(), r.n_row())?;
        check_len(ens.n_col(), r.n_col())?;
    }
    let score = |img: &Image| reference.map(|r| mse(img, r)).transpose();
    let mut trace = ReconstructionTrace::default();
    trace.push(
        IterationRecord {
            iteration: 0,
            mse: score(&init.image)?,
            max_row_change: None,
            seconds: start.elapsed().as_secs_f64(),
        },
        &init.unconverged_rows,
    );
    observe(0, &init)?;

    let mut current = init.image;
    for n in 1..=cfg.max_iterations {
        let next = decoder.iterate(&current, cfg.predictor, &cfg.solver)?;
        let change = max_relative_change(&current, &next.image);
        trace.push(
            IterationRecord {
                iteration: n,
                mse: score(&next.image)?,
                max_row_change: Some(change),
                seconds: start.elapsed().as_secs_f64(),
            },
            &next.unconverged_rows,
        );
        observe(n, &next)?;
        current = next.image;
        if change < cfg.conv_tol {
            trace.converged_at = Some(n);
            break;
        }
    }
    Ok((current, trace))
}
