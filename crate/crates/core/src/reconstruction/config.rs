use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::predictors::PredictorKind;
use crate::solvers::SolverConfig;
use crate::tensor::BasisKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InitKind {
    /// Independent basis pursuit per row.
    #[default]
    SeparateRows,
    /// Joint Kronecker compressed sensing solve.
    Kcs,
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::SeparateRows => "srr",
            InitKind::Kcs => "kcs",
        })
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srr" | "separate" => Ok(InitKind::SeparateRows),
            "kcs" => Ok(InitKind::Kcs),
            other => Err(Error::invalid(format!("unknown initialization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub predictor: PredictorKind,
    pub init: InitKind,
    pub max_iterations: usize,
    /// Stop once `max_i ‖Δ row_i‖₂ / ‖row_i‖₂` falls below this.
    pub conv_tol: f64,
    pub solver: SolverConfig,
    pub basis: BasisKind,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            predictor: PredictorKind::P3,
            init: InitKind::SeparateRows,
            max_iterations: 30,
            conv_tol: 1e-4,
            solver: SolverConfig::default(),
            basis: BasisKind::Dct,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.conv_tol > 0.0) {
            return Err(Error::invalid(format!(
                "conv_tol must be positive, got {}",
                self.conv_tol
            )));
        }
        self.solver.validate()
    }
}

/// One entry per iterate; iteration 0 is the initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mse: Option<f64>,
    /// `None` for the initialization.
    pub max_row_change: Option<f64>,
    /// Seconds since the start of the reconstruction.
    pub seconds: f64,
}

/// A row whose basis pursuit solve hit the iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowFlag {
    pub iteration: usize,
    pub row: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReconstructionTrace {
    pub records: Vec<IterationRecord>,
    /// First sweep whose relative change was below the tolerance.
    pub converged_at: Option<usize>,
    pub flagged_rows: Vec<RowFlag>,
}

impl ReconstructionTrace {
    pub(crate) fn push(&mut self, record: IterationRecord, unconverged: &[usize]) {
        let iteration = record.iteration;
        self.flagged_rows
            .extend(unconverged.iter().map(|&row| RowFlag { iteration, row }));
        self.records.push(record);
    }

    /// Number of sweeps after the initialization.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn initial_mse(&self) -> Option<f64> {
        self.records.first().and_then(|r| r.mse)
    }

    pub fn final_mse(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.mse)
    }

    pub fn mse_series(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.mse).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ReconstructionConfig::default();
        assert_eq!(cfg.predictor, PredictorKind::P3);
        assert_eq!(cfg.init, InitKind::SeparateRows);
        assert_eq!(cfg.basis, BasisKind::Dct);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_tolerance() {
        let cfg = ReconstructionConfig {
            conv_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_init() {
        assert_eq!("KCS".parse::<InitKind>().unwrap(), InitKind::Kcs);
        assert_eq!("srr".parse::<InitKind>().unwrap(), InitKind::SeparateRows);
        assert!("dense".parse::<InitKind>().is_err());
    }
}
