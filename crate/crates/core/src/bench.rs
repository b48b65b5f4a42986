//! Benchmark harness: every `(method, M, seed)` combination on one image,
//! with CSV output of the summary records, per-run traces and plot data.
//!
//! Methods:
//!
//! * `SRR`  separate-row basis pursuit (initialization only);
//! * `ISRR` iterative prediction/correction started from SRR;
//! * `KCS`  joint Kronecker compressed sensing (initialization only);
//! * `IKCS` iterative prediction/correction started from KCS;
//! * `OMP`  orthogonal matching pursuit on the joint operator, using the
//!   same `M·N_ROW` measurements.
//!
//! Real numbers in every CSV are written in scientific notation with six
//! significant digits. Files are written to a temporary sibling and renamed
//! into place.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acquisition::{acquire, load_pgm, Image};
use crate::error::{Error, Result};
use crate::metrics::{gain_db_or_zero, mse};
use crate::predictors::PredictorKind;
use crate::reconstruction::{
    refine, Estimate, InitKind, ReconstructionConfig, ReconstructionTrace, RowDecoder,
};
use crate::solvers::{omp, SolverConfig};
use crate::tensor::{kron_synthesis_operator, BasisKind, BlockDiagonal, Composed, LinearOperator, SparsityBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Srr,
    Isrr,
    Kcs,
    Ikcs,
    Omp,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Srr => "SRR",
            Method::Isrr => "ISRR",
            Method::Kcs => "KCS",
            Method::Ikcs => "IKCS",
            Method::Omp => "OMP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srr" => Ok(Method::Srr),
            "isrr" => Ok(Method::Isrr),
            "kcs" => Ok(Method::Kcs),
            "ikcs" => Ok(Method::Ikcs),
            "omp" => Ok(Method::Omp),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

fn default_max_iterations() -> usize {
    30
}

fn default_conv_tol() -> f64 {
    1e-4
}

/// Benchmark description, loadable from TOML:
///
/// ```toml
/// image = "astronaut.pgm"
/// m_values = [32, 64]
/// methods = ["srr", "isrr"]
/// seeds = [1, 2]
/// output = "results.csv"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub image: PathBuf,
    pub m_values: Vec<usize>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub predictor: PredictorKind,
    #[serde(default)]
    pub basis: BasisKind,
    pub output: PathBuf,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    /// Overrides the default basis pursuit iteration cap.
    #[serde(default)]
    pub bp_max_iter: Option<usize>,
}

impl BenchmarkSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let mut spec = Self::from_toml_str(&text)?;
        // relative paths are resolved against the spec's directory
        if let Some(dir) = path.parent() {
            if spec.image.is_relative() {
                spec.image = dir.join(&spec.image);
            }
            if spec.output.is_relative() {
                spec.output = dir.join(&spec.output);
            }
        }
        Ok(spec)
    }

    /// Checks everything that does not need the image.
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::Spec(
                "m_values, methods and seeds must be non-empty".into(),
            ));
        }
        if self.m_values.contains(&0) {
            return Err(Error::invalid("M must be positive"));
        }
        self.reconstruction_config(InitKind::SeparateRows).validate()
    }

    fn reconstruction_config(&self, init: InitKind) -> ReconstructionConfig {
        let mut solver = SolverConfig::default();
        if let Some(cap) = self.bp_max_iter {
            solver.bp_max_iter = cap;
        }
        ReconstructionConfig {
            predictor: self.predictor,
            init,
            max_iterations: self.max_iterations,
            conv_tol: self.conv_tol,
            solver,
            basis: self.basis,
        }
    }
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub method: Method,
    pub m: usize,
    pub seed: u64,
    pub init_mse: f64,
    pub final_mse: f64,
    /// `10·log10(init_mse / final_mse)`, 0 for single-shot methods.
    pub gain_db: f64,
    /// Sweeps until convergence (or until the cap).
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
}

/// MSE per iterate of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub m: usize,
    pub seed: u64,
    /// `(iteration, mse)`, iteration 0 first.
    pub points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub records: Vec<BenchmarkRecord>,
    pub traces: Vec<RunTrace>,
}

/// Mean and range of the final MSE over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub m: usize,
    pub runs: usize,
    pub mean_final_mse: f64,
    pub min_final_mse: f64,
    pub max_final_mse: f64,
    pub mean_gain_db: f64,
}

pub fn fmt_real(v: f64) -> String {
    format!("{v:.5e}")
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::file(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::file(path, e))?;
    tmp.persist(path).map_err(|e| Error::file(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub const RECORD_HEADER: [&str; 9] = [
    "method",
    "m",
    "seed",
    "init_mse",
    "final_mse",
    "gain_db",
    "iterations",
    "converged",
    "wall_seconds",
];

pub fn records_csv(records: &[BenchmarkRecord]) -> Result<Vec<u8>> {
    csv_bytes(
        &RECORD_HEADER,
        records.iter().map(|r| {
            vec![
                r.method.label().to_string(),
                r.m.to_string(),
                r.seed.to_string(),
                fmt_real(r.init_mse),
                fmt_real(r.final_mse),
                fmt_real(r.gain_db),
                r.iterations.to_string(),
                r.converged.to_string(),
                fmt_real(r.wall_seconds),
            ]
        }),
    )
}

/// Per-iteration CSV of one reconstruction: `iteration,mse,max_row_change,seconds`.
/// Missing values are left empty.
pub fn trace_csv(trace: &ReconstructionTrace) -> Result<Vec<u8>> {
    let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
    csv_bytes(
        &["iteration", "mse", "max_row_change", "seconds"],
        trace.records.iter().map(|r| {
            vec![
                r.iteration.to_string(),
                opt(r.mse),
                opt(r.max_row_change),
                fmt_real(r.seconds),
            ]
        }),
    )
}

/// Plot data with columns `method,M,iteration,mse`, ordered by method,
/// then `M`, then iteration.
///
/// Runs that share `(method, M)` (different seeds) are averaged. A run
/// that stopped early contributes its last value to later iterations.
pub fn plot_data_csv(traces: &[RunTrace]) -> Result<Vec<u8>> {
    let mut groups: BTreeMap<(Method, usize), Vec<&RunTrace>> = BTreeMap::new();
    for t in traces.iter().filter(|t| !t.points.is_empty()) {
        groups.entry((t.method, t.m)).or_default().push(t);
    }
    let mut rows = Vec::new();
    for ((method, m), runs) in groups {
        let len = runs.iter().map(|r| r.points.len()).max().unwrap_or(0);
        for k in 0..len {
            let sum: f64 = runs
                .iter()
                .map(|r| r.points[k.min(r.points.len() - 1)].1)
                .sum();
            rows.push(vec![
                method.label().to_string(),
                m.to_string(),
                k.to_string(),
                fmt_real(sum / runs.len() as f64),
            ]);
        }
    }
    csv_bytes(&["method", "M", "iteration", "mse"], rows)
}

pub fn emit_plot_data(traces: &[RunTrace], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &plot_data_csv(traces)?)
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bench".into());
    output.with_file_name(format!("{stem}{suffix}"))
}

/// Path of the per-run trace CSV for a run.
pub fn trace_path(output: &Path, method: Method, m: usize, seed: u64) -> PathBuf {
    sibling(
        output,
        &format!(".trace-{}-m{m}-seed{seed}.csv", method.label().to_lowercase()),
    )
}

/// Path of the averaged plot-data CSV.
pub fn plot_path(output: &Path) -> PathBuf {
    sibling(output, ".plot.csv")
}

struct Run {
    record: BenchmarkRecord,
    trace: ReconstructionTrace,
}

fn single_shot(method: Method, m: usize, seed: u64, image: &Image, est: &Estimate, seconds: f64) -> Result<Run> {
    let e = mse(&est.image, image)?;
    let mut trace = ReconstructionTrace::default();
    trace.records.push(crate::reconstruction::IterationRecord {
        iteration: 0,
        mse: Some(e),
        max_row_change: None,
        seconds,
    });
    Ok(Run {
        record: BenchmarkRecord {
            method,
            m,
            seed,
            init_mse: e,
            final_mse: e,
            gain_db: 0.0,
            iterations: 0,
            converged: est.unconverged_rows.is_empty(),
            wall_seconds: seconds,
        },
        trace,
    })
}

fn iterative(
    method: Method,
    m: usize,
    seed: u64,
    image: &Image,
    decoder: &RowDecoder<'_>,
    init: &Estimate,
    init_seconds: f64,
    cfg: &ReconstructionConfig,
) -> Result<Run> {
    let start = Instant::now() - std::time::Duration::from_secs_f64(init_seconds);
    let (_, trace) = refine(decoder, init.clone(), cfg, Some(image), start)?;
    let init_mse = trace.initial_mse().unwrap_or(f64::NAN);
    let final_mse = trace.final_mse().unwrap_or(f64::NAN);
    Ok(Run {
        record: BenchmarkRecord {
            method,
            m,
            seed,
            init_mse,
            final_mse,
            gain_db: gain_db_or_zero(init_mse, final_mse),
            iterations: trace.iterations(),
            converged: trace.converged_at.is_some(),
            wall_seconds: trace.records.last().map_or(0.0, |r| r.seconds),
        },
        trace,
    })
}

fn omp_run(m: usize, seed: u64, image: &Image, decoder: &RowDecoder<'_>, basis: BasisKind) -> Result<Run> {
    let start = Instant::now();
    let ms = decoder.measurements();
    let ens = ms.ensemble();
    let blocks = (0..ens.n_row()).map(|i| ens.row_matrix(i)).collect::<Result<_>>()?;
    let op = Composed::new(
        BlockDiagonal::from_blocks(blocks),
        kron_synthesis_operator(
            SparsityBasis::new(basis, ens.n_row()),
            SparsityBasis::new(basis, ens.n_col()),
        ),
    );
    let sol = omp(&op, ms.values(), &SolverConfig::default())?;
    let pixels = op.inner.apply(&sol.theta)?;
    let est = Estimate {
        image: Image::new(ens.n_row(), ens.n_col(), pixels)?,
        unconverged_rows: Vec::new(),
    };
    let mut run = single_shot(Method::Omp, m, seed, image, &est, start.elapsed().as_secs_f64())?;
    run.record.iterations = sol.iterations_used;
    run.record.converged = sol.converged;
    Ok(run)
}

/// Runs every `(method, M, seed)` of `spec` and returns the results without
/// writing any file.
pub fn evaluate(spec: &BenchmarkSpec) -> Result<(Vec<BenchmarkRecord>, Vec<(RunTrace, ReconstructionTrace)>)> {
    spec.validate()?;
    let image = load_pgm(&spec.image)?;
    for &m in &spec.m_values {
        if m >= image.n_col() {
            return Err(Error::invalid(format!(
                "M must be below N_COL = {} (got {m})",
                image.n_col()
            )));
        }
    }
    let wants = |ms: &[Method]| spec.methods.iter().any(|m| ms.contains(m));
    let mut runs: Vec<Run> = Vec::new();
    for &m in &spec.m_values {
        for &seed in &spec.seeds {
            let ms = acquire(&image, m, seed)?;
            let decoder = RowDecoder::new(&ms, spec.basis)?;
            let solver = spec.reconstruction_config(InitKind::SeparateRows).solver;

            if wants(&[Method::Srr, Method::Isrr]) {
                let t = Instant::now();
                let init = decoder.init_separate_rows(&solver)?;
                let secs = t.elapsed().as_secs_f64();
                if spec.methods.contains(&Method::Srr) {
                    runs.push(single_shot(Method::Srr, m, seed, &image, &init, secs)?);
                }
                if spec.methods.contains(&Method::Isrr) {
                    let cfg = spec.reconstruction_config(InitKind::SeparateRows);
                    runs.push(iterative(Method::Isrr, m, seed, &image, &decoder, &init, secs, &cfg)?);
                }
            }
            if wants(&[Method::Kcs, Method::Ikcs]) {
                let t = Instant::now();
                let init = decoder.init_kcs(&solver)?;
                let secs = t.elapsed().as_secs_f64();
                if spec.methods.contains(&Method::Kcs) {
                    runs.push(single_shot(Method::Kcs, m, seed, &image, &init, secs)?);
                }
                if spec.methods.contains(&Method::Ikcs) {
                    let cfg = spec.reconstruction_config(InitKind::Kcs);
                    runs.push(iterative(Method::Ikcs, m, seed, &image, &decoder, &init, secs, &cfg)?);
                }
            }
            if spec.methods.contains(&Method::Omp) {
                runs.push(omp_run(m, seed, &image, &decoder, spec.basis)?);
            }
        }
    }

    let position = |method: Method| spec.methods.iter().position(|x| *x == method);
    let m_pos = |m: usize| spec.m_values.iter().position(|x| *x == m);
    let s_pos = |s: u64| spec.seeds.iter().position(|x| *x == s);
    runs.sort_by_key(|r| (position(r.record.method), m_pos(r.record.m), s_pos(r.record.seed)));

    let records = runs.iter().map(|r| r.record.clone()).collect();
    let traces = runs
        .into_iter()
        .map(|r| {
            let points = r
                .trace
                .records
                .iter()
                .filter_map(|p| p.mse.map(|e| (p.iteration, e)))
                .collect();
            (
                RunTrace {
                    method: r.record.method,
                    m: r.record.m,
                    seed: r.record.seed,
                    points,
                },
                r.trace,
            )
        })
        .collect();
    Ok((records, traces))
}

/// Runs the benchmark and writes the summary CSV to `spec.output`, one
/// trace CSV per run next to it (see [`trace_path`]) and the averaged plot
/// data (see [`plot_path`]). Nothing is written if any run fails.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    let (records, traces) = evaluate(spec)?;
    let mut files = vec![(spec.output.clone(), records_csv(&records)?)];
    for (run, full) in &traces {
        files.push((trace_path(&spec.output, run.method, run.m, run.seed), trace_csv(full)?));
    }
    let traces: Vec<RunTrace> = traces.into_iter().map(|(r, _)| r).collect();
    files.push((plot_path(&spec.output), plot_data_csv(&traces)?));
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    Ok(BenchmarkReport { records, traces })
}

/// Mean and range of the final MSE per `(method, M)`, in record order.
pub fn summarize(records: &[BenchmarkRecord]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    for r in records {
        match out.iter_mut().find(|s| s.method == r.method && s.m == r.m) {
            Some(s) => {
                let n = s.runs as f64;
                s.mean_final_mse = (s.mean_final_mse * n + r.final_mse) / (n + 1.0);
                s.mean_gain_db = (s.mean_gain_db * n + r.gain_db) / (n + 1.0);
                s.min_final_mse = s.min_final_mse.min(r.final_mse);
                s.max_final_mse = s.max_final_mse.max(r.final_mse);
                s.runs += 1;
            }
            None => out.push(Summary {
                method: r.method,
                m: r.m,
                runs: 1,
                mean_final_mse: r.final_mse,
                min_final_mse: r.final_mse,
                max_final_mse: r.final_mse,
                mean_gain_db: r.gain_db,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(method: Method, m: usize, seed: u64, mses: &[f64]) -> RunTrace {
        RunTrace {
            method,
            m,
            seed,
            points: mses.iter().copied().enumerate().collect(),
        }
    }

    fn lines(bytes: &[u8]) -> Vec<String> {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .map(str::to_string)
            .collect()
    }

    #[test]
    fn empty_plot_data_is_header_only() {
        assert_eq!(lines(&plot_data_csv(&[]).unwrap()), vec!["method,M,iteration,mse"]);
    }

    #[test]
    fn plot_rows_count_and_order() {
        let single = plot_data_csv(&[run(Method::Isrr, 32, 1, &[4.0, 3.0, 2.0, 1.0])]).unwrap();
        assert_eq!(lines(&single).len(), 5);

        let two = plot_data_csv(&[
            run(Method::Ikcs, 64, 1, &[0.5, 0.25]),
            run(Method::Isrr, 64, 1, &[1.0, 0.5, 0.125]),
        ])
        .unwrap();
        let l = lines(&two);
        assert_eq!(
            l[1..],
            [
                "ISRR,64,0,1.00000e0",
                "ISRR,64,1,5.00000e-1",
                "ISRR,64,2,1.25000e-1",
                "IKCS,64,0,5.00000e-1",
                "IKCS,64,1,2.50000e-1",
            ]
        );
    }

    #[test]
    fn plot_averages_seeds_with_carry_forward() {
        let csv = plot_data_csv(&[
            run(Method::Isrr, 8, 1, &[4.0, 2.0]),
            run(Method::Isrr, 8, 2, &[2.0, 1.0, 0.5]),
        ])
        .unwrap();
        let l = lines(&csv);
        assert_eq!(l[1..], ["ISRR,8,0,3.00000e0", "ISRR,8,1,1.50000e0", "ISRR,8,2,1.25000e0"]);
    }

    #[test]
    fn spec_parsing() {
        let spec = BenchmarkSpec::from_toml_str(
            r#"
            image = "img.pgm"
            m_values = [32, 64]
            methods = ["srr", "isrr", "omp"]
            seeds = [3]
            output = "out.csv"
            predictor = "p2"
            "#,
        )
        .unwrap();
        assert_eq!(spec.methods, vec![Method::Srr, Method::Isrr, Method::Omp]);
        assert_eq!(spec.predictor, PredictorKind::P2);
        assert_eq!(spec.basis, BasisKind::Dct);
        assert_eq!(spec.max_iterations, 30);
        spec.validate().unwrap();

        let bad = BenchmarkSpec::from_toml_str(
            "image = 'a'\nm_values = []\nmethods = ['srr']\nseeds = [1]\noutput = 'o'",
        )
        .unwrap();
        assert!(bad.validate().is_err());
        assert!(BenchmarkSpec::from_toml_str("image = 1").is_err());
    }

    #[test]
    fn record_formatting() {
        let rec = BenchmarkRecord {
            method: Method::Isrr,
            m: 32,
            seed: 7,
            init_mse: 2.17e-2,
            final_mse: 1.56e-3,
            gain_db: gain_db_or_zero(2.17e-2, 1.56e-3),
            iterations: 10,
            converged: true,
            wall_seconds: 1.5,
        };
        let l = lines(&records_csv(&[rec]).unwrap());
        assert_eq!(l[0], RECORD_HEADER.join(","));
        assert_eq!(l[1], "ISRR,32,7,2.17000e-2,1.56000e-3,1.14334e1,10,true,1.50000e0");
    }

    #[test]
    fn summary_mean_and_range() {
        let mk = |seed, final_mse| BenchmarkRecord {
            method: Method::Srr,
            m: 8,
            seed,
            init_mse: final_mse,
            final_mse,
            gain_db: 0.0,
            iterations: 0,
            converged: true,
            wall_seconds: 0.0,
        };
        let s = summarize(&[mk(1, 1.0), mk(2, 3.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean_final_mse, s[0].min_final_mse, s[0].max_final_mse), (2.0, 1.0, 3.0));
    }
}
