//! `linescan`: acquire, reconstruct and benchmark line-by-line compressed
//! sensing from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O or file-format error,
//! 4 domain violation (e.g. `M >= N_COL`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linescan::acquisition::{load_pgm, read_measurements, write_measurements, write_pgm};
use linescan::bench::{
    records_csv, run_benchmark, summarize, trace_csv, write_atomic, BenchmarkSpec, Method,
};
use linescan::metrics::gain_db;
use linescan::{acquire, reconstruct, BasisKind, Error, InitKind, PredictorKind, ReconstructionConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DOMAIN: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "linescan", version, about = "Line-by-line compressed sensing of images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure every row of a PGM image and write a measurement file.
    Acquire(AcquireArgs),
    /// Decode a measurement file into a PGM image.
    Reconstruct(ReconstructArgs),
    /// Run a benchmark described by a TOML spec or by flags.
    Bench(BenchArgs),
    /// Print the header of a measurement file.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
struct AcquireArgs {
    #[arg(long)]
    input: PathBuf,
    /// Measurements per row.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "srr")]
    init: InitKind,
    #[arg(long, default_value = "p3")]
    predictor: PredictorKind,
    #[arg(long, default_value = "dct")]
    basis: BasisKind,
    /// Sweep cap; 0 returns the initialization.
    #[arg(long, default_value_t = ReconstructionConfig::default().max_iterations)]
    max_iter: usize,
    /// Convergence threshold on the largest relative row change.
    #[arg(long, default_value_t = ReconstructionConfig::default().conv_tol)]
    tol: f64,
    /// Basis pursuit iteration cap per solve.
    #[arg(long)]
    bp_max_iter: Option<usize>,
    /// Original image; enables MSE reporting.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// TOML benchmark spec, used in place of the remaining flags.
    #[arg(long, conflicts_with_all = ["image", "m", "methods", "seeds", "output"])]
    spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "spec")]
    image: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required_unless_present = "spec")]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', required_unless_present = "spec")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, default_value = "p3")]
    predictor: PredictorKind,
    #[arg(long, default_value = "dct")]
    basis: BasisKind,
    #[arg(long, required_unless_present = "spec")]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = ReconstructionConfig::default().max_iterations)]
    max_iter: usize,
    #[arg(long, default_value_t = ReconstructionConfig::default().conv_tol)]
    tol: f64,
    #[arg(long)]
    bp_max_iter: Option<usize>,
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[arg(long)]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Acquire(a) => cmd_acquire(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Info(a) => cmd_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_DOMAIN })
        }
    }
}

fn cmd_acquire(a: AcquireArgs) -> Result<(), Error> {
    let image = load_pgm(&a.input)?;
    if a.m == 0 || a.m >= image.n_col() {
        return Err(Error::InvalidArgument(format!(
            "M must satisfy 0 < M < N_COL = {} (got {})",
            image.n_col(),
            a.m
        )));
    }
    let ms = acquire(&image, a.m, a.seed)?;
    write_measurements(&ms, &a.output)?;
    let ens = ms.ensemble();
    println!("n_row {}", ens.n_row());
    println!("n_col {}", ens.n_col());
    println!("m {}", ens.m());
    println!("compression ratio {:.2}", ens.compression_ratio());
    Ok(())
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<(), Error> {
    let ms = read_measurements(&a.input)?;
    let reference = a.reference.as_deref().map(load_pgm).transpose()?;
    let mut cfg = ReconstructionConfig {
        predictor: a.predictor,
        init: a.init,
        max_iterations: a.max_iter,
        conv_tol: a.tol,
        basis: a.basis,
        ..Default::default()
    };
    if let Some(cap) = a.bp_max_iter {
        cfg.solver.bp_max_iter = cap;
    }
    let (image, trace) = reconstruct(&ms, &cfg, reference.as_ref())?;
    write_pgm(&image, &a.output)?;
    if let Some(path) = &a.trace {
        write_atomic(path, &trace_csv(&trace)?)?;
    }

    let last = trace.iterations();
    let rows: Vec<usize> = {
        let mut r: Vec<usize> = trace
            .flagged_rows
            .iter()
            .filter(|f| f.iteration == last)
            .map(|f| f.row)
            .collect();
        r.dedup();
        r
    };
    if !rows.is_empty() {
        eprintln!(
            "warning: basis pursuit hit its iteration cap on {} row(s) in the final iterate: {}",
            rows.len(),
            abbreviate(&rows)
        );
    }

    println!("iterations {last}");
    match trace.converged_at {
        Some(n) => println!("converged at {n}"),
        None => println!("converged no"),
    }
    if let (Some(init), Some(fin)) = (trace.initial_mse(), trace.final_mse()) {
        println!("init mse {init:.5e}");
        println!("final mse {fin:.5e}");
        if init > 0.0 && fin > 0.0 {
            println!("gain db {:.2}", gain_db(init, fin)?);
        }
    }
    Ok(())
}

fn abbreviate(rows: &[usize]) -> String {
    const SHOWN: usize = 20;
    let mut s = rows
        .iter()
        .take(SHOWN)
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(",");
    if rows.len() > SHOWN {
        s.push_str(&format!(",... ({} more)", rows.len() - SHOWN));
    }
    s
}

fn cmd_bench(a: BenchArgs) -> Result<(), Error> {
    let spec = match &a.spec {
        Some(path) => BenchmarkSpec::from_toml_file(path)?,
        None => BenchmarkSpec {
            image: a.image.clone().unwrap_or_default(),
            m_values: a.m.clone(),
            methods: a.methods.clone(),
            seeds: a.seeds.clone(),
            predictor: a.predictor,
            basis: a.basis,
            output: a.output.clone().unwrap_or_default(),
            max_iterations: a.max_iter,
            conv_tol: a.tol,
            bp_max_iter: a.bp_max_iter,
        },
    };
    let report = run_benchmark(&spec)?;
    print!("{}", String::from_utf8_lossy(&records_csv(&report.records)?));
    for s in summarize(&report.records) {
        println!(
            "# {} M={} runs={} final_mse mean {:.5e} range [{:.5e}, {:.5e}] gain_db mean {:.2}",
            s.method.label(),
            s.m,
            s.runs,
            s.mean_final_mse,
            s.min_final_mse,
            s.max_final_mse,
            s.mean_gain_db
        );
    }
    println!("wrote {}", spec.output.display());
    Ok(())
}


fn cmd_info(a: InfoArgs) -> Result<(), Error> {
    let ms = read_measurements(&a.input)?;
    let ens = ms.ensemble();
    println!("magic ok");
    println!("seed {}", ens.master_seed());
    println!("n_row {}", ens.n_row());
    println!("n_col {}", ens.n_col());
    println!("m {}", ens.m());
    Ok(())
}
