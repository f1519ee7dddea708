mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use cf_interp::format::RunConfig;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::exit::Failure;

/// Positive block-Toeplitz data, Herglotz series and their extensions.
#[derive(Debug, Parser)]
#[command(name = "cf-interp", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Options {
    /// Regularization shift for the extension steps.
    #[arg(long, global = true, default_value_t = RunConfig::default().eps)]
    eps: f64,
    /// Numerical tolerance for positivity and factorization checks.
    #[arg(long, global = true, default_value_t = RunConfig::default().tol)]
    tol: f64,
    /// Highest coefficient index written by `solve`.
    #[arg(long, global = true, default_value_t = RunConfig::default().horizon)]
    horizon: usize,
    /// Number of series terms used for evaluation.
    #[arg(long, global = true, default_value_t = RunConfig::default().truncation)]
    truncation: usize,
    /// Number of random points in the kernel test.
    #[arg(long, global = true, default_value_t = RunConfig::default().grid)]
    grid: usize,
    #[arg(long, global = true, default_value_t = RunConfig::default().seed)]
    seed: u64,
    /// Radius of the evaluation disk.
    #[arg(long, global = true, default_value_t = RunConfig::default().radius)]
    radius: f64,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the minimum eigenvalue of every Toeplitz level.
    Check { input: PathBuf },
    /// Extend the data centrally and test the resulting kernel.
    Solve { input: PathBuf },
    /// Evaluate the series at a point.
    Eval {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        z: Complex64,
    },
    /// Evaluate the kernel at a pair of points.
    Kernel {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        z: Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        w: Complex64,
    },
    /// Split off the imaginary constant and normalize the data.
    Reduce { input: PathBuf },
    /// Write coefficients of a random realization.
    Generate {
        /// Block dimension.
        d: usize,
        /// State dimension.
        h: usize,
        /// Highest coefficient index.
        n: usize,
        /// Use a zero input map, leaving only the skew constant.
        #[arg(long)]
        zero_c: bool,
    },
}

/// Accepts `re,im` or a bare real number.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

impl Options {
    fn config(&self) -> RunConfig {
        RunConfig {
            eps: self.eps,
            tol: self.tol,
            horizon: self.horizon,
            truncation: self.truncation,
            grid: self.grid,
            seed: self.seed,
            radius: self.radius,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let cfg = cli.opts.config();
    cfg.validate()
        .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
    let out = commands::Output::new(cli.opts.output, cli.opts.json);
    match cli.command {
        Command::Check { input } => commands::check(&input, &cfg, &out),
        Command::Solve { input } => commands::solve(&input, &cfg, &out),
        Command::Eval { input, z } => commands::eval(&input, z, &cfg, &out),
        Command::Kernel { input, z, w } => commands::kernel(&input, z, w, &cfg, &out),
        Command::Reduce { input } => commands::reduce(&input, &cfg, &out),
        Command::Generate { d, h, n, zero_c } => commands::generate(d, h, n, zero_c, &cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
