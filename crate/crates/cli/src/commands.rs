use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cf_interp::format::{self, canonical_json, matrix_to_value, ProblemFile, RunConfig};
use cf_interp::herglotz::{self, HerglotzSeries};
use cf_interp::linalg::CMatrix;
use cf_interp::toeplitz::{self, CoefficientSequence};
use cf_interp::{extension, fixture};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::exit::{self, Failure};

pub struct Output {
    path: Option<PathBuf>,
    json: bool,
}

impl Output {
    pub fn new(path: Option<PathBuf>, json: bool) -> Self {
        Output { path, json }
    }

    /// Writes `text` to the output file if one was given, otherwise stdout.
    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.path {
            Some(p) => fs::write(p, text)
                .map_err(|e| Failure::new(exit::IO, format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(exit::IO, format!("cannot read {}: {e}", path.display())))?;
    ProblemFile::parse(&text).map_err(|e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    })
}

fn read_sequence(path: &Path) -> Result<CoefficientSequence, Failure> {
    Ok(read_problem(path)?.to_sequence()?)
}

fn series(seq: CoefficientSequence, cfg: &RunConfig) -> Result<HerglotzSeries, Failure> {
    let seq = if seq.order() > cfg.truncation {
        seq.truncated(cfg.truncation)?
    } else {
        seq
    };
    Ok(HerglotzSeries::new(seq, cfg.radius)?)
}

fn format_matrix(m: &CMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.12e}{:+.12e}i", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(s, "  {}", row.join("  "));
    }
    s
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn check(input: &Path, cfg: &RunConfig, out: &Output) -> Result<ExitCode, Failure> {
    let seq = read_sequence(input)?;
    let profile = toeplitz::positivity_profile(&seq, cfg.tol);
    let all_psd = profile.iter().all(|r| r.is_psd);
    let text = if out.json {
        let levels: Vec<Value> = profile
            .iter()
            .enumerate()
            .map(|(k, r)| {
                json!({
                    "level": k,
                    "min_eigenvalue": number(r.min_eigenvalue),
                    "psd": r.is_psd,
                    "strictly_positive": r.is_strictly_positive,
                })
            })
            .collect();
        canonical_json(&json!({
            "levels": levels,
            "psd": all_psd,
            "tolerance": number(cfg.tol),
        }))
    } else {
        let mut s = String::new();
        for (k, r) in profile.iter().enumerate() {
            let verdict = if r.is_psd { "PSD" } else { "NOT PSD" };
            let _ = writeln!(
                s,
                "level {k}: min eigenvalue {:.6e}  {verdict}",
                r.min_eigenvalue
            );
        }
        let _ = writeln!(s, "verdict: {}", if all_psd { "PSD" } else { "NOT PSD" });
        s
    };
    out.emit(&text)?;
    Ok(if all_psd {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(exit::INFEASIBLE)
    })
}

/// Extends to `max(horizon, truncation)` so the kernel test sees a short
/// tail, but writes only coefficients up to `horizon`.
pub fn solve(input: &Path, cfg: &RunConfig, out: &Output) -> Result<ExitCode, Failure> {
    let problem = read_problem(input)?;
    let seq = problem.to_sequence()?;
    let reach = cfg.horizon.max(cfg.truncation).max(seq.order());
    let phi = extension::solve_cf(&seq, reach, cfg.eps, cfg.tol)?.with_radius(cfg.radius)?;

    let points = fixture::random_points(&mut fixture::rng(cfg.seed), cfg.grid, cfg.radius);
    let test_series = series(phi.seq().clone(), cfg)?;
    let gram = herglotz::kernel_gram(&test_series, &points, None, 1e-6)?;

    let written = phi.seq().truncated(cfg.horizon.max(seq.order()))?;
    let mut metadata = problem.metadata.clone();
    metadata.insert("eps".into(), format!("{:e}", cfg.eps));
    metadata.insert("horizon".into(), cfg.horizon.to_string());
    let solution = ProblemFile::from_sequence(&written, metadata);

    let summary = json!({
        "grid": cfg.grid,
        "min_gram_eigenvalue": number(gram.report.min_eigenvalue),
        "psd": gram.report.is_psd,
        "seed": cfg.seed,
        "skew_norm": number(gram.skew_norm),
        "tail_bound": number(gram.tail_bound),
        "tolerance_used": number(gram.report.tolerance_used),
    });
    if out.json {
        if let Some(p) = &out.path {
            fs::write(p, solution.to_canonical_string()?).map_err(|e| {
                Failure::new(exit::IO, format!("cannot write {}: {e}", p.display()))
            })?;
        }
        print!(
            "{}",
            canonical_json(&json!({ "kernel": summary, "solution": solution.to_value()? }))
        );
    } else {
        out.emit(&solution.to_canonical_string()?)?;
        eprintln!(
            "kernel test on {} points: min eigenvalue {:.6e} (tolerance {:.3e}, tail bound {:.3e})  {}",
            cfg.grid,
            gram.report.min_eigenvalue,
            gram.report.tolerance_used,
            gram.tail_bound,
            if gram.report.is_psd { "PSD" } else { "NOT PSD" }
        );
    }
    Ok(if gram.report.is_psd {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(exit::TOLERANCE)
    })
}

fn emit_value(
    label: &str,
    value: &CMatrix,
    tail_bound: f64,
    out: &Output,
) -> Result<ExitCode, Failure> {
    let text = if out.json {
        canonical_json(&json!({
            "tail_bound": number(tail_bound),
            "value": matrix_to_value(value)?,
        }))
    } else {
        format!(
            "{label} =\n{}tail bound {tail_bound:.3e}\n",
            format_matrix(value)
        )
    };
    out.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn eval(
    input: &Path,
    z: Complex64,
    cfg: &RunConfig,
    out: &Output,
) -> Result<ExitCode, Failure> {
    let phi = series(read_sequence(input)?, cfg)?;
    let v = herglotz::eval_series(&phi, z)?;
    emit_value(&format!("Phi({z})"), &v.value, v.tail_bound, out)
}

pub fn kernel(
    input: &Path,
    z: Complex64,
    w: Complex64,
    cfg: &RunConfig,
    out: &Output,
) -> Result<ExitCode, Failure> {
    let phi = series(read_sequence(input)?, cfg)?;
    let v = herglotz::kernel_value(&phi, z, w)?;
    emit_value(&format!("K({z}, {w})"), &v.value, v.tail_bound, out)
}

pub fn reduce(input: &Path, cfg: &RunConfig, out: &Output) -> Result<ExitCode, Failure> {
    let rf = herglotz::reduce(&read_sequence(input)?, cfg.tol)?;
    out.emit(&canonical_json(&format::reduced_to_value(&rf)?))?;
    Ok(ExitCode::SUCCESS)
}

pub fn generate(
    d: usize,
    h: usize,
    n: usize,
    zero_c: bool,
    cfg: &RunConfig,
    out: &Output,
) -> Result<ExitCode, Failure> {
    if d == 0 || h == 0 {
        return Err(Failure::new(exit::USAGE, "d and h must be at least 1"));
    }
    let (_, seq) = fixture::generate(cfg.seed, d, h, n, zero_c)?;
    let metadata = BTreeMap::from([
        ("generator".to_string(), "chacha8-realization".to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("state_dim".to_string(), h.to_string()),
        ("zero_c".to_string(), zero_c.to_string()),
    ]);
    out.emit(&ProblemFile::from_sequence(&seq, metadata).to_canonical_string()?)?;
    Ok(ExitCode::SUCCESS)
}
