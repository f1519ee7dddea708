//! JSON interchange for coefficient data.
//!
//! ```json
//! {
//!   "block_dim": 1,
//!   "coefficients": [
//!     [
//!       [[1.0000000000000000e0, 0.0000000000000000e0]]
//!     ]
//!   ],
//!   "metadata": {}
//! }
//! ```
//!
//! Complex scalars are `[re, im]` pairs, matrices are arrays of rows. The
//! canonical form sorts object keys, indents by two spaces, writes every
//! real number with 17 significant digits (`{:.16e}`), prints arrays of
//! scalars or pairs on one line and breaks everything else one element per
//! line. Serializing a parsed canonical file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::herglotz::{ReducedForm, DEFAULT_RADIUS, DEFAULT_TRUNCATION};
use crate::linalg::{c64, CMatrix};
use crate::toeplitz::CoefficientSequence;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid problem file: {0}")]
    Invalid(String),
    #[error("cannot serialize non-finite number {0}")]
    NonFinite(f64),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: {
                let full = e.to_string();
                match full.rfind(" at line ") {
                    Some(cut) => full[..cut].to_string(),
                    None => full,
                }
            },
        }
    }
}

/// Coefficients `M_0..M_N` plus free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub block_dim: usize,
    pub coefficients: Vec<CMatrix>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    block_dim: usize,
    coefficients: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let raw: RawProblem = serde_json::from_str(text)?;
        let d = raw.block_dim;
        if d == 0 {
            return Err(FormatError::Invalid("block_dim must be at least 1".into()));
        }
        if raw.coefficients.is_empty() {
            return Err(FormatError::Invalid("at least M_0 is required".into()));
        }
        let coefficients = raw
            .coefficients
            .iter()
            .enumerate()
            .map(|(n, rows)| {
                rows_to_matrix(rows, d, d).map_err(|e| FormatError::Invalid(format!("M_{n}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProblemFile {
            block_dim: d,
            coefficients,
            metadata: raw.metadata,
        })
    }

    pub fn from_sequence(seq: &CoefficientSequence, metadata: BTreeMap<String, String>) -> Self {
        ProblemFile {
            block_dim: seq.block_dim(),
            coefficients: seq.coefficients().to_vec(),
            metadata,
        }
    }

    pub fn to_sequence(&self) -> crate::Result<CoefficientSequence> {
        CoefficientSequence::new(self.coefficients.clone())
    }

    pub fn to_value(&self) -> Result<Value, FormatError> {
        let mut obj = Map::new();
        obj.insert("block_dim".into(), Value::from(self.block_dim as u64));
        obj.insert(
            "coefficients".into(),
            Value::Array(
                self.coefficients
                    .iter()
                    .map(matrix_to_value)
                    .collect::<Result<_, _>>()?,
            ),
        );
        obj.insert(
            "metadata".into(),
            Value::Object(
                self.metadata
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect(),
            ),
        );
        Ok(Value::Object(obj))
    }

    pub fn to_canonical_string(&self) -> Result<String, FormatError> {
        Ok(canonical_json(&self.to_value()?))
    }
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], nrows: usize, ncols: usize) -> Result<CMatrix, String> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("expected a {nrows}x{ncols} matrix"));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        c64(rows[i][j][0], rows[i][j][1])
    }))
}

fn real(x: f64) -> Result<Value, FormatError> {
    Number::from_f64(x)
        .map(Value::Number)
        .ok_or(FormatError::NonFinite(x))
}

pub fn matrix_to_value(m: &CMatrix) -> Result<Value, FormatError> {
    let rows = (0..m.nrows())
        .map(|i| {
            let row = (0..m.ncols())
                .map(|j| Ok(Value::Array(vec![real(m[(i, j)].re)?, real(m[(i, j)].im)?])))
                .collect::<Result<Vec<_>, FormatError>>()?;
            Ok(Value::Array(row))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(Value::Array(rows))
}

/// Parses a matrix of `[re, im]` pairs; all rows must have equal length.
pub fn value_to_matrix(v: &Value) -> Result<CMatrix, FormatError> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone())?;
    let ncols = rows.first().map_or(0, Vec::len);
    rows_to_matrix(&rows, rows.len(), ncols).map_err(FormatError::Invalid)
}

pub fn reduced_to_value(rf: &ReducedForm) -> Result<Value, FormatError> {
    let mut t_seq = Map::new();
    t_seq.insert("block_dim".into(), Value::from(rf.rank() as u64));
    t_seq.insert(
        "coefficients".into(),
        Value::Array(
            rf.t_coeffs
                .iter()
                .map(matrix_to_value)
                .collect::<Result<_, _>>()?,
        ),
    );
    let mut obj = Map::new();
    obj.insert("d_imag".into(), matrix_to_value(&rf.d_imag)?);
    obj.insert("rank".into(), Value::from(rf.rank() as u64));
    obj.insert(
        "residuals".into(),
        Value::Array(
            rf.residuals
                .iter()
                .map(|&x| real(x))
                .collect::<Result<_, _>>()?,
        ),
    );
    obj.insert("t0".into(), matrix_to_value(&rf.t0)?);
    obj.insert("t_seq".into(), Value::Object(t_seq));
    Ok(Value::Object(obj))
}

fn is_inline(v: &Value) -> bool {
    fn scalar(v: &Value) -> bool {
        !matches!(v, Value::Array(_) | Value::Object(_))
    }
    match v {
        Value::Array(items) => items.iter().all(|x| match x {
            Value::Array(inner) => inner.iter().all(scalar),
            other => scalar(other),
        }),
        _ => true,
    }
}

fn write_number(out: &mut String, n: &Number) {
    if let Some(u) = n.as_u64() {
        write!(out, "{u}").unwrap();
    } else if let Some(i) = n.as_i64() {
        write!(out, "{i}").unwrap();
    } else {
        write!(out, "{:.16e}", n.as_f64().expect("finite")).unwrap();
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, k: usize| out.extend(std::iter::repeat_n(' ', 2 * k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if is_inline(v) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("string"));
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value, terminated by a newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Numerical settings shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub eps: f64,
    pub tol: f64,
    pub horizon: usize,
    pub truncation: usize,
    pub grid: usize,
    pub seed: u64,
    pub radius: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps: crate::extension::DEFAULT_EPS,
            tol: crate::extension::DEFAULT_TOL,
            horizon: 64,
            truncation: DEFAULT_TRUNCATION,
            grid: 16,
            seed: 0,
            radius: DEFAULT_RADIUS,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), FormatError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(FormatError::Invalid(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(FormatError::Invalid(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(FormatError::Invalid(format!(
                "radius must lie in (0, 1), got {}",
                self.radius
            )));
        }
        Ok(())
    }
}
