//! Browser bindings for scalar data: extension with its positivity profile,
//! the real part of the series on the disk, and the ball of admissible next
//! coefficients.
//!
//! Coefficients travel as JSON arrays whose entries are either real numbers
//! or `[re, im]` pairs.

use cf_interp::extension::{ball_membership, central_step, extend, DEFAULT_TOL};
use cf_interp::herglotz::{eval_series, HerglotzSeries};
use cf_interp::linalg::{c64, CMatrix};
use cf_interp::toeplitz::{positivity_profile, CoefficientSequence};
use cf_interp::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

pub const MAX_STEPS: usize = 512;

pub fn parse_scalars(text: &str) -> Result<CoefficientSequence, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let items = v.as_array().ok_or("expected a JSON array")?;
    let values = items
        .iter()
        .map(|item| match item {
            Value::Number(n) => n.as_f64().map(|re| c64(re, 0.0)),
            Value::Array(p) if p.len() == 2 => Some(c64(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        })
        .collect::<Option<Vec<Complex64>>>()
        .ok_or("entries must be numbers or [re, im] pairs")?;
    CoefficientSequence::from_scalars(&values).map_err(|e| e.to_string())
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Extends the data by `steps` central steps. The profile is reported for
/// both the input and the extension.
pub fn extension_report(text: &str, steps: usize, eps: f64) -> Result<Value, String> {
    let seq = parse_scalars(text)?;
    let input_profile: Vec<f64> = positivity_profile(&seq, DEFAULT_TOL)
        .iter()
        .map(|r| r.min_eigenvalue)
        .collect();
    let ext =
        extend(&seq, steps.min(MAX_STEPS), eps, DEFAULT_TOL, None).map_err(|e| e.to_string())?;
    let profile: Vec<f64> = positivity_profile(&ext, DEFAULT_TOL)
        .iter()
        .map(|r| r.min_eigenvalue)
        .collect();
    Ok(json!({
        "coefficients": ext.coefficients().iter().map(|m| pair(m[(0, 0)])).collect::<Vec<_>>(),
        "input_profile": input_profile,
        "profile": profile,
    }))
}

/// `Re Φ(z)` on a `size × size` grid over `[-1, 1]²`, row by row from the
/// top; points outside `radius` are NaN.
pub fn real_part_grid(text: &str, size: usize, radius: f64) -> Result<Vec<f64>, String> {
    let phi = HerglotzSeries::new(parse_scalars(text)?, radius).map_err(|e| e.to_string())?;
    let step = if size > 1 {
        2.0 / (size - 1) as f64
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let z = c64(-1.0 + col as f64 * step, 1.0 - row as f64 * step);
            let value = if z.norm() <= radius {
                eval_series(&phi, z).map_err(|e| e.to_string())?.value[(0, 0)].re
            } else {
                f64::NAN
            };
            out.push(value);
        }
    }
    Ok(out)
}

/// Center and radius of the disk of admissible next coefficients, and the
/// margin of the candidate `x` (positive inside).
pub fn ball_report(text: &str, eps: f64, x: Complex64) -> Result<Value, String> {
    let seq = parse_scalars(text)?;
    let (step, center) = central_step(&seq, eps, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let radius = (step.left_bound[(0, 0)].re / step.alpha[(0, 0)].re)
        .max(0.0)
        .sqrt();
    let candidate = CMatrix::from_element(1, 1, x);
    let (inside, margin) = ball_membership(&step, &candidate).map_err(|e| e.to_string())?;
    Ok(json!({
        "center": pair(center[(0, 0)]),
        "inside": inside,
        "margin": margin,
        "radius": radius,
    }))
}

#[wasm_bindgen]
pub fn extend_scalar(coefficients: &str, steps: usize, eps: f64) -> Result<String, JsError> {
    extension_report(coefficients, steps, eps)
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn real_part_field(coefficients: &str, size: usize, radius: f64) -> Result<Vec<f64>, JsError> {
    real_part_grid(coefficients, size, radius).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn next_coefficient_ball(
    coefficients: &str,
    eps: f64,
    re: f64,
    im: f64,
) -> Result<String, JsError> {
    ball_report(coefficients, eps, c64(re, im))
        .map(|v| v.to_string())
        .map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_entries() {
        let seq = parse_scalars("[1, [0.5, -0.25]]").unwrap();
        assert_eq!(seq.coefficients()[1][(0, 0)], c64(0.5, -0.25));
        assert!(parse_scalars("[1, \"x\"]").is_err());
        assert!(parse_scalars("{}").is_err());
    }

    #[test]
    fn geometric_extension() {
        let r = extension_report("[1, 0.5]", 6, 1e-8).unwrap();
        let coeffs = r["coefficients"].as_array().unwrap();
        assert_eq!(coeffs.len(), 8);
        for (n, c) in coeffs.iter().enumerate() {
            assert!((c[0].as_f64().unwrap() - 0.5f64.powi(n as i32)).abs() < 1e-6);
        }
        assert_eq!(r["profile"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn indefinite_data_is_reported() {
        let e = extension_report("[1, 2]", 3, 1e-8).unwrap_err();
        assert!(e.contains("level 1"), "{e}");
    }

    #[test]
    fn field_of_constant_series() {
        let g = real_part_grid("[1]", 5, 0.9).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[12], 1.0);
        assert!(g[0].is_nan());
    }

    #[test]
    fn ball_of_all_ones_pair() {
        let eps = 1e-2;
        let r = ball_report("[1, 1]", eps, c64(1.0, 0.0)).unwrap();
        assert!((r["center"][0].as_f64().unwrap() - 1.0 / (1.0 + eps)).abs() < 1e-12);
        // S/α = det²/(1+ε)² with det = ε(2+ε)
        let expected = eps * (2.0 + eps) / (1.0 + eps);
        assert!((r["radius"].as_f64().unwrap() - expected).abs() < 1e-9);
        assert_eq!(r["inside"], true);
        let far = ball_report("[1, 1]", eps, c64(0.0, 0.0)).unwrap();
        assert_eq!(far["inside"], false);
    }
}
