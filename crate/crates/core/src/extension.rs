//! One-step positive extension of a block Toeplitz matrix and the resulting
//! solution of the Carathéodory–Fejér problem.
//!
//! The next coefficient `X = M_{N+1}` keeps the ε-shifted matrix `εI + 𝕄_{N+1}`
//! strictly positive exactly when it lies in the operator ball
//!
//! ```text
//! S > (X − X_c) α (X − X_c)*
//! ```
//!
//! where `[α β*; β δ] = (εI + 𝕄_N^rev)⁻¹`, `γ = (M_N … M_1)`, `X_c = −γβα⁻¹`
//! and `S = εI + Re M_0 − γ(δ − βα⁻¹β*)γ*`. Here `𝕄_N^rev` is the block
//! reversal of the Toeplitz matrix, whose last block row reads
//! `(M_N, …, M_1, Re M_0)`, so that the new coefficient appears as `(X, γ)`.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::herglotz::{HerglotzSeries, DEFAULT_RADIUS};
use crate::linalg::{self, c64, CMatrix};
use crate::toeplitz::{self, CoefficientSequence};

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Intermediates of one central extension step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionStep {
    pub eps: f64,
    /// Leading `d × d` block of the inverse.
    pub alpha: CMatrix,
    /// `Nd × d` block below `alpha`.
    pub beta: CMatrix,
    /// Trailing `Nd × Nd` block of the inverse.
    pub delta: CMatrix,
    /// `(M_N … M_1)`, `d × Nd`.
    pub gamma: CMatrix,
    pub x_center: CMatrix,
    /// Left-hand side `S` of the ball inequality; Hermitian, strictly positive.
    pub left_bound: CMatrix,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Contract(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

fn check_feasible(seq: &CoefficientSequence, tol: f64) -> Result<()> {
    match toeplitz::first_infeasible_level(seq, tol) {
        Some((level, min_eigenvalue)) => Err(Error::Infeasible {
            level,
            min_eigenvalue,
        }),
        None => Ok(()),
    }
}

fn shifted_reversed(seq: &CoefficientSequence, eps: f64) -> CMatrix {
    let bt = toeplitz::reversal_conjugate(&toeplitz::assemble(seq));
    let n = bt.dense.nrows();
    bt.dense + linalg::identity(n) * c64(eps, 0.0)
}

fn shifted_cholesky(
    seq: &CoefficientSequence,
    eps: f64,
) -> Result<Cholesky<num_complex::Complex64, nalgebra::Dyn>> {
    Cholesky::new(shifted_reversed(seq, eps)).ok_or(Error::Conditioning {
        order: seq.order(),
        eps,
    })
}

fn gamma(seq: &CoefficientSequence) -> CMatrix {
    let d = seq.block_dim();
    let n = seq.order();
    let mut g = CMatrix::zeros(d, n * d);
    for k in 0..n {
        g.view_mut((0, k * d), (d, d))
            .copy_from(&seq.coefficients()[n - k]);
    }
    g
}

fn hermitian_inverse(m: &CMatrix) -> Result<CMatrix> {
    Cholesky::new(linalg::hermitian_part(m))
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Tolerance("block expected to be positive definite is not".into()))
}

/// Computes the ball for `M_{N+1}` and returns its center as the next
/// coefficient. Uses the full inverse of `εI + 𝕄_N`.
pub fn central_step(
    seq: &CoefficientSequence,
    eps: f64,
    tol: f64,
) -> Result<(ExtensionStep, CMatrix)> {
    check_eps(eps)?;
    check_feasible(seq, tol)?;
    let d = seq.block_dim();
    let n = seq.len() * d;
    let inv = shifted_cholesky(seq, eps)?.inverse();

    let alpha = inv.view((0, 0), (d, d)).into_owned();
    let beta = inv.view((d, 0), (n - d, d)).into_owned();
    let delta = inv.view((d, d), (n - d, n - d)).into_owned();
    let gamma = gamma(seq);
    let alpha_inv = hermitian_inverse(&alpha)?;

    let x_center = -(&gamma * &beta * &alpha_inv);
    // S equals εI + Re M_0 − γ(δ − βα⁻¹β*)γ*, but that difference cancels
    // badly for small ε. S is also the Schur complement of the trailing
    // corner, i.e. the inverse of the trailing diagonal block of the inverse.
    let left_bound = hermitian_inverse(&inv.view((n - d, n - d), (d, d)).into_owned())?;

    let mut bordered = seq.clone();
    bordered.push(x_center.clone());
    shifted_cholesky(&bordered, eps)?;

    let step = ExtensionStep {
        eps,
        alpha,
        beta,
        delta,
        gamma,
        x_center: x_center.clone(),
        left_bound,
    };
    Ok((step, x_center))
}

/// `min eig(S − (X − X_c) α (X − X_c)*)`; `X` is inside when it is positive.
pub fn ball_membership(step: &ExtensionStep, x: &CMatrix) -> Result<(bool, f64)> {
    if x.shape() != step.x_center.shape() {
        return Err(Error::Dimension(format!(
            "candidate is {}x{}, coefficients are {}x{}",
            x.nrows(),
            x.ncols(),
            step.x_center.nrows(),
            step.x_center.ncols()
        )));
    }
    let diff = x - &step.x_center;
    let gap = &step.left_bound - &diff * &step.alpha * diff.adjoint();
    let margin = linalg::min_eigenvalue(&gap);
    Ok((margin > 0.0, margin))
}

fn ball_point(
    x_center: &CMatrix,
    left_bound: &CMatrix,
    alpha: &CMatrix,
    contraction: &CMatrix,
) -> Result<CMatrix> {
    if contraction.shape() != x_center.shape() {
        return Err(Error::Dimension(format!(
            "contraction must be {}x{}",
            x_center.nrows(),
            x_center.ncols()
        )));
    }
    let norm = linalg::op_norm(contraction);
    if norm > 1.0 + 1e-12 {
        return Err(Error::OutOfBall { norm });
    }
    Ok(x_center + linalg::psd_sqrt(left_bound) * contraction * linalg::psd_inv_sqrt(alpha))
}

/// `X = X_c + S^{1/2} Γ α^{−1/2}` for a contraction `Γ`.
pub fn parametrized_step(step: &ExtensionStep, contraction: &CMatrix) -> Result<CMatrix> {
    ball_point(&step.x_center, &step.left_bound, &step.alpha, contraction)
}

/// Ball data needed to pick the next coefficient, computed from one Cholesky
/// factorization and `2d` triangular solves.
struct Border {
    alpha: CMatrix,
    x_center: CMatrix,
    left_bound: CMatrix,
}

fn border(seq: &CoefficientSequence, eps: f64) -> Result<Border> {
    let d = seq.block_dim();
    let n = seq.len() * d;
    let chol = shifted_cholesky(seq, eps)?;
    let mut rhs = CMatrix::zeros(n, 2 * d);
    for i in 0..d {
        rhs[(i, i)] = 1.0.into();
        rhs[(n - d + i, d + i)] = 1.0.into();
    }
    let sol = chol.solve(&rhs);
    let alpha = linalg::hermitian_part(&sol.view((0, 0), (d, d)).into_owned());
    let beta = sol.view((d, 0), (n - d, d)).into_owned();
    // The trailing diagonal block of the inverse is S⁻¹.
    let s_inv = sol.view((n - d, d), (d, d)).into_owned();
    let left_bound = hermitian_inverse(&s_inv)?;
    let x_center = -(gamma(seq) * beta * hermitian_inverse(&alpha)?);
    Ok(Border {
        alpha,
        x_center,
        left_bound,
    })
}

/// Appends `steps` coefficients, each chosen in the current ball: the center
/// by default, or `X_c + S^{1/2} Γ_k α^{−1/2}` when contractions are given.
/// The input coefficients are copied unchanged.
///
/// Central extensions go through [`central_recursion`]; with contractions
/// every step re-solves the ball through [`extend_stepwise`].
pub fn extend(
    seq: &CoefficientSequence,
    steps: usize,
    eps: f64,
    tol: f64,
    contractions: Option<&[CMatrix]>,
) -> Result<CoefficientSequence> {
    match contractions {
        Some(_) => extend_stepwise(seq, steps, eps, tol, contractions),
        None => central_recursion(seq, steps, eps, tol),
    }
}

/// Central extension through the predictor of the ε-shifted data.
///
/// Choosing the center at every step is the same as continuing the order-`N`
/// recursion `M_{K+1} = −Σ_{k=1..N} M_{K+1−k} P_k` with `P = βα⁻¹` taken from
/// the first step: the blocks of `βα⁻¹` past index `N` vanish for every later
/// step. One Cholesky factorization of the final shifted matrix certifies all
/// intermediate ones, which are its leading principal blocks.
pub fn central_recursion(
    seq: &CoefficientSequence,
    steps: usize,
    eps: f64,
    tol: f64,
) -> Result<CoefficientSequence> {
    check_eps(eps)?;
    check_feasible(seq, tol)?;
    if steps == 0 {
        return Ok(seq.clone());
    }
    let d = seq.block_dim();
    let order = seq.order();
    let n = seq.len() * d;
    let chol = shifted_cholesky(seq, eps)?;
    let mut rhs = CMatrix::zeros(n, d);
    for i in 0..d {
        rhs[(i, i)] = 1.0.into();
    }
    let sol = chol.solve(&rhs);
    let alpha_inv = hermitian_inverse(&sol.view((0, 0), (d, d)).into_owned())?;
    let predictor: Vec<CMatrix> = (1..=order)
        .map(|k| sol.view((k * d, 0), (d, d)).into_owned() * &alpha_inv)
        .collect();

    let mut out = seq.clone();
    for _ in 0..steps {
        let next_index = out.len();
        let mut next = CMatrix::zeros(d, d);
        for (k, p) in predictor.iter().enumerate() {
            next -= &out.coefficients()[next_index - 1 - k] * p;
        }
        out.push(next);
    }
    shifted_cholesky(&out, eps)?;
    Ok(out)
}

/// Step-by-step extension: every coefficient re-solves the ball of the
/// current data.
pub fn extend_stepwise(
    seq: &CoefficientSequence,
    steps: usize,
    eps: f64,
    tol: f64,
    contractions: Option<&[CMatrix]>,
) -> Result<CoefficientSequence> {
    check_eps(eps)?;
    if let Some(cs) = contractions {
        if cs.len() < steps {
            return Err(Error::Dimension(format!(
                "{} contractions supplied for {steps} steps",
                cs.len()
            )));
        }
    }
    check_feasible(seq, tol)?;
    let mut out = seq.clone();
    for k in 0..steps {
        let b = border(&out, eps)?;
        let next = match contractions {
            Some(cs) => ball_point(&b.x_center, &b.left_bound, &b.alpha, &cs[k])?,
            None => b.x_center,
        };
        out.push(next);
    }
    if steps > 0 {
        shifted_cholesky(&out, eps)?;
    }
    Ok(out)
}

/// Solves the Carathéodory–Fejér problem by central extension up to index
/// `horizon`. The first `N + 1` coefficients of the result are the input.
pub fn solve_cf(
    seq: &CoefficientSequence,
    horizon: usize,
    eps: f64,
    tol: f64,
) -> Result<HerglotzSeries> {
    let steps = horizon.saturating_sub(seq.order());
    let extended = extend(seq, steps, eps, tol, None)?;
    Ok(HerglotzSeries::new(extended, DEFAULT_RADIUS)?.mark_certified())
}

/// Largest coefficient change between central extensions at `eps` and `eps/2`.
pub fn convergence_estimate(
    seq: &CoefficientSequence,
    horizon: usize,
    eps: f64,
    tol: f64,
) -> Result<f64> {
    let a = solve_cf(seq, horizon, eps, tol)?;
    let b = solve_cf(seq, horizon, eps / 2.0, tol)?;
    Ok(a.seq()
        .coefficients()
        .iter()
        .zip(b.seq().coefficients())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}
