//! Herglotz series `Φ(z) = M_0 + 2 Σ z^n M_n`, their positive kernel
//! `K(z, w) = (Φ(z) + Φ(w)*) / (1 − z w̄)`, realizations
//! `Φ(z) = D + C*(I + zV*)(I − zV*)⁻¹C`, and the reduction
//! `Φ(z) = D + T0* φ(z) T0` with `T0` of full row rank.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, Factorization, PsdReport};
use crate::toeplitz::{self, CoefficientSequence};

pub const DEFAULT_RADIUS: f64 = 0.9;
pub const DEFAULT_TRUNCATION: usize = 256;

/// A truncated Herglotz series together with the disk it may be evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzSeries {
    seq: CoefficientSequence,
    declared_radius: f64,
    certified: bool,
    coefficient_bound: f64,
}

/// A matrix value plus a bound on the contribution of the discarded tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: CMatrix,
    pub tail_bound: f64,
}

impl HerglotzSeries {
    /// Wraps a sequence without checking positivity.
    pub fn new(seq: CoefficientSequence, declared_radius: f64) -> Result<Self> {
        if !(declared_radius > 0.0 && declared_radius < 1.0) {
            return Err(Error::Contract(format!(
                "declared radius {declared_radius} must lie in (0, 1)"
            )));
        }
        let coefficient_bound = seq
            .coefficients()
            .iter()
            .enumerate()
            .map(|(n, m)| {
                if n == 0 {
                    linalg::op_norm(&linalg::hermitian_part(m))
                } else {
                    linalg::op_norm(m)
                }
            })
            .fold(0.0, f64::max);
        Ok(HerglotzSeries {
            seq,
            declared_radius,
            certified: false,
            coefficient_bound,
        })
    }

    /// Wraps a sequence after checking that its Toeplitz matrix is positive
    /// within `tol`.
    pub fn certified(seq: CoefficientSequence, declared_radius: f64, tol: f64) -> Result<Self> {
        if let Some((level, min_eigenvalue)) = toeplitz::first_infeasible_level(&seq, tol) {
            return Err(Error::Infeasible {
                level,
                min_eigenvalue,
            });
        }
        let mut s = Self::new(seq, declared_radius)?;
        s.certified = true;
        Ok(s)
    }

    pub(crate) fn mark_certified(mut self) -> Self {
        self.certified = true;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Contract(format!(
                "radius {radius} must lie in (0, 1)"
            )));
        }
        self.declared_radius = radius;
        Ok(self)
    }

    pub fn seq(&self) -> &CoefficientSequence {
        &self.seq
    }

    pub fn into_seq(self) -> CoefficientSequence {
        self.seq
    }

    pub fn block_dim(&self) -> usize {
        self.seq.block_dim()
    }

    pub fn declared_radius(&self) -> f64 {
        self.declared_radius
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Truncation order `T`.
    pub fn order(&self) -> usize {
        self.seq.order()
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if !(z.norm() < 1.0 && z.norm() <= self.declared_radius) {
            return Err(Error::Domain {
                z,
                radius: self.declared_radius,
            });
        }
        Ok(())
    }

    fn tail_bound(&self, z: Complex64) -> f64 {
        let r = z.norm();
        2.0 * self.coefficient_bound * r.powi(self.order() as i32 + 1) / (1.0 - r)
    }
}

/// `M_0 + 2 Σ_{n=1..T} z^n M_n` by Horner's rule, with the geometric tail
/// bound `2 · max‖M_n‖ · |z|^{T+1} / (1 − |z|)`.
pub fn eval_series(phi: &HerglotzSeries, z: Complex64) -> Result<Evaluation> {
    phi.check_domain(z)?;
    let coeffs = phi.seq.coefficients();
    let mut value = coeffs[0].clone();
    if coeffs.len() > 1 {
        let mut acc = coeffs[coeffs.len() - 1].clone();
        for m in coeffs[1..coeffs.len() - 1].iter().rev() {
            acc = m + acc * z;
        }
        value += acc * (z * 2.0);
    }
    Ok(Evaluation {
        value,
        tail_bound: phi.tail_bound(z),
    })
}

fn kernel_from_values(phi_z: &CMatrix, phi_w: &CMatrix, z: Complex64, w: Complex64) -> CMatrix {
    (phi_z + phi_w.adjoint()) / (c64(1.0, 0.0) - z * w.conj())
}

/// `K(z, w) = (Φ(z) + Φ(w)*) / (1 − z w̄)`.
pub fn kernel_value(phi: &HerglotzSeries, z: Complex64, w: Complex64) -> Result<Evaluation> {
    let ez = eval_series(phi, z)?;
    let ew = eval_series(phi, w)?;
    Ok(Evaluation {
        value: kernel_from_values(&ez.value, &ew.value, z, w),
        tail_bound: (ez.tail_bound + ew.tail_bound) / (1.0 - z.norm() * w.norm()),
    })
}

/// Gram matrix of the kernel on a point set, with its positivity report.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGram {
    /// Hermitian part of the assembled Gram matrix.
    pub gram: CMatrix,
    pub report: PsdReport,
    /// Frobenius norm of the discarded skew part.
    pub skew_norm: f64,
    /// Bound on the Gram perturbation caused by series truncation; already
    /// folded into `report.tolerance_used`.
    pub tail_bound: f64,
}

/// Assembles `[K(z_ℓ, z_j)]` (or `[v_ℓ* K(z_ℓ, z_j) v_j]` when vectors are
/// given) and certifies it. The tolerance is `tol` plus the truncation bound.
pub fn kernel_gram(
    phi: &HerglotzSeries,
    points: &[Complex64],
    vectors: Option<&[CVector]>,
    tol: f64,
) -> Result<KernelGram> {
    let d = phi.block_dim();
    if let Some(vs) = vectors {
        if vs.len() != points.len() || vs.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension(format!(
                "need one length-{d} vector per point"
            )));
        }
    }
    let evals = points
        .iter()
        .map(|&z| eval_series(phi, z))
        .collect::<Result<Vec<_>>>()?;
    let n = points.len();
    let bs = if vectors.is_some() { 1 } else { d };
    let mut raw = CMatrix::zeros(n * bs, n * bs);
    let mut tail_sq = 0.0;
    for l in 0..n {
        for j in 0..n {
            let k = kernel_from_values(&evals[l].value, &evals[j].value, points[l], points[j]);
            let mut e = (evals[l].tail_bound + evals[j].tail_bound)
                / (1.0 - points[l].norm() * points[j].norm());
            match vectors {
                Some(vs) => {
                    raw[(l, j)] = (vs[l].adjoint() * &k * &vs[j])[(0, 0)];
                    e *= vs[l].norm() * vs[j].norm();
                }
                None => raw.view_mut((l * d, j * d), (d, d)).copy_from(&k),
            }
            tail_sq += e * e;
        }
    }
    let (gram, skew) = linalg::hermitian_split(&raw)?;
    let tail_bound = tail_sq.sqrt();
    let report = PsdReport::from_min_eigenvalue(linalg::min_eigenvalue(&gram), tol + tail_bound);
    Ok(KernelGram {
        gram,
        report,
        skew_norm: skew.norm(),
        tail_bound,
    })
}

/// `2 · row(z) · 𝕄_n · row(w)*` with `row(z) = (z^n I, …, z I, I)`; tends to
/// `K(z, w)` as `n` grows.
pub fn kernel_toeplitz_approx(
    seq: &CoefficientSequence,
    z: Complex64,
    w: Complex64,
    n: usize,
) -> Result<CMatrix> {
    if n + 1 > seq.len() {
        return Err(Error::InsufficientCoefficients {
            needed: n + 1,
            available: seq.len(),
        });
    }
    for p in [z, w] {
        if p.norm() >= 1.0 {
            return Err(Error::Domain { z: p, radius: 1.0 });
        }
    }
    let d = seq.block_dim();
    let bt = toeplitz::assemble(&seq.truncated(n)?);
    let row = |x: Complex64| {
        let mut r = CMatrix::zeros(d, (n + 1) * d);
        for k in 0..=n {
            let s = x.powu((n - k) as u32);
            for i in 0..d {
                r[(i, k * d + i)] = s;
            }
        }
        r
    };
    Ok(row(z) * &bt.dense * row(w).adjoint() * c64(2.0, 0.0))
}

/// `(D, C, V)` with `D` skew-Hermitian and `V` an isometry (unitary here).
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// `d × d`, purely imaginary in the operator sense: `D + D* = 0`.
    pub d: CMatrix,
    /// `h × d`.
    pub c: CMatrix,
    /// `h × h`.
    pub v: CMatrix,
}

impl Realization {
    pub fn new(d: CMatrix, c: CMatrix, v: CMatrix, tol: f64) -> Result<Self> {
        let r = Realization { d, c, v };
        r.validate(tol)?;
        Ok(r)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let p = self.d.nrows();
        let h = self.v.nrows();
        if self.d.ncols() != p || self.v.ncols() != h || self.c.shape() != (h, p) {
            return Err(Error::Realization(format!(
                "incompatible shapes D {:?}, C {:?}, V {:?}",
                self.d.shape(),
                self.c.shape(),
                self.v.shape()
            )));
        }
        let skew_defect = (&self.d + self.d.adjoint()).norm();
        if skew_defect > tol * self.d.norm().max(1.0) {
            return Err(Error::Realization(format!(
                "D is not skew-Hermitian (‖D + D*‖ = {skew_defect:e})"
            )));
        }
        let iso_defect = linalg::isometry_defect(&self.v);
        if iso_defect > tol {
            return Err(Error::Realization(format!(
                "V is not an isometry (‖V*V − I‖ = {iso_defect:e})"
            )));
        }
        Ok(())
    }

    pub fn block_dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.v.nrows()
    }
}

const REALIZATION_TOL: f64 = 1e-10;

/// `M_0 = D + C*C`, `M_n = C* (V*)^n C`.
pub fn realization_coefficients(rlz: &Realization, n_max: usize) -> Result<CoefficientSequence> {
    rlz.validate(REALIZATION_TOL)?;
    let v_adj = rlz.v.adjoint();
    let c_adj = rlz.c.adjoint();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(&rlz.d + &c_adj * &rlz.c);
    let mut p = rlz.c.clone();
    for _ in 1..=n_max {
        p = &v_adj * p;
        coeffs.push(&c_adj * &p);
    }
    CoefficientSequence::new(coeffs)
}

/// `D + C*(I + zV*)(I − zV*)⁻¹C` through a linear solve.
pub fn eval_realization(rlz: &Realization, z: Complex64) -> Result<CMatrix> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain { z, radius: 1.0 });
    }
    let h = rlz.state_dim();
    let zv = rlz.v.adjoint() * z;
    let lhs = linalg::identity(h) - &zv;
    let x = lhs
        .lu()
        .solve(&rlz.c)
        .ok_or_else(|| Error::Tolerance("I − zV* is singular".into()))?;
    let y = (linalg::identity(h) + zv) * x;
    Ok(&rlz.d + rlz.c.adjoint() * y)
}

/// Data of `Φ(z) = D_imag + T0* φ(z) T0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedForm {
    /// Skew-Hermitian part of `M_0`.
    pub d_imag: CMatrix,
    /// `r × d`, full row rank, `T0* T0 = (M_0 + M_0*)/2`.
    pub t0: CMatrix,
    /// `t_0, …, t_N` (`r × r`); empty when `r = 0`.
    pub t_coeffs: Vec<CMatrix>,
    /// Relative residuals `‖M_j − T0* t_j T0‖ / ‖Re M_0‖`, `j = 0, …, N`.
    pub residuals: Vec<f64>,
}

impl ReducedForm {
    pub fn rank(&self) -> usize {
        self.t0.nrows()
    }

    pub fn reduced_sequence(&self) -> Option<CoefficientSequence> {
        if self.rank() == 0 {
            None
        } else {
            CoefficientSequence::new(self.t_coeffs.clone()).ok()
        }
    }

    /// `T0* X T0`.
    pub fn lift(&self, x: &CMatrix) -> CMatrix {
        self.t0.adjoint() * x * &self.t0
    }
}

fn as_infeasible(err: Error) -> Error {
    match err {
        Error::NegativeEigenvalue { eigenvalue, .. } => Error::Infeasible {
            level: 0,
            min_eigenvalue: eigenvalue,
        },
        other => other,
    }
}

/// Reduces `M_0, …, M_N` to `(D_imag, T0, t_0, …, t_N)` with
/// `M_j = T0* t_j T0` and `t_0 = I`.
///
/// `tol` is the relative rank cutoff for `T0`, the residual bound, and the
/// positivity slack for the reduced Toeplitz matrix.
pub fn reduce(seq: &CoefficientSequence, tol: f64) -> Result<ReducedForm> {
    let coeffs = seq.coefficients();
    let (re_m0, d_imag) = linalg::hermitian_split(&coeffs[0])?;
    let Factorization { t: t0, rank, .. } = minimal_factor(&re_m0, tol).map_err(as_infeasible)?;
    let scale = re_m0.norm();
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };

    let mut residuals = Vec::with_capacity(coeffs.len());
    let mut t_coeffs = Vec::new();
    if rank == 0 {
        for (j, m) in coeffs.iter().enumerate() {
            let target = if j == 0 { &re_m0 } else { m };
            residuals.push(rel(target.norm()));
        }
    } else {
        let gram_inv = Cholesky::new(&t0 * t0.adjoint())
            .ok_or_else(|| Error::Tolerance("T0 T0* is not invertible".into()))?
            .inverse();
        let left = &gram_inv * &t0;
        let left_adj = left.adjoint();
        for (j, m) in coeffs.iter().enumerate() {
            let target = if j == 0 { &re_m0 } else { m };
            let t = &left * target * &left_adj;
            residuals.push(rel((target - t0.adjoint() * &t * &t0).norm()));
            t_coeffs.push(t);
        }
    }
    for (index, &residual) in residuals.iter().enumerate() {
        if residual > tol {
            return Err(Error::RangeCompatibility {
                index,
                residual,
                tolerance: tol,
            });
        }
    }
    let rf = ReducedForm {
        d_imag,
        t0,
        t_coeffs,
        residuals,
    };
    if let Some(t_seq) = rf.reduced_sequence() {
        if let Some((level, min_eigenvalue)) = toeplitz::first_infeasible_level(&t_seq, tol) {
            return Err(Error::Infeasible {
                level,
                min_eigenvalue,
            });
        }
    }
    Ok(rf)
}

fn minimal_factor(a: &CMatrix, tol: f64) -> Result<Factorization> {
    linalg::minimal_factorization(a, tol)
}

/// `𝕄_N = F*F` split into column blocks `F_j = V_j T0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor {
    pub f: CMatrix,
    pub blocks: Vec<CMatrix>,
    pub t0: CMatrix,
    /// `V_j` with `F_j = V_j T0`.
    pub isometries: Vec<CMatrix>,
    /// Block matrix `[V_i* V_j]`.
    pub middle_gram: CMatrix,
    /// `max_j ‖M_j − T0* V_0* V_j T0‖ / ‖Re M_0‖`.
    pub coefficient_residual: f64,
}

/// Factors the block Toeplitz matrix and connects each column block of the
/// factor to the minimal factor `T0` of `Re M_0` by an isometry.
pub fn gram_isometries(seq: &CoefficientSequence, tol: f64) -> Result<GramFactor> {
    let d = seq.block_dim();
    let nb = seq.len();
    let bt = toeplitz::assemble(seq);
    let full = minimal_factor(&bt.dense, tol).map_err(|e| match e {
        Error::NegativeEigenvalue { eigenvalue, .. } => Error::Infeasible {
            level: toeplitz::first_infeasible_level(seq, tol).map_or(seq.order(), |x| x.0),
            min_eigenvalue: eigenvalue,
        },
        other => other,
    })?;
    let re_m0 = linalg::hermitian_part(&seq.coefficients()[0]);
    let t0f = minimal_factor(&re_m0, tol).map_err(as_infeasible)?;
    let blocks: Vec<CMatrix> = (0..nb)
        .map(|j| full.t.view((0, j * d), (full.rank, d)).into_owned())
        .collect();
    let isometries = blocks
        .iter()
        .map(|fj| linalg::connecting_isometry(&t0f, fj, tol.max(1e-12) * 10.0 * nb as f64))
        .collect::<Result<Vec<_>>>()?;

    let r = t0f.rank;
    let mut middle_gram = CMatrix::zeros(nb * r, nb * r);
    for i in 0..nb {
        for j in 0..nb {
            let g = isometries[i].adjoint() * &isometries[j];
            middle_gram.view_mut((i * r, j * r), (r, r)).copy_from(&g);
        }
    }
    let scale = re_m0.norm();
    let mut coefficient_residual: f64 = 0.0;
    for j in 1..nb {
        let m = t0f.t.adjoint() * isometries[0].adjoint() * &isometries[j] * &t0f.t;
        let res = (&seq.coefficients()[j] - m).norm();
        coefficient_residual =
            coefficient_residual.max(if scale > 0.0 { res / scale } else { res });
    }
    let check_tol = tol.max(1e-12) * 100.0 * nb as f64;
    if coefficient_residual > check_tol {
        return Err(Error::Tolerance(format!(
            "M_j ≠ T0* V_0* V_j T0 (relative residual {coefficient_residual:e})"
        )));
    }
    let diag_defect = isometries
        .iter()
        .map(linalg::isometry_defect)
        .fold(0.0, f64::max);
    if diag_defect > check_tol {
        return Err(Error::Tolerance(format!(
            "isometry defect {diag_defect:e} on the middle Gram diagonal"
        )));
    }
    let lo = linalg::min_eigenvalue(&middle_gram);
    if lo < -check_tol {
        return Err(Error::Tolerance(format!(
            "middle Gram matrix has eigenvalue {lo:e}"
        )));
    }
    Ok(GramFactor {
        f: full.t,
        blocks,
        t0: t0f.t,
        isometries,
        middle_gram,
        coefficient_residual,
    })
}

/// `D_imag + T0* φ(z) T0`. `phi_reduced` may be `None` only when `T0` is empty.
pub fn compose_reduced(
    rf: &ReducedForm,
    phi_reduced: Option<&HerglotzSeries>,
    z: Complex64,
) -> Result<CMatrix> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain { z, radius: 1.0 });
    }
    if rf.rank() == 0 {
        return Ok(rf.d_imag.clone());
    }
    let phi = phi_reduced.ok_or_else(|| {
        Error::Dimension(format!(
            "a reduced function of dimension {} is required",
            rf.rank()
        ))
    })?;
    if phi.block_dim() != rf.rank() {
        return Err(Error::Dimension(format!(
            "reduced function has dimension {}, T0 has {} rows",
            phi.block_dim(),
            rf.rank()
        )));
    }
    let inner = eval_series(phi, z)?.value;
    Ok(&rf.d_imag + rf.lift(&inner))
}
