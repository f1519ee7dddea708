//! Dense complex linear algebra: Hermitian splitting, positivity certificates,
//! minimal factorizations `A = T*T`, connecting isometries between two
//! factorizations of the same operator, and block LDU factorization through
//! the Schur complement.
//!
//! Everything here works on [`CMatrix`], a dynamically sized complex matrix.
//! The heavy lifting (Hermitian eigensolver, SVD, Cholesky, LU) is delegated
//! to `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative rank cutoff for [`minimal_factorization`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Positivity certificate of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    pub is_strictly_positive: bool,
    pub tolerance_used: f64,
}

impl PsdReport {
    pub fn from_min_eigenvalue(min_eigenvalue: f64, tol: f64) -> Self {
        PsdReport {
            min_eigenvalue,
            is_psd: min_eigenvalue >= -tol,
            is_strictly_positive: min_eigenvalue > tol,
            tolerance_used: tol,
        }
    }
}

/// A minimal factorization `A = T*T` with `T` of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// `rank × n` factor.
    pub t: CMatrix,
    pub rank: usize,
    /// `‖A − T*T‖_F / ‖A‖_F` (zero when `A = 0`).
    pub residual: f64,
}

/// `G = L · M · U` with `M = diag(A, D×)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurSplit {
    pub a_block: CMatrix,
    pub b_block: CMatrix,
    pub c_block: CMatrix,
    pub d_block: CMatrix,
    pub schur_complement: CMatrix,
    pub lower_factor: CMatrix,
    pub middle_factor: CMatrix,
    pub upper_factor: CMatrix,
    /// 2-norm condition number of the leading block (1 when it is empty).
    pub condition_number: f64,
}

impl SchurSplit {
    pub fn reconstruct(&self) -> CMatrix {
        &self.lower_factor * &self.middle_factor * &self.upper_factor
    }
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real matrix from row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(
        entries.len(),
        rows * cols,
        "entry count must be rows * cols"
    );
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c64(x, 0.0)))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Smallest and largest singular values; `(0, 0)` for empty matrices.
pub fn singular_range(m: &CMatrix) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    (lo, hi)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

fn ensure_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Splits `M` into its Hermitian part `(M + M*)/2` and skew part `(M − M*)/2`.
///
/// The Hermitian part is written so that mirrored entries are exact complex
/// conjugates of each other and the diagonal is exactly real.
pub fn hermitian_split(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = ensure_square(m, "hermitian_split input")?;
    let mut h = CMatrix::zeros(n, n);
    let mut s = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            let hij = (a + b) * 0.5;
            let sij = (a - b) * 0.5;
            if i == j {
                h[(i, i)] = c64(hij.re, 0.0);
                s[(i, i)] = c64(0.0, sij.im);
            } else {
                h[(i, j)] = hij;
                h[(j, i)] = hij.conj();
                s[(i, j)] = sij;
                s[(j, i)] = -sij.conj();
            }
        }
    }
    Ok((h, s))
}

/// Hermitian part only, for callers that already know `m` is square.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    hermitian_split(m).expect("square input").0
}

/// Eigenvalues in ascending order together with matching eigenvector columns.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigenvalues(h: &CMatrix) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(h)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue of the Hermitian part; `+∞` for the empty matrix.
pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    eigenvalues(h).first().copied().unwrap_or(f64::INFINITY)
}

/// Certifies positivity of a Hermitian matrix.
///
/// `tol` is both the Hermiticity tolerance (relative to the largest entry)
/// and the absolute eigenvalue slack.
pub fn psd_report(h: &CMatrix, tol: f64) -> Result<PsdReport> {
    ensure_square(h, "psd_report input")?;
    let skew = max_abs(&(h - h.adjoint()));
    if skew > tol * max_abs(h).max(1.0) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (max |H - H*| = {skew:e})"
        )));
    }
    Ok(PsdReport::from_min_eigenvalue(min_eigenvalue(h), tol))
}

/// Hermitian square root of a positive semidefinite matrix; negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(h: &CMatrix) -> CMatrix {
    spectral_map(h, |x| x.max(0.0).sqrt())
}

/// Inverse Hermitian square root of a strictly positive matrix.
pub fn psd_inv_sqrt(h: &CMatrix) -> CMatrix {
    spectral_map(h, |x| 1.0 / x.sqrt())
}

fn spectral_map(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * f(values[j])
    });
    &scaled * vectors.adjoint()
}

/// Minimal factorization `A = T*T` through the Hermitian eigendecomposition.
///
/// Eigenvalues above `tol_rank · λ_max` are kept; eigenvalues in
/// `[−tol_rank · max(λ_max, 1), 0)` are treated as zero and anything more
/// negative is an error. Each row of `T` is rotated so that its largest entry
/// is real and positive, which makes the factor deterministic.
pub fn minimal_factorization(a: &CMatrix, tol_rank: f64) -> Result<Factorization> {
    let n = ensure_square(a, "minimal_factorization input")?;
    let (values, vectors) = hermitian_eigen(a);
    let lam_max = values.last().copied().unwrap_or(0.0).max(0.0);
    let neg_tol = tol_rank * lam_max.max(1.0);
    if let Some(&lo) = values.first() {
        if lo < -neg_tol {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: lo,
                tolerance: neg_tol,
            });
        }
    }
    let cutoff = tol_rank * lam_max;
    let kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&k| values[k] > cutoff && values[k] > 0.0)
        .collect();
    let rank = kept.len();
    let mut t = CMatrix::zeros(rank, n);
    for (row, &k) in kept.iter().enumerate() {
        let scale = values[k].sqrt();
        for col in 0..n {
            t[(row, col)] = vectors[(col, k)].conj() * scale;
        }
        let pivot = (0..n)
            .max_by(|&x, &y| t[(row, x)].norm().total_cmp(&t[(row, y)].norm()))
            .map(|c| t[(row, c)])
            .unwrap_or(c64(1.0, 0.0));
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for col in 0..n {
                t[(row, col)] *= phase;
            }
        }
    }
    let a_norm = a.norm();
    let residual = if a_norm > 0.0 {
        (a - t.adjoint() * &t).norm() / a_norm
    } else {
        0.0
    };
    Ok(Factorization { t, rank, residual })
}

/// Projects a matrix with at least as many rows as columns onto the nearest
/// isometry (polar factor).
pub fn polar_isometry(v: &CMatrix) -> CMatrix {
    if v.is_empty() {
        return v.clone();
    }
    let svd = v.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    u * vt
}

/// Distance of `V*V` from the identity in the Frobenius norm.
pub fn isometry_defect(v: &CMatrix) -> f64 {
    (v.adjoint() * v - identity(v.ncols())).norm()
}

/// Distance of `VV*` from the identity in the Frobenius norm.
pub fn coisometry_defect(v: &CMatrix) -> f64 {
    (v * v.adjoint() - identity(v.nrows())).norm()
}

/// Finds the isometry `V` with `T′ = V·T`, where `min` is a minimal
/// factorization and `t_other` any other factor of the same operator.
///
/// `V` sends each column of `T` to the matching column of `T′`; it is computed
/// as `T′·T⁺` and snapped onto the isometries when it drifts more than
/// `tol / 10` away from them.
pub fn connecting_isometry(min: &Factorization, t_other: &CMatrix, tol: f64) -> Result<CMatrix> {
    let t = &min.t;
    if t.ncols() != t_other.ncols() {
        return Err(Error::Dimension(format!(
            "factors act on spaces of dimension {} and {}",
            t.ncols(),
            t_other.ncols()
        )));
    }
    let a = t.adjoint() * t;
    let a_other = t_other.adjoint() * t_other;
    let scale = a.norm().max(a_other.norm());
    let mismatch = if scale > 0.0 {
        (&a - &a_other).norm() / scale
    } else {
        0.0
    };
    if mismatch > tol {
        return Err(Error::InconsistentFactorization {
            mismatch,
            tolerance: tol,
        });
    }
    let r = t.nrows();
    if r == 0 {
        return Ok(CMatrix::zeros(t_other.nrows(), 0));
    }
    if t_other.nrows() < r {
        return Err(Error::InconsistentFactorization {
            mismatch: f64::INFINITY,
            tolerance: tol,
        });
    }
    let gram = t * t.adjoint();
    let chol = Cholesky::new(gram).ok_or(Error::Contract(
        "first factorization is not of full row rank".into(),
    ))?;
    // V = T′ T* (T T*)^{-1}  ⇔  (T T*) V* = T T′*
    let v_adj = chol.solve(&(t * t_other.adjoint()));
    let mut v = v_adj.adjoint();
    if isometry_defect(&v) > tol / 10.0 {
        v = polar_isometry(&v);
    }
    Ok(v)
}

/// Block LDU factorization of `G` around its leading `k × k` block.
pub fn schur_split(g: &CMatrix, k: usize) -> Result<SchurSplit> {
    let n = ensure_square(g, "schur_split input")?;
    if k > n {
        return Err(Error::Dimension(format!(
            "split index {k} exceeds matrix order {n}"
        )));
    }
    let m = n - k;
    let a = g.view((0, 0), (k, k)).into_owned();
    let b = g.view((0, k), (k, m)).into_owned();
    let c = g.view((k, 0), (m, k)).into_owned();
    let d = g.view((k, k), (m, m)).into_owned();

    let (a_inv, condition_number) = if k == 0 {
        (CMatrix::zeros(0, 0), 1.0)
    } else {
        let (lo, hi) = singular_range(&a);
        if hi == 0.0 || lo <= hi * f64::EPSILON * k as f64 {
            return Err(Error::SingularBlock { sigma_min: lo });
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBlock { sigma_min: lo })?;
        (inv, hi / lo)
    };

    let a_inv_b = &a_inv * &b;
    let c_a_inv = &c * &a_inv;
    let schur_complement = &d - &c * &a_inv_b;

    let mut lower_factor = identity(n);
    lower_factor.view_mut((k, 0), (m, k)).copy_from(&c_a_inv);
    let mut upper_factor = identity(n);
    upper_factor.view_mut((0, k), (k, m)).copy_from(&a_inv_b);
    let mut middle_factor = CMatrix::zeros(n, n);
    middle_factor.view_mut((0, 0), (k, k)).copy_from(&a);
    middle_factor
        .view_mut((k, k), (m, m))
        .copy_from(&schur_complement);

    Ok(SchurSplit {
        a_block: a,
        b_block: b,
        c_block: c,
        d_block: d,
        schur_complement,
        lower_factor,
        middle_factor,
        upper_factor,
        condition_number,
    })
}
