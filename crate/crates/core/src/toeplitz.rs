//! Coefficient sequences and the Hermitian block Toeplitz matrices built
//! from them.
//!
//! Layout convention: block `(i, j)` of the assembled matrix is `M_{j−i}` above
//! the diagonal, `M_{i−j}*` below it, and the Hermitian part of `M_0` on it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, PsdReport};

/// Operator coefficients `M_0, …, M_N` of a truncated Herglotz series.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    block_dim: usize,
    coefficients: Vec<CMatrix>,
}

impl CoefficientSequence {
    pub fn new(coefficients: Vec<CMatrix>) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::Dimension("a coefficient sequence needs M_0".into()))?;
        let d = first.nrows();
        if d == 0 {
            return Err(Error::Dimension(
                "block dimension must be at least 1".into(),
            ));
        }
        for (n, m) in coefficients.iter().enumerate() {
            if m.shape() != (d, d) {
                return Err(Error::Dimension(format!(
                    "M_{n} has shape {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(CoefficientSequence {
            block_dim: d,
            coefficients,
        })
    }

    /// Scalar (`d = 1`) sequence.
    pub fn from_scalars(values: &[Complex64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&z| CMatrix::from_element(1, 1, z))
                .collect(),
        )
    }

    pub fn from_real_scalars(values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&x| c64(x, 0.0)).collect();
        Self::from_scalars(&values)
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// `N`, the index of the last coefficient.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coefficients(&self) -> &[CMatrix] {
        &self.coefficients
    }

    pub fn get(&self, n: usize) -> Option<&CMatrix> {
        self.coefficients.get(n)
    }

    pub fn into_coefficients(self) -> Vec<CMatrix> {
        self.coefficients
    }

    /// `M_0, …, M_n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n >= self.coefficients.len() {
            return Err(Error::InsufficientCoefficients {
                needed: n + 1,
                available: self.coefficients.len(),
            });
        }
        Ok(CoefficientSequence {
            block_dim: self.block_dim,
            coefficients: self.coefficients[..=n].to_vec(),
        })
    }

    pub(crate) fn push(&mut self, m: CMatrix) {
        debug_assert_eq!(m.shape(), (self.block_dim, self.block_dim));
        self.coefficients.push(m);
    }
}

/// Dense Hermitian block Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockToeplitz {
    pub block_dim: usize,
    pub num_blocks: usize,
    pub dense: CMatrix,
}

impl BlockToeplitz {
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let d = self.block_dim;
        self.dense.view((i * d, j * d), (d, d)).into_owned()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.dense)
    }
}

/// Builds the block Toeplitz matrix of `M_0, …, M_N`. The result is exactly
/// Hermitian: lower blocks are stored conjugate transposes of upper blocks.
pub fn assemble(seq: &CoefficientSequence) -> BlockToeplitz {
    let d = seq.block_dim();
    let nb = seq.len();
    let diag = linalg::hermitian_part(&seq.coefficients()[0]);
    let mut dense = CMatrix::zeros(nb * d, nb * d);
    for i in 0..nb {
        dense.view_mut((i * d, i * d), (d, d)).copy_from(&diag);
        for j in (i + 1)..nb {
            let m = &seq.coefficients()[j - i];
            dense.view_mut((i * d, j * d), (d, d)).copy_from(m);
            dense
                .view_mut((j * d, i * d), (d, d))
                .copy_from(&m.adjoint());
        }
    }
    BlockToeplitz {
        block_dim: d,
        num_blocks: nb,
        dense,
    }
}

/// Conjugates a square block matrix by the block anti-diagonal permutation:
/// output block `(i, j)` is input block `(N−i, N−j)`.
pub fn reverse_blocks(dense: &CMatrix, block_dim: usize) -> Result<CMatrix> {
    let n = dense.nrows();
    if dense.ncols() != n || block_dim == 0 || !n.is_multiple_of(block_dim) {
        return Err(Error::Dimension(format!(
            "{}x{} matrix cannot be split into {block_dim}x{block_dim} blocks",
            dense.nrows(),
            dense.ncols()
        )));
    }
    let nb = n / block_dim;
    let d = block_dim;
    let mut out = CMatrix::zeros(n, n);
    for i in 0..nb {
        for j in 0..nb {
            out.view_mut((i * d, j * d), (d, d))
                .copy_from(&dense.view(((nb - 1 - i) * d, (nb - 1 - j) * d), (d, d)));
        }
    }
    Ok(out)
}

/// The block-reversed matrix: the layout with `M_{i−j}` below the diagonal.
pub fn reversal_conjugate(bt: &BlockToeplitz) -> BlockToeplitz {
    BlockToeplitz {
        block_dim: bt.block_dim,
        num_blocks: bt.num_blocks,
        dense: reverse_blocks(&bt.dense, bt.block_dim).expect("block Toeplitz is square"),
    }
}

/// Positivity report for every truncation level `n = 0, …, N`, each computed
/// from scratch.
pub fn positivity_profile(seq: &CoefficientSequence, tol: f64) -> Vec<PsdReport> {
    let full = assemble(seq);
    let d = seq.block_dim();
    (0..seq.len())
        .map(|n| {
            let size = (n + 1) * d;
            let leading = full.dense.view((0, 0), (size, size)).into_owned();
            PsdReport::from_min_eigenvalue(linalg::min_eigenvalue(&leading), tol)
        })
        .collect()
}

/// Returns the first truncation level whose Toeplitz matrix has an
/// eigenvalue below `−tol`.
pub fn first_infeasible_level(seq: &CoefficientSequence, tol: f64) -> Option<(usize, f64)> {
    if linalg::min_eigenvalue(&assemble(seq).dense) >= -tol {
        // Leading principal blocks of a PSD matrix are PSD.
        return None;
    }
    positivity_profile(seq, tol)
        .iter()
        .enumerate()
        .find(|(_, r)| !r.is_psd)
        .map(|(n, r)| (n, r.min_eigenvalue))
}

/// One probe of the 2×2 compression inequality
/// `|⟨A_{ℓj} w, v⟩|² ≤ ⟨A_{ℓℓ} v, v⟩ ⟨A_{jj} w, w⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSample {
    pub row_block: usize,
    pub col_block: usize,
    pub v: CVector,
    pub w: CVector,
}

fn quad(a: &CMatrix, x: &CVector, y: &CVector) -> Complex64 {
    // ⟨A y, x⟩ = x* A y
    (x.adjoint() * a * y)[(0, 0)]
}

/// Slack `⟨A_{ℓℓ}v,v⟩⟨A_{jj}w,w⟩ − |⟨A_{ℓj}w,v⟩|²` for each sample.
pub fn cross_block_bound_check(
    bt: &BlockToeplitz,
    samples: &[BoundSample],
    tol: f64,
) -> Result<Vec<f64>> {
    cross_block_bound_check_dense(&bt.dense, bt.block_dim, samples, tol)
}

/// Same as [`cross_block_bound_check`] for an arbitrary PSD block matrix.
pub fn cross_block_bound_check_dense(
    dense: &CMatrix,
    block_dim: usize,
    samples: &[BoundSample],
    tol: f64,
) -> Result<Vec<f64>> {
    let report = linalg::psd_report(dense, tol)?;
    if !report.is_psd {
        return Err(Error::Contract(format!(
            "block matrix is not positive (min eigenvalue {:e})",
            report.min_eigenvalue
        )));
    }
    let d = block_dim;
    let nb = dense.nrows().checked_div(d).unwrap_or(0);
    samples
        .iter()
        .map(|s| {
            if s.row_block >= nb || s.col_block >= nb {
                return Err(Error::Dimension(format!(
                    "block index ({}, {}) out of range for {nb} blocks",
                    s.row_block, s.col_block
                )));
            }
            if s.v.len() != d || s.w.len() != d {
                return Err(Error::Dimension(format!(
                    "sample vectors must have length {d}"
                )));
            }
            let blk = |i: usize, j: usize| dense.view((i * d, j * d), (d, d)).into_owned();
            let (l, j) = (s.row_block, s.col_block);
            let vv = quad(&blk(l, l), &s.v, &s.v).re;
            let ww = quad(&blk(j, j), &s.w, &s.w).re;
            let cross = quad(&blk(l, j), &s.v, &s.w).norm_sqr();
            Ok(vv * ww - cross)
        })
        .collect()
}
