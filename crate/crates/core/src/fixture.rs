//! Seeded random fixtures.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (crate
//! `rand_chacha`) with standard normals from `rand_distr::StandardNormal`.
//! A complex Gaussian entry is `(a + ib)/√2` with `a` drawn before `b`, and
//! matrices are filled row by row. A realization draws, in this order:
//!
//! 1. `V`: an `h × h` complex Gaussian matrix, QR-factored, with the columns
//!    of `Q` rotated so that `diag(R)` is positive (Haar-distributed unitary);
//! 2. `C`: an `h × d` complex Gaussian matrix scaled by `1/√h` (zero with
//!    `zero_c`, but still drawn so the stream stays aligned);
//! 3. `D`: the skew-Hermitian part of a `d × d` complex Gaussian matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::herglotz::{realization_coefficients, Realization};
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::toeplitz::CoefficientSequence;
use num_complex::Complex64;

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c64(a * s, b * s);
        }
    }
    m
}

pub fn complex_gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    complex_gaussian(rng, n, 1).column(0).into_owned()
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn random_skew<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let g = complex_gaussian(rng, n, n);
    linalg::hermitian_split(&g).expect("square").1
}

/// `G*G` for an `rank × n` Gaussian `G`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = complex_gaussian(rng, rank, n);
    linalg::hermitian_part(&(g.adjoint() * g))
}

pub fn random_realization<R: Rng>(rng: &mut R, d: usize, h: usize, zero_c: bool) -> Realization {
    let v = random_unitary(rng, h);
    let c = complex_gaussian(rng, h, d) * c64(1.0 / (h as f64).sqrt(), 0.0);
    let c = if zero_c { CMatrix::zeros(h, d) } else { c };
    let d = random_skew(rng, d);
    Realization { d, c, v }
}

/// Realization drawn from `seed` together with its coefficients `M_0..M_n`.
pub fn generate(
    seed: u64,
    d: usize,
    h: usize,
    n: usize,
    zero_c: bool,
) -> Result<(Realization, CoefficientSequence)> {
    let mut r = rng(seed);
    let rlz = random_realization(&mut r, d, h, zero_c);
    let seq = realization_coefficients(&rlz, n)?;
    Ok((rlz, seq))
}

/// Points uniformly distributed in the disk of the given radius.
pub fn random_points<R: Rng>(rng: &mut R, count: usize, radius: f64) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let t: f64 = rng.random();
            Complex64::from_polar(radius * u.sqrt(), std::f64::consts::TAU * t)
        })
        .collect()
}
