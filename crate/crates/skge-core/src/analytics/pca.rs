//! Top-2 principal components via power iteration with deflation.
//!
//! Deterministic: the iteration starts from a fixed-seed pseudo-random
//! vector. Serves as the fast, exactly-reproducible fallback projector.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::linalg::{dot, norm2, Matrix};

const MAX_ITERS: usize = 1_000;
const TOLERANCE: f64 = 1e-13;
/// Fixed internal seed; PCA has no user-facing randomness.
const INIT_SEED: u64 = 0x5ca1_ab1e;

/// Projects rows of `points` onto their top-2 principal components.
/// Degenerate directions (zero variance) map to zero coordinates.
pub fn project(points: &Matrix) -> Vec<[f64; 2]> {
    let n = points.rows();
    let d = points.cols();

    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(points.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut centered = Matrix::zeros(n, d);
    for i in 0..n {
        for ((c, v), m) in centered.row_mut(i).iter_mut().zip(points.row(i)).zip(&mean) {
            *c = v - m;
        }
    }

    // covariance (unnormalized; scale does not change the eigenvectors)
    let mut cov = Matrix::zeros(d, d);
    for i in 0..n {
        let row = centered.row(i);
        for a in 0..d {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in 0..d {
                cov.row_mut(a)[b] += ra * row[b];
            }
        }
    }

    let first = top_eigenvector(&cov, None);
    let second = top_eigenvector(&cov, first.as_deref());

    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        let row = centered.row(i);
        let x = first.as_deref().map(|v| dot(row, v)).unwrap_or(0.0);
        let y = second.as_deref().map(|v| dot(row, v)).unwrap_or(0.0);
        coords.push([x, y]);
    }
    coords
}

/// Power iteration for the dominant eigenvector, kept orthogonal to
/// `deflate` when given. Returns None when the matrix annihilates the
/// iterate (zero variance along every remaining direction).
fn top_eigenvector(cov: &Matrix, deflate: Option<&[f64]>) -> Option<Vec<f64>> {
    let d = cov.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, deflate);
    normalize(&mut v)?;

    let mut next = vec![0.0; d];
    for _ in 0..MAX_ITERS {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = dot(cov.row(i), &v);
        }
        orthogonalize(&mut next, deflate);
        if normalize(&mut next).is_none() {
            return None;
        }
        // eigenvector up to sign; measure movement against both signs
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .min(
                v.iter()
                    .zip(&next)
                    .map(|(a, b)| (a + b) * (a + b))
                    .sum::<f64>(),
            );
        core::mem::swap(&mut v, &mut next);
        if fmath::sqrt(delta) < TOLERANCE {
            break;
        }
    }
    Some(v)
}

fn orthogonalize(v: &mut [f64], against: Option<&[f64]>) {
    if let Some(basis) = against {
        let proj = dot(v, basis);
        for (slot, b) in v.iter_mut().zip(basis) {
            *slot -= proj * b;
        }
    }
}

fn normalize(v: &mut [f64]) -> Option<()> {
    let n = norm2(v);
    if n < 1e-200 {
        return None;
    }
    let inv = 1.0 / n;
    for slot in v.iter_mut() {
        *slot *= inv;
    }
    Some(())
}
