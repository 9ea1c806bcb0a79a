//! Exact (non-tree) t-SNE.
//!
//! High-dimensional affinities use a Gaussian kernel whose per-point
//! bandwidth is binary-searched so the conditional distribution's perplexity
//! hits the target; affinities are then symmetrized. The 2D embedding
//! minimizes the KL divergence to Student-t affinities by gradient descent
//! with momentum and early exaggeration. The final 100 iterations drop
//! momentum and use a backtracking step so the objective is non-increasing
//! at the end of the run.
//!
//! Everything is `O(n^2)` per iteration, which is the right trade at desk
//! scale (a few thousand points).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AnalyticsError, ProjectionParams};
use crate::fmath;
use crate::linalg::Matrix;

/// Iterations at the end of the schedule run in monotone (backtracking)
/// mode.
const POLISH_ITERS: usize = 100;
/// Bisection steps for the per-point bandwidth search.
const BANDWIDTH_SEARCH_ITERS: usize = 64;
const P_FLOOR: f64 = 1e-12;

pub struct TsneResult {
    pub coords: Vec<[f64; 2]>,
    /// KL divergence recorded at each polish-phase iteration.
    pub kl_trace: Vec<f64>,
}

/// Embeds the rows of `points` into 2D. Deterministic given
/// `params.seed`.
pub fn embed(points: &Matrix, params: &ProjectionParams) -> Result<TsneResult, AnalyticsError> {
    let n = points.rows();
    if n < 3 {
        return Err(AnalyticsError::TooFewPoints {
            method: "tsne",
            needed: 3,
            got: n,
        });
    }
    if !(params.perplexity > 0.0) || params.perplexity >= (n as f64 - 1.0) / 3.0 {
        return Err(AnalyticsError::BadPerplexity {
            perplexity: params.perplexity,
            points: n,
        });
    }

    let p = joint_affinities(points, params.perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut y: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-1e-4..1e-4)).collect();
    let mut velocity = vec![0.0; n * 2];
    let mut gains = vec![1.0f64; n * 2];
    let mut gradient = vec![0.0; n * 2];
    let mut q_weights = vec![0.0; n * n];

    let total_iters = params.iterations;
    let exaggeration_end = params.exaggeration_iters.min(total_iters);
    let polish_start = total_iters.saturating_sub(POLISH_ITERS).max(exaggeration_end);
    let mut kl_trace = Vec::new();

    for iter in 0..total_iters {
        let exaggeration = if iter < exaggeration_end {
            params.early_exaggeration
        } else {
            1.0
        };

        if iter < polish_start {
            let momentum = if iter < exaggeration_end { 0.5 } else { 0.8 };
            compute_gradient(&p, &y, n, exaggeration, &mut q_weights, &mut gradient);
            // adaptive per-coordinate gains keep the fixed learning rate
            // stable once exaggeration ends
            for ((gain, v), g) in gains.iter_mut().zip(&velocity).zip(&gradient) {
                *gain = if (*g > 0.0) != (*v > 0.0) {
                    *gain + 0.2
                } else {
                    (*gain * 0.8).max(0.01)
                };
            }
            for ((v, g), gain) in velocity.iter_mut().zip(&gradient).zip(&gains) {
                *v = momentum * *v - params.learning_rate * gain * g;
            }
            for (coord, v) in y.iter_mut().zip(&velocity) {
                *coord += v;
            }
            recenter(&mut y, n);
        } else {
            // monotone polish: plain gradient step, halved until the KL
            // objective does not increase
            let kl_before = kl_divergence(&p, &y, n, &mut q_weights);
            compute_gradient(&p, &y, n, 1.0, &mut q_weights, &mut gradient);
            let mut step = params.learning_rate;
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = y.clone();
                for (coord, g) in trial.iter_mut().zip(&gradient) {
                    *coord -= step * g;
                }
                recenter(&mut trial, n);
                let kl_after = kl_divergence(&p, &trial, n, &mut q_weights);
                if kl_after <= kl_before {
                    y = trial;
                    kl_trace.push(kl_after);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // no improving step; hold position
                kl_trace.push(kl_before);
            }
        }
    }

    let coords = (0..n).map(|i| [y[i * 2], y[i * 2 + 1]]).collect();
    Ok(TsneResult { coords, kl_trace })
}

/// Symmetrized joint affinities `p_ij`, floored at 1e-12.
fn joint_affinities(points: &Matrix, perplexity: f64) -> Vec<f64> {
    let n = points.rows();
    let distances_sq = pairwise_sq_distances(points);
    let target_entropy = fmath::ln(perplexity);

    let mut conditional = vec![0.0; n * n];
    for i in 0..n {
        bandwidth_search(
            &distances_sq[i * n..(i + 1) * n],
            i,
            target_entropy,
            &mut conditional[i * n..(i + 1) * n],
        );
    }

    let mut joint = vec![0.0; n * n];
    let scale = 1.0 / (2.0 * n as f64);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            joint[i * n + j] =
                ((conditional[i * n + j] + conditional[j * n + i]) * scale).max(P_FLOOR);
        }
    }
    joint
}

fn pairwise_sq_distances(points: &Matrix) -> Vec<f64> {
    let n = points.rows();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (a, b) in points.row(i).iter().zip(points.row(j)) {
                let diff = a - b;
                acc += diff * diff;
            }
            out[i * n + j] = acc;
            out[j * n + i] = acc;
        }
    }
    out
}

/// Binary search for `beta = 1/(2 sigma^2)` so the conditional distribution
/// over `row` hits the target entropy; writes normalized `p_{j|i}` into
/// `out`.
fn bandwidth_search(row: &[f64], i: usize, target_entropy: f64, out: &mut [f64]) {
    let mut beta = 1.0;
    let mut beta_min = f64::NEG_INFINITY;
    let mut beta_max = f64::INFINITY;

    for _ in 0..BANDWIDTH_SEARCH_ITERS {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (j, &dist) in row.iter().enumerate() {
            if j == i {
                out[j] = 0.0;
                continue;
            }
            let w = fmath::exp(-beta * dist);
            out[j] = w;
            sum += w;
            weighted += beta * dist * w;
        }
        // entropy of the normalized distribution: H = ln(sum) + weighted/sum
        let entropy = if sum > 0.0 {
            fmath::ln(sum) + weighted / sum
        } else {
            0.0
        };
        let diff = entropy - target_entropy;
        if fmath::abs(diff) < 1e-7 {
            break;
        }
        if diff > 0.0 {
            beta_min = beta;
            beta = if beta_max.is_infinite() {
                beta * 2.0
            } else {
                (beta + beta_max) * 0.5
            };
        } else {
            beta_max = beta;
            beta = if beta_min.is_infinite() {
                beta * 0.5
            } else {
                (beta + beta_min) * 0.5
            };
        }
    }

    let sum: f64 = out
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, w)| w)
        .sum();
    if sum > 0.0 {
        let inv = 1.0 / sum;
        for (j, w) in out.iter_mut().enumerate() {
            if j != i {
                *w *= inv;
            }
        }
    }
}

/// Student-t weights `w_ij = 1/(1 + |y_i - y_j|^2)` and their total.
fn student_t_weights(y: &[f64], n: usize, weights: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        weights[i * n + i] = 0.0;
        for j in (i + 1)..n {
            let dx = y[i * 2] - y[j * 2];
            let dy = y[i * 2 + 1] - y[j * 2 + 1];
            let w = 1.0 / (1.0 + dx * dx + dy * dy);
            weights[i * n + j] = w;
            weights[j * n + i] = w;
            total += 2.0 * w;
        }
    }
    total
}

/// KL gradient: `4 sum_j (exaggeration*p_ij - q_ij) w_ij (y_i - y_j)`.
fn compute_gradient(
    p: &[f64],
    y: &[f64],
    n: usize,
    exaggeration: f64,
    q_weights: &mut [f64],
    gradient: &mut [f64],
) {
    let total = student_t_weights(y, n, q_weights).max(f64::MIN_POSITIVE);
    let inv_total = 1.0 / total;
    gradient.fill(0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = q_weights[i * n + j];
            let q = (w * inv_total).max(P_FLOOR);
            let factor = 4.0 * (exaggeration * p[i * n + j] - q) * w;
            let dx = y[i * 2] - y[j * 2];
            let dy = y[i * 2 + 1] - y[j * 2 + 1];
            gradient[i * 2] += factor * dx;
            gradient[i * 2 + 1] += factor * dy;
        }
    }
}

fn kl_divergence(p: &[f64], y: &[f64], n: usize, q_weights: &mut [f64]) -> f64 {
    let total = student_t_weights(y, n, q_weights).max(f64::MIN_POSITIVE);
    let inv_total = 1.0 / total;
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pij = p[i * n + j];
            let q = (q_weights[i * n + j] * inv_total).max(P_FLOOR);
            kl += pij * fmath::ln(pij / q);
        }
    }
    kl
}

fn recenter(y: &mut [f64], n: usize) {
    let mut mean_x = 0.0;
    let mut mean_y = 0.0;
    for i in 0..n {
        mean_x += y[i * 2];
        mean_y += y[i * 2 + 1];
    }
    mean_x /= n as f64;
    mean_y /= n as f64;
    for i in 0..n {
        y[i * 2] -= mean_x;
        y[i * 2 + 1] -= mean_y;
    }
}
