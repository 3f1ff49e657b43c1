//! Exact t-SNE on a precomputed dissimilarity matrix.
//!
//! Input affinities are `exp(-beta_i * d_ij)`. With cosine distance on unit
//! vectors, `d_ij` is half the squared Euclidean distance, so this is the
//! usual Gaussian kernel with the factor folded into `beta_i`.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneConfig {
    /// `None` selects `min(30, (n - 1) / 3)`.
    pub perplexity: Option<f64>,
    pub iterations: usize,
    pub exaggeration_iterations: usize,
    pub exaggeration: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: None,
            iterations: 500,
            exaggeration_iterations: 250,
            exaggeration: 12.0,
            learning_rate: 200.0,
            seed: super::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TsneFit {
    pub coords: Vec<[f64; 2]>,
    pub perplexity: f64,
    /// KL(P || Q) at the first iteration without exaggeration.
    pub kl_after_exaggeration: f64,
    pub kl_divergence: f64,
}

const MIN_PROB: f64 = 1e-12;

pub fn default_perplexity(n: usize) -> f64 {
    (30.0f64).min((n as f64 - 1.0) / 3.0)
}

/// Conditional affinities with per-row precision found by bisection on the
/// row entropy, then symmetrized and normalized to sum to one.
fn joint_probabilities(dist: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target = libm::log(perplexity.max(1.0 + 1e-9));
    let mut p = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        let dmin = (0..n).filter(|&j| j != i).map(|j| dist[i * n + j]).fold(f64::INFINITY, f64::min);
        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        for _ in 0..200 {
            let mut sum = 0.0;
            let mut wsum = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { libm::exp(-beta * (dist[i * n + j] - dmin)) };
                sum += row[j];
                wsum += row[j] * (dist[i * n + j] - dmin);
            }
            let entropy = libm::log(sum) + beta * wsum / sum;
            let diff = entropy - target;
            if libm::fabs(diff) < 1e-10 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            p[i * n + j] = row[j] / sum;
        }
    }
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                joint[i * n + j] = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(MIN_PROB);
            }
        }
    }
    joint
}

/// Student-t kernel values and their sum.
fn kernel(y: &[[f64; 2]], num: &mut [f64]) -> f64 {
    let n = y.len();
    let mut sum = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in i + 1..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let k = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = k;
            num[j * n + i] = k;
            sum += 2.0 * k;
        }
    }
    sum
}

fn kl(p: &[f64], num: &[f64], sum: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = (num[i * n + j] / sum).max(MIN_PROB);
                let pij = p[i * n + j];
                acc += pij * libm::log(pij / q);
            }
        }
    }
    acc
}

/// KL divergence of an embedding against the joint affinities of `dist`.
pub fn kl_divergence(dist: &[f64], n: usize, perplexity: f64, coords: &[[f64; 2]]) -> f64 {
    let p = joint_probabilities(dist, n, perplexity);
    let mut num = vec![0.0; n * n];
    let sum = kernel(coords, &mut num);
    kl(&p, &num, sum, n)
}

pub fn fit(dist: &[f64], n: usize, config: &TsneConfig) -> TsneFit {
    assert_eq!(dist.len(), n * n);
    let perplexity = config.perplexity.unwrap_or_else(|| default_perplexity(n));
    let p = joint_probabilities(dist, n, perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-2).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut kl_after_exaggeration = f64::NAN;

    for it in 0..config.iterations {
        let exaggerated = it < config.exaggeration_iterations;
        let exag = if exaggerated { config.exaggeration } else { 1.0 };
        let momentum = if exaggerated { 0.5 } else { 0.8 };
        let sum = kernel(&y, &mut num);
        if it == config.exaggeration_iterations {
            kl_after_exaggeration = kl(&p, &num, sum, n);
        }
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = num[i * n + j];
                let m = (exag * p[i * n + j] - k / sum) * k;
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            for d in 0..2 {
                let grad = 4.0 * g[d];
                gains[i][d] = if (grad > 0.0) != (velocity[i][d] > 0.0) {
                    gains[i][d] + 0.2
                } else {
                    (gains[i][d] * 0.8f64).max(0.01)
                };
                velocity[i][d] = momentum * velocity[i][d] - config.learning_rate * gains[i][d] * grad;
            }
        }
        let mut mean = [0.0; 2];
        for (yi, vi) in y.iter_mut().zip(&velocity) {
            yi[0] += vi[0];
            yi[1] += vi[1];
            mean[0] += yi[0];
            mean[1] += yi[1];
        }
        for yi in &mut y {
            yi[0] -= mean[0] / n as f64;
            yi[1] -= mean[1] / n as f64;
        }
    }
    let sum = kernel(&y, &mut num);
    let kl_divergence = kl(&p, &num, sum, n);
    if kl_after_exaggeration.is_nan() {
        kl_after_exaggeration = kl_divergence;
    }
    TsneFit {
        coords: y,
        perplexity,
        kl_after_exaggeration,
        kl_divergence,
    }
}
