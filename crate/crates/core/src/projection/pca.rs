//! Principal component analysis through the centered Gram matrix.
//!
//! With `n` documents over a vocabulary of `p` terms and `n << p`, the
//! eigenvectors `u_k` of the doubly centered Gram matrix `Xc Xcᵀ` give the
//! principal coordinates directly as `sqrt(λ_k) u_k`, without forming the
//! `p x p` covariance.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{double_center, symmetric_eigen, SymmetricEigen};
use crate::text::sparse_dot;

pub type SparseRow<'a> = &'a [(u32, f64)];

/// Relative eigenvalue floor below which a component counts as absent.
pub(crate) const RANK_TOL: f64 = 1e-12;

/// Centered Gram decomposition shared by PCA and LDA.
#[derive(Debug, Clone)]
pub(crate) struct CenteredGram {
    pub n: usize,
    pub eigen: SymmetricEigen,
    pub mean: Vec<f64>,
    /// Trace of the centered Gram matrix, i.e. total variance times `n`.
    pub total: f64,
    raw_dots_mean: Vec<f64>,
    mean_sq: f64,
    raw_trace: f64,
}

impl CenteredGram {
    pub fn new(rows: &[SparseRow<'_>], dim: usize) -> Self {
        let n = rows.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let d = sparse_dot(rows[i], rows[j]);
                gram[i * n + j] = d;
                gram[j * n + i] = d;
            }
        }
        let mut mean = vec![0.0; dim];
        for r in rows {
            for &(i, w) in r.iter() {
                mean[i as usize] += w;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let raw_dots_mean: Vec<f64> = rows.iter().map(|r| dot_dense(r, &mean)).collect();
        let mean_sq = mean.iter().map(|x| x * x).sum();
        let raw_trace = (0..n).map(|i| gram[i * n + i]).sum::<f64>();
        double_center(&mut gram, n);
        let total = (0..n).map(|i| gram[i * n + i]).sum::<f64>().max(0.0);
        CenteredGram {
            n,
            eigen: symmetric_eigen(&gram, n),
            mean,
            total,
            raw_dots_mean,
            mean_sq,
            raw_trace,
        }
    }

    /// Number of components with a non-negligible eigenvalue.
    pub fn rank(&self) -> usize {
        // measured against the uncentered scale so that rounding left over
        // from centering identical rows does not count as variance
        let floor = RANK_TOL * self.total.max(self.raw_trace).max(f64::MIN_POSITIVE);
        self.eigen.values.iter().take_while(|&&l| l > floor).count()
    }

    /// Coordinate of training row `i` on component `k`.
    pub fn score(&self, i: usize, k: usize) -> f64 {
        libm::sqrt(self.eigen.values[k].max(0.0)) * self.eigen.vectors[i * self.n + k]
    }

    /// Coordinates of an out-of-sample dense vector on the first `r`
    /// components.
    pub fn transform(&self, rows: &[SparseRow<'_>], q: &[f64], r: usize) -> Vec<f64> {
        let q_mean: f64 = q.iter().zip(&self.mean).map(|(a, b)| a * b).sum();
        // (q - m) . (x_i - m)
        let g: Vec<f64> = rows
            .iter()
            .zip(&self.raw_dots_mean)
            .map(|(row, xm)| dot_dense(row, q) - q_mean - xm + self.mean_sq)
            .collect();
        (0..r)
            .map(|k| {
                let l = self.eigen.values[k];
                let s: f64 = (0..self.n).map(|i| self.eigen.vectors[i * self.n + k] * g[i]).sum();
                s / libm::sqrt(l)
            })
            .collect()
    }
}

fn dot_dense(row: SparseRow<'_>, dense: &[f64]) -> f64 {
    row.iter().map(|&(i, w)| w * dense[i as usize]).sum()
}

#[derive(Debug, Clone)]
pub struct PcaFit {
    pub coords: Vec<[f64; 2]>,
    /// Fraction of total variance on each axis.
    pub explained_variance: [f64; 2],
    pub degenerate: bool,
    gram: CenteredGram,
    axes: usize,
}

impl PcaFit {
    /// Projects a dense vector onto the fitted axes; `rows` must be the
    /// rows the fit was computed from.
    pub fn transform(&self, rows: &[SparseRow<'_>], q: &[f64]) -> [f64; 2] {
        let z = self.gram.transform(rows, q, self.axes);
        [z.first().copied().unwrap_or(0.0), z.get(1).copied().unwrap_or(0.0)]
    }
}

pub fn fit(rows: &[SparseRow<'_>], dim: usize) -> PcaFit {
    let gram = CenteredGram::new(rows, dim);
    let axes = gram.rank().min(2);
    let n = rows.len();
    let coords = (0..n)
        .map(|i| {
            let mut c = [0.0; 2];
            for k in 0..axes {
                c[k] = gram.score(i, k);
            }
            c
        })
        .collect();
    let mut explained_variance = [0.0; 2];
    if gram.total > 0.0 {
        for k in 0..2.min(n) {
            explained_variance[k] = gram.eigen.values[k].max(0.0) / gram.total;
        }
    }
    PcaFit {
        coords,
        explained_variance,
        degenerate: axes == 0,
        gram,
        axes,
    }
}
