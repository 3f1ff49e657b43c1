//! Classical (Torgerson) multidimensional scaling.

use alloc::vec::Vec;

use crate::linalg::{double_center, symmetric_eigen, SymmetricEigen};

use super::pca::RANK_TOL;

#[derive(Debug, Clone)]
pub struct MdsFit {
    pub coords: Vec<[f64; 2]>,
    /// Kruskal stress-1 between input and embedded distances.
    pub stress: f64,
    pub degenerate: bool,
    eigen: SymmetricEigen,
    axes: usize,
    sq_row_means: Vec<f64>,
}

/// Embeds an `n x n` symmetric distance matrix (row-major) in the plane:
/// square, double-center with factor `-1/2`, keep the top two eigenpairs.
pub fn fit(dist: &[f64], n: usize) -> MdsFit {
    assert_eq!(dist.len(), n * n);
    let mut b: Vec<f64> = dist.iter().map(|d| -0.5 * d * d).collect();
    let sq_row_means: Vec<f64> = (0..n)
        .map(|i| dist[i * n..(i + 1) * n].iter().map(|d| d * d).sum::<f64>() / n as f64)
        .collect();
    double_center(&mut b, n);
    let eigen = symmetric_eigen(&b, n);
    let scale = eigen.values.iter().map(|l| libm::fabs(*l)).fold(0.0, f64::max);
    // distances are bounded by 2, so an absolute floor also catches rounding noise
    let floor = RANK_TOL * scale.max(1.0);
    let axes = eigen.values.iter().take(2).take_while(|&&l| l > floor).count();

    let coords: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let mut c = [0.0; 2];
            for k in 0..axes {
                c[k] = libm::sqrt(eigen.values[k]) * eigen.vectors[i * n + k];
            }
            c
        })
        .collect();

    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dx = coords[i][0] - coords[j][0];
            let dy = coords[i][1] - coords[j][1];
            let e = libm::sqrt(dx * dx + dy * dy);
            let d = dist[i * n + j];
            num += (d - e) * (d - e);
            den += d * d;
        }
    }
    MdsFit {
        coords,
        stress: if den > 0.0 { libm::sqrt(num / den) } else { 0.0 },
        degenerate: axes == 0,
        eigen,
        axes,
        sq_row_means,
    }
}

impl MdsFit {
    /// Places a new point from its distances to the training points (Gower's
    /// add-a-point formula).
    pub fn transform(&self, dist_to_training: &[f64]) -> [f64; 2] {
        let n = self.eigen.n;
        let mut out = [0.0; 2];
        for k in 0..self.axes {
            let l = self.eigen.values[k];
            let s: f64 = (0..n)
                .map(|i| {
                    let d = dist_to_training[i];
                    self.eigen.vectors[i * n + k] * (self.sq_row_means[i] - d * d)
                })
                .sum();
            out[k] = s / (2.0 * libm::sqrt(l));
        }
        out
    }
}
