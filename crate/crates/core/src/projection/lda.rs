//! Two-class Fisher discriminant with a principal second axis.
//!
//! Documents are first expressed in the orthonormal basis of their centered
//! span (from the Gram decomposition), so the within-class scatter is at
//! most `(n-1) x (n-1)`. A small ridge keeps it invertible when few
//! documents are labeled. Axis 1 is the discriminant, oriented so relevant
//! documents lie on the positive side; axis 2 is the first principal
//! component of the data with the discriminant direction removed.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{cholesky_solve, symmetric_eigen};

use super::pca::{CenteredGram, SparseRow};

const RIDGE: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct LdaFit {
    pub coords: Vec<[f64; 2]>,
    /// Fisher criterion on axis 1: squared mean gap over summed class variances.
    pub separation_ratio: f64,
    gram: CenteredGram,
    rank: usize,
    discriminant: Vec<f64>,
    second: Vec<f64>,
}

/// `relevant` and `non_relevant` index into `rows`; each needs at least two
/// members. Returns `None` when the classes cannot be separated at all
/// (identical class means in the data span).
pub fn fit(rows: &[SparseRow<'_>], dim: usize, relevant: &[usize], non_relevant: &[usize]) -> Option<LdaFit> {
    let n = rows.len();
    let gram = CenteredGram::new(rows, dim);
    let r = gram.rank();
    if r == 0 {
        return None;
    }
    let z: Vec<Vec<f64>> = (0..n).map(|i| (0..r).map(|k| gram.score(i, k)).collect()).collect();

    let mean_of = |idx: &[usize]| -> Vec<f64> {
        let mut m = vec![0.0; r];
        for &i in idx {
            for k in 0..r {
                m[k] += z[i][k];
            }
        }
        m.iter().map(|x| x / idx.len() as f64).collect()
    };
    let m1 = mean_of(relevant);
    let m0 = mean_of(non_relevant);

    let mut sw = vec![0.0; r * r];
    for (idx, m) in [(relevant, &m1), (non_relevant, &m0)] {
        for &i in idx {
            for a in 0..r {
                let da = z[i][a] - m[a];
                for b in 0..=a {
                    sw[a * r + b] += da * (z[i][b] - m[b]);
                }
            }
        }
    }
    for a in 0..r {
        for b in 0..a {
            sw[b * r + a] = sw[a * r + b];
        }
    }
    let trace: f64 = (0..r).map(|a| sw[a * r + a]).sum();
    let ridge = RIDGE * trace / r as f64 + 1e-12;
    for a in 0..r {
        sw[a * r + a] += ridge;
    }
    let gap: Vec<f64> = m1.iter().zip(&m0).map(|(a, b)| a - b).collect();
    let mut w = cholesky_solve(&sw, r, &gap)?;
    let norm = libm::sqrt(w.iter().map(|x| x * x).sum());
    if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
        return None;
    }
    for x in &mut w {
        *x /= norm;
    }

    let along: Vec<f64> = z.iter().map(|zi| dot(zi, &w)).collect();
    // scatter of the data with the discriminant removed
    let mut c = vec![0.0; r * r];
    for (zi, t) in z.iter().zip(&along) {
        let resid: Vec<f64> = zi.iter().zip(&w).map(|(a, b)| a - t * b).collect();
        for a in 0..r {
            for b in 0..=a {
                c[a * r + b] += resid[a] * resid[b];
            }
        }
    }
    let e = symmetric_eigen(&c, r);
    let mut second = if e.values[0] > 1e-12 * gram.total { e.vector(0) } else { vec![0.0; r] };
    // remove any numerical leak along the discriminant
    let leak = dot(&second, &w);
    for (s, wk) in second.iter_mut().zip(&w) {
        *s -= leak * wk;
    }

    let coords: Vec<[f64; 2]> = z.iter().zip(&along).map(|(zi, x)| [*x, dot(zi, &second)]).collect();

    let stats = |idx: &[usize]| -> (f64, f64) {
        let mu = idx.iter().map(|&i| along[i]).sum::<f64>() / idx.len() as f64;
        let var = idx.iter().map(|&i| (along[i] - mu) * (along[i] - mu)).sum::<f64>() / idx.len() as f64;
        (mu, var)
    };
    let (mu1, v1) = stats(relevant);
    let (mu0, v0) = stats(non_relevant);
    let separation_ratio = (mu1 - mu0) * (mu1 - mu0) / (v1 + v0 + 1e-12);

    Some(LdaFit {
        coords,
        separation_ratio,
        gram,
        rank: r,
        discriminant: w,
        second,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LdaFit {
    pub fn transform(&self, rows: &[SparseRow<'_>], q: &[f64]) -> [f64; 2] {
        let z = self.gram.transform(rows, q, self.rank);
        [dot(&z, &self.discriminant), dot(&z, &self.second)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(rows: &[Vec<f64>]) -> Vec<Vec<(u32, f64)>> {
        rows.iter()
            .map(|r| r.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(i, w)| (i as u32, *w)).collect())
            .collect()
    }

    #[test]
    fn separates_two_clusters_with_relevant_positive() {
        let dense = vec![
            vec![1.0, 0.1, 0.0, 0.2],
            vec![0.9, 0.2, 0.1, 0.0],
            vec![1.1, 0.0, 0.1, 0.1],
            vec![0.1, 1.0, 0.9, 0.0],
            vec![0.0, 0.9, 1.1, 0.2],
            vec![0.2, 1.1, 1.0, 0.1],
            vec![0.5, 0.5, 0.5, 0.5],
        ];
        let rows = sparse(&dense);
        let refs: Vec<SparseRow<'_>> = rows.iter().map(|r| r.as_slice()).collect();
        let f = fit(&refs, 4, &[0, 1, 2], &[3, 4, 5]).unwrap();
        let min_rel = (0..3).map(|i| f.coords[i][0]).fold(f64::INFINITY, f64::min);
        let max_irr = (3..6).map(|i| f.coords[i][0]).fold(f64::NEG_INFINITY, f64::max);
        assert!(min_rel > max_irr);
        assert!(f.separation_ratio > 1.0);
        for (i, d) in dense.iter().enumerate() {
            let t = f.transform(&refs, d);
            assert!((t[0] - f.coords[i][0]).abs() < 1e-9);
            assert!((t[1] - f.coords[i][1]).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_points_cannot_be_fit() {
        let rows = sparse(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]);
        let refs: Vec<SparseRow<'_>> = rows.iter().map(|r| r.as_slice()).collect();
        assert!(fit(&refs, 1, &[0, 1], &[2, 3]).is_none());
    }
}
