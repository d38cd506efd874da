use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{PathMeta, SamplePath, SamplerId, TimeGrid};
use crate::error::{usage, Error, Result};
use crate::kernels::KernelSpec;
use crate::rng::replicate_rng;

/// Largest grid accepted by default; factorization is O(n³).
pub const DEFAULT_CHOLESKY_CAP: usize = 8192;

const JITTER_LADDER: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Exact multivariate-normal sampler over `t_1..t_n`. The lower factor is
/// computed once and shared read-only by every replicate.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    kernel: KernelSpec<f64>,
    grid: TimeGrid<f64>,
    // row i holds L[i][0..=i]
    rows: Vec<Vec<f64>>,
    jitter: f64,
}

impl CholeskySampler {
    pub fn new(kernel: &KernelSpec<f64>, grid: &TimeGrid<f64>) -> Result<Self> {
        Self::with_cap(kernel, grid, DEFAULT_CHOLESKY_CAP)
    }

    pub fn with_cap(kernel: &KernelSpec<f64>, grid: &TimeGrid<f64>, cap: usize) -> Result<Self> {
        let n = grid.steps();
        if n > cap {
            return Err(usage(format!("Cholesky sampler limited to {cap} grid steps, got {n}")));
        }
        // t_0 = 0 is excluded: G_0 = 0 deterministically
        let times: Vec<f64> = (1..=n).map(|k| grid.time(k)).collect();
        let cov: Vec<Vec<f64>> = times
            .par_iter()
            .enumerate()
            .map(|(i, &ti)| times[..=i].iter().map(|&tj| kernel.cov_unchecked(ti, tj)).collect())
            .collect();
        let max_diag = cov.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max);

        let mut jitter = 0.0;
        let mut ladder = JITTER_LADDER.iter();
        loop {
            match factor(&cov, jitter) {
                Some(rows) => {
                    if jitter > 0.0 {
                        log::warn!("Cholesky factorization needed diagonal jitter {jitter:e}");
                    }
                    return Ok(Self {
                        kernel: *kernel,
                        grid: *grid,
                        rows,
                        jitter,
                    });
                }
                None => match ladder.next() {
                    Some(eps) => jitter = eps * max_diag,
                    None => {
                        return Err(Error::Numerical(format!(
                            "covariance of {} on {} steps is not numerically positive definite",
                            kernel.family, n
                        )))
                    }
                },
            }
        }
    }

    /// Diagonal jitter that was needed, zero when the plain factorization succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn grid(&self) -> &TimeGrid<f64> {
        &self.grid
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> SamplePath<f64> {
        let n = self.rows.len();
        let mut rng = replicate_rng(seed, replicate);
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        values.extend(self.rows.iter().map(|row| dot(row, &z[..row.len()])));
        SamplePath {
            grid: self.grid,
            values,
            meta: PathMeta::sampled(self.kernel, SamplerId::Cholesky, seed, replicate),
        }
    }
}

/// Crout factorization column by column; rows below the pivot update in parallel.
fn factor(cov: &[Vec<f64>], jitter: f64) -> Option<Vec<Vec<f64>>> {
    let n = cov.len();
    let mut rows: Vec<Vec<f64>> = cov.to_vec();
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] += jitter;
    }
    for j in 0..n {
        let (head, tail) = rows.split_at_mut(j + 1);
        let row_j = &mut head[j];
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let pivot = d.sqrt();
        row_j[j] = pivot;
        let row_j = &*row_j;
        tail.par_iter_mut().for_each(|row_i| {
            row_i[j] = (row_i[j] - dot(&row_i[..j], &row_j[..j])) / pivot;
        });
    }
    Some(rows)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the compiler can vectorize
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}
