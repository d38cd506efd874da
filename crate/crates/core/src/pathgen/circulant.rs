use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{PathMeta, SamplePath, SamplerId, TimeGrid};
use crate::error::{domain, Error, Result};
use crate::kernels::KernelSpec;
use crate::rng::replicate_rng;

const NEGATIVE_EIGEN_TOL: f64 = 1e-8;

/// Davies-Harte sampler for fractional Brownian motion: fractional Gaussian
/// noise is drawn by embedding its Toeplitz covariance in a circulant matrix of
/// size `2n`, then cumulated. O(n log n) per path.
pub struct CirculantSampler {
    kernel: KernelSpec<f64>,
    grid: TimeGrid<f64>,
    // sqrt(λ_k / m) for the 2n circulant eigenvalues
    amplitudes: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    // Δ^H
    increment_scale: f64,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("hurst", &self.kernel.hurst)
            .field("steps", &self.grid.steps())
            .finish()
    }
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub(crate) fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) + (k - 1.0).abs().powf(h2) - 2.0 * k.powf(h2))
}

impl CirculantSampler {
    /// Fails with [`Error::Numerical`] when the embedding has eigenvalues below
    /// `-1e-8 · max`; callers fall back to Cholesky in that case.
    pub fn new(hurst: f64, grid: &TimeGrid<f64>) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(domain(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
        }
        let n = grid.steps();
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocovariance(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
        if min < -NEGATIVE_EIGEN_TOL * max {
            return Err(Error::Numerical(format!(
                "circulant embedding for H = {hurst}, n = {n} has eigenvalue {min:e}"
            )));
        }
        let amplitudes = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(Self {
            kernel: KernelSpec::fbm(hurst)?,
            grid: *grid,
            amplitudes,
            fft,
            increment_scale: grid.step().powf(hurst),
        })
    }

    pub(crate) fn with_kernel(mut self, kernel: KernelSpec<f64>) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn grid(&self) -> &TimeGrid<f64> {
        &self.grid
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> SamplePath<f64> {
        let n = self.grid.steps();
        let mut rng = replicate_rng(seed, replicate);
        let mut buf: Vec<Complex<f64>> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(a * re, a * im)
            })
            .collect();
        self.fft.process(&mut buf);
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for c in &buf[..n] {
            acc += self.increment_scale * c.re;
            values.push(acc);
        }
        SamplePath {
            grid: self.grid,
            values,
            meta: PathMeta::sampled(self.kernel, SamplerId::Circulant, seed, replicate),
        }
    }
}
