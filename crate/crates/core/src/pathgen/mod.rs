//! Exact sampling of Gaussian drivers on a uniform grid.

mod cholesky;
mod circulant;

pub use cholesky::{CholeskySampler, DEFAULT_CHOLESKY_CAP};
pub use circulant::CirculantSampler;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{data, usage, Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::scalar::{count, Real};

/// Uniform grid `t_k = k Δ`, `k = 0..=n`, with `Δ = horizon / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(usage(format!(
                "grid horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps < 2 {
            return Err(usage(format!("grid needs at least 2 steps, got {steps}")));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// Number of steps `n`; the grid has `n + 1` points.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> T {
        self.horizon / count(self.steps)
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.steps {
            self.horizon
        } else {
            count::<T>(k) * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.steps).map(move |k| self.time(k))
    }

    /// Grid index of time `t`, which must fall on the grid (to 1e-9 relative).
    pub fn index_of(&self, t: T) -> Result<usize> {
        let x = (t / self.step()).to_f64().unwrap_or(f64::NAN);
        let k = x.round();
        if !(k >= 0.0 && k <= self.steps as f64) || (x - k).abs() > 1e-9 * k.max(1.0) {
            return Err(usage(format!("time {t} is not a point of the grid")));
        }
        Ok(k as usize)
    }

    pub fn cast<U: Real>(&self) -> TimeGrid<U> {
        TimeGrid {
            horizon: U::from_f64(self.horizon.to_f64().unwrap()).unwrap(),
            steps: self.steps,
        }
    }
}

/// Which generator produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerId {
    Cholesky,
    Circulant,
    /// Supplied by the caller (deterministic test drivers, external data).
    External,
}

/// Requested sampler; `Auto` picks circulant embedding whenever the driver has
/// stationary increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

impl fmt::Display for SamplerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerChoice::Auto => "auto",
            SamplerChoice::Cholesky => "cholesky",
            SamplerChoice::Circulant => "circulant",
        })
    }
}

impl FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(SamplerChoice::Auto),
            "cholesky" => Ok(SamplerChoice::Cholesky),
            "circulant" => Ok(SamplerChoice::Circulant),
            other => Err(usage(format!(
                "unknown sampler '{other}' (expected auto, cholesky or circulant)"
            ))),
        }
    }
}

/// Provenance of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub kernel: Option<KernelSpec<f64>>,
    pub sampler: SamplerId,
    pub seed: Option<u64>,
    pub replicate: u64,
}

impl PathMeta {
    pub(crate) fn sampled(kernel: KernelSpec<f64>, sampler: SamplerId, seed: u64, replicate: u64) -> Self {
        Self {
            kernel: Some(kernel),
            sampler,
            seed: Some(seed),
            replicate,
        }
    }
}

/// Driver values `g_k = G(t_k)` with `g_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath<T> {
    grid: TimeGrid<T>,
    values: Vec<T>,
    pub meta: PathMeta,
}

impl<T: Real> SamplePath<T> {
    /// Wraps caller supplied driver values.
    pub fn from_values(grid: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.steps() + 1 {
            return Err(data(format!(
                "path has {} values, grid needs {}",
                values.len(),
                grid.steps() + 1
            )));
        }
        if values[0] != T::zero() {
            return Err(data(format!("driver must start at zero, got g_0 = {}", values[0])));
        }
        Ok(Self {
            grid,
            values,
            meta: PathMeta {
                kernel: None,
                sampler: SamplerId::External,
                seed: None,
                replicate: 0,
            },
        })
    }

    /// Driver sampled from a closure `t -> G(t)`; `f(0)` is forced to zero.
    pub fn from_fn<F: Fn(T) -> T>(grid: TimeGrid<T>, f: F) -> Self {
        let values = grid
            .times()
            .enumerate()
            .map(|(k, t)| if k == 0 { T::zero() } else { f(t) })
            .collect();
        Self::from_values(grid, values).expect("grid-sized path")
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Same path multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&g| g * c).collect(),
            meta: self.meta,
        }
    }

    pub fn cast<U: Real>(&self) -> SamplePath<U> {
        SamplePath {
            grid: self.grid.cast(),
            values: self
                .values
                .iter()
                .map(|g| U::from_f64(g.to_f64().unwrap()).unwrap())
                .collect(),
            meta: self.meta,
        }
    }
}

/// A prepared sampler for one `(kernel, grid)` pair.
#[derive(Debug)]
pub enum Sampler {
    Cholesky(CholeskySampler),
    Circulant(CirculantSampler),
}

impl Sampler {
    /// Prepares the sampler selected by `choice`. Circulant embedding is only
    /// available for drivers with stationary increments (fBm and BM); if its
    /// spectrum is not non-negative the Cholesky sampler is used instead.
    pub fn new(spec: &KernelSpec<f64>, grid: &TimeGrid<f64>, choice: SamplerChoice) -> Result<Self> {
        let stationary = matches!(spec.family, KernelFamily::Fbm | KernelFamily::Bm);
        let use_circulant = match choice {
            SamplerChoice::Auto => stationary,
            SamplerChoice::Cholesky => false,
            SamplerChoice::Circulant if stationary => true,
            SamplerChoice::Circulant => {
                return Err(usage(format!(
                    "circulant sampler needs stationary increments; {} has none",
                    spec.family
                )))
            }
        };
        if use_circulant {
            match CirculantSampler::new(spec.hurst, grid) {
                Ok(c) => return Ok(Sampler::Circulant(c.with_kernel(*spec))),
                Err(Error::Numerical(msg)) => {
                    log::warn!("{msg}; falling back to Cholesky sampling");
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Sampler::Cholesky(CholeskySampler::new(spec, grid)?))
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> SamplePath<f64> {
        match self {
            Sampler::Cholesky(c) => c.sample(seed, replicate),
            Sampler::Circulant(c) => c.sample(seed, replicate),
        }
    }

    pub fn id(&self) -> SamplerId {
        match self {
            Sampler::Cholesky(_) => SamplerId::Cholesky,
            Sampler::Circulant(_) => SamplerId::Circulant,
        }
    }
}

/// One Cholesky draw of `spec` on `grid`.
pub fn sample_cholesky(
    spec: &KernelSpec<f64>,
    grid: &TimeGrid<f64>,
    seed: u64,
    replicate: u64,
) -> Result<SamplePath<f64>> {
    Ok(CholeskySampler::new(spec, grid)?.sample(seed, replicate))
}

/// One circulant-embedding fBm draw; falls back to Cholesky if the embedding fails.
pub fn sample_fbm_circulant(hurst: f64, grid: &TimeGrid<f64>, seed: u64, replicate: u64) -> Result<SamplePath<f64>> {
    let spec = KernelSpec::fbm(hurst)?;
    Ok(Sampler::new(&spec, grid, SamplerChoice::Circulant)?.sample(seed, replicate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = TimeGrid::<f64>::new(2.0, 8).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(8), 2.0);
        assert!((g.step() - 0.25).abs() < 1e-15);
        let ts: Vec<f64> = g.times().collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.index_of(1.5).unwrap(), 6);
        assert!(g.index_of(1.6).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(f64::INFINITY, 10).is_err());
    }

    #[test]
    fn external_paths_start_at_zero() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert!(SamplePath::from_values(g, vec![0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(SamplePath::from_values(g, vec![0.0; 4]).is_err());
        let p = SamplePath::from_fn(g, |t| t + 1.0);
        assert_eq!(p.values()[0], 0.0);
        assert_eq!(p.values()[4], 2.0);
    }

    #[test]
    fn circulant_rejected_for_non_stationary() {
        let g = TimeGrid::new(1.0, 16).unwrap();
        let spec = KernelSpec::sfbm(0.7).unwrap();
        assert!(matches!(
            Sampler::new(&spec, &g, SamplerChoice::Circulant),
            Err(Error::Usage(_))
        ));
        assert_eq!(
            Sampler::new(&spec, &g, SamplerChoice::Auto).unwrap().id(),
            SamplerId::Cholesky
        );
        let fbm = KernelSpec::fbm(0.7).unwrap();
        assert_eq!(
            Sampler::new(&fbm, &g, SamplerChoice::Auto).unwrap().id(),
            SamplerId::Circulant
        );
    }
}
