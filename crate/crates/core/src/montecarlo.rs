//! Replicated experiments for the consistency and the Cauchy limit of the
//! drift estimator.
//!
//! Each replicate draws one driver path over the largest horizon and evaluates
//! the estimator at every requested horizon on that path. Replicates run in
//! parallel; results are collected in replicate order and folded sequentially,
//! so a summary depends only on the configuration, never on the worker count.
//! The normalized error `S_T/(2θ)` is heavy tailed, so it is summarized by
//! quantiles and a Kolmogorov-Smirnov distance, never by moments.

use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::estimator::{error_statistic, estimate};
use crate::kernels::KernelSpec;
use crate::ou_model::build_trajectory;
use crate::pathgen::{SamplePath, Sampler, SamplerChoice, TimeGrid};
use crate::stats::{ks_distance, quantile_sorted, Reference};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "OUESTIM_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCConfig {
    pub kernel: KernelSpec<f64>,
    pub theta: f64,
    /// Strictly increasing evaluation horizons; the grid spans the last one.
    pub horizons: Vec<f64>,
    /// Grid steps per unit time; the grid has `round(T_max · points_per_unit)` steps.
    pub points_per_unit: f64,
    pub replicates: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(usage(format!("θ must be positive, got {}", self.theta)));
        }
        if self.replicates == 0 {
            return Err(usage("at least one replicate is required"));
        }
        if self.horizons.is_empty() {
            return Err(usage("at least one horizon is required"));
        }
        if self.horizons.iter().any(|&t| !(t > 0.0 && t.is_finite())) || self.horizons.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(usage(format!(
                "horizons must be positive and strictly increasing, got {:?}",
                self.horizons
            )));
        }
        if !(self.points_per_unit > 0.0 && self.points_per_unit.is_finite()) {
            return Err(usage(format!(
                "points per unit time must be positive, got {}",
                self.points_per_unit
            )));
        }
        self.horizon_indices().map(|_| ())
    }

    /// Grid over `[0, T_max]`.
    pub fn grid(&self) -> Result<TimeGrid<f64>> {
        let t_max = *self.horizons.last().ok_or_else(|| usage("no horizons"))?;
        let steps = (t_max * self.points_per_unit).round() as usize;
        TimeGrid::new(t_max, steps)
    }

    /// Grid index of every horizon.
    pub fn horizon_indices(&self) -> Result<Vec<usize>> {
        let grid = self.grid()?;
        self.horizons
            .iter()
            .map(|&t| {
                let k = (t / grid.step()).round() as usize;
                let tk = grid.time(k);
                if k == 0 || (tk - t).abs() > 1e-9 * t {
                    Err(usage(format!(
                        "horizon {t} does not fall on the grid with step {}",
                        grid.step()
                    )))
                } else {
                    Ok(k)
                }
            })
            .collect()
    }
}

/// Estimator output of one replicate at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonValue {
    pub theta_hat: f64,
    pub s_stable: f64,
    pub s_naive: Option<f64>,
    /// `e^{-θT} R_T`.
    pub r_scaled: f64,
}

/// All horizons of one replicate; `None` marks a degenerate path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub values: Vec<Option<HorizonValue>>,
}

/// Aggregates at one horizon over the non-degenerate replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonSummary {
    pub t: f64,
    pub valid: usize,
    pub degenerate: usize,
    pub median_abs_error: Option<f64>,
    pub mean_abs_error: Option<f64>,
    /// Quartiles of `S/(2θ)`.
    pub q25: Option<f64>,
    pub q50: Option<f64>,
    pub q75: Option<f64>,
    /// KS distance of `S/(2θ)` to the standard Cauchy law.
    pub ks_cauchy: Option<f64>,
    pub mean_abs_r_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCSummary {
    pub config: MCConfig,
    pub sampler_used: String,
    pub grid_steps: usize,
    pub horizons: Vec<HorizonSummary>,
}

/// Summary plus the per-replicate records it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct MCRun {
    pub summary: MCSummary,
    pub records: Vec<ReplicateRecord>,
}

/// Runs `f` on a pool limited by [`THREADS_ENV`] when set, otherwise on the
/// global pool.
pub fn with_thread_limit<R: Send, F: FnOnce() -> R + Send>(f: F) -> Result<R> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Consistency experiment: `|θ̃_T - θ|` across all configured horizons.
pub fn run_consistency(cfg: &MCConfig) -> Result<MCRun> {
    run_sampled(cfg)
}

/// Cauchy-limit experiment at a single horizon.
pub fn run_cauchy(cfg: &MCConfig) -> Result<MCRun> {
    if cfg.horizons.len() != 1 {
        return Err(usage(format!(
            "the Cauchy experiment takes one horizon, got {}",
            cfg.horizons.len()
        )));
    }
    run_sampled(cfg)
}

fn run_sampled(cfg: &MCConfig) -> Result<MCRun> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let sampler = Sampler::new(&cfg.kernel, &grid, cfg.sampler)?;
    let label = format!("{:?}", sampler.id()).to_lowercase();
    run_with_paths(cfg, &label, |rep| Ok(sampler.sample(cfg.seed, rep)))
}

/// Runs an experiment on caller-supplied driver paths, one per replicate index.
/// The paths must live on [`MCConfig::grid`].
pub fn run_with_paths<F>(cfg: &MCConfig, sampler_label: &str, paths: F) -> Result<MCRun>
where
    F: Fn(u64) -> Result<SamplePath<f64>> + Sync,
{
    use rayon::prelude::*;

    cfg.validate()?;
    let grid = cfg.grid()?;
    let indices = cfg.horizon_indices()?;
    let theta = cfg.theta;
    let records: Vec<Result<ReplicateRecord>> = with_thread_limit(|| {
        (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|rep| {
                let path = paths(rep)?;
                if *path.grid() != grid {
                    return Err(usage("supplied path does not match the experiment grid"));
                }
                let traj = build_trajectory(&path, theta)?;
                let values = indices
                    .iter()
                    .map(|&k| match (estimate(&traj, k), error_statistic(&traj, k)) {
                        (Ok(theta_hat), Ok(s)) => Ok(Some(HorizonValue {
                            theta_hat,
                            s_stable: s.stable,
                            s_naive: s.naive,
                            r_scaled: traj.r_scaled()[k],
                        })),
                        (Err(Error::DegeneratePath { .. }), _) => Ok(None),
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ReplicateRecord { replicate: rep, values })
            })
            .collect()
    })?;
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;

    let horizons = cfg
        .horizons
        .iter()
        .enumerate()
        .map(|(h, &t)| summarize(t, theta, records.iter().map(|r| r.values[h])))
        .collect::<Result<Vec<_>>>()?;
    Ok(MCRun {
        summary: MCSummary {
            config: cfg.clone(),
            sampler_used: sampler_label.to_string(),
            grid_steps: grid.steps(),
            horizons,
        },
        records,
    })
}

fn summarize<I: Iterator<Item = Option<HorizonValue>>>(t: f64, theta: f64, values: I) -> Result<HorizonSummary> {
    let mut degenerate = 0;
    let mut errors = Vec::new();
    let mut normalized = Vec::new();
    let mut r_abs = Vec::new();
    for v in values {
        match v {
            Some(v) => {
                errors.push((v.theta_hat - theta).abs());
                normalized.push(v.s_stable / (2.0 * theta));
                r_abs.push(v.r_scaled.abs());
            }
            None => degenerate += 1,
        }
    }
    let valid = errors.len();
    if valid == 0 {
        return Ok(HorizonSummary {
            t,
            valid,
            degenerate,
            median_abs_error: None,
            mean_abs_error: None,
            q25: None,
            q50: None,
            q75: None,
            ks_cauchy: None,
            mean_abs_r_scaled: None,
        });
    }
    let ks = ks_distance(&normalized, Reference::StandardCauchy)?;
    errors.sort_by(f64::total_cmp);
    normalized.sort_by(f64::total_cmp);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(HorizonSummary {
        t,
        valid,
        degenerate,
        median_abs_error: Some(quantile_sorted(&errors, 0.5)),
        mean_abs_error: Some(mean(&errors)),
        q25: Some(quantile_sorted(&normalized, 0.25)),
        q50: Some(quantile_sorted(&normalized, 0.5)),
        q75: Some(quantile_sorted(&normalized, 0.75)),
        ks_cauchy: Some(ks),
        mean_abs_r_scaled: Some(mean(&r_abs)),
    })
}
