//! Order statistics: Kolmogorov-Smirnov distances and sample quantiles.

use std::f64::consts::PI;

use crate::error::{data, Result};

/// Standard Cauchy CDF `½ + atan(x)/π`.
pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}

/// Standard Cauchy quantile `tan(π(p - ½))`.
pub fn cauchy_quantile(p: f64) -> f64 {
    (PI * (p - 0.5)).tan()
}

/// Reference distributions for [`ks_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    StandardCauchy,
}

impl Reference {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Reference::StandardCauchy => cauchy_cdf(x),
        }
    }
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(data("sample is empty"));
    }
    if let Some(i) = sample.iter().position(|x| !x.is_finite()) {
        return Err(data(format!("sample value at index {i} is not finite")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample statistic `sup_x |F_N(x) - F(x)|`.
pub fn ks_distance(sample: &[f64], reference: Reference) -> Result<f64> {
    ks_distance_with(sample, |x| reference.cdf(x))
}

/// [`ks_distance`] against an arbitrary continuous CDF.
pub fn ks_distance_with<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    let v = sorted_finite(sample)?;
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted_finite(a)?, sorted_finite(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `c(α) √((n + m)/(n m))` of the two-sample test.
pub fn ks_two_sample_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7) on an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type 7 quantiles of an unsorted sample.
pub fn quantiles(sample: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    let v = sorted_finite(sample)?;
    Ok(ps.iter().map(|&p| quantile_sorted(&v, p)).collect())
}
