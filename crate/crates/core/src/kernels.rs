//! Covariance kernels of the supported Gaussian drivers.
//!
//! Every kernel splits as `cov(s, r) = g(s, r) - κ |s - r|^{λ}` where `g` is a
//! symmetric function that is smooth away from the axes. The split constants
//! are exposed through [`KernelSpec::roughness`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, pow_nonneg, Real};

/// Which Gaussian process drives the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Fractional Brownian motion.
    Fbm,
    /// Sub-fractional Brownian motion.
    Sfbm,
    /// Bifractional Brownian motion.
    Bifbm,
    /// Standard Brownian motion.
    Bm,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Fbm => "fbm",
            KernelFamily::Sfbm => "sfbm",
            KernelFamily::Bifbm => "bifbm",
            KernelFamily::Bm => "bm",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbm" => Ok(KernelFamily::Fbm),
            "sfbm" => Ok(KernelFamily::Sfbm),
            "bifbm" => Ok(KernelFamily::Bifbm),
            "bm" => Ok(KernelFamily::Bm),
            other => Err(Error::Usage(format!(
                "unknown kernel family '{other}' (expected fbm, sfbm, bifbm or bm)"
            ))),
        }
    }
}

/// Driver kernel together with its parameters and the growth bound
/// `cov(t, t) <= c t^{2γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    /// Hurst parameter H (1/2 for Brownian motion).
    pub hurst: T,
    /// Second bifractional parameter K (1 for the other families).
    pub k: T,
    pub growth_constant: T,
    pub growth_exponent: T,
}

/// The non-smooth part of a kernel: `cov = g - coefficient * |s - r|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roughness<T> {
    pub coefficient: T,
    pub exponent: T,
}

fn check_hurst<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h < T::one() {
        Ok(())
    } else {
        Err(domain(format!("Hurst parameter must lie in (0, 1), got {h}")))
    }
}

impl<T: Real> KernelSpec<T> {
    pub fn fbm(hurst: T) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            family: KernelFamily::Fbm,
            hurst,
            k: T::one(),
            growth_constant: T::one(),
            growth_exponent: hurst,
        })
    }

    pub fn sfbm(hurst: T) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            family: KernelFamily::Sfbm,
            hurst,
            k: T::one(),
            growth_constant: lit(2.0),
            growth_exponent: hurst,
        })
    }

    pub fn bifbm(hurst: T, k: T) -> Result<Self> {
        check_hurst(hurst)?;
        if !(k > T::zero() && k <= T::one()) {
            return Err(domain(format!("bifractional K must lie in (0, 1], got {k}")));
        }
        Ok(Self {
            family: KernelFamily::Bifbm,
            hurst,
            k,
            growth_constant: lit(2.0),
            growth_exponent: hurst * k,
        })
    }

    pub fn bm() -> Self {
        Self {
            family: KernelFamily::Bm,
            hurst: lit(0.5),
            k: T::one(),
            growth_constant: T::one(),
            growth_exponent: lit(0.5),
        }
    }

    /// Builds a spec from a family and raw parameters, validating them.
    pub fn new(family: KernelFamily, hurst: T, k: T) -> Result<Self> {
        match family {
            KernelFamily::Fbm => Self::fbm(hurst),
            KernelFamily::Sfbm => Self::sfbm(hurst),
            KernelFamily::Bifbm => Self::bifbm(hurst, k),
            KernelFamily::Bm => Ok(Self::bm()),
        }
    }

    /// Self-similarity exponent of the driver: `H` for fBm/sfBm, `HK` for bifBm.
    pub fn self_similarity(&self) -> T {
        match self.family {
            KernelFamily::Bifbm => self.hurst * self.k,
            KernelFamily::Bm => lit(0.5),
            _ => self.hurst,
        }
    }

    pub fn roughness(&self) -> Roughness<T> {
        let half = lit::<T>(0.5);
        match self.family {
            KernelFamily::Fbm | KernelFamily::Sfbm => Roughness {
                coefficient: half,
                exponent: lit::<T>(2.0) * self.hurst,
            },
            KernelFamily::Bifbm => Roughness {
                coefficient: lit::<T>(2.0).powf(-self.k),
                exponent: lit::<T>(2.0) * self.hurst * self.k,
            },
            KernelFamily::Bm => Roughness {
                coefficient: half,
                exponent: T::one(),
            },
        }
    }

    /// Short human readable parameter list, e.g. `H=0.7;K=0.8`.
    pub fn params_label(&self) -> String {
        match self.family {
            KernelFamily::Bm => String::new(),
            KernelFamily::Bifbm => format!("H={};K={}", self.hurst, self.k),
            _ => format!("H={}", self.hurst),
        }
    }

    /// Covariance `E[G_s G_t]`.
    pub fn cov(&self, s: T, t: T) -> Result<T> {
        check_times(s, t)?;
        Ok(self.cov_unchecked(s, t))
    }

    /// Covariance without the domain check; callers guarantee `s, t >= 0`.
    pub(crate) fn cov_unchecked(&self, s: T, t: T) -> T {
        if s == T::zero() || t == T::zero() {
            return T::zero();
        }
        let two = lit::<T>(2.0);
        let half = lit::<T>(0.5);
        let h2 = two * self.hurst;
        let gap = (t - s).abs();
        match self.family {
            KernelFamily::Bm => s.min(t),
            KernelFamily::Fbm => half * (t.powf(h2) + s.powf(h2) - pow_nonneg(gap, h2)),
            KernelFamily::Sfbm => t.powf(h2) + s.powf(h2) - half * ((t + s).powf(h2) + pow_nonneg(gap, h2)),
            KernelFamily::Bifbm => {
                let k = self.k;
                two.powf(-k) * ((t.powf(h2) + s.powf(h2)).powf(k) - pow_nonneg(gap, h2 * k))
            }
        }
    }

    /// `∂cov(s, r)/∂r` on the open region `0 < s < r`.
    pub fn cov_partial_r(&self, s: T, r: T) -> Result<T> {
        if !(s > T::zero() && r > s) {
            return Err(domain(format!("cov_partial_r needs 0 < s < r, got s = {s}, r = {r}")));
        }
        Ok(self.cov_partial_r_unchecked(s, r))
    }

    pub(crate) fn cov_partial_r_unchecked(&self, s: T, r: T) -> T {
        let two = lit::<T>(2.0);
        let h = self.hurst;
        let e = two * h - T::one();
        match self.family {
            KernelFamily::Bm => T::zero(),
            KernelFamily::Fbm => h * (r.powf(e) - (r - s).powf(e)),
            KernelFamily::Sfbm => h * (two * r.powf(e) - (r + s).powf(e) - (r - s).powf(e)),
            KernelFamily::Bifbm => {
                let k = self.k;
                let h2 = two * h;
                two.powf(T::one() - k)
                    * h
                    * k
                    * (r.powf(e) * (s.powf(h2) + r.powf(h2)).powf(k - T::one()) - (r - s).powf(h2 * k - T::one()))
            }
        }
    }

    /// Smooth symmetric part `g(s, r)` with `cov = g - κ|s - r|^λ`.
    pub fn smooth_part(&self, s: T, r: T) -> Result<T> {
        check_times(s, r)?;
        Ok(self.smooth_part_unchecked(s, r))
    }

    pub(crate) fn smooth_part_unchecked(&self, s: T, r: T) -> T {
        let h2 = lit::<T>(2.0) * self.hurst;
        let sp = pow_nonneg(s, h2);
        let rp = pow_nonneg(r, h2);
        self.smooth_part_from_powers(s, r, sp, rp)
    }

    /// `g(s, r)` given precomputed `s^{2H}` and `r^{2H}`.
    #[inline]
    pub(crate) fn smooth_part_from_powers(&self, s: T, r: T, sp: T, rp: T) -> T {
        let half = lit::<T>(0.5);
        match self.family {
            KernelFamily::Bm | KernelFamily::Fbm => half * (sp + rp),
            KernelFamily::Sfbm => sp + rp - half * pow_nonneg(s + r, lit::<T>(2.0) * self.hurst),
            KernelFamily::Bifbm => lit::<T>(2.0).powf(-self.k) * pow_nonneg(sp + rp, self.k),
        }
    }

    /// `∂g/∂s (s, 0)` for `s > 0`.
    pub fn smooth_part_ds_at_zero(&self, s: T) -> Result<T> {
        if !(s > T::zero()) {
            return Err(domain(format!("∂g/∂s(s, 0) needs s > 0, got {s}")));
        }
        Ok(self.smooth_part_ds_at_zero_unchecked(s))
    }

    pub(crate) fn smooth_part_ds_at_zero_unchecked(&self, s: T) -> T {
        let two = lit::<T>(2.0);
        let h = self.hurst;
        match self.family {
            KernelFamily::Bm | KernelFamily::Fbm | KernelFamily::Sfbm => h * s.powf(two * h - T::one()),
            KernelFamily::Bifbm => {
                let k = self.k;
                two.powf(T::one() - k) * h * k * s.powf(two * h * k - T::one())
            }
        }
    }

    /// `∂²g/∂s∂r (s, r)` for `s, r > 0`.
    pub fn smooth_part_dsdr(&self, s: T, r: T) -> Result<T> {
        if !(s > T::zero() && r > T::zero()) {
            return Err(domain(format!("∂²g/∂s∂r needs s, r > 0, got s = {s}, r = {r}")));
        }
        Ok(self.smooth_part_dsdr_unchecked(s, r))
    }

    pub(crate) fn smooth_part_dsdr_unchecked(&self, s: T, r: T) -> T {
        let two = lit::<T>(2.0);
        let h = self.hurst;
        match self.family {
            KernelFamily::Bm | KernelFamily::Fbm => T::zero(),
            KernelFamily::Sfbm => -h * (two * h - T::one()) * (s + r).powf(two * h - two),
            KernelFamily::Bifbm => {
                let k = self.k;
                let h2 = two * h;
                two.powf(two - k)
                    * h
                    * h
                    * k
                    * (k - T::one())
                    * (s * r).powf(h2 - T::one())
                    * (s.powf(h2) + r.powf(h2)).powf(k - two)
            }
        }
    }

    /// Whether `∂²g/∂s∂r` vanishes identically.
    pub fn smooth_part_is_additive(&self) -> bool {
        matches!(self.family, KernelFamily::Bm | KernelFamily::Fbm)
            || (self.family == KernelFamily::Bifbm && self.k == T::one())
    }

    /// Converts the parameters into another scalar type.
    pub fn cast<U: Real>(&self) -> KernelSpec<U> {
        let c = |x: T| U::from_f64(x.to_f64().expect("finite parameter")).expect("castable");
        KernelSpec {
            family: self.family,
            hurst: c(self.hurst),
            k: c(self.k),
            growth_constant: c(self.growth_constant),
            growth_exponent: c(self.growth_exponent),
        }
    }
}

fn check_times<T: Real>(s: T, t: T) -> Result<()> {
    if s >= T::zero() && t >= T::zero() {
        Ok(())
    } else {
        Err(domain(format!("times must be non-negative, got s = {s}, t = {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<KernelSpec<f64>> {
        vec![
            KernelSpec::fbm(0.3).unwrap(),
            KernelSpec::fbm(0.75).unwrap(),
            KernelSpec::sfbm(0.3).unwrap(),
            KernelSpec::sfbm(0.7).unwrap(),
            KernelSpec::bifbm(0.6, 0.8).unwrap(),
            KernelSpec::bifbm(0.7, 0.8).unwrap(),
            KernelSpec::bm(),
        ]
    }

    #[test]
    fn closed_form_values() {
        let fbm = KernelSpec::<f64>::fbm(0.5).unwrap();
        assert!((fbm.cov(1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let fbm = KernelSpec::fbm(0.75).unwrap();
        assert!((fbm.cov(2.0, 2.0).unwrap() - 2f64.powf(1.5)).abs() < 1e-14);
        let sfbm = KernelSpec::<f64>::sfbm(0.5).unwrap();
        assert!((sfbm.cov(1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let bif = KernelSpec::bifbm(0.6, 1.0).unwrap();
        let fbm = KernelSpec::fbm(0.6).unwrap();
        assert_eq!(bif.cov(1.0, 3.0).unwrap(), fbm.cov(1.0, 3.0).unwrap());
    }

    #[test]
    fn negative_times_rejected() {
        let k = KernelSpec::fbm(0.4).unwrap();
        assert!(matches!(k.cov(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(k.smooth_part(1.0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(KernelSpec::fbm(0.0).is_err());
        assert!(KernelSpec::fbm(1.0).is_err());
        assert!(KernelSpec::sfbm(1.2).is_err());
        assert!(KernelSpec::bifbm(0.5, 0.0).is_err());
        assert!(KernelSpec::bifbm(0.5, 1.1).is_err());
        assert!(KernelSpec::bifbm(0.5, 1.0).is_ok());
        assert!("FBM".parse::<KernelFamily>().is_ok());
        assert!("ou".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn zero_boundary_is_exact() {
        for k in all_specs() {
            for t in [1e-6, 0.3, 1.0, 7.5, 1e3] {
                assert_eq!(k.cov(0.0, t).unwrap(), 0.0);
                assert_eq!(k.cov(t, 0.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn partial_r_examples() {
        let k = KernelSpec::<f64>::fbm(0.5).unwrap();
        assert!(k.cov_partial_r(1.0, 2.0).unwrap().abs() < 1e-15);
        let k = KernelSpec::fbm(0.75).unwrap();
        let want = 0.75 * (2f64.sqrt() - 1.0);
        assert!((k.cov_partial_r(1.0, 2.0).unwrap() - want).abs() < 1e-14);
        assert!(k.cov_partial_r(2.0, 2.0).is_err());
        assert!(k.cov_partial_r(0.0, 2.0).is_err());
    }

    #[test]
    fn partial_r_matches_central_difference() {
        let step = 1e-5;
        for k in all_specs() {
            for &(s, r) in &[(1.0, 2.0), (0.5, 3.0), (2.0, 2.7), (1.5, 10.0)] {
                let fd = (k.cov(s, r + step).unwrap() - k.cov(s, r - step).unwrap()) / (2.0 * step);
                let exact = k.cov_partial_r(s, r).unwrap();
                let scale = exact.abs().max(1e-3);
                assert!(
                    (fd - exact).abs() / scale < 1e-6,
                    "{:?} at ({s},{r}): fd {fd} vs {exact}",
                    k.family
                );
            }
        }
    }

    #[test]
    fn defining_split_holds() {
        for k in all_specs() {
            let rough = k.roughness();
            for &(s, r) in &[(1.0, 2.0), (0.2, 0.9), (3.0, 3.0), (5.0, 0.01), (0.0, 2.0)] {
                let lhs = k.cov(s, r).unwrap();
                let rhs = k.smooth_part(s, r).unwrap() - rough.coefficient * f64::abs(s - r).powf(rough.exponent);
                assert!((lhs - rhs).abs() < 1e-12, "{:?} ({s},{r})", k.family);
            }
        }
        let k = KernelSpec::<f64>::fbm(0.7).unwrap();
        assert!((k.smooth_part(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_partials_match_finite_differences() {
        let step = 1e-4;
        for k in all_specs() {
            for &(s, r) in &[(1.5, 0.7), (0.8, 2.2), (3.0, 1.0)] {
                let g = |a: f64, b: f64| k.smooth_part(a, b).unwrap();
                let mixed = (g(s + step, r + step) - g(s + step, r - step) - g(s - step, r + step)
                    + g(s - step, r - step))
                    / (4.0 * step * step);
                let exact = k.smooth_part_dsdr(s, r).unwrap();
                let scale = exact.abs().max(1e-2);
                assert!(
                    (mixed - exact).abs() / scale < 1e-5,
                    "{:?} ({s},{r}): {mixed} vs {exact}",
                    k.family
                );
            }
            for s in [0.5, 1.0, 4.0] {
                // one-sided in r at the boundary r = 0
                let ds = (k.smooth_part(s + step, 0.0).unwrap() - k.smooth_part(s - step, 0.0).unwrap()) / (2.0 * step);
                let exact = k.smooth_part_ds_at_zero(s).unwrap();
                assert!((ds - exact).abs() / exact.abs() < 1e-6, "{:?} s={s}", k.family);
            }
        }
    }

    #[test]
    fn growth_bound_on_log_grid() {
        for k in all_specs() {
            for i in 0..=60 {
                let t = 10f64.powf(-3.0 + 6.0 * i as f64 / 60.0);
                let bound = k.growth_constant * t.powf(2.0 * k.growth_exponent);
                assert!(k.cov(t, t).unwrap() <= bound * (1.0 + 1e-12), "{:?} t={t}", k.family);
            }
        }
    }

    #[test]
    fn reductions() {
        for h in [0.2f64, 0.5, 0.9] {
            let bif = KernelSpec::bifbm(h, 1.0).unwrap();
            let fbm = KernelSpec::fbm(h).unwrap();
            for &(s, t) in &[(0.1, 0.4), (1.0, 3.0), (2.5, 2.5), (7.0, 0.3)] {
                assert!((bif.cov(s, t).unwrap() - fbm.cov(s, t).unwrap()).abs() < 1e-12);
            }
        }
        let bm = KernelSpec::<f64>::bm();
        let fbm = KernelSpec::fbm(0.5).unwrap();
        let sfbm = KernelSpec::<f64>::sfbm(0.5).unwrap();
        for &(s, t) in &[(0.1, 0.4), (1.0, 3.0), (2.5, 2.5), (7.0, 0.3)] {
            let b = bm.cov(s, t).unwrap();
            assert!((fbm.cov(s, t).unwrap() - b).abs() < 1e-12);
            assert!((sfbm.cov(s, t).unwrap() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_over_f32() {
        let k = KernelSpec::<f32>::fbm(0.75).unwrap();
        assert!((k.cov(2.0, 2.0).unwrap() - 2f32.powf(1.5)).abs() < 1e-5);
        let k64 = KernelSpec::<f64>::bifbm(0.6, 0.8).unwrap();
        let k32: KernelSpec<f32> = k64.cast();
        assert!((k32.cov(1.0, 2.0).unwrap() as f64 - k64.cov(1.0, 2.0).unwrap()).abs() < 1e-5);
    }
}
