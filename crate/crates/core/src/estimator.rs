//! Drift estimator `θ̃_t = X_t² / (2 ∫_0^t X_s² ds)` and its normalized error.

use crate::error::{domain, Error, Result};
use crate::ou_model::ScaledTrajectory;
use crate::scalar::{lit, Real};

/// Largest `θ t` for which the direct form `e^{θt}(θ̃ - θ)` is evaluated.
pub const NAIVE_LIMIT: f64 = 35.0;

/// The normalized error `S_t = e^{θt}(θ̃_t - θ)` in its two forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStatistic<T> {
    /// Direct evaluation; absent when `θ t` exceeds [`NAIVE_LIMIT`].
    pub naive: Option<T>,
    /// `(θ Z_t Ψ_t + e^{-θt} R_t) / D_t`, finite for any `θ t`.
    pub stable: T,
}

/// Everything known about the estimator at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport<T> {
    pub t: T,
    pub theta_hat: T,
    pub s_naive: Option<T>,
    pub s_stable: T,
    pub d: T,
    pub z: T,
    pub psi: T,
    pub r_scaled: T,
}

fn check_index<T: Real>(traj: &ScaledTrajectory<T>, k: usize) -> Result<()> {
    if k == 0 || k >= traj.len() {
        return Err(domain(format!(
            "grid index must lie in 1..={}, got {k}",
            traj.len().saturating_sub(1)
        )));
    }
    if !(traj.d()[k] > T::zero()) {
        return Err(Error::DegeneratePath { index: k });
    }
    Ok(())
}

/// `θ̃` at grid index `k`, computed as `ξ_k² / (2 D_k)`.
pub fn estimate<T: Real>(traj: &ScaledTrajectory<T>, k: usize) -> Result<T> {
    check_index(traj, k)?;
    let xi = traj.xi()[k];
    Ok(xi * xi / (lit::<T>(2.0) * traj.d()[k]))
}

/// Both forms of `e^{θt}(θ̃ - θ)` at grid index `k`, with θ the drift the
/// trajectory was built with.
pub fn error_statistic<T: Real>(traj: &ScaledTrajectory<T>, k: usize) -> Result<ErrorStatistic<T>> {
    let theta_hat = estimate(traj, k)?;
    let theta = traj.theta();
    let theta_t = theta * traj.grid().time(k);
    let naive = if theta_t <= lit(NAIVE_LIMIT) {
        Some(theta_t.exp() * (theta_hat - theta))
    } else {
        None
    };
    let p = traj.point(k);
    let stable = (theta * p.z * p.psi + p.r_scaled) / p.d;
    Ok(ErrorStatistic { naive, stable })
}

pub fn report<T: Real>(traj: &ScaledTrajectory<T>, k: usize) -> Result<EstimateReport<T>> {
    let theta_hat = estimate(traj, k)?;
    let s = error_statistic(traj, k)?;
    let p = traj.point(k);
    Ok(EstimateReport {
        t: p.t,
        theta_hat,
        s_naive: s.naive,
        s_stable: s.stable,
        d: p.d,
        z: p.z,
        psi: p.psi,
        r_scaled: p.r_scaled,
    })
}
