//! OU solution and its exponentially scaled functionals along a driver path.
//!
//! Between grid points the driver is taken to be the linear interpolant of the
//! sampled values, and every functional is integrated *exactly* for that
//! interpolant. All of them therefore describe one continuous driver, so the
//! integration-by-parts identity
//!
//! ```text
//! ½ ξ_t² = θ D_t + θ e^{-θt} Z_t Ψ_t + e^{-2θt} R_t
//! ```
//!
//! holds to rounding error on every grid, not just in the limit `Δ → 0`.
//! Running integrals are advanced with discounted recursions (`A ← e^{-θΔ} A + …`)
//! so no factor `e^{+θt}` is ever formed.

use crate::error::{data, domain, Error, Result};
use crate::pathgen::{SamplePath, TimeGrid};
use crate::scalar::{count, lit, Real};

/// Scaled state along one path; index `k` refers to grid time `t_k`.
#[derive(Debug, Clone)]
pub struct ScaledTrajectory<T> {
    grid: TimeGrid<T>,
    theta: T,
    driver: Vec<T>,
    /// `ξ_k = e^{-θ t_k} X_{t_k} = e^{-θ t_k} G_{t_k} + θ Z_k`.
    xi: Vec<T>,
    /// `Z_k = ∫_0^{t_k} e^{-θs} G_s ds`.
    z: Vec<T>,
    /// `Ψ_k = e^{-θ t_k} ∫_0^{t_k} e^{θs} dG_s = G_{t_k} - θ ∫_0^{t_k} e^{-θ(t_k - s)} G_s ds`.
    psi: Vec<T>,
    /// `D_k = e^{-2θ t_k} ∫_0^{t_k} X_s² ds`.
    d: Vec<T>,
    /// `e^{-θ t_k} R_{t_k}`.
    r_scaled: Vec<T>,
}

/// Values of a trajectory at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint<T> {
    pub t: T,
    pub g: T,
    pub xi: T,
    pub z: T,
    pub psi: T,
    pub d: T,
    pub r_scaled: T,
}

impl<T: Real> ScaledTrajectory<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Number of grid points (`n + 1`).
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn driver(&self) -> &[T] {
        &self.driver
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn r_scaled(&self) -> &[T] {
        &self.r_scaled
    }

    pub fn point(&self, k: usize) -> TrajectoryPoint<T> {
        TrajectoryPoint {
            t: self.grid.time(k),
            g: self.driver[k],
            xi: self.xi[k],
            z: self.z[k],
            psi: self.psi[k],
            d: self.d[k],
            r_scaled: self.r_scaled[k],
        }
    }

    /// `e^{-θ t_k}`.
    pub fn discount(&self, k: usize) -> T {
        (-self.theta * self.grid.time(k)).exp()
    }

    /// Unscaled path `X_k = e^{θ t_k} ξ_k`; refused when `θT` would overflow.
    pub fn materialize_x(&self) -> Result<Vec<T>> {
        let limit = lit::<T>(700.0).min(lit::<T>(0.99) * T::max_value().ln());
        let theta_t = self.theta * self.grid.horizon();
        if theta_t > limit {
            return Err(Error::Range(format!(
                "θT = {theta_t} exceeds {limit}: X overflows, use the scaled quantities instead"
            )));
        }
        Ok(self
            .xi
            .iter()
            .enumerate()
            .map(|(k, &xi)| (self.theta * self.grid.time(k)).exp() * xi)
            .collect())
    }
}

/// Builds the scaled trajectory of `dX = θX dt + dG`, `X_0 = 0`, for the given driver.
pub fn build_trajectory<T: Real>(path: &SamplePath<T>, theta: T) -> Result<ScaledTrajectory<T>> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(domain(format!("drift θ must be positive and finite, got {theta}")));
    }
    let g = path.values();
    if let Some(k) = g.iter().position(|v| !v.is_finite()) {
        return Err(data(format!("driver value at index {k} is not finite")));
    }
    let grid = *path.grid();
    let n = grid.steps();
    let h = grid.step();
    let x = theta * h;
    let half = lit::<T>(0.5);
    let third = T::one() / lit::<T>(3.0);

    let c = StepCoefficients::new(x);
    let decay = (-x).exp();
    let decay2 = decay * decay;

    let mut xi = Vec::with_capacity(n + 1);
    let mut z = Vec::with_capacity(n + 1);
    let mut psi = Vec::with_capacity(n + 1);
    let mut d = Vec::with_capacity(n + 1);
    let mut r_scaled = Vec::with_capacity(n + 1);

    let zero = T::zero();
    xi.push(zero);
    z.push(zero);
    psi.push(zero);
    d.push(zero);
    r_scaled.push(zero);

    // B_k = ∫_0^{t_k} e^{-θ(t_k - s)} G_s ds
    let mut b = zero;
    // ∫_0^{t_k} G²
    let mut int_g2 = zero;
    // ∫_0^{t_k} G_s B_s ds
    let mut int_gb = zero;
    let mut z_k = zero;
    let mut d_k = zero;

    for k in 0..n {
        let g0 = g[k];
        let g1 = g[k + 1];
        let dg = g1 - g0;
        let w = (-theta * grid.time(k)).exp();
        let xi_k = xi[k];

        let z_next = z_k + w * h * (g0 * c.m0 + dg * c.m1);
        let d_next =
            decay2 * d_k + h * (xi_k * xi_k * c.m0_double + xi_k * w * dg * c.m0 * c.m0 + dg * dg * w * w * c.psi3);
        int_gb = int_gb
            + b * h * (g0 * c.m0 + dg * c.m1)
            + h * h * (g0 * g0 * c.tau00 + g0 * dg * (c.tau10 + c.tau01) + dg * dg * c.tau11);
        let b_next = decay * b + h * (g0 * c.m0 + dg * (c.m0 - c.m1));
        int_g2 = int_g2 + h * third * (g0 * g0 + g0 * g1 + g1 * g1);

        let t_next = grid.time(k + 1);
        let w_next = (-theta * t_next).exp();
        let r = half * g1 * g1 - theta * int_g2 + theta * theta * int_gb;

        z_k = z_next;
        d_k = d_next;
        b = b_next;
        z.push(z_k);
        xi.push(w_next * g1 + theta * z_k);
        psi.push(g1 - theta * b);
        d.push(d_k);
        r_scaled.push(w_next * r);
    }

    Ok(ScaledTrajectory {
        grid,
        theta,
        driver: g.to_vec(),
        xi,
        z,
        psi,
        d,
        r_scaled,
    })
}

/// Per-step integrals of the linear interpolant, as functions of `x = θΔ`.
///
/// With `p ∈ [0, 1]` the fraction of the step:
/// `m_i = ∫ p^i e^{-xp} dp`, `τ_ij = ∫_0^1 dp ∫_0^p dq p^i q^j e^{-x(p-q)}`,
/// `ψ3 = e^{-2x} ∫_0^1 ((e^{xp} - 1)/x)² dp`.
#[derive(Debug, Clone, Copy)]
struct StepCoefficients<T> {
    m0: T,
    m1: T,
    m0_double: T,
    tau00: T,
    tau10: T,
    tau01: T,
    tau11: T,
    psi3: T,
}

const SERIES_SWITCH: f64 = 1.0;
const SERIES_TERMS: usize = 40;

impl<T: Real> StepCoefficients<T> {
    fn new(x: T) -> Self {
        Self {
            m0: moment(0, x),
            m1: moment(1, x),
            m0_double: moment(0, lit::<T>(2.0) * x),
            tau00: tau(0, 0, x),
            tau10: tau(1, 0, x),
            tau01: tau(0, 1, x),
            tau11: tau(1, 1, x),
            psi3: psi3(x),
        }
    }
}

/// `∫_0^1 p^i e^{-xp} dp` for `i ∈ {0, 1}`.
fn moment<T: Real>(i: usize, x: T) -> T {
    if x < lit(SERIES_SWITCH) {
        // Σ (-x)^n / (n! (n + i + 1))
        let mut term = T::one();
        let mut sum = T::zero();
        for n in 0..SERIES_TERMS {
            sum = sum + term / count::<T>(n + i + 1);
            term = -term * x / count::<T>(n + 1);
        }
        sum
    } else {
        let e = (-x).exp();
        let m0 = -(-x).exp_m1() / x;
        match i {
            0 => m0,
            _ => (m0 - e) / x,
        }
    }
}

fn tau<T: Real>(i: usize, j: usize, x: T) -> T {
    if x < lit(SERIES_SWITCH) {
        // Σ (-x)^n j! / ((j + n + 1)! (i + j + n + 2))
        let mut sum = T::zero();
        // (-x)^n j! / (j + n + 1)!
        let mut coef = T::one() / count::<T>(j + 1);
        for n in 0..SERIES_TERMS {
            sum = sum + coef / count::<T>(i + j + n + 2);
            coef = -coef * x / count::<T>(j + n + 2);
        }
        sum
    } else {
        let m0 = moment(0, x);
        let m1 = moment(1, x);
        let x2 = x * x;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        match (i, j) {
            (0, 0) => (T::one() - m0) / x,
            (1, 0) => (T::one() / two - m1) / x,
            (0, 1) => T::one() / (two * x) - T::one() / x2 + m0 / x2,
            _ => T::one() / (three * x) - T::one() / (two * x2) + m1 / x2,
        }
    }
}

fn psi3<T: Real>(x: T) -> T {
    let e2 = (lit::<T>(-2.0) * x).exp();
    if x < lit(SERIES_SWITCH) {
        // φ3(x) = Σ_{n>=3} (2^{n-1} - 2)/n! x^{n-3}
        let mut sum = T::zero();
        let mut xpow = T::one();
        let mut fact = lit::<T>(6.0);
        let mut pow2 = lit::<T>(4.0);
        for n in 3..(3 + SERIES_TERMS) {
            sum = sum + (pow2 - lit(2.0)) / fact * xpow;
            xpow = xpow * x;
            fact = fact * count::<T>(n + 1);
            pow2 = pow2 * lit(2.0);
        }
        e2 * sum
    } else {
        let e1 = (-x).exp();
        let half = lit::<T>(0.5);
        ((T::one() - e2) * half - lit::<T>(2.0) * (e1 - e2) + x * e2) / (x * x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_moment(i: i32, x: f64) -> f64 {
        crate::quadrature::integrate(|p: f64| p.powi(i) * (-x * p).exp(), 0.0, 1.0, 2000)
    }

    fn brute_tau(i: i32, j: i32, x: f64) -> f64 {
        crate::quadrature::integrate_triangle(|p: f64, q: f64| p.powi(i) * q.powi(j) * (-x * (p - q)).exp(), 1.0, 400)
    }

    fn brute_psi3(x: f64) -> f64 {
        (-2.0 * x).exp() * crate::quadrature::integrate(|p: f64| ((x * p).exp_m1() / x).powi(2), 0.0, 1.0, 2000)
    }

    #[test]
    fn step_coefficients_match_quadrature_on_both_branches() {
        for x in [1e-6, 0.01, 0.4, 0.999, 1.0, 1.7, 6.0, 25.0] {
            let c = StepCoefficients::<f64>::new(x);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-11 * b.abs().max(1e-3);
            assert!(close(c.m0, brute_moment(0, x)), "m0 x={x}");
            assert!(close(c.m1, brute_moment(1, x)), "m1 x={x}");
            assert!(close(c.m0_double, brute_moment(0, 2.0 * x)), "m0(2x) x={x}");
            assert!(close(c.tau00, brute_tau(0, 0, x)), "tau00 x={x}");
            assert!(close(c.tau10, brute_tau(1, 0, x)), "tau10 x={x}");
            assert!(close(c.tau01, brute_tau(0, 1, x)), "tau01 x={x}");
            assert!(close(c.tau11, brute_tau(1, 1, x)), "tau11 x={x}");
            assert!(
                close(c.psi3, brute_psi3(x)),
                "psi3 x={x}: {} vs {}",
                c.psi3,
                brute_psi3(x)
            );
        }
    }

    #[test]
    fn zero_driver_gives_zero_state() {
        let grid = TimeGrid::new(3.0, 50).unwrap();
        let path = SamplePath::from_values(grid, vec![0.0; 51]).unwrap();
        let tr = build_trajectory(&path, 1.3).unwrap();
        for v in [tr.xi(), tr.z(), tr.psi(), tr.d(), tr.r_scaled()] {
            assert!(v.iter().all(|&x| x == 0.0));
        }
        assert!(tr.materialize_x().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let path = SamplePath::from_fn(grid, |t: f64| t);
        assert!(matches!(build_trajectory(&path, 0.0), Err(Error::Domain(_))));
        assert!(matches!(build_trajectory(&path, -1.0), Err(Error::Domain(_))));
        let bad = SamplePath::from_values(grid, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).unwrap();
        assert!(matches!(build_trajectory(&bad, 1.0), Err(Error::Data(_))));
    }

    #[test]
    fn linear_driver_closed_forms() {
        // G_s = s, θ = 1: X_t = e^t - 1, Z_1 = 1 - 2/e, Ψ_1 = 1 - 1/e,
        // ∫_0^1 X² = (e² - 1)/2 - 2(e - 1) + 1
        let e = std::f64::consts::E;
        let grid = TimeGrid::new(1.0, 4096).unwrap();
        let path = SamplePath::from_fn(grid, |t: f64| t);
        let tr = build_trajectory(&path, 1.0).unwrap();
        let n = 4096;
        assert!((tr.xi()[n] - (1.0 - 1.0 / e)).abs() < 1e-12);
        assert!((tr.z()[n] - (1.0 - 2.0 / e)).abs() < 1e-12);
        assert!((tr.psi()[n] - (1.0 - 1.0 / e)).abs() < 1e-12);
        let int_x2 = (e * e - 1.0) / 2.0 - 2.0 * (e - 1.0) + 1.0;
        assert!((tr.d()[n] * e * e - int_x2).abs() < 1e-12);
        let x = tr.materialize_x().unwrap();
        for (k, t) in grid.times().enumerate() {
            assert!((x[k] - t.exp_m1()).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_guard() {
        let grid = TimeGrid::new(800.0, 100).unwrap();
        let path = SamplePath::from_fn(grid, |t: f64| t.sqrt());
        let tr = build_trajectory(&path, 1.0).unwrap();
        assert!(matches!(tr.materialize_x(), Err(Error::Range(_))));
        assert!(tr.xi().iter().all(|v| v.is_finite()));
        assert!(tr.d().iter().all(|v| v.is_finite()));
        assert!(tr.r_scaled().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn f32_trajectory() {
        let grid = TimeGrid::<f32>::new(1.0, 256).unwrap();
        let path = SamplePath::from_fn(grid, |t| t);
        let tr = build_trajectory(&path, 1.0f32).unwrap();
        assert!((tr.z()[256] - 0.264_241).abs() < 1e-5);
    }
}
