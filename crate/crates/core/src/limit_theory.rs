//! Deterministic quadrature checks of the analytical limits behind the
//! estimator's asymptotics.
//!
//! Every integrand carrying `e^{θs}` is rewritten with discounted weights
//! `e^{-θ(t-s)}` so nothing overflows for large `θt`. For `θ > 0` and a driver
//! with covariance `f`, the quantities involved are
//!
//! ```text
//! Ψ_t    = G_t - θ ∫_0^t e^{-θ(t-r)} G_r dr
//! V(t)   = Var Ψ_t
//! Δ_g(t) = g(t,t) - 2θ ∫_0^t e^{-θ(t-s)} g(s,t) ds + θ² ∫∫_{[0,t]²} e^{-θ(2t-s-r)} g(s,r)
//!        = 2 ∫_0^t e^{-θ(2t-s)} ∂_s g(s,0) ds + ∫∫_{[0,t]²} e^{-θ(2t-s-r)} ∂²_{sr} g(s,r)
//! I_λ(t) = ∫_0^t u^λ e^{-θu} du
//! J_λ(t) = ∫∫_{[0,t]²} e^{-θ(2t-s-r)} |s-r|^λ = (I_λ(t) - ∫_0^t u^λ e^{-θ(2t-u)} du) / θ
//! ```
//!
//! and with `f = g - κ|s-r|^λ`, `V = Δ_g + 2κθ I_λ - κθ² J_λ`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::quadrature::{check_size, integrate_square_symmetric, integrate_triangle, Rule};
use crate::scalar::{lit, pow_nonneg, Real};
use crate::special::{gamma, upper_incomplete_gamma};

/// Smallest accepted number of quadrature nodes per dimension.
pub const MIN_QUAD: usize = 256;

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("drift θ must be positive and finite, got {theta}")))
    }
}

fn check_horizon<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("horizon must be positive and finite, got {t}")))
    }
}

/// Closed-form limiting variance of `Ψ_t` as stated for each family:
/// `HΓ(2H)/θ^{2H}` (fBm, sfBm), `HKΓ(2HK)/θ^{2HK}` (bifBm), `1/(2θ)` (BM).
///
/// For bifBm the actual limit carries an extra factor `2^{1-K}`; see
/// [`psi_variance_limit`].
pub fn sigma_limit<T: Real>(spec: &KernelSpec<T>, theta: T) -> Result<T> {
    check_theta(theta)?;
    let two = lit::<T>(2.0);
    Ok(match spec.family {
        KernelFamily::Bm => T::one() / (two * theta),
        KernelFamily::Fbm | KernelFamily::Sfbm => {
            let h = spec.hurst;
            h * gamma(two * h) / theta.powf(two * h)
        }
        KernelFamily::Bifbm => {
            let hk = spec.hurst * spec.k;
            hk * gamma(two * hk) / theta.powf(two * hk)
        }
    })
}

/// `lim_{t→∞} Var Ψ_t = 2κ Γ(λ+1) / (2 θ^λ)` from the roughness `κ|s-r|^λ`.
/// Equals [`sigma_limit`] except for bifBm, where it is `2^{1-K}` times larger.
pub fn psi_variance_limit<T: Real>(spec: &KernelSpec<T>, theta: T) -> Result<T> {
    check_theta(theta)?;
    let rough = spec.roughness();
    Ok(rough.coefficient * gamma(rough.exponent + T::one()) / theta.powf(rough.exponent))
}

/// `I_λ(t) = ∫_0^t u^λ e^{-θu} du`.
pub fn i_lambda<T: Real>(theta: T, lambda: T, t: T, n_quad: usize) -> Result<T> {
    check_lambda(lambda)?;
    check_theta(theta)?;
    check_horizon(t)?;
    check_size(n_quad, MIN_QUAD)?;
    let rule = Rule::new(T::zero(), t, n_quad);
    Ok(rule.integrate(|u| pow_nonneg(u, lambda) * (-theta * u).exp()))
}

/// `J_λ(t)` through its reduction to single integrals.
pub fn j_lambda<T: Real>(theta: T, lambda: T, t: T, n_quad: usize) -> Result<T> {
    check_lambda(lambda)?;
    check_theta(theta)?;
    check_horizon(t)?;
    check_size(n_quad, MIN_QUAD)?;
    let rule = Rule::new(T::zero(), t, n_quad);
    let two_t = lit::<T>(2.0) * t;
    let v = rule.integrate(|u| {
        let p = pow_nonneg(u, lambda);
        p * ((-theta * u).exp() - (-theta * (two_t - u)).exp())
    });
    Ok(v / theta)
}

/// `lim J_λ = Γ(λ+1)/θ^{λ+2}`.
pub fn j_lambda_limit<T: Real>(theta: T, lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    check_theta(theta)?;
    Ok(gamma(lambda + T::one()) / theta.powf(lambda + lit(2.0)))
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > -T::one() && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("λ must exceed -1, got {lambda}")))
    }
}

fn common_checks<T: Real>(theta: T, t: T, n_quad: usize) -> Result<()> {
    check_theta(theta)?;
    check_horizon(t)?;
    check_size(n_quad, MIN_QUAD)
}

/// Both sides of the `Δ_g` identity: `(definition, derivative form)`.
pub fn lemma41_check<T: Real>(spec: &KernelSpec<T>, theta: T, t: T, n_quad: usize) -> Result<(T, T)> {
    common_checks(theta, t, n_quad)?;
    Ok((
        delta_g_definition(spec, theta, t, n_quad),
        delta_g_derivative(spec, theta, t, n_quad),
    ))
}

/// Per-node data on `[0, t]`: nodes, weights, `s^{2H}` and `e^{-θ(t-s)}`.
struct Nodes<T> {
    rule: Rule<T>,
    powers: Vec<T>,
    discount: Vec<T>,
}

impl<T: Real> Nodes<T> {
    fn new(spec: &KernelSpec<T>, theta: T, t: T, n: usize) -> Self {
        let rule = Rule::new(T::zero(), t, n);
        let h2 = lit::<T>(2.0) * spec.hurst;
        let powers = rule.nodes.iter().map(|&s| pow_nonneg(s, h2)).collect();
        let discount = rule.nodes.iter().map(|&s| (-theta * (t - s)).exp()).collect();
        Nodes { rule, powers, discount }
    }
}

fn delta_g_definition<T: Real>(spec: &KernelSpec<T>, theta: T, t: T, n: usize) -> T {
    let nodes = Nodes::new(spec, theta, t, n);
    let (rule, pw, disc) = (&nodes.rule, &nodes.powers, &nodes.discount);
    let tp = pow_nonneg(t, lit::<T>(2.0) * spec.hurst);
    let diag = spec.smooth_part_from_powers(t, t, tp, tp);
    let single: T = (0..n)
        .map(|i| rule.weights[i] * disc[i] * spec.smooth_part_from_powers(rule.nodes[i], t, pw[i], tp))
        .sum();
    let double = integrate_square_symmetric(rule, |i, j| {
        disc[i] * disc[j] * spec.smooth_part_from_powers(rule.nodes[i], rule.nodes[j], pw[i], pw[j])
    });
    diag - lit::<T>(2.0) * theta * single + theta * theta * double
}

fn delta_g_derivative<T: Real>(spec: &KernelSpec<T>, theta: T, t: T, n: usize) -> T {
    let rule = Rule::new(T::zero(), t, n);
    let outer = (-theta * t).exp();
    let disc: Vec<T> = rule.nodes.iter().map(|&s| (-theta * (t - s)).exp()).collect();
    let boundary: T = (0..n)
        .map(|i| rule.weights[i] * disc[i] * spec.smooth_part_ds_at_zero_unchecked(rule.nodes[i]))
        .sum();
    let boundary = lit::<T>(2.0) * outer * boundary;
    if spec.smooth_part_is_additive() {
        return boundary;
    }
    let mixed = integrate_square_symmetric(&rule, |i, j| {
        disc[i] * disc[j] * spec.smooth_part_dsdr_unchecked(rule.nodes[i], rule.nodes[j])
    });
    boundary + mixed
}

/// `V(t) = Var Ψ_t` computed two independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceCurve<T> {
    /// Quadrature of `f(t,t) - 2θ∫e^{-θ(t-r)} f(t,r) + θ² ∫∫ e^{-θ(2t-r-s)} f(r,s)`.
    pub direct: T,
    /// `Δ_g + 2κθ I_λ - κθ² J_λ`.
    pub split: T,
}

pub fn variance_curve<T: Real>(spec: &KernelSpec<T>, theta: T, t: T, n_quad: usize) -> Result<VarianceCurve<T>> {
    common_checks(theta, t, n_quad)?;
    let two = lit::<T>(2.0);
    let diag = spec.cov_unchecked(t, t);
    let rule = Rule::new(T::zero(), t, n_quad);
    let single = rule.integrate(|r| (-theta * (t - r)).exp() * spec.cov_unchecked(t, r));
    let double = integrate_triangle(
        |s, r| (-theta * ((t - s) + (t - r))).exp() * spec.cov_unchecked(s, r),
        t,
        n_quad,
    );
    let direct = diag - two * theta * single + theta * theta * two * double;

    let rough = spec.roughness();
    let delta = delta_g_derivative(spec, theta, t, n_quad);
    let i = i_lambda(theta, rough.exponent, t, n_quad)?;
    let j = j_lambda(theta, rough.exponent, t, n_quad)?;
    let split = delta + two * rough.coefficient * theta * i - rough.coefficient * theta * theta * j;
    Ok(VarianceCurve { direct, split })
}

/// `max(40/θ, 40)`.
pub fn default_truncation<T: Real>(theta: T) -> T {
    let forty = lit::<T>(40.0);
    (forty / theta).max(forty)
}

/// Truncated `E[Z∞²]` together with the growth-bound tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZInfinity<T> {
    pub variance: T,
    /// `c (∫_T^∞ s^γ e^{-θs} ds)²`.
    pub tail_bound: T,
}

/// `E[Z∞²] = ∫∫ e^{-θ(r+s)} f(r,s)` over `[0, t_trunc]²`.
pub fn z_infinity_variance<T: Real>(spec: &KernelSpec<T>, theta: T, t_trunc: T, n_quad: usize) -> Result<ZInfinity<T>> {
    common_checks(theta, t_trunc, n_quad)?;
    if t_trunc * theta < lit(20.0) {
        return Err(domain(format!(
            "truncation horizon {t_trunc} is below 20/θ = {}",
            lit::<T>(20.0) / theta
        )));
    }
    let half_integral = integrate_triangle(
        |s, r| (-theta * (s + r)).exp() * spec.cov_unchecked(s, r),
        t_trunc,
        n_quad,
    );
    let a = spec.growth_exponent + T::one();
    let tail = upper_incomplete_gamma(a, theta * t_trunc)? / theta.powf(a);
    Ok(ZInfinity {
        variance: lit::<T>(2.0) * half_integral,
        tail_bound: spec.growth_constant * tail * tail,
    })
}

/// `E[G_s Ψ_t] = f(s,t) - θ ∫_0^t e^{-θ(t-r)} f(s,r) dr`, split at the kink `r = s`.
pub fn a4_cross<T: Real>(spec: &KernelSpec<T>, theta: T, s: T, t: T, n_quad: usize) -> Result<T> {
    common_checks(theta, t, n_quad)?;
    if !(s >= T::zero() && s < t) {
        return Err(domain(format!("a4_cross needs 0 <= s < t, got s = {s}, t = {t}")));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let below = Rule::new(T::zero(), s, n_quad).integrate(|r| (-theta * (t - r)).exp() * spec.cov_unchecked(s, r));
    let above =
        Rule::new(T::zero(), t - s, n_quad).integrate(|u| (-theta * (t - s - u)).exp() * spec.cov_unchecked(s, s + u));
    Ok(spec.cov_unchecked(s, t) - theta * (below + above))
}

/// One row of a limit verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub check_name: String,
    pub t: f64,
    pub value: f64,
    pub reference: f64,
    /// Absolute or relative gap, whichever the tolerance refers to.
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl LimitCheck {
    fn absolute(name: impl Into<String>, t: f64, value: f64, reference: f64, tolerance: f64) -> Self {
        let gap = (value - reference).abs();
        Self {
            check_name: name.into(),
            t,
            value,
            reference,
            gap,
            tolerance,
            pass: gap <= tolerance,
        }
    }

    fn relative(name: impl Into<String>, t: f64, value: f64, reference: f64, tolerance: f64) -> Self {
        let gap = (value - reference).abs() / reference.abs();
        Self {
            check_name: name.into(),
            t,
            value,
            reference,
            gap,
            tolerance,
            pass: gap <= tolerance,
        }
    }
}

/// Every analytical check for one kernel and drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub kernel: KernelSpec<f64>,
    pub theta: f64,
    pub n_quad: usize,
    pub checks: Vec<LimitCheck>,
}

impl LimitReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Horizons and tolerances used by [`verify_limits`].
pub mod horizons {
    pub const LEMMA42_T: f64 = 30.0;
    pub const LEMMA42_TOL: f64 = 1e-5;
    pub const LEMMA42_GAP_TOL: f64 = 1e-6;
    pub const LEMMA41_T: f64 = 5.0;
    pub const LEMMA41_TOL: f64 = 1e-3;
    pub const DELTA_DECAY_T: f64 = 20.0;
    pub const DELTA_DECAY_TOL: f64 = 1e-3;
    pub const A3_T: f64 = 20.0;
    pub const A3_TOL: f64 = 1e-2;
    pub const BM_CLOSED_FORM_TOL: f64 = 1e-6;
    pub const ROUTES_T: f64 = 5.0;
    pub const ROUTES_TOL: f64 = 1e-3;
    pub const Z_RELATION_TOL: f64 = 1e-2;
    pub const A4_S: f64 = 1.0;
    pub const A4_TS: [f64; 3] = [10.0, 20.0, 30.0];
    pub const A4_TOL: f64 = 1e-2;
}

/// Runs the full battery for `spec`; errors only on invalid input.
pub fn verify_limits(spec: &KernelSpec<f64>, theta: f64, n_quad: usize) -> Result<LimitReport> {
    use horizons::*;
    check_theta(theta)?;
    check_size(n_quad, MIN_QUAD)?;
    let mut checks = Vec::new();
    let rough = spec.roughness();

    for lambda in [0.0, rough.exponent] {
        let j = j_lambda(theta, lambda, LEMMA42_T, n_quad)?;
        let i = i_lambda(theta, lambda, LEMMA42_T, n_quad)?;
        checks.push(LimitCheck::absolute(
            format!("J_{lambda}"),
            LEMMA42_T,
            j,
            j_lambda_limit(theta, lambda)?,
            LEMMA42_TOL,
        ));
        checks.push(LimitCheck::absolute(
            format!("J_minus_I_over_theta_{lambda}"),
            LEMMA42_T,
            j - i / theta,
            0.0,
            LEMMA42_GAP_TOL,
        ));
    }

    let (lhs, rhs) = lemma41_check(spec, theta, LEMMA41_T, n_quad)?;
    checks.push(LimitCheck::relative(
        "delta_g_identity",
        LEMMA41_T,
        lhs,
        rhs,
        LEMMA41_TOL,
    ));
    let (decayed, _) = lemma41_check(spec, theta, DELTA_DECAY_T, n_quad)?;
    checks.push(LimitCheck::absolute(
        "delta_g_decay",
        DELTA_DECAY_T,
        decayed,
        0.0,
        DELTA_DECAY_TOL,
    ));

    let sigma2 = sigma_limit(spec, theta)?;
    let v = variance_curve(spec, theta, A3_T, n_quad)?;
    checks.push(LimitCheck::relative("a3_variance", A3_T, v.direct, sigma2, A3_TOL));
    let exact = psi_variance_limit(spec, theta)?;
    if exact != sigma2 {
        checks.push(LimitCheck::relative(
            "a3_variance_exact_limit",
            A3_T,
            v.direct,
            exact,
            A3_TOL,
        ));
    }
    if spec.family == KernelFamily::Bm || (spec.family != KernelFamily::Bifbm && spec.hurst == 0.5) {
        let closed = -(-2.0 * theta * A3_T).exp_m1() / (2.0 * theta);
        checks.push(LimitCheck::absolute(
            "a3_bm_closed_form",
            A3_T,
            v.direct,
            closed,
            BM_CLOSED_FORM_TOL,
        ));
    }
    let routes = variance_curve(spec, theta, ROUTES_T, n_quad)?;
    checks.push(LimitCheck::relative(
        "a3_routes",
        ROUTES_T,
        routes.direct,
        routes.split,
        ROUTES_TOL,
    ));

    let t_trunc = default_truncation(theta);
    let z = z_infinity_variance(spec, theta, t_trunc, n_quad)?;
    checks.push(LimitCheck::relative(
        "z_infinity_relation",
        t_trunc,
        theta * theta * z.variance,
        sigma2,
        Z_RELATION_TOL,
    ));

    let mut previous = f64::INFINITY;
    let mut decreasing = true;
    for &t in &A4_TS {
        let a = a4_cross(spec, theta, A4_S, t, n_quad)?.abs();
        decreasing &= a < previous;
        previous = a;
        let mut row = LimitCheck::absolute("a4_cross", t, a, 0.0, A4_TOL);
        row.pass = decreasing && (t < A4_TS[A4_TS.len() - 1] || a <= A4_TOL);
        checks.push(row);
    }

    Ok(LimitReport {
        kernel: *spec,
        theta,
        n_quad,
        checks,
    })
}
