//! Open-node quadrature robust to algebraic endpoint singularities.
//!
//! An interval `[a, b]` is mapped from `u ∈ (0, 1)` through the sigmoidal
//! substitution `φ(u) = u^p / (u^p + (1 - u)^p)` and the transformed integrand is
//! summed with the composite midpoint rule. Integrands behaving like
//! `(x - a)^λ` with `λ > -1` become `u^{p(λ+1) - 1}` so the rule stays high order
//! and never evaluates the endpoints (the first node sits at half a cell).
//! Triangles `{0 <= r <= s <= t}` are handled through `r = s v`, which moves the
//! diagonal of a square onto the edge `v = 1`.
//!
//! Nodes next to `b`, or next to a shifted endpoint `a != 0`, can round onto the
//! endpoint, so integrands singular there should be rewritten in the distance
//! to that endpoint on an interval starting at 0.

use rayon::prelude::*;

use crate::error::{usage, Result};
use crate::scalar::{count, lit, Real};

/// Sigmoid order. Endpoint behaviour `x^λ` converges like `n^{-p(λ+1)}`.
const SIGMOID_ORDER: i32 = 6;

/// Node/weight pairs of an `n`-point rule on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// Rule on `[a, b]` with `n >= 1` nodes.
    pub fn new(a: T, b: T, n: usize) -> Self {
        let (us, ws) = unit_rule::<T>(n);
        let width = b - a;
        let nodes = us.iter().map(|&u| a + width * u).collect();
        let weights = ws.iter().map(|&w| width * w).collect();
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Transformed nodes and weights on `(0, 1)`.
fn unit_rule<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let nf = count::<T>(n);
    let half = lit::<T>(0.5);
    let p = lit::<T>(SIGMOID_ORDER as f64);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let u = (count::<T>(i) + half) / nf;
        let v = T::one() - u;
        let up = u.powi(SIGMOID_ORDER);
        let vp = v.powi(SIGMOID_ORDER);
        let den = up + vp;
        // φ(u) = 1 / (1 + (v/u)^p) computed symmetrically to keep the small end accurate
        let x = if u <= half { up / den } else { T::one() - vp / den };
        let dphi = p * (u * v).powi(SIGMOID_ORDER - 1) / (den * den);
        nodes.push(x);
        weights.push(dphi / nf);
    }
    (nodes, weights)
}

/// `∫_a^b f(x) dx` with an `n`-node rule.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    if b == a {
        return T::zero();
    }
    Rule::new(a, b, n).integrate(f)
}

/// `∫_0^t ds ∫_0^s dr f(s, r)` with `n` nodes per direction, outer loop in parallel.
///
/// The result is independent of the worker count: per-row partial sums are
/// collected in order and added sequentially.
pub fn integrate_triangle<T: Real, F>(f: F, t: T, n: usize) -> T
where
    F: Fn(T, T) -> T + Sync,
{
    if t == T::zero() {
        return T::zero();
    }
    let outer = Rule::new(T::zero(), t, n);
    let (vs, vw) = unit_rule::<T>(n);
    let rows: Vec<T> = outer
        .nodes
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(&s, &w)| {
            let inner: T = vs.iter().zip(&vw).map(|(&v, &wv)| wv * f(s, s * v)).sum();
            w * s * inner
        })
        .collect();
    rows.into_iter().sum()
}

/// `Σ_ij w_i w_j f(i, j)` over the tensor product of `rule` with itself, for a
/// symmetric `f` smooth across the diagonal (`n (n + 1) / 2` evaluations).
/// Integrands are indexed by node so callers can precompute per-node factors.
pub fn integrate_square_symmetric<T: Real, F>(rule: &Rule<T>, f: F) -> T
where
    F: Fn(usize, usize) -> T + Sync,
{
    let two = lit::<T>(2.0);
    let rows: Vec<T> = (0..rule.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..i {
                acc = acc + rule.weights[j] * f(i, j);
            }
            rule.weights[i] * (two * acc + rule.weights[i] * f(i, i))
        })
        .collect();
    rows.into_iter().sum()
}

/// Rejects quadrature sizes below `min`.
pub fn check_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(usage(format!("quadrature size {n} below the minimum {min}")))
    } else {
        Ok(())
    }
}
