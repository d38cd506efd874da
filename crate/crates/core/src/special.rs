//! Gamma function and the upper incomplete gamma integral.

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(z: T) -> T {
    // z already shifted by -1
    let mut acc = lit::<T>(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (z + lit::<T>(i as f64));
    }
    acc
}

/// Gamma function Γ(x) for real `x` away from the non-positive integers.
pub fn gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x >= T::one() && x <= lit(20.0) && x == x.round() {
        // exact factorial, so Γ(1) = Γ(2) = 1 print as 1
        let mut f = T::one();
        let mut k = lit::<T>(2.0);
        while k < x {
            f = f * k;
            k = k + T::one();
        }
        return f;
    }
    if x < half {
        // reflection
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let z = x - T::one();
    let t = z + lit::<T>(LANCZOS_G) + half;
    let sqrt_two_pi = (lit::<T>(2.0) * T::PI()).sqrt();
    sqrt_two_pi * t.powf(z + half) * (-t).exp() * lanczos_sum(z)
}

/// Natural log of Γ(x) for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + lit::<T>(LANCZOS_G) + half;
    half * (lit::<T>(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}

/// Upper incomplete gamma Γ(a, x) = ∫_x^∞ u^{a-1} e^{-u} du for `a > 0`, `x >= 0`.
pub fn upper_incomplete_gamma<T: Real>(a: T, x: T) -> Result<T> {
    if !(a > T::zero()) || !(x >= T::zero()) {
        return Err(domain(format!(
            "upper incomplete gamma needs a > 0 and x >= 0, got a = {a}, x = {x}"
        )));
    }
    if x == T::zero() {
        return Ok(gamma(a));
    }
    let log_prefactor = a * x.ln() - x;
    if x < a + T::one() {
        // Γ(a) minus the lower series, which converges quickly here
        let mut term = T::one() / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..1000 {
            ap = ap + T::one();
            term = term * x / ap;
            sum = sum + term;
            if term.abs() < sum.abs() * T::epsilon() {
                break;
            }
        }
        let lower = sum * log_prefactor.exp();
        Ok(gamma(a) - lower)
    } else {
        // modified Lentz continued fraction
        let tiny = T::min_positive_value() / T::epsilon();
        let two = lit::<T>(2.0);
        let mut b = x + T::one() - a;
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..1000 {
            let fi = lit::<T>(i as f64);
            let an = -fi * (fi - a);
            b = b + two;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = T::one() / d;
            let delta = d * c;
            h = h * delta;
            if (delta - T::one()).abs() < T::epsilon() {
                break;
            }
        }
        Ok(log_prefactor.exp() * h)
    }
}
