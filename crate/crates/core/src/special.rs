//! Regularized incomplete gamma functions.

use crate::distributions::ln_gamma;
use crate::error::{domain, Result};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
///
/// Series for `x < a + 1`, Lentz continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(domain(format!(
            "gamma_q requires a > 0, x >= 0 (a={a}, x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let ln_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        Ok((1.0 - lower_series(a, x) * ln_prefactor.exp()).clamp(0.0, 1.0))
    } else {
        Ok((upper_fraction(a, x) * ln_prefactor.exp()).clamp(0.0, 1.0))
    }
}

/// Regularized lower incomplete gamma `P(a, x) = 1 - Q(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(domain(format!(
            "gamma_p requires a > 0, x >= 0 (a={a}, x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let ln_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        Ok((lower_series(a, x) * ln_prefactor.exp()).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - upper_fraction(a, x) * ln_prefactor.exp()).clamp(0.0, 1.0))
    }
}

// sum_{n>=0} x^n / (a (a+1) ... (a+n))
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
