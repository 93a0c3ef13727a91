//! Maximum-likelihood fits for the extremal families.
//!
//! The optimizer works on an unconstrained vector `(μ, ln σ, t)` where the
//! shape is a logistic image of `t` onto the family's admissible interval:
//! the full box for the GEV, `(lo, 0)` for Weibull and `(0, hi)` for Fréchet.
//! Gumbel drops the shape coordinate entirely.

use serde::{Deserialize, Serialize};

use crate::distributions::{log_likelihood, Family, GevParams};
use crate::error::{domain, Error, Result};
use crate::optim::{self, Tolerances};
use crate::stats::summary_stats;

const EULER_APPROX: f64 = 0.5772;
/// Below this shape the usual MLE asymptotics no longer hold.
pub const REGULAR_SHAPE_MIN: f64 = -0.5;
const T_CLAMP: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    pub tol_f: f64,
    pub tol_x: f64,
    pub shape_lo: f64,
    pub shape_hi: f64,
    /// Start point; moment-based initial values are used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<GevParams>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol_f: 1e-10,
            tol_x: 1e-8,
            shape_lo: -0.99,
            shape_hi: 0.99,
            start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// Shape below -0.5: the estimate exists but standard errors are unreliable.
    IrregularShape,
    /// Shape sits on an end of the family's admissible interval.
    ShapeAtBound,
    /// Observed information was not positive definite.
    StdErrorsUnavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GevParams,
    pub log_lik: f64,
    /// Standard errors of (location, scale, shape); the shape entry is 0 for
    /// Gumbel fits where it is pinned.
    pub std_errors: Option<[f64; 3]>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted optimizer iteration.
    pub trace: Vec<f64>,
    pub warnings: Vec<FitWarning>,
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t.clamp(-T_CLAMP, T_CLAMP)).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Maps between natural parameters and the optimizer's coordinates.
#[derive(Debug, Clone, Copy)]
struct Chart {
    family: Family,
    lo: f64,
    hi: f64,
}

impl Chart {
    fn new(family: Family, cfg: &FitConfig) -> Result<Self> {
        let (lo, hi) = match family {
            Family::Generalized | Family::Gumbel => (cfg.shape_lo, cfg.shape_hi),
            Family::Weibull => (cfg.shape_lo, 0.0),
            Family::Frechet => (0.0, cfg.shape_hi),
        };
        if family != Family::Gumbel && !(hi > lo) {
            return Err(domain(format!(
                "empty shape interval ({lo}, {hi}) for the {family} family"
            )));
        }
        Ok(Self { family, lo, hi })
    }

    fn dim(&self) -> usize {
        if self.family == Family::Gumbel {
            2
        } else {
            3
        }
    }

    fn shape(&self, t: f64) -> f64 {
        let s = self.lo + (self.hi - self.lo) * logistic(t);
        match self.family {
            // keep the strict sign even when the logistic saturates
            Family::Weibull => s.min(-f64::MIN_POSITIVE),
            Family::Frechet => s.max(f64::MIN_POSITIVE),
            _ => s,
        }
    }

    fn to_params(&self, theta: &[f64]) -> GevParams {
        let shape = if self.family == Family::Gumbel {
            0.0
        } else {
            self.shape(theta[2])
        };
        GevParams {
            location: theta[0],
            scale: theta[1].exp(),
            shape,
            family: self.family,
        }
    }

    fn to_theta(&self, p: &GevParams) -> Vec<f64> {
        let mut theta = vec![p.location, p.scale.ln()];
        if self.family != Family::Gumbel {
            let frac = ((p.shape - self.lo) / (self.hi - self.lo)).clamp(1e-12, 1.0 - 1e-12);
            theta.push(logit(frac).clamp(-T_CLAMP, T_CLAMP));
        }
        theta
    }
}

fn neg_log_lik(params: &GevParams, data: &[f64]) -> f64 {
    match log_likelihood(params, data) {
        Ok(ll) => -ll,
        Err(_) => f64::INFINITY,
    }
}

/// Gumbel moment start with the family's default shape; the scale is inflated
/// by 1.5 until every observation is strictly inside the support.
pub fn initial_params(data: &[f64], family: Family) -> Result<GevParams> {
    initial_params_in(data, family, -0.99, 0.99)
}

fn initial_params_in(data: &[f64], family: Family, lo: f64, hi: f64) -> Result<GevParams> {
    let s = summary_stats(data)?;
    let mut scale = s.sd * 6f64.sqrt() / std::f64::consts::PI;
    if !(scale > 0.0) {
        return Err(domain("data have zero spread"));
    }
    let location = s.mean - EULER_APPROX * scale;
    let (default, a, b) = match family {
        Family::Gumbel => (0.0, 0.0, 0.0),
        Family::Frechet => (0.1, 0.0, hi),
        Family::Weibull => (-0.1, lo, 0.0),
        Family::Generalized => (-0.1, lo, hi),
    };
    // pull the default inside a user-narrowed box
    let shape = if family == Family::Gumbel || (default > a && default < b) {
        default
    } else {
        0.5 * (a + b)
    };
    for _ in 0..500 {
        let p = GevParams::new(location, scale, shape, family)?;
        if data.iter().all(|&x| p.in_support(x)) {
            return Ok(p);
        }
        scale *= 1.5;
    }
    Err(Error::Numerical(
        "could not place the data inside the initial support".to_string(),
    ))
}

pub fn fit_mle(data: &[f64], family: Family, config: &FitConfig) -> Result<FitResult> {
    if data.len() < 5 {
        return Err(domain(format!(
            "maximum likelihood needs at least 5 observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(domain("data contain non-finite values"));
    }
    let first = data[0];
    if data.iter().all(|&x| x == first) {
        return Err(domain("all observations are equal"));
    }
    let chart = Chart::new(family, config)?;
    let start = match config.start {
        Some(p) => {
            let p = GevParams::new(p.location, p.scale, p.shape, family)?;
            if log_likelihood(&p, data).is_err() {
                return Err(domain("start parameters leave data outside the support"));
            }
            p
        }
        None => initial_params_in(data, family, chart.lo, chart.hi)?,
    };
    let theta0 = chart.to_theta(&start);
    let objective = |theta: &[f64]| neg_log_lik(&chart.to_params(theta), data);
    let tol = Tolerances {
        max_iter: config.max_iter,
        tol_f: config.tol_f,
        tol_x: config.tol_x,
    };
    let out = optim::minimize(&objective, &theta0, tol);
    debug_assert_eq!(out.x.len(), chart.dim());

    let params = chart.to_params(&out.x);
    let log_lik = -out.f;
    let mut warnings = Vec::new();
    if params.shape < REGULAR_SHAPE_MIN {
        warnings.push(FitWarning::IrregularShape);
    }
    // for Weibull and Fréchet one end is 0, the Gumbel limit
    if family != Family::Gumbel
        && (params.shape - chart.lo < 1e-6 || chart.hi - params.shape < 1e-6)
    {
        warnings.push(FitWarning::ShapeAtBound);
    }
    let std_errors = std_errors(data, &params);
    if std_errors.is_none() {
        warnings.push(FitWarning::StdErrorsUnavailable);
    }
    Ok(FitResult {
        params,
        log_lik,
        std_errors,
        iterations: out.iterations,
        converged: out.converged && log_lik.is_finite(),
        trace: out.trace.iter().map(|f| -f).collect(),
        warnings,
    })
}

/// Standard errors from the inverted observed information (numerical Hessian
/// of the negative log-likelihood in natural parameters).
pub fn std_errors(data: &[f64], params: &GevParams) -> Option<[f64; 3]> {
    let free = params.family.free_parameters();
    let theta = [params.location, params.scale, params.shape];
    let nll = |v: &[f64]| {
        let shape = if free == 3 { v[2] } else { 0.0 };
        if !(v[1] > 0.0) {
            return f64::INFINITY;
        }
        let p = GevParams {
            location: v[0],
            scale: v[1],
            shape,
            family: Family::Generalized,
        };
        neg_log_lik(&p, data)
    };
    let steps: Vec<f64> = theta[..free]
        .iter()
        .map(|t| (1e-4 * t.abs()).max(1e-5))
        .collect();
    let se = observed_information_errors(&nll, &theta[..free], &steps)?;
    let mut out = [0.0; 3];
    out[..free].copy_from_slice(&se);
    Some(out)
}

/// Square roots of the diagonal of the inverted central-difference Hessian of
/// `f` at `theta`. `None` if any evaluation is non-finite or the Hessian is
/// not positive definite.
pub fn observed_information_errors<F: Fn(&[f64]) -> f64>(
    f: &F,
    theta: &[f64],
    steps: &[f64],
) -> Option<Vec<f64>> {
    let d = theta.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut v = theta.to_vec();
        for &(i, s) in shifts {
            v[i] += s;
        }
        f(&v)
    };
    let f0 = f(theta);
    if !f0.is_finite() {
        return None;
    }
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        let hi = steps[i];
        let fp = at(&[(i, hi)]);
        let fm = at(&[(i, -hi)]);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let fpp = at(&[(i, hi), (j, hj)]);
            let fpm = at(&[(i, hi), (j, -hj)]);
            let fmp = at(&[(i, -hi), (j, hj)]);
            let fmm = at(&[(i, -hi), (j, -hj)]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    if hess.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let inv = optim::spd_inverse(&hess)?;
    let se: Vec<f64> = (0..d).map(|i| inv[i][i]).collect();
    if se.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    Some(se.into_iter().map(f64::sqrt).collect())
}
