//! Generalized extreme value family and its three extremal special cases.
//!
//! ```text
//! F(x) = exp{-[1 + ξ (x - μ)/σ]^(-1/ξ)}    ξ ≠ 0
//! F(x) = exp{-exp(-(x - μ)/σ)}             ξ = 0
//! ```
//!
//! For ξ < 0 the support is bounded above at μ + σ/|ξ|; for ξ > 0 it is
//! bounded below at μ - σ/ξ. The CDF clamps to exactly 0 or 1 outside the
//! support and the density is 0 there.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::SeededRng;

/// Shapes closer to zero than this use the Gumbel closed form.
pub const GUMBEL_SHAPE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Generalized,
    Gumbel,
    Weibull,
    Frechet,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Generalized,
        Family::Gumbel,
        Family::Weibull,
        Family::Frechet,
    ];

    /// Number of parameters estimated when fitting this family.
    pub fn free_parameters(self) -> usize {
        match self {
            Family::Gumbel => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Generalized => "gev",
            Family::Gumbel => "gumbel",
            Family::Weibull => "weibull",
            Family::Frechet => "frechet",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gev" | "generalized" => Some(Family::Generalized),
            "gumbel" | "ev1" => Some(Family::Gumbel),
            "weibull" | "ev3" => Some(Family::Weibull),
            "frechet" | "fréchet" | "ev2" => Some(Family::Frechet),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Location, scale and shape of an extremal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub family: Family,
}

impl GevParams {
    pub fn new(location: f64, scale: f64, shape: f64, family: Family) -> Result<Self> {
        let p = Self {
            location,
            scale,
            shape,
            family,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unconstrained GEV.
    pub fn gev(location: f64, scale: f64, shape: f64) -> Result<Self> {
        Self::new(location, scale, shape, Family::Generalized)
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::new(location, scale, 0.0, Family::Gumbel)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::InvalidParams(format!(
                "location must be finite, got {}",
                self.location
            )));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidParams(format!(
                "scale must be positive and finite, got {}",
                self.scale
            )));
        }
        if !self.shape.is_finite() {
            return Err(Error::InvalidParams(format!(
                "shape must be finite, got {}",
                self.shape
            )));
        }
        let ok = match self.family {
            Family::Generalized => true,
            Family::Gumbel => self.shape == 0.0,
            Family::Weibull => self.shape < 0.0,
            Family::Frechet => self.shape > 0.0,
        };
        if !ok {
            return Err(Error::InvalidParams(format!(
                "shape {} violates the {} family constraint",
                self.shape, self.family
            )));
        }
        Ok(())
    }

    fn is_gumbel_like(&self) -> bool {
        self.shape.abs() < GUMBEL_SHAPE_EPS
    }

    /// Lower and upper support bounds (infinite where unbounded).
    pub fn support(&self) -> (f64, f64) {
        if self.is_gumbel_like() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.shape < 0.0 {
            (
                f64::NEG_INFINITY,
                self.location + self.scale / self.shape.abs(),
            )
        } else {
            (self.location - self.scale / self.shape, f64::INFINITY)
        }
    }

    /// Whether `x` is strictly inside the support.
    pub fn in_support(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x > lo && x < hi
    }

    /// `t(x)^(-1/ξ)`-style reduced variate `-ln F(x)`, or `None` off support.
    fn neg_log_cdf(&self, x: f64) -> Option<f64> {
        let z = (x - self.location) / self.scale;
        if self.is_gumbel_like() {
            return Some((-z).exp());
        }
        let xz = self.shape * z;
        if xz <= -1.0 {
            return None;
        }
        Some((-(xz.ln_1p()) / self.shape).exp())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self.neg_log_cdf(x) {
            Some(t) => (-t).exp(),
            // Off support: below the lower bound for ξ > 0, above the upper for ξ < 0.
            None => {
                if self.shape > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.is_gumbel_like() {
            return -self.scale.ln() - z - (-z).exp();
        }
        let xz = self.shape * z;
        if xz <= -1.0 {
            return f64::NEG_INFINITY;
        }
        let ln_t = xz.ln_1p();
        let t_pow = (-ln_t / self.shape).exp();
        -self.scale.ln() - (1.0 + 1.0 / self.shape) * ln_t - t_pow
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let lp = self.ln_pdf(x);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            lp.exp()
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile level must lie in (0,1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        let y = -u.ln();
        if self.is_gumbel_like() {
            self.location - self.scale * y.ln()
        } else {
            // (y^(-ξ) - 1)/ξ, written to stay accurate for small |ξ|.
            self.location + self.scale * (-self.shape * y.ln()).exp_m1() / self.shape
        }
    }

    /// Mean, when it exists (ξ < 1).
    pub fn mean(&self) -> Option<f64> {
        const EULER: f64 = 0.577_215_664_901_532_9;
        if self.is_gumbel_like() {
            Some(self.location + self.scale * EULER)
        } else if self.shape < 1.0 {
            Some(self.location + self.scale * (gamma_fn(1.0 - self.shape) - 1.0) / self.shape)
        } else {
            None
        }
    }
}

/// Sum of log-densities. Fails with [`Error::OutOfSupport`] when any point is
/// not strictly inside the support.
pub fn log_likelihood(params: &GevParams, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(domain("log-likelihood of empty data"));
    }
    let mut total = 0.0;
    for (index, &x) in data.iter().enumerate() {
        let lp = params.ln_pdf(x);
        if !lp.is_finite() {
            return Err(Error::OutOfSupport { index });
        }
        total += lp;
    }
    Ok(total)
}

/// Inverse-transform sampling: draw `i` is `quantile(u_i)`.
pub fn sample(params: &GevParams, n: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    Ok((0..n)
        .map(|_| params.quantile_unchecked(rng.uniform()))
        .collect())
}

/// Lanczos approximation (g = 7, n = 9).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub(crate) fn gamma_fn(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma_fn(1.0 - x));
    }
    ln_gamma(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> GevParams {
        GevParams::gev(39.22, 2.182, -0.237).unwrap()
    }

    #[test]
    fn cdf_at_location_is_inv_e() {
        let p = canonical();
        assert!((p.cdf(39.22) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cdf_beyond_upper_endpoint_is_one() {
        let p = canonical();
        let (_, hi) = p.support();
        assert!((hi - 48.426_751_054_852_32).abs() < 1e-9);
        assert_eq!(p.cdf(hi), 1.0);
        assert_eq!(p.cdf(50.0), 1.0);
        assert_eq!(p.pdf(50.0), 0.0);
    }

    #[test]
    fn cdf_reference_value() {
        // Arbitrary-precision evaluation of the closed form: 0.946634762931262
        assert!((canonical().cdf(43.8) - 0.946_634_762_931_262).abs() < 1e-12);
    }

    #[test]
    fn gumbel_density_at_location() {
        let g = GevParams::gumbel(0.0, 1.0).unwrap();
        assert!((g.pdf(0.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn frechet_below_lower_bound() {
        let p = GevParams::new(0.0, 1.0, 0.5, Family::Frechet).unwrap();
        assert_eq!(p.cdf(-2.5), 0.0);
        assert_eq!(p.pdf(-2.5), 0.0);
        assert_eq!(p.cdf(-2.0), 0.0);
    }

    #[test]
    fn quantile_inverts_location() {
        let p = canonical();
        let q = p.quantile((-1.0f64).exp()).unwrap();
        assert!((q - 39.22).abs() < 1e-12);
        let g = GevParams::gumbel(0.0, 1.0).unwrap();
        assert!(g.quantile((-1.0f64).exp()).unwrap().abs() < 1e-15);
        let x = p.quantile(0.946_634_762_931_262).unwrap();
        assert!((x - 43.8).abs() < 1e-9);
        assert!((p.quantile(0.94663).unwrap() - 43.8).abs() < 1e-3);
    }

    #[test]
    fn quantile_rejects_levels_outside_unit_interval() {
        let p = canonical();
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(p.quantile(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn pdf_matches_finite_difference() {
        let p = canonical();
        let x = 40.0;
        let h = 1e-5 * x;
        let fd = (p.cdf(x + h) - p.cdf(x - h)) / (2.0 * h);
        assert!((p.pdf(x) - fd).abs() / p.pdf(x) < 1e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GevParams::gev(0.0, 0.0, 0.1).is_err());
        assert!(GevParams::gev(0.0, -1.0, 0.1).is_err());
        assert!(GevParams::new(0.0, 1.0, 0.1, Family::Gumbel).is_err());
        assert!(GevParams::new(0.0, 1.0, 0.1, Family::Weibull).is_err());
        assert!(GevParams::new(0.0, 1.0, -0.1, Family::Frechet).is_err());
        assert!(GevParams::new(0.0, 1.0, 0.0, Family::Weibull).is_err());
    }

    #[test]
    fn log_likelihood_cases() {
        let g = GevParams::gumbel(0.0, 1.0).unwrap();
        assert!((log_likelihood(&g, &[0.0]).unwrap() + 1.0).abs() < 1e-15);
        let w = GevParams::gev(0.0, 1.0, -0.5).unwrap();
        assert_eq!(
            log_likelihood(&w, &[0.0, 3.0]),
            Err(Error::OutOfSupport { index: 1 })
        );
        assert!(matches!(log_likelihood(&g, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_requires_positive_n_and_is_deterministic() {
        let p = canonical();
        assert!(sample(&p, 0, &mut SeededRng::new(1)).is_err());
        let a = sample(&p, 50, &mut SeededRng::new(9)).unwrap();
        let b = sample(&p, 50, &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
        let c = sample(&p, 50, &mut SeededRng::new(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gamma_function_reference_points() {
        assert!((gamma_fn(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma_fn(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((ln_gamma(10.0) - 362880f64.ln()).abs() < 1e-12);
    }
}
