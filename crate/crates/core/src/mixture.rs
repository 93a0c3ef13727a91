//! Two-component convex mixture `F(x) = (1 - p) F₁(x) + p F₁'(x)`, where the
//! weight `p` is a goodness-of-fit p-value of the single-component fit.

use serde::{Deserialize, Serialize};

use crate::distributions::GevParams;
use crate::error::{domain, Result};
use crate::fitting::FitResult;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub weight: f64,
    pub component_base: GevParams,
    pub component_alt: GevParams,
}

impl MixtureModel {
    pub fn new(weight: f64, component_base: GevParams, component_alt: GevParams) -> Result<Self> {
        let m = Self {
            weight,
            component_base,
            component_alt,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(domain(format!(
                "mixture weight must lie in [0,1], got {}",
                self.weight
            )));
        }
        self.component_base.validate()?;
        self.component_alt.validate()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (1.0 - self.weight) * self.component_base.cdf(x) + self.weight * self.component_alt.cdf(x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (1.0 - self.weight) * self.component_base.pdf(x) + self.weight * self.component_alt.pdf(x)
    }

    /// Composition sampling: pick the alternative component with probability
    /// `weight`, then draw from it by inverse transform.
    pub fn sample(&self, n: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        (0..n)
            .map(|_| {
                let pick = rng.uniform();
                let comp = if pick < self.weight {
                    &self.component_alt
                } else {
                    &self.component_base
                };
                comp.quantile(rng.uniform())
            })
            .collect()
    }
}

/// Weight is the baseline p-value; the base component is the fitted model.
pub fn make_mixture(base_fit: &FitResult, gof_p: f64, alt: GevParams) -> Result<MixtureModel> {
    if !(0.0..=1.0).contains(&gof_p) {
        return Err(domain(format!(
            "p-value weight must lie in [0,1], got {gof_p}"
        )));
    }
    MixtureModel::new(gof_p, base_fit.params, alt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_of(params: GevParams) -> FitResult {
        FitResult {
            params,
            log_lik: 0.0,
            std_errors: None,
            iterations: 0,
            converged: true,
            trace: vec![],
            warnings: vec![],
        }
    }

    fn recorded_final() -> MixtureModel {
        MixtureModel::new(
            0.05416,
            GevParams::gev(39.22, 3.15, -0.237).unwrap(),
            GevParams::gev(43.78, 0.4, -0.237).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_weight_is_base() {
        let base = GevParams::gev(39.22, 2.182, -0.237).unwrap();
        let alt = GevParams::gev(43.78, 0.4, -0.237).unwrap();
        let m = MixtureModel::new(0.0, base, alt).unwrap();
        for x in [35.0, 39.0, 43.8, 44.5, 50.0] {
            assert_eq!(m.cdf(x), base.cdf(x));
        }
        let same = MixtureModel::new(0.3, base, base).unwrap();
        for x in [35.0, 39.0, 43.8] {
            assert!((same.cdf(x) - base.cdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn final_model_at_upper_observation() {
        let m = recorded_final();
        let f1 = m.component_base.cdf(43.8);
        let f2 = m.component_alt.cdf(43.8);
        let expected = (1.0 - 0.05416) * f1 + 0.05416 * f2;
        assert!((m.cdf(43.8) - expected).abs() < 1e-15);
        assert!(m.cdf(43.8) > 0.0 && m.cdf(43.8) < 1.0);
    }

    #[test]
    fn pdf_weight_one_and_outside_support() {
        let m = MixtureModel::new(
            1.0,
            recorded_final().component_base,
            recorded_final().component_alt,
        )
        .unwrap();
        assert_eq!(m.pdf(43.5), m.component_alt.pdf(43.5));
        assert_eq!(recorded_final().pdf(60.0), 0.0);
    }

    #[test]
    fn make_mixture_weights() {
        let base = GevParams::gev(39.22, 2.182, -0.237).unwrap();
        let alt = GevParams::gev(43.78, 2.182, -0.237).unwrap();
        let m = make_mixture(&fit_of(base), 0.05416, alt).unwrap();
        assert_eq!(m.weight, 0.05416);
        assert_eq!(m.component_base, base);
        let m0 = make_mixture(&fit_of(base), 0.0, alt).unwrap();
        assert_eq!(m0.cdf(41.0), base.cdf(41.0));
        let m1 = make_mixture(&fit_of(base), 1.0, alt).unwrap();
        assert_eq!(m1.cdf(41.0), alt.cdf(41.0));
        assert!(make_mixture(&fit_of(base), 1.2, alt).is_err());
        assert!(make_mixture(&fit_of(base), -0.1, alt).is_err());
    }
}
