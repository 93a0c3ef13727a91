mod common;

use common::integrate;
use evmix::{fit_mle, log_likelihood, sample, Family, FitConfig, GevParams, SeededRng};

fn canonical() -> GevParams {
    GevParams::gev(39.22, 2.182, -0.237).unwrap()
}

#[test]
fn recovers_canonical_parameters() {
    let truth = canonical();
    let data = sample(&truth, 5000, &mut SeededRng::new(77)).unwrap();
    let fit = fit_mle(&data, Family::Generalized, &FitConfig::default()).unwrap();
    assert!(fit.converged);
    assert!((fit.params.location - 39.22).abs() < 0.15);
    assert!((fit.params.scale - 2.182).abs() < 0.15);
    assert!((fit.params.shape + 0.237).abs() < 0.08);
    // optimality on the sample
    assert!(fit.log_lik >= log_likelihood(&truth, &data).unwrap());
    assert!(fit.trace.windows(2).all(|w| w[1] >= w[0]));
    assert!(fit.std_errors.is_some());
}

#[test]
fn refit_from_optimum_is_stationary() {
    let data = sample(&canonical(), 800, &mut SeededRng::new(4)).unwrap();
    let first = fit_mle(&data, Family::Generalized, &FitConfig::default()).unwrap();
    let cfg = FitConfig {
        start: Some(first.params),
        ..FitConfig::default()
    };
    let again = fit_mle(&data, Family::Generalized, &cfg).unwrap();
    assert!((again.params.location - first.params.location).abs() < 1e-6);
    assert!((again.params.scale - first.params.scale).abs() < 1e-6);
    assert!((again.params.shape - first.params.shape).abs() < 1e-6);
}

#[test]
fn gradient_vanishes_at_interior_optimum() {
    for seed in 0..5 {
        let data = sample(&canonical(), 300, &mut SeededRng::new(seed)).unwrap();
        let fit = fit_mle(&data, Family::Generalized, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        let theta = [fit.params.location, fit.params.scale, fit.params.shape];
        let ll = |v: [f64; 3]| log_likelihood(&GevParams::gev(v[0], v[1], v[2]).unwrap(), &data);
        for i in 0..3 {
            let h = 1e-6 * theta[i].abs().max(1.0);
            let mut up = theta;
            let mut dn = theta;
            up[i] += h;
            dn[i] -= h;
            let g = (ll(up).unwrap() - ll(dn).unwrap()) / (2.0 * h);
            assert!(
                g.abs() < 1e-4 * (1.0 + fit.log_lik.abs()),
                "seed {seed} component {i}: {g}"
            );
        }
    }
}

#[test]
fn family_sign_constraints_are_exact() {
    let data = sample(&canonical(), 200, &mut SeededRng::new(21)).unwrap();
    let cfg = FitConfig::default();
    let fits: Vec<_> = Family::ALL
        .iter()
        .map(|&f| fit_mle(&data, f, &cfg).unwrap())
        .collect();
    assert!(fits[0].params.shape >= -0.99 && fits[0].params.shape <= 0.99);
    assert_eq!(fits[1].params.shape, 0.0);
    assert!(fits[2].params.shape < 0.0);
    assert!(fits[3].params.shape > 0.0);
    for f in &fits[1..] {
        assert!(fits[0].log_lik >= f.log_lik - 1e-6);
    }
}

/// Per-observation Fisher information of Gumbel(0, 1) in (μ, σ), by
/// quadrature of score outer products; returns the (μ, μ) entry of its inverse.
fn gumbel_location_variance_factor() -> f64 {
    let pdf = |z: f64| (-z - (-z).exp()).exp();
    let s_mu = |z: f64| 1.0 - (-z).exp();
    let s_sigma = |z: f64| -1.0 + z - z * (-z).exp();
    let e = |g: &dyn Fn(f64) -> f64| integrate(&|z| g(z) * pdf(z), -8.0, 45.0, 1e-13);
    let i11 = e(&|z| s_mu(z) * s_mu(z));
    let i12 = e(&|z| s_mu(z) * s_sigma(z));
    let i22 = e(&|z| s_sigma(z) * s_sigma(z));
    i22 / (i11 * i22 - i12 * i12)
}

#[test]
fn gumbel_standard_error_matches_information() {
    let factor = gumbel_location_variance_factor();
    assert!((factor - 1.10867).abs() < 1e-4, "factor {factor}");
    let n = 10_000;
    let g = GevParams::gumbel(0.0, 1.0).unwrap();
    let data = sample(&g, n, &mut SeededRng::new(99)).unwrap();
    let fit = fit_mle(&data, Family::Gumbel, &FitConfig::default()).unwrap();
    let se = fit.std_errors.unwrap()[0];
    let expected = (factor / n as f64).sqrt();
    assert!((se / expected - 1.0).abs() < 0.2, "se {se} vs {expected}");
}

#[test]
fn non_convergence_is_reported_not_raised() {
    let data = sample(&canonical(), 200, &mut SeededRng::new(3)).unwrap();
    let cfg = FitConfig {
        max_iter: 1,
        ..FitConfig::default()
    };
    let fit = fit_mle(&data, Family::Generalized, &cfg).unwrap();
    assert!(!fit.converged);
    assert!(fit.iterations <= 1);
}
