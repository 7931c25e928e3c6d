mod common;

use common::{correlated_sum_oracle, mean_var, rel, saturation_oracle};
use nhsense::noise::{
    offset_precision, sample_saturated_pixel, saturation_mean_var, CorrelatedNoiseSpec, CorrelatedSampler, NoiseModel,
    NoiseSpec, OffsetSpec, SaturationSpec, REGISTRY,
};
use nhsense::rng::stream;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

const LOG_GRID: [usize; 5] = [100, 316, 1000, 3162, 10000];

/// Mean, variance and their standard errors from raw draws.
struct Moments {
    mean: f64,
    mean_se: f64,
    var: f64,
    var_se: f64,
}

fn moments(xs: &[f64]) -> Moments {
    let (mean, var) = mean_var(xs);
    let n = xs.len() as f64;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    Moments {
        mean,
        mean_se: (var / n).sqrt(),
        var,
        var_se: ((m4 - var * var) / n).sqrt(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn single_sum_matches_double_sum(gamma in 0.05f64..4.0, c in 1e-4f64..10.0, sxi in 0.0f64..5.0) {
        let spec = CorrelatedNoiseSpec::new(gamma, c, sxi, 1.0);
        for n in 1..=64 {
            let want = if sxi == 0.0 { 0.0 } else { correlated_sum_oracle(n, sxi * sxi, c, gamma) };
            let got = spec.correlated_sum(n);
            prop_assert!((got - want).abs() <= 1e-12 * want.abs(), "n = {n}: {got} vs {want}");
        }
    }

    #[test]
    fn saturation_term_non_negative(k in 1e-3f64..1e3, n_sat in 1e-2f64..1e6, nbar in 0.0f64..1e6) {
        let m = saturation_mean_var(&SaturationSpec::new(k, n_sat, 0.0, nbar));
        prop_assert!(m.saturation_term >= 0.0 && m.saturation_term.is_finite());
    }
}

#[test]
fn beta_follows_two_minus_gamma_then_one() {
    for (gamma, want) in [(0.2, 1.8), (0.5, 1.5), (0.8, 1.2), (1.5, 1.0), (2.0, 1.0), (3.0, 1.0)] {
        let beta = CorrelatedNoiseSpec::new(gamma, 1.0, 2.0, 1.0).fit_beta(&LOG_GRID).unwrap();
        assert!((beta - want).abs() < 0.05, "gamma {gamma}: beta {beta}");
        let alpha = 1.0 - beta / 2.0;
        let alpha_want = if gamma < 1.0 { gamma / 2.0 } else { 0.5 };
        assert!((alpha - alpha_want).abs() < 0.025);
    }
}

#[test]
fn fit_beta_needs_two_decades() {
    let spec = CorrelatedNoiseSpec::new(0.5, 1.0, 2.0, 1.0);
    assert_eq!(spec.fit_beta(&[100, 200, 400, 800]).unwrap_err().kind(), "InsufficientGrid");
    assert_eq!(spec.fit_beta(&[100, 10000]).unwrap_err().kind(), "InsufficientGrid");
}

#[test]
fn perfectly_correlated_background_gives_beta_two() {
    let spec = CorrelatedNoiseSpec::perfectly_correlated(1.0, 1.0);
    assert!((spec.fit_beta(&LOG_GRID).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn non_positive_gamma_is_named() {
    let v = CorrelatedNoiseSpec::new(-0.1, 1.0, 2.0, 1.0).violations();
    assert!(v.iter().any(|e| e.to_string().contains("gamma")));
    assert!(!CorrelatedNoiseSpec::new(0.0, 1.0, 2.0, 1.0).violations().is_empty());
}

#[test]
fn sampled_estimator_is_unbiased_with_predicted_variance() {
    let spec = CorrelatedNoiseSpec::new(0.5, 0.01, 0.2, 1.0).with_shot_noise(0.1);
    let (n, p0, draws) = (128, 0.3, 4000);
    let sampler = CorrelatedSampler::new(&spec, n).unwrap();
    let est: Vec<f64> = (0..draws)
        .map(|r| sampler.estimate(&sampler.sample_shots(p0, &mut stream(11, &[r]))))
        .collect();
    let m = moments(&est);
    assert!((m.mean - p0).abs() < 3.0 * m.mean_se, "mean {} vs {p0}", m.mean);
    let want = spec.estimator_variance(p0, n).total();
    assert!((m.var - want).abs() < 3.0 * m.var_se, "var {} vs {want}", m.var);
}

#[test]
fn noiseless_shots_are_bernoulli() {
    let spec = CorrelatedNoiseSpec::new(0.5, 0.01, 0.0, 1.0);
    let sampler = CorrelatedSampler::new(&spec, 64).unwrap();
    let shots = sampler.sample_shots(0.25, &mut stream(3, &[]));
    assert!(shots.iter().all(|&x| x == 0.0 || x == 1.0));
    let est: Vec<f64> = (0..20000)
        .map(|r| sampler.estimate(&sampler.sample_shots(0.25, &mut stream(4, &[r]))))
        .collect();
    let m = moments(&est);
    assert!((m.mean - 0.25).abs() < 3.0 * m.mean_se);
    assert!((m.var - 0.25 * 0.75 / 64.0).abs() < 3.0 * m.var_se);
}

#[test]
fn covariance_with_wide_diagonal_factorizes() {
    let spec = CorrelatedNoiseSpec::new(0.2, 0.01, 0.2, 1.0);
    assert!(CorrelatedSampler::new(&spec, 1024).is_ok());
}

#[test]
fn covariance_with_narrow_diagonal_is_rejected() {
    // C(0) = c leaves the slowly decaying Toeplitz matrix indefinite.
    let spec = CorrelatedNoiseSpec::new(0.2, 0.01, 0.1, 1.0);
    assert_eq!(CorrelatedSampler::new(&spec, 2000).unwrap_err().kind(), "NotPositiveSemidefinite");
}

#[test]
fn saturation_closed_form_matches_truncated_poisson() {
    for (k, n_sat, sigma) in [(100.0, 1000.0, 1.0), (10.0, 5.0, 0.3), (1.0, 1e5, 0.0)] {
        for nbar in [0.0, 0.5, 10.0, 100.0, 800.0, 3000.0] {
            let m = saturation_mean_var(&SaturationSpec::new(k, n_sat, sigma, nbar));
            let (mean, var) = saturation_oracle(k, n_sat, sigma, nbar);
            assert!((m.mean_k - mean).abs() <= 1e-10 * mean.abs().max(1e-300), "mean at nbar {nbar}");
            assert!(rel(m.var_k, var) <= 1e-10 || (m.var_k - var).abs() < 1e-300, "var at nbar {nbar}: {} vs {var}", m.var_k);
        }
    }
}

#[test]
fn saturation_term_vanishes_in_both_limits() {
    let term = |n_sat: f64, nbar: f64| saturation_mean_var(&SaturationSpec::new(100.0, n_sat, 1.0, nbar)).saturation_term;
    assert_eq!(term(1000.0, 0.0), 0.0);
    // Linear in nbar near zero: k_max^2 q^2 nbar with q = exp(-1/N_sat) - 1.
    let q = (-1e-3f64).exp_m1();
    for nbar in [1e-6, 1e-9, 1e-12] {
        assert!(rel(term(1000.0, nbar), 1e4 * q * q * nbar) < 1e-5);
    }
    let mut last = f64::INFINITY;
    for n_sat in [1e3, 1e5, 1e7, 1e9] {
        let t = term(n_sat, 50.0);
        assert!(t < last);
        last = t;
    }
    assert!(last < 1e-12);
}

#[test]
fn pixel_sampler_obeys_conditional_variance_law() {
    for nbar in [10.0, 100.0, 800.0] {
        let spec = SaturationSpec::new(100.0, 1000.0, 1.0, nbar);
        let mut rng = stream(5, &[nbar as u64]);
        let xs: Vec<f64> = (0..200_000).map(|_| sample_saturated_pixel(&spec, &mut rng)).collect();
        let m = moments(&xs);
        // E_N[Var(k|N)] + Var_N(E[k|N]) = sigma^2 + Var_N(response).
        let (mean, var) = saturation_oracle(100.0, 1000.0, 1.0, nbar);
        assert!((m.mean - mean).abs() < 3.0 * m.mean_se, "nbar {nbar}: mean {} vs {mean}", m.mean);
        assert!((m.var - var).abs() < 3.0 * m.var_se, "nbar {nbar}: var {} vs {var}", m.var);
    }
}

#[test]
fn dark_pixel_is_gaussian_readout_noise() {
    let spec = SaturationSpec::new(100.0, 1000.0, 2.0, 0.0);
    let mut rng = stream(6, &[]);
    let xs: Vec<f64> = (0..100_000).map(|_| sample_saturated_pixel(&spec, &mut rng)).collect();
    let m = moments(&xs);
    assert!(m.mean.abs() < 3.0 * m.mean_se);
    assert!((m.var - 4.0).abs() < 3.0 * m.var_se);
}

#[test]
fn noiseless_pixel_is_deterministic_response() {
    let spec = SaturationSpec::new(100.0, 1e12, 0.0, 5.0);
    let mut rng = stream(7, &[]);
    for _ in 0..100 {
        let k = sample_saturated_pixel(&spec, &mut rng);
        let n = (k / 100.0 * 1e12).round();
        assert!((spec.pixel_response(n) - k).abs() < 1e-12);
    }
}

#[test]
fn offset_precision_matches_linearized_monte_carlo() {
    let spec = OffsetSpec {
        dp_dlambda: Some(0.8),
        dp_dzeta: 0.6,
        dp_dkappa: 0.4,
        delta_zeta: 0.01,
        delta_kappa: 0.05,
        delta_p: Some(0.3),
    };
    let n = 200u64;
    let mut rng = stream(8, &[]);
    let errs: Vec<f64> = (0..20_000)
        .map(|_| {
            let g = |r: &mut nhsense::rng::Stream| r.sample::<f64, _>(StandardNormal);
            let zeta = spec.dp_dzeta * spec.delta_zeta * g(&mut rng);
            let jitter: f64 = (0..n)
                .map(|_| spec.dp_dkappa * spec.delta_kappa * g(&mut rng) + 0.3 * g(&mut rng))
                .sum::<f64>()
                / n as f64;
            ((zeta + jitter) / 0.8).powi(2)
        })
        .collect();
    let (mse, var) = mean_var(&errs);
    let se = (var / errs.len() as f64).sqrt();
    let want = offset_precision(&spec, n).unwrap().dlambda_sq;
    assert!((mse - want).abs() < 3.0 * se, "{mse} vs {want}");
}

#[test]
fn offset_floor_persists_at_large_n() {
    let spec = OffsetSpec {
        dp_dlambda: Some(0.5),
        delta_p: Some(0.5),
        ..OffsetSpec::floor_only(1.0, 1e-3)
    };
    let floor = (1e-3f64 / 0.5).powi(2);
    let big = offset_precision(&spec, 1_000_000_000).unwrap().dlambda_sq;
    assert!(rel(big, floor) < 1e-3);
    assert!(offset_precision(&spec, 10).unwrap().dlambda_sq > 100.0 * floor);
}

#[test]
fn readout_bias_shifts_and_bounds_probability() {
    use nhsense::noise::{bias_value, biased_prob, ReadoutBias};
    let b = ReadoutBias { kappa0: 0.1, kappa1: 0.05 };
    for p in [0.0, 0.3, 1.0] {
        let q = biased_prob(p, &b);
        assert!((0.0..=1.0).contains(&q));
        assert!((q - p - bias_value(p, &b)).abs() < 1e-15);
    }
    assert!(!ReadoutBias { kappa0: 0.6, kappa1: 0.5 }.violations().is_empty());
}

#[test]
fn ratio_samplers_track_the_readout() {
    let suite = [
        NoiseSpec::None,
        NoiseSpec::Correlated(CorrelatedNoiseSpec::new(0.2, 1e-5, 0.05, 1.0)),
        NoiseSpec::Offset(OffsetSpec::floor_only(1.0, 2e-3)),
    ];
    for spec in suite {
        let sampler = spec.build().unwrap().nu_sampler(1000.0).unwrap();
        let mut out = vec![0.0; 100_000];
        sampler.fill(0.4, &mut out, &mut stream(9, &[]));
        let (m, v) = mean_var(&out);
        assert!((m - 0.4).abs() < 4.0 * (v / out.len() as f64).sqrt() + 1e-4, "{}: {m}", spec.name());
    }
}

#[test]
fn registry_names_every_model() {
    let names: Vec<&str> = REGISTRY.iter().map(|r| r.0).collect();
    for spec in ["none", "readout-bias", "correlated", "offset", "saturation"] {
        assert!(names.contains(&spec), "{spec}");
    }
    let toml = "model = \"saturation\"\nk_max = 100.0\nn_sat = 1000.0\nsigma_pix = 1.0\n";
    let spec: NoiseSpec = toml::from_str(toml).unwrap();
    let model: Box<dyn NoiseModel> = spec.build().unwrap();
    assert_eq!(model.name(), "saturation");
    assert!(toml::from_str::<NoiseSpec>("model = \"thermal\"").is_err());
}
