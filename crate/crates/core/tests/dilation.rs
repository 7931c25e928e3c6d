mod common;

use nalgebra::DVector;
use nhsense::dilation::{build_dilation, evolve_dilated, initial_state, pure_state_qfi, qfi_point, qfi_scan, DilationConfig};
use nhsense::dynamics::{evolve_nh, Probe, SensorConfig};
use nhsense::linalg::{hermitian_propagator, C64};
use nhsense::Error;
use num_complex::Complex64 as C;
use proptest::prelude::*;

/// Real sensors whose full generator admits the static metric.
fn admissible() -> impl Strategy<Value = SensorConfig> {
    (0.1f64..1.0, 0.05f64..1.0, 0.2f64..2.0, -0.1f64..0.1, 0.1f64..3.0, any::<bool>()).prop_map(
        |(a, frac, e, lambda, t, z)| {
            let delta = frac * a.sqrt();
            let probe = if z { Probe::SigmaZ } else { Probe::SigmaX };
            SensorConfig::new(C::new(a, 0.0), C::new(delta, 0.0), C::new(e, 0.0), lambda, t)
                .unwrap()
                .with_probe(probe)
        },
    )
    .prop_filter("metric", |c| DilationConfig::new(*c).metric_ok())
}

/// `|v - proj_u v| / |v|`, the sine of the angle between two rays.
fn ray_residual(u: &[C64], v: &[C64]) -> f64 {
    let uu: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    let uv: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let k = uv / uu;
    let perp: f64 = u.iter().zip(v).map(|(a, b)| (b - k * a).norm_sqr()).sum();
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    (perp / vv).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn total_generator_is_hermitian(cfg in admissible()) {
        let d = build_dilation(&DilationConfig::new(cfg)).unwrap();
        prop_assert!((d.h_tot - d.h_tot.adjoint()).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn dilated_evolution_is_unitary(cfg in admissible(), t in 0.0f64..10.0) {
        let d = build_dilation(&DilationConfig::new(cfg)).unwrap();
        let psi = hermitian_propagator(&d.h_tot, t) * initial_state();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn post_selection_realizes_non_hermitian_state(cfg in admissible()) {
        let post = evolve_dilated(&DilationConfig::new(cfg)).unwrap().post_state;
        let nh = evolve_nh(&cfg).unwrap().state;
        prop_assert!(ray_residual(nh.as_slice(), post.as_slice()) < 1e-6);
    }

    #[test]
    fn sub_process_bound(cfg in admissible()) {
        let q = qfi_point(&cfg).unwrap();
        prop_assert!(q.naive_qfi >= 0.0 && q.dilated_qfi >= 0.0);
        prop_assert!(q.weighted_qfi <= q.dilated_qfi + 1e-8 * q.dilated_qfi.max(1.0));
    }

    #[test]
    fn qfi_ignores_global_phase(cfg in admissible(), t0 in -3.0f64..3.0, t1 in -50.0f64..50.0, t2 in -500.0f64..500.0) {
        let state = |l: f64| -> nhsense::Result<DVector<C64>> {
            let e = evolve_dilated(&DilationConfig::new(cfg.with_lambda(l)))?;
            Ok(DVector::from_column_slice(e.post_state.as_slice()))
        };
        let plain = pure_state_qfi(state, cfg.lambda).unwrap();
        let phased = pure_state_qfi(
            |l| {
                let phase = C::from_polar(1.0, t0 + t1 * l + t2 * l * l);
                Ok(state(l)? * phase)
            },
            cfg.lambda,
        )
        .unwrap();
        prop_assert!((plain - phased).abs() <= 1e-6 * plain.max(1e-12), "{plain} vs {phased}");
    }
}

#[test]
fn phase_family_qfi() {
    // |0> + exp(i lambda t)|1> over sqrt 2 has QFI t^2.
    for t in [0.5, 2.0] {
        let q = pure_state_qfi(
            |l| {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Ok(DVector::from_vec(vec![C::new(s, 0.0), C::from_polar(s, l * t)]))
            },
            0.3,
        )
        .unwrap();
        assert!(common::rel(q, t * t) < 1e-8);
    }
}

#[test]
fn trivial_metric_gives_unit_success() {
    let cfg = SensorConfig::at_quarter_period(1.0, 1.0, 0.5, 0.01).unwrap();
    let q = qfi_point(&cfg).unwrap();
    assert!((q.success_prob - 1.0).abs() < 1e-12);
    assert!(common::rel(q.weighted_qfi, q.naive_qfi * q.success_prob) < 1e-12);
    assert!(common::rel(q.weighted_qfi, q.dilated_qfi) < 1e-6);
}

#[test]
fn naive_qfi_grows_while_weighted_stays_bounded() {
    let base = SensorConfig::at_quarter_period(1.0, 0.5, 0.5, 0.01).unwrap().with_probe(Probe::SigmaZ);
    let rows = qfi_scan(&base, &[0.5, 0.3, 0.1, 0.05, 0.03]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].naive_qfi > w[0].naive_qfi);
    }
    for r in &rows {
        assert!(r.weighted_qfi <= r.dilated_qfi + 1e-8);
    }
    assert!(rows.last().unwrap().naive_qfi > 100.0 * rows[0].weighted_qfi);
}

#[test]
fn metric_violation_is_reported() {
    // a / delta^2 = 0.25 < 1.
    let cfg = SensorConfig::at_quarter_period(0.25, 1.0, 0.5, 0.01).unwrap();
    assert!(matches!(build_dilation(&DilationConfig::new(cfg)), Err(Error::MetricViolation(_))));
    let complex = SensorConfig::new(C::new(0.5, 0.1), C::new(0.2, 0.0), C::new(1.0, 0.0), 0.01, 1.0).unwrap();
    assert!(!DilationConfig::new(complex).metric_ok());
}
