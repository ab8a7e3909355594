use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use negpulse::mode;
use negpulse::quadrature::{self, KahanSum, QuadratureSpec};
use negpulse::spectral;
use negpulse::{Error, PotentialProfile, ProfileKind};

fn rational() -> impl Strategy<Value = PotentialProfile> {
    (0.2f64..3.0, 0.05f64..3.0)
        .prop_map(|(lambda0, excess)| PotentialProfile::rational(lambda0, lambda0 * (1.0 + excess)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_is_monotone_and_non_negative(profile in rational(), fractions in prop::collection::vec(0.0f64..1.5, 20)) {
        let end = profile.switch_off_duration().unwrap();
        let mut ts: Vec<f64> = fractions.iter().map(|f| f * end).collect();
        ts.sort_by(f64::total_cmp);
        let lambdas: Vec<f64> = ts.iter().map(|&t| profile.lambda_at(t)).collect();
        for pair in lambdas.windows(2) {
            prop_assert!(pair[1] <= pair[0]);
        }
        prop_assert!(lambdas.iter().all(|&l| l >= 0.0 && l <= profile.lambda0()));
    }

    #[test]
    fn accumulated_coupling_differentiates_to_lambda(profile in rational(), fractions in prop::collection::vec(0.02f64..0.98, 20)) {
        let end = profile.switch_off_duration().unwrap();
        let h = 1e-5 * end;
        for f in fractions {
            let t = f * end;
            let slope = (profile.accumulated_f(t + h).unwrap() - profile.accumulated_f(t - h).unwrap()) / (2.0 * h);
            prop_assert!((slope - profile.lambda_at(t)).abs() <= 1e-6 * (1.0 + profile.lambda0()));
        }
    }

    #[test]
    fn accumulated_coupling_matches_quadrature(profile in rational(), fractions in prop::collection::vec(0.0f64..1.0, 50)) {
        let end = profile.switch_off_duration().unwrap();
        let spec = QuadratureSpec::default().with_rel_tol(1e-13).with_abs_tol(1e-15);
        for f in fractions {
            let t = f * end;
            let integral = quadrature::integrate_1d(|s| profile.lambda_at(s), 0.0, t, &spec).unwrap();
            prop_assert!((integral.value - profile.accumulated_f(t).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn closed_form_satisfies_amplitude_equation(profile in rational(), omega in 0.05f64..30.0, f in 0.05f64..0.95) {
        let end = profile.switch_off_duration().unwrap();
        let t = f * end;
        let h = 1e-4 * end.min(1.0 / omega);
        let c = |s: f64| mode::c_rational(omega, &profile, s).unwrap();
        let dc = (c(t - 2.0 * h) - 8.0 * c(t - h) + 8.0 * c(t + h) - c(t + 2.0 * h)) / (12.0 * h);
        let io = Complex64::new(0.0, omega);
        let residual = dc + (profile.lambda_at(t) - io) * c(t) + io;
        prop_assert!(residual.norm() <= 1e-6 * (1.0 + omega), "residual {}", residual.norm());
    }

    #[test]
    fn density_depends_only_on_retarded_time(profile in rational(), x in 0.0f64..2.0, f in 0.0f64..1.0, shift in 0.0f64..3.0) {
        let end = profile.switch_off_duration().unwrap();
        let quad = QuadratureSpec::default();
        let t = f * end + x;
        let a = spectral::pulse_density(x, t, &profile, &quad).unwrap();
        let b = spectral::pulse_density(x + shift, t + shift, &profile, &quad).unwrap();
        let mirrored = spectral::pulse_density(-x, t, &profile, &quad).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * (1.0 + a.value.abs()));
        prop_assert_eq!(a.value, mirrored.value);
    }

    #[test]
    fn mode_function_is_even(profile in rational(), omega in 0.05f64..20.0, x in 0.0f64..3.0, t in 0.0f64..5.0) {
        let left = mode::mode_function(omega, -x, t, &profile, 1.0).unwrap();
        let right = mode::mode_function(omega, x, t, &profile, 1.0).unwrap();
        prop_assert!((left - right).norm() <= 1e-14);
    }

    #[test]
    fn radiated_density_balances_amplitude_decay(profile in rational(), omega in 0.05f64..30.0, f in 0.05f64..0.95) {
        let end = profile.switch_off_duration().unwrap();
        let t = f * end;
        let h = 1e-4 * end.min(1.0 / omega);
        let c2 = |s: f64| mode::c_rational(omega, &profile, s).unwrap().norm_sqr();
        let d_c2 = (c2(t - 2.0 * h) - 8.0 * c2(t - h) + 8.0 * c2(t + h) - c2(t + 2.0 * h)) / (12.0 * h);
        let flux = -profile.lambda_at(t) * d_c2 / (2.0 * PI * omega);
        let density = 2.0 * spectral::pulse_mode_density(omega, t, &profile).unwrap();
        prop_assert!((flux - density).abs() <= 1e-6 * (1.0 + density.abs()), "{flux} vs {density}");
    }

    #[test]
    fn quadrature_is_linear_and_additive(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0, split in 0.1f64..0.9) {
        let spec = QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-14);
        let f = |x: f64| (k * x).sin() * (-x).exp();
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let hi = 4.0;
        let int = |h: &dyn Fn(f64) -> f64, lo: f64, up: f64| quadrature::integrate_1d(h, lo, up, &spec).unwrap().value;
        let combined = int(&|x| a * f(x) + b * g(x), 0.0, hi);
        prop_assert!((combined - (a * int(&f, 0.0, hi) + b * int(&g, 0.0, hi))).abs() <= 1e-10);
        let mid = split * hi;
        prop_assert!((int(&f, 0.0, hi) - int(&f, 0.0, mid) - int(&f, mid, hi)).abs() <= 1e-11);
        prop_assert_eq!(int(&f, 0.0, hi), int(&f, 0.0, hi));
    }

    #[test]
    fn compensated_sum_is_order_insensitive(mut values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let forward: f64 = values.iter().copied().collect::<KahanSum>().total();
        values.reverse();
        let backward: f64 = values.iter().copied().collect::<KahanSum>().total();
        let scale: f64 = values.iter().map(|v| v.abs()).sum();
        prop_assert!((forward - backward).abs() <= 1e-15 * scale.max(1.0));
    }
}

#[test]
fn sampled_profile_tracks_rational_one() {
    let rational = PotentialProfile::rational(1.0, 2.0).unwrap();
    let end = rational.switch_off_duration().unwrap();
    let knots: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let t = end * i as f64 / 400.0;
            (t, if i == 400 { 0.0 } else { rational.lambda_at(t) })
        })
        .collect();
    let sampled = PotentialProfile::sampled(knots).unwrap();
    assert_eq!(sampled.kind(), ProfileKind::Sampled);
    assert!((sampled.switch_off_duration().unwrap() - end).abs() < 1e-12);
    for &w in &[0.3, 1.0, 4.0] {
        for &u in &[0.1, 0.25, 0.45, 0.8] {
            let a = mode::amplitude(w, &sampled, u).unwrap();
            let b = mode::amplitude(w, &rational, u).unwrap();
            assert!((a - b).norm() < 1e-5, "omega {w} u {u}: {a} vs {b}");
        }
    }
    let quad = QuadratureSpec::default().with_rel_tol(1e-6);
    let d_sampled = spectral::pulse_density(0.1, 0.4, &sampled, &quad).unwrap().value;
    let d_rational = spectral::pulse_density(0.1, 0.4, &rational, &quad).unwrap().value;
    assert!(
        (d_sampled - d_rational).abs() < 1e-4 * d_rational.abs(),
        "{d_sampled} vs {d_rational}"
    );
}

#[test]
fn invalid_profiles_are_rejected() {
    assert!(matches!(
        PotentialProfile::rational(1.0, 1.0),
        Err(Error::InvalidProfile(_))
    ));
    assert!(matches!(
        PotentialProfile::rational(-1.0, 2.0),
        Err(Error::InvalidProfile(_))
    ));
    assert!(matches!(
        PotentialProfile::sampled(vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.0)]),
        Err(Error::InvalidProfile(_))
    ));
    assert!(matches!(
        PotentialProfile::constant(1.0).unwrap().switch_off_duration(),
        Err(Error::NoSwitchOff)
    ));
}

#[test]
fn radiated_energy_is_negative_for_every_table_row() {
    let quad = QuadratureSpec::default();
    for &(f2, lambda0, _) in &negpulse::verify::TABLE {
        let report =
            spectral::radiated_energy(&PotentialProfile::rational(lambda0, f2).unwrap(), &quad).unwrap();
        assert!(report.e_radiated_half < 0.0);
        assert_eq!(report.e_radiated_total, 2.0 * report.e_radiated_half);
        assert_eq!(report.e_initial, lambda0 / (2.0 * PI));
    }
}
