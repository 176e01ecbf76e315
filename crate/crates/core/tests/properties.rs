mod common;

use collisionless::cauchy::{cauchy_inverse_explicit, cauchy_matrix, eta};
use collisionless::impact::{g_eval, w_eval, ImpactEquations};
use collisionless::model::{build_armed_biped, check_interlacing, model_from_json, ArmedBipedParams, Symmetry};
use collisionless::spectral::analyze;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explicit_cauchy_inverse_is_an_inverse(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = common::random_interlaced(&mut rng, n + 1, 1e-2);
        let inv = cauchy_inverse_explicit(&x[..n], &y).unwrap();
        let c = cauchy_matrix(&DVector::from_column_slice(&x[..n]), &DVector::from_column_slice(&y)).unwrap();
        let err = (&inv * &c - DMatrix::identity(n, n)).amax();
        prop_assert!(err < 1e-8 * inv.amax() * c.amax(), "err {err}");
    }

    #[test]
    fn eta_is_positive_for_interlaced_spectra(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = common::random_interlaced(&mut rng, n, 1e-2);
        let e = eta(&DVector::from_vec(x), &DVector::from_vec(y)).unwrap();
        prop_assert!(e.iter().all(|v| *v > 0.0));
        prop_assert_eq!(e[n - 1], 1.0);
    }

    #[test]
    fn constrained_spectrum_interlaces(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, sd) = common::random_model(&mut rng, n);
        prop_assert!(check_interlacing(sd.lambda.as_slice(), sd.lambda_prime.as_slice()).is_ok());
        let gram = sd.mode_matrix.transpose() * &model.mass * &sd.mode_matrix * sd.norm_const;
        prop_assert!((gram - DMatrix::identity(n, n)).amax() < 1e-9);
        prop_assert!(sd.mode_matrix.row(n - 1).iter().all(|v| *v > 0.0));
    }

    #[test]
    fn model_json_round_trips(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, _) = common::random_model(&mut rng, n);
        let back = model_from_json(&model.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, model);
    }

    #[test]
    fn w_is_lambda_g_over_gdot(t in 0.05f64..3.0, lambda in -4.0f64..4.0, odd in any::<bool>()) {
        prop_assume!(lambda.abs() > 1e-3);
        let s = if odd { Symmetry::Odd } else { Symmetry::Even };
        let g = g_eval(t, lambda, s).unwrap();
        prop_assume!(g.gd.abs() > 1e-6);
        let w = w_eval(t, lambda, s).unwrap();
        prop_assert!((w - lambda * g.g / g.gd).abs() <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn determinant_signs_are_invariant_under_spectrum_scaling(s in 0.3f64..3.0, o in 0.2f64..10.0, op in 0.2f64..6.0) {
        let sd = analyze(&build_armed_biped(ArmedBipedParams::default()).unwrap()).unwrap();
        let base = sd.spectrum_pair();
        let mut scaled = base.clone();
        scaled.lambda *= s;
        scaled.lambda_prime *= s;
        let a = ImpactEquations::new(base).unwrap().determinants(o, op).unwrap();
        let b = ImpactEquations::new(scaled).unwrap().determinants(o, op).unwrap();
        for k in 0..2 {
            prop_assert_eq!(a[k].signum(), b[k].signum(), "{:?} vs {:?}", a, b);
        }
    }
}

#[test]
fn leg_angle_scales_weights_linearly() {
    let solve = |theta: f64| {
        let model = build_armed_biped(ArmedBipedParams {
            theta,
            ..ArmedBipedParams::default()
        })
        .unwrap();
        let sd = analyze(&model).unwrap();
        let eq = ImpactEquations::new(sd.spectrum_pair()).unwrap();
        let t = collisionless::impact::solve_impact(&eq, (3.8, 0.92), &Default::default()).unwrap();
        collisionless::impact::solution_at(&sd, &eq, t).unwrap()
    };
    let (a, b) = (solve(1.0), solve(0.25));
    assert_eq!(a.times, b.times);
    assert!((&b.q * 4.0 - &a.q).amax() < 1e-12 * a.q.amax());
    assert!((&b.q_prime * 4.0 - &a.q_prime).amax() < 1e-12 * a.q_prime.amax());
}
