use std::ffi::{CStr, CString};
use std::ptr;

use collisionless_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(collisionless_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn armed_biped_round_trip() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(
            collisionless_model_armed_biped(1.0, &mut model),
            CollisionlessStatus::Ok
        );
        assert_eq!(collisionless_model_dimension(model), 3);

        let (mut lambda, mut lambda_prime) = ([0.0; 3], [0.0; 2]);
        let status = collisionless_model_spectra(model, lambda.as_mut_ptr(), 3, lambda_prime.as_mut_ptr(), 2);
        assert_eq!(status, CollisionlessStatus::Ok);
        assert!((lambda[0] + 5.85028).abs() < 1e-4);
        assert!((lambda_prime[1] - std::f64::consts::SQRT_2).abs() < 1e-4);

        let mut sol = ptr::null_mut();
        let status = collisionless_solve(
            model,
            4.0 * std::f64::consts::PI,
            2.0 * std::f64::consts::PI,
            0.05,
            &mut sol,
        );
        assert_eq!(status, CollisionlessStatus::Ok, "{}", last_error());
        let (mut tau, mut tau_prime) = (0.0, 0.0);
        assert_eq!(
            collisionless_solution_times(sol, &mut tau, &mut tau_prime),
            CollisionlessStatus::Ok
        );
        assert!((tau - 3.0795).abs() < 5e-4);
        assert!((tau_prime - 0.77785).abs() < 5e-5);
        assert!(collisionless_solution_rank_gap(sol) < 1e-6);

        let (mut q, mut qp) = ([0.0; 3], [0.0; 2]);
        assert_eq!(
            collisionless_solution_weights(sol, q.as_mut_ptr(), 3, qp.as_mut_ptr(), 2),
            CollisionlessStatus::Ok
        );
        assert!((q[2] / 1.1687 - 1.0).abs() < 1e-4);

        let (mut passed, mut energy) = (0, 1.0);
        assert_eq!(
            collisionless_solution_validate(model, sol, 500, &mut passed, &mut energy),
            CollisionlessStatus::Ok
        );
        assert_eq!(passed, 1);
        assert!(energy < 1e-9);

        collisionless_solution_free(sol);
        collisionless_model_free(model);
    }
}

#[test]
fn small_buffers_and_nulls_are_reported() {
    unsafe {
        let mut model = ptr::null_mut();
        collisionless_model_armed_biped(1.0, &mut model);
        let (mut lambda, mut lambda_prime) = ([0.0; 2], [0.0; 2]);
        let status = collisionless_model_spectra(model, lambda.as_mut_ptr(), 2, lambda_prime.as_mut_ptr(), 2);
        assert_eq!(status, CollisionlessStatus::BufferTooSmall);
        assert!(last_error().contains("lambda"));
        assert_eq!(
            collisionless_model_armed_biped(1.0, ptr::null_mut()),
            CollisionlessStatus::NullPointer
        );
        assert_eq!(collisionless_model_dimension(ptr::null()), 0);
        assert!(collisionless_solution_rank_gap(ptr::null()).is_nan());
        collisionless_model_free(model);
        collisionless_model_free(ptr::null_mut());
        collisionless_solution_free(ptr::null_mut());
    }
}

#[test]
fn json_errors_map_to_invalid_argument() {
    let bad = CString::new(r#"{"name":"x"}"#).unwrap();
    let asym = CString::new(
        r#"{"name":"x","n":2,"mass":[[1,0.5],[0,1]],"stiffness":[[1,0],[0,2]],
            "sigma":[1,1],"sigmaPrime":[1],"staticForce":1,"contactSign":1}"#,
    )
    .unwrap();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(
            collisionless_model_from_json(bad.as_ptr(), &mut model),
            CollisionlessStatus::InvalidArgument
        );
        assert_eq!(
            collisionless_model_from_json(asym.as_ptr(), &mut model),
            CollisionlessStatus::InvalidArgument
        );
        assert!(model.is_null());
    }
}

#[test]
fn windows_without_roots_report_no_root() {
    unsafe {
        let mut model = ptr::null_mut();
        collisionless_model_armed_biped(1.0, &mut model);
        let mut sol = ptr::null_mut();
        assert_eq!(
            collisionless_solve(model, 2.0, 0.5, 0.05, &mut sol),
            CollisionlessStatus::NoRoot
        );
        assert_eq!(
            collisionless_solve(model, -1.0, 0.5, 0.05, &mut sol),
            CollisionlessStatus::InvalidArgument
        );
        assert!(sol.is_null());
        collisionless_model_free(model);
    }
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(collisionless_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
