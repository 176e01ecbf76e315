//! C interface to the collisionless trajectory solver.
//!
//! Models and solutions are opaque heap handles created and released through
//! this API. Every fallible call returns a [`CollisionlessStatus`]; the
//! message of the most recent failure on the calling thread is available from
//! [`collisionless_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use collisionless::critical::existence_gate;
use collisionless::impact::{
    find_roots, scan_contour, solution_at, GridSpec, ImpactEquations, ImpactSolution, NewtonOptions, RootFilter,
};
use collisionless::model::{build_armed_biped, model_from_json, ArmedBipedParams, ModelSpec};
use collisionless::spectral::{analyze, SpectralData};
use collisionless::trajectory::{synthesize, validate, Tolerances};
use collisionless::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionlessStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The top constrained eigenvalue is not positive.
    NoExistence = 3,
    /// No root of the impact equations converged in the search window.
    NoRoot = 4,
    /// Any other numerical failure.
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated model together with its spectral data.
pub struct CollisionlessModel {
    model: ModelSpec,
    spectral: SpectralData,
}

/// One converged root with its mode weights.
pub struct CollisionlessSolution {
    solution: ImpactSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(e: &Error) -> CollisionlessStatus {
    match e {
        Error::NoConvergence { .. } | Error::LeftQuadrant { .. } | Error::PoleCrossing { .. } => {
            CollisionlessStatus::NoRoot
        }
        Error::InvalidParameter { .. }
        | Error::Dimension(_)
        | Error::Json(_)
        | Error::BadSignature { .. }
        | Error::AsymmetricMass { .. }
        | Error::AsymmetricStiffness { .. }
        | Error::MassNotPositiveDefinite
        | Error::SingularStiffness(_)
        | Error::EmptyGrid(_) => CollisionlessStatus::InvalidArgument,
        _ => CollisionlessStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CollisionlessStatus, String)>) -> CollisionlessStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CollisionlessStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CollisionlessStatus::Panic
        }
    }
}

fn fail(e: Error) -> (CollisionlessStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (CollisionlessStatus, String) {
    (CollisionlessStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (CollisionlessStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

fn wrap_model(model: ModelSpec) -> Result<*mut CollisionlessModel, (CollisionlessStatus, String)> {
    let spectral = analyze(&model).map_err(fail)?;
    Ok(Box::into_raw(Box::new(CollisionlessModel { model, spectral })))
}

unsafe fn copy_out(
    values: &[f64],
    out: *mut f64,
    capacity: usize,
    name: &str,
) -> Result<(), (CollisionlessStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    if capacity < values.len() {
        return Err((
            CollisionlessStatus::BufferTooSmall,
            format!("`{name}` holds {capacity} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Message of the last failure on this thread. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn collisionless_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn collisionless_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the armed biped with leg angle `theta` and unit masses and lengths.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn collisionless_model_armed_biped(
    theta: f64,
    out: *mut *mut CollisionlessModel,
) -> CollisionlessStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = build_armed_biped(ArmedBipedParams {
            theta,
            ..ArmedBipedParams::default()
        })
        .map_err(fail)?;
        *out = wrap_model(model)?;
        Ok(())
    })
}

/// Parses a model from its JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn collisionless_model_from_json(
    json: *const c_char,
    out: *mut *mut CollisionlessModel,
) -> CollisionlessStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CollisionlessStatus::InvalidArgument, e.to_string()))?;
        *out = wrap_model(model_from_json(text).map_err(fail)?)?;
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn collisionless_model_free(model: *mut CollisionlessModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of degrees of freedom, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn collisionless_model_dimension(model: *const CollisionlessModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.n())
}

/// Copies `λ` (N values) and `λ'` (N−1 values) into caller buffers.
///
/// # Safety
/// The buffers must hold at least the stated capacities.
#[no_mangle]
pub unsafe extern "C" fn collisionless_model_spectra(
    model: *const CollisionlessModel,
    lambda: *mut f64,
    lambda_capacity: usize,
    lambda_prime: *mut f64,
    lambda_prime_capacity: usize,
) -> CollisionlessStatus {
    guard(|| {
        let m = deref(model, "model")?;
        copy_out(m.spectral.lambda.as_slice(), lambda, lambda_capacity, "lambda")?;
        copy_out(
            m.spectral.lambda_prime.as_slice(),
            lambda_prime,
            lambda_prime_capacity,
            "lambda_prime",
        )
    })
}

/// Scans `(0, o_max] × (0, o_prime_max]` with spacing `step`, refines every
/// seed and returns the leftmost root of the lowest row.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solve(
    model: *const CollisionlessModel,
    o_max: f64,
    o_prime_max: f64,
    step: f64,
    out: *mut *mut CollisionlessSolution,
) -> CollisionlessStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !existence_gate(&m.spectral.lambda_prime) {
            return Err((
                CollisionlessStatus::NoExistence,
                "the top constrained eigenvalue is not positive".into(),
            ));
        }
        let eq = ImpactEquations::new(m.spectral.spectrum_pair()).map_err(fail)?;
        let field = scan_contour(&eq, &GridSpec::positive(o_max, o_prime_max, step)).map_err(fail)?;
        let roots = find_roots(&eq, &field, &NewtonOptions::default(), &RootFilter::default());
        let times = *roots.lowest_row().ok_or_else(|| {
            (
                CollisionlessStatus::NoRoot,
                "no converged root in the search window".to_string(),
            )
        })?;
        let solution = solution_at(&m.spectral, &eq, times).map_err(fail)?;
        *out = Box::into_raw(Box::new(CollisionlessSolution { solution }));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solution_free(solution: *mut CollisionlessSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Half-durations of the unconstrained (`tau`) and constrained (`tau_prime`)
/// phases.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solution_times(
    solution: *const CollisionlessSolution,
    tau: *mut f64,
    tau_prime: *mut f64,
) -> CollisionlessStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        if tau.is_null() || tau_prime.is_null() {
            return Err(null("tau"));
        }
        *tau = s.solution.times.tau;
        *tau_prime = s.solution.times.tau_prime;
        Ok(())
    })
}

/// `σ_min/σ_max` of the impact system at the root.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solution_rank_gap(solution: *const CollisionlessSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.solution.rank_gap)
}

/// Copies the weights `q` (N values) and `q'` (N−1 values).
///
/// # Safety
/// The buffers must hold at least the stated capacities.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solution_weights(
    solution: *const CollisionlessSolution,
    q: *mut f64,
    q_capacity: usize,
    q_prime: *mut f64,
    q_prime_capacity: usize,
) -> CollisionlessStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        copy_out(s.solution.q.as_slice(), q, q_capacity, "q")?;
        copy_out(s.solution.q_prime.as_slice(), q_prime, q_prime_capacity, "q_prime")
    })
}

/// Samples the trajectory and runs the physical checks with default
/// tolerances. `passed` receives 1 or 0 and `energy_variation` the relative
/// energy drift.
///
/// # Safety
/// All pointers must be valid; `solution` must belong to `model`.
#[no_mangle]
pub unsafe extern "C" fn collisionless_solution_validate(
    model: *const CollisionlessModel,
    solution: *const CollisionlessSolution,
    samples_per_phase: usize,
    passed: *mut i32,
    energy_variation: *mut f64,
) -> CollisionlessStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(solution, "solution")?;
        if passed.is_null() || energy_variation.is_null() {
            return Err(null("passed"));
        }
        let traj = synthesize(&m.model, &s.solution, samples_per_phase).map_err(fail)?;
        let report = validate(&traj, &m.model, &Tolerances::default()).map_err(fail)?;
        *passed = i32::from(report.passed);
        *energy_variation = report.energy_variation;
        Ok(())
    })
}
