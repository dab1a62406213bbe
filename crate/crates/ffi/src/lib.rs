//! C ABI over `evolve-transport`.
//!
//! Scenarios are opaque handles opened by name and released with
//! [`et_scenario_close`]. Every function returns an [`EtStatus`]; on failure
//! [`et_last_error`] describes the cause for the calling thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`et_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use evolve_transport::geometry;
use evolve_transport::lab::report;
use evolve_transport::lab::suite::{self, SuiteOptions};
use evolve_transport::lab::{self, verify, Scenario};
use evolve_transport::quadrature::QuadratureRule;
use evolve_transport::TransportError;

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownScenario = 3,
    UnknownField = 4,
    WindowExceeded = 5,
    /// Rank deficiency, ambiguous orientation, non-finite values and similar.
    NumericalFailure = 6,
    OutOfRange = 7,
    Panic = 99,
}

/// Opaque scenario handle.
pub struct EtScenario {
    inner: Scenario,
}

/// Both sides of the transport identity at one time. Numbers are NaN and
/// `failed` is 1 when a component of the evaluation failed.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EtTransportReport {
    pub t: f64,
    pub lhs: f64,
    pub rhs_bulk: f64,
    pub rhs_boundary: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: c_int,
    pub failed: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &TransportError) -> EtStatus {
    match e {
        TransportError::InvalidInput(_) | TransportError::Config(_) => EtStatus::InvalidArgument,
        TransportError::UnknownScenario(_) => EtStatus::UnknownScenario,
        TransportError::UnknownField { .. } => EtStatus::UnknownField,
        TransportError::WindowExceeded { .. } => EtStatus::WindowExceeded,
        _ => EtStatus::NumericalFailure,
    }
}

struct Failure(EtStatus, String);

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail(status: EtStatus, message: &str) -> Failure {
    Failure(status, message.to_string())
}

/// Runs `body` with panics caught and errors recorded for [`et_last_error`].
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> EtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            EtStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            EtStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(EtStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EtStatus::InvalidArgument, &format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(s: *const EtScenario) -> Result<&'a Scenario, Failure> {
    s.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| fail(EtStatus::NullPointer, "scenario handle is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(EtStatus::NullPointer, &format!("{what} is null")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(EtStatus::InvalidArgument, "string contains NUL"))
}

unsafe fn params<'a>(z: *const f64, z_len: usize) -> Result<&'a [f64], Failure> {
    if z_len == 0 {
        return Ok(&[]);
    }
    if z.is_null() {
        return Err(fail(EtStatus::NullPointer, "parameter array is null"));
    }
    Ok(std::slice::from_raw_parts(z, z_len))
}

fn check_chart(s: &Scenario, chart: usize, z: &[f64]) -> Result<(), Failure> {
    let charts = &s.domain.boundary.charts;
    if chart >= charts.len() {
        return Err(fail(
            EtStatus::OutOfRange,
            &format!("chart {chart} out of range (scenario has {})", charts.len()),
        ));
    }
    if z.len() != charts[chart].dim() {
        return Err(fail(
            EtStatus::InvalidArgument,
            &format!("expected {} boundary parameters, got {}", charts[chart].dim(), z.len()),
        ));
    }
    Ok(())
}

/// Message describing the most recent failure on this thread (empty after a
/// success). The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn et_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn et_string_free(s: *mut c_char) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(CString::from_raw(s))));
    }
}

/// Number of built-in scenarios.
#[no_mangle]
pub extern "C" fn et_scenario_count() -> usize {
    lab::SCENARIO_NAMES.len()
}

/// Name of the scenario at `index`, as a caller-owned string.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn et_scenario_name(index: usize, out: *mut *mut c_char) -> EtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let name = lab::SCENARIO_NAMES
            .get(index)
            .ok_or_else(|| fail(EtStatus::OutOfRange, &format!("scenario index {index} out of range")))?;
        *out = into_c_string(name.to_string())?;
        Ok(())
    })
}

/// Opens a scenario by name. Release the handle with [`et_scenario_close`].
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_scenario_open(name: *const c_char, out: *mut *mut EtScenario) -> EtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let inner = lab::scenario(c_str(name, "name")?)?;
        *out = Box::into_raw(Box::new(EtScenario { inner }));
        Ok(())
    })
}

/// Releases a scenario handle. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from [`et_scenario_open`] not yet closed.
#[no_mangle]
pub unsafe extern "C" fn et_scenario_close(s: *mut EtScenario) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(s))));
    }
}

/// Time window `[t_min, t_max]` of the scenario.
///
/// # Safety
/// `s` must be a live handle; `t_min` and `t_max` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_scenario_time_window(
    s: *const EtScenario,
    t_min: *mut f64,
    t_max: *mut f64,
) -> EtStatus {
    guard(|| {
        let s = handle(s)?;
        let (lo, hi) = (out_ref(t_min, "t_min")?, out_ref(t_max, "t_max")?);
        *lo = s.time_window.0;
        *hi = s.time_window.1;
        Ok(())
    })
}

/// Manifold dimension `m`, ambient dimension `d` and boundary chart count.
///
/// # Safety
/// `s` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_scenario_dims(
    s: *const EtScenario,
    manifold_dim: *mut usize,
    ambient_dim: *mut usize,
    boundary_charts: *mut usize,
) -> EtStatus {
    guard(|| {
        let s = handle(s)?;
        *out_ref(manifold_dim, "manifold_dim")? = s.domain.dim();
        *out_ref(ambient_dim, "ambient_dim")? = s.domain.ambient_dim();
        *out_ref(boundary_charts, "boundary_charts")? = s.domain.boundary.charts.len();
        Ok(())
    })
}

/// Normal velocity `V∂` at boundary parameter `z` (length `m - 1`) of
/// `chart` at time `t`.
///
/// # Safety
/// `s` must be a live handle, `z` must point to `z_len` doubles (or be null
/// when `z_len` is 0), and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_normal_velocity(
    s: *const EtScenario,
    t: f64,
    chart: usize,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
) -> EtStatus {
    guard(|| {
        let s = handle(s)?;
        let z = params(z, z_len)?;
        let out = out_ref(out, "out")?;
        check_chart(s, chart, z)?;
        *out = geometry::normal_velocity(&s.domain, t, chart, z)?;
        Ok(())
    })
}

/// Exterior unit normal at boundary parameter `z`, written to `out`, which
/// must hold the ambient dimension `d` doubles.
///
/// # Safety
/// As [`et_normal_velocity`], with `out` pointing to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn et_exterior_normal(
    s: *const EtScenario,
    t: f64,
    chart: usize,
    z: *const f64,
    z_len: usize,
    out: *mut f64,
    out_len: usize,
) -> EtStatus {
    guard(|| {
        let s = handle(s)?;
        let z = params(z, z_len)?;
        check_chart(s, chart, z)?;
        if out.is_null() {
            return Err(fail(EtStatus::NullPointer, "out is null"));
        }
        let d = s.domain.ambient_dim();
        if out_len < d {
            return Err(fail(
                EtStatus::InvalidArgument,
                &format!("output holds {out_len} values, normal has {d}"),
            ));
        }
        let n = geometry::exterior_unit_normal(&s.domain, t, chart, z)?;
        std::slice::from_raw_parts_mut(out, d).copy_from_slice(n.as_slice());
        Ok(())
    })
}

/// Both sides of the transport identity for `field` at time `t` with step
/// `h` and Gauss order `order`. A failed evaluation still fills `out`
/// (with `failed = 1`) and returns `ET_STATUS_OK`; its cause is available
/// from [`et_last_error`].
///
/// # Safety
/// `s` must be a live handle, `field` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn et_verify_transport(
    s: *const EtScenario,
    field: *const c_char,
    t: f64,
    h: f64,
    order: usize,
    out: *mut EtTransportReport,
) -> EtStatus {
    let mut cause = None;
    let status = guard(|| {
        let s = handle(s)?;
        let field = c_str(field, "field")?;
        let out = out_ref(out, "out")?;
        if order == 0 {
            return Err(fail(EtStatus::InvalidArgument, "order must be at least 1"));
        }
        let r = verify::verify_transport(s, field, t, h, &QuadratureRule::gauss(order))?;
        *out = EtTransportReport {
            t: r.t,
            lhs: r.lhs,
            rhs_bulk: r.rhs_bulk,
            rhs_boundary: r.rhs_boundary,
            rhs: r.rhs,
            abs_residual: r.abs_residual,
            rel_residual: r.rel_residual,
            tolerance: r.tolerance,
            passed: r.passed as c_int,
            failed: r.failure.is_some() as c_int,
        };
        cause = r.failure;
        Ok(())
    });
    if let (EtStatus::Ok, Some(c)) = (status, cause) {
        set_last_error(&c);
    }
    status
}

/// Runs the full verification suite and returns its JSON report as a
/// caller-owned string. `*passed` is set to 1 when every criterion passes.
///
/// # Safety
/// `out` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_run_all_json(
    order: usize,
    h: f64,
    samples: usize,
    seed: u64,
    monte_carlo: c_int,
    out: *mut *mut c_char,
    passed: *mut c_int,
) -> EtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let passed = out_ref(passed, "passed")?;
        if order == 0 || samples == 0 || !(h > 0.0 && h.is_finite()) {
            return Err(fail(
                EtStatus::InvalidArgument,
                "order and samples must be at least 1 and h positive",
            ));
        }
        let opts = SuiteOptions {
            order,
            h,
            samples,
            seed,
            monte_carlo: monte_carlo != 0,
            ..SuiteOptions::default()
        };
        let result = suite::run_suite(&opts)?;
        *passed = result.passed as c_int;
        *out = into_c_string(report::to_json(&result)?)?;
        Ok(())
    })
}
