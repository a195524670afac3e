//! C ABI over `expectation-atlas`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_from_json` functions and released with the matching `*_free`.
//! Every fallible call returns an [`EaStatus`]; on failure a message is
//! available from [`ea_last_error_message`] on the same thread until the
//! next failing call. Matrices are passed row-major as separate real and
//! imaginary arrays; a null imaginary array means all zeros.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use expectation_atlas::boundary::{support_value, trace_boundary};
use expectation_atlas::flow::{integrate_flow, Classification, FlowParams, FlowResult, Integrator};
use expectation_atlas::gibbs::{expectation_map, BetaVector, ExpectationVector};
use expectation_atlas::io::operator_set_from_str;
use expectation_atlas::linalg::{HermitianOperator, OperatorSet};
use expectation_atlas::{c64, AtlasError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EaStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Domain = 3,
    Numerical = 4,
    Precondition = 5,
    Unsupported = 6,
    Parse = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EaClassification {
    Interior = 0,
    Boundary = 1,
    Exterior = 2,
    Inconclusive = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EaIntegrator {
    Euler = 0,
    Rk4 = 1,
}

/// Flow settings. A non-positive `beta_cap` selects the default cap.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EaFlowParams {
    pub dt: f64,
    pub max_steps: usize,
    pub delta_tol: f64,
    pub beta_cap: f64,
    pub integrator: EaIntegrator,
}

/// Opaque validated operator set.
pub struct EaOperatorSet {
    inner: OperatorSet,
}

/// Opaque result of an inverse-flow run.
pub struct EaFlowResult {
    inner: FlowResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &AtlasError) -> EaStatus {
    match err {
        AtlasError::Validation(_) => EaStatus::Validation,
        AtlasError::Domain(_) => EaStatus::Domain,
        AtlasError::Numerical(_) => EaStatus::Numerical,
        AtlasError::Precondition(_) => EaStatus::Precondition,
        AtlasError::Unsupported(_) => EaStatus::Unsupported,
        AtlasError::Parse { .. } => EaStatus::Parse,
        AtlasError::Io(_) => EaStatus::Io,
    }
}

enum Failure {
    Atlas(AtlasError),
    Status(EaStatus, String),
}

impl From<AtlasError> for Failure {
    fn from(e: AtlasError) -> Self {
        Failure::Atlas(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(EaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EaStatus::Ok,
        Ok(Err(Failure::Atlas(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            EaStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn check_len(got: usize, want: usize, what: &str) -> Result<(), Failure> {
    if got != want {
        return Err(Failure::Atlas(AtlasError::Domain(format!("{what} has length {got}, expected {want}"))));
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ea_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ea_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Defaults: Euler, `dt = 0.4`, 2000 steps, `delta_tol = 1e-16`, automatic cap.
#[no_mangle]
pub extern "C" fn ea_flow_params_default() -> EaFlowParams {
    let d = FlowParams::default();
    EaFlowParams { dt: d.dt, max_steps: d.max_steps, delta_tol: d.delta_tol, beta_cap: 0.0, integrator: EaIntegrator::Euler }
}

/// Builds a set of `count` operators of size `dim` x `dim` from row-major
/// arrays of length `count * dim * dim`; `im` may be null.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `count * dim * dim` doubles;
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn ea_operator_set_new(
    dim: usize,
    count: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut EaOperatorSet,
) -> EaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let total = count
            .checked_mul(dim)
            .and_then(|v| v.checked_mul(dim))
            .ok_or_else(|| Failure::Atlas(AtlasError::Domain("dim * dim * count overflows".into())))?;
        if total == 0 {
            return Err(Failure::Atlas(AtlasError::Validation("operator set is empty".into())));
        }
        let re = slice(re, total, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, total, "im")?) };
        let ops = (0..count)
            .map(|k| {
                HermitianOperator::from_fn(dim, |i, j| {
                    let idx = k * dim * dim + i * dim + j;
                    c64::new(re[idx], im.map_or(0.0, |v| v[idx]))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let set = OperatorSet::new(ops)?;
        *out = Box::into_raw(Box::new(EaOperatorSet { inner: set }));
        Ok(())
    })
}

/// Parses an operator-set JSON document (the CLI input format).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea_operator_set_from_json(json: *const c_char, out: *mut *mut EaOperatorSet) -> EaStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Status(EaStatus::Parse, format!("input is not UTF-8: {e}")))?;
        let (set, _) = operator_set_from_str(text, false)?;
        *out = Box::into_raw(Box::new(EaOperatorSet { inner: set }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea_operator_set_free(set: *mut EaOperatorSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of operators, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea_operator_set_len(set: *const EaOperatorSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea_operator_set_dim(set: *const EaOperatorSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.dim())
}

/// Writes `E(beta)` into `out` (length `n`, equal to the set size).
///
/// # Safety
/// `beta` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ea_expectation_map(set: *const EaOperatorSet, beta: *const f64, n: usize, out: *mut f64) -> EaStatus {
    guard(|| {
        let set = &handle(set, "set")?.inner;
        check_len(n, set.len(), "beta")?;
        let beta = BetaVector::new(slice(beta, n, "beta")?.to_vec())?;
        let e = expectation_map(&beta, set)?;
        slice_mut(out, n, "out")?.copy_from_slice(e.as_slice());
        Ok(())
    })
}

/// Smallest eigenvalue of `sum_i dir_i O_i` for the normalized direction.
///
/// # Safety
/// `dir` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea_support_value(set: *const EaOperatorSet, dir: *const f64, n: usize, out: *mut f64) -> EaStatus {
    guard(|| {
        let set = &handle(set, "set")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = support_value(slice(dir, n, "dir")?, set)?;
        Ok(())
    })
}

/// Traces the boundary of a two-operator set. Writes up to `capacity`
/// points as `(x, y)` pairs into `xy` (length `2 * capacity`) and the number
/// of points into `written`. `2 * num_dirs` points always suffice.
///
/// # Safety
/// `xy` must point to `2 * capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea_trace_boundary(
    set: *const EaOperatorSet,
    num_dirs: usize,
    xy: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> EaStatus {
    guard(|| {
        let set = &handle(set, "set")?.inner;
        if written.is_null() {
            return Err(null("written"));
        }
        let points = trace_boundary(set, num_dirs)?;
        *written = points.len();
        if points.len() > capacity {
            return Err(Failure::Status(
                EaStatus::BufferTooSmall,
                format!("{} points do not fit in capacity {capacity}", points.len()),
            ));
        }
        let buf = slice_mut(xy, 2 * points.len(), "xy")?;
        for (k, p) in points.iter().enumerate() {
            buf[2 * k] = p.point[0];
            buf[2 * k + 1] = p.point[1];
        }
        Ok(())
    })
}

/// Runs the inverse flow from `beta = 0` toward `target`. `params` may be null.
///
/// # Safety
/// `target` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ea_solve(
    set: *const EaOperatorSet,
    target: *const f64,
    n: usize,
    params: *const EaFlowParams,
    out: *mut *mut EaFlowResult,
) -> EaStatus {
    guard(|| {
        let set = &handle(set, "set")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        check_len(n, set.len(), "target")?;
        let p = params.as_ref().copied().unwrap_or_else(|| ea_flow_params_default());
        let params = FlowParams {
            dt: p.dt,
            max_steps: p.max_steps,
            delta_tol: p.delta_tol,
            beta_cap: (p.beta_cap > 0.0).then_some(p.beta_cap),
            integrator: match p.integrator {
                EaIntegrator::Euler => Integrator::Euler,
                EaIntegrator::Rk4 => Integrator::Rk4,
            },
            ..FlowParams::default()
        };
        let target = ExpectationVector::new(slice(target, n, "target")?.to_vec())?;
        let result = integrate_flow(set, &target, &BetaVector::zeros(n), &params)?;
        *out = Box::into_raw(Box::new(EaFlowResult { inner: result }));
        Ok(())
    })
}

/// Releases a flow result; null is ignored.
///
/// # Safety
/// `result` must come from [`ea_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_free(result: *mut EaFlowResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Verdict of a flow run; a null handle reads as inconclusive.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_classification(result: *const EaFlowResult) -> EaClassification {
    match result.as_ref().map(|r| r.inner.classification) {
        Some(Classification::Interior) => EaClassification::Interior,
        Some(Classification::Boundary) => EaClassification::Boundary,
        Some(Classification::Exterior) => EaClassification::Exterior,
        _ => EaClassification::Inconclusive,
    }
}

/// Final `|E - e|^2 / 2`, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_residual(result: *const EaFlowResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.residual)
}

/// Accepted steps, excluding the initial point.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_steps(result: *const EaFlowResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.trajectory.len() - 1)
}

/// Copies the final `beta` (length `n`).
///
/// # Safety
/// `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_beta(result: *const EaFlowResult, out: *mut f64, n: usize) -> EaStatus {
    guard(|| {
        let r = &handle(result, "result")?.inner;
        check_len(n, r.beta_final.len(), "out")?;
        slice_mut(out, n, "out")?.copy_from_slice(r.beta_final.as_slice());
        Ok(())
    })
}

/// Copies the Gibbs state (row-major, `dim * dim` entries each) for an
/// interior verdict; other verdicts return `EA_STATUS_PRECONDITION`.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ea_flow_result_state(result: *const EaFlowResult, re: *mut f64, im: *mut f64, dim: usize) -> EaStatus {
    guard(|| {
        let r = &handle(result, "result")?.inner;
        let state = r.state.as_ref().ok_or_else(|| {
            Failure::Atlas(AtlasError::Precondition(format!("no state for a {} target", r.classification.as_str())))
        })?;
        check_len(dim, state.dim(), "dim")?;
        let re = slice_mut(re, dim * dim, "re")?;
        let im = slice_mut(im, dim * dim, "im")?;
        for i in 0..dim {
            for j in 0..dim {
                let z = state.entry(i, j);
                re[i * dim + j] = z.re;
                im[i * dim + j] = z.im;
            }
        }
        Ok(())
    })
}
