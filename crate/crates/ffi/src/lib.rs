//! C interface to the `vegasplus` integrator.
//!
//! Objects are opaque heap handles created by `*_new`/`vp_integrate*` and
//! released with the matching `*_free`. Every fallible call returns a
//! [`VpStatus`]; the message of the last failure on the calling thread is
//! available from [`vp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;

use vegasplus::integrands;
use vegasplus::{integrate, Integrand, IntegralOutcome, IntegratorConfig, VegasError};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownIntegrand = 3,
    CallbackFailed = 4,
    NonFinite = 5,
    IntegrationFailed = 6,
    Panic = 7,
}

/// Batched integrand: evaluate `n` points of `dims` coordinates, stored
/// row-major in `points`, into `out[0..n]`. Return 0 on success; any other
/// value aborts the integration with [`VpStatus::CallbackFailed`].
pub type VpBatchFn = Option<
    unsafe extern "C" fn(
        user_data: *mut c_void,
        points: *const f64,
        n: usize,
        dims: usize,
        out: *mut f64,
    ) -> c_int,
>;

/// Integration parameters.
pub struct VpConfig {
    inner: IntegratorConfig,
    thread_safe_callback: bool,
}

/// Outcome of a successful integration.
pub struct VpResult {
    inner: IntegralOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(status: VpStatus, msg: impl Into<String>) -> VpStatus {
    set_error(msg);
    status
}

fn status_of(e: &VegasError) -> VpStatus {
    match e {
        VegasError::InvalidConfig(_)
        | VegasError::InvalidDomain { .. }
        | VegasError::DimensionMismatch { .. } => VpStatus::InvalidArgument,
        VegasError::UnknownIntegrand { .. } => VpStatus::UnknownIntegrand,
        VegasError::IntegrandFailed { .. } => VpStatus::CallbackFailed,
        VegasError::NonFiniteIntegrand { .. } => VpStatus::NonFinite,
        _ => VpStatus::IntegrationFailed,
    }
}

fn guarded(body: impl FnOnce() -> VpStatus) -> VpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => {
            if s == VpStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(VpStatus::Panic, "internal panic"),
    }
}

struct CallbackIntegrand {
    f: unsafe extern "C" fn(*mut c_void, *const f64, usize, usize, *mut f64) -> c_int,
    user_data: *mut c_void,
    dims: usize,
    serial: Option<Mutex<()>>,
}

// The caller either declares the callback thread safe or every call is
// serialized through `serial`.
unsafe impl Sync for CallbackIntegrand {}

impl Integrand for CallbackIntegrand {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut out = [f64::NAN];
        match self.eval_batch(x, &mut out) {
            Ok(()) => out[0],
            Err(_) => f64::NAN,
        }
    }

    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<(), String> {
        let _guard = self
            .serial
            .as_ref()
            .map(|m| m.lock().unwrap_or_else(|p| p.into_inner()));
        // SAFETY: `points` holds `out.len() * dims` values and `out` is
        // writable for `out.len()` values, as the callback contract requires.
        let code = unsafe {
            (self.f)(
                self.user_data,
                points.as_ptr(),
                out.len(),
                self.dims,
                out.as_mut_ptr(),
            )
        };
        if code == 0 {
            Ok(())
        } else {
            Err(format!("callback returned {code}"))
        }
    }
}

/// New configuration with the default parameters. Never null.
#[no_mangle]
pub extern "C" fn vp_config_new() -> *mut VpConfig {
    Box::into_raw(Box::new(VpConfig {
        inner: IntegratorConfig::default(),
        thread_safe_callback: false,
    }))
}

/// # Safety
/// `cfg` is null or a handle from [`vp_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_config_free(cfg: *mut VpConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_config(cfg: *mut VpConfig, set: impl FnOnce(&mut VpConfig)) -> VpStatus {
    match cfg.as_mut() {
        None => fail(VpStatus::NullPointer, "config is null"),
        Some(c) => guarded(|| {
            set(c);
            VpStatus::Ok
        }),
    }
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_n_eval(cfg: *mut VpConfig, value: u64) -> VpStatus {
    with_config(cfg, |c| c.inner.n_eval = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_iterations(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.max_it = value)
}

/// Iterations `1..=skip` adapt but are left out of the result.
///
/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_skip(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.skip = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_alpha(cfg: *mut VpConfig, value: f64) -> VpStatus {
    with_config(cfg, |c| c.inner.alpha = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_beta(cfg: *mut VpConfig, value: f64) -> VpStatus {
    with_config(cfg, |c| c.inner.beta = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_n_intervals(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.n_intervals = value)
}

/// 0 restores the automatic choice.
///
/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_n_strat(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.n_strat_override = (value > 0).then_some(value))
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_batch_size(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.batch_size = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_workers(cfg: *mut VpConfig, value: usize) -> VpStatus {
    with_config(cfg, |c| c.inner.workers = value)
}

/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_seed(cfg: *mut VpConfig, value: u64) -> VpStatus {
    with_config(cfg, |c| c.inner.seed = value)
}

/// Nonzero allows concurrent callback invocations from worker threads;
/// by default calls are serialized.
///
/// # Safety
/// `cfg` is null or a live handle from [`vp_config_new`].
#[no_mangle]
pub unsafe extern "C" fn vp_config_set_thread_safe_callback(cfg: *mut VpConfig, value: c_int) -> VpStatus {
    with_config(cfg, |c| c.thread_safe_callback = value != 0)
}

fn finish(res: Result<IntegralOutcome, VegasError>, out: *mut *mut VpResult) -> VpStatus {
    match res {
        Ok(inner) => {
            // SAFETY: checked non-null by the caller.
            unsafe { *out = Box::into_raw(Box::new(VpResult { inner })) };
            VpStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Integrates a batched callback over the box `[lower[j], upper[j]]`.
///
/// On success `*out` receives a result handle to release with
/// [`vp_result_free`]; on failure `*out` is left untouched.
///
/// # Safety
/// `cfg` is a live config handle, `lower` and `upper` point to `dims`
/// values, `out` is writable, and `f` honours the [`VpBatchFn`] contract.
#[no_mangle]
pub unsafe extern "C" fn vp_integrate(
    cfg: *const VpConfig,
    f: VpBatchFn,
    user_data: *mut c_void,
    dims: usize,
    lower: *const f64,
    upper: *const f64,
    out: *mut *mut VpResult,
) -> VpStatus {
    let (Some(cfg), Some(f)) = (cfg.as_ref(), f) else {
        return fail(VpStatus::NullPointer, "config or callback is null");
    };
    if out.is_null() || lower.is_null() || upper.is_null() {
        return fail(VpStatus::NullPointer, "bounds or output pointer is null");
    }
    if dims == 0 {
        return fail(VpStatus::InvalidArgument, "dims must be at least 1");
    }
    let lo = std::slice::from_raw_parts(lower, dims);
    let hi = std::slice::from_raw_parts(upper, dims);
    let domain: Vec<(f64, f64)> = lo.iter().copied().zip(hi.iter().copied()).collect();
    let integrand = CallbackIntegrand {
        f,
        user_data,
        dims,
        serial: (!cfg.thread_safe_callback).then(|| Mutex::new(())),
    };
    guarded(|| finish(integrate(&integrand, &domain, &cfg.inner), out))
}

/// Integrates a built-in integrand by registry name at its default size.
///
/// # Safety
/// `cfg` is a live config handle, `name` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vp_integrate_builtin(
    cfg: *const VpConfig,
    name: *const c_char,
    out: *mut *mut VpResult,
) -> VpStatus {
    let Some(cfg) = cfg.as_ref() else {
        return fail(VpStatus::NullPointer, "config is null");
    };
    if name.is_null() || out.is_null() {
        return fail(VpStatus::NullPointer, "name or output pointer is null");
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail(VpStatus::InvalidArgument, "name is not UTF-8");
    };
    guarded(|| match integrands::lookup(name) {
        Ok(spec) => finish(
            integrate(spec.integrand.as_ref(), &spec.bounds, &cfg.inner),
            out,
        ),
        Err(e) => fail(status_of(&e), e.to_string()),
    })
}

/// # Safety
/// `res` is null or a handle from a successful integration, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_result_free(res: *mut VpResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Combined estimate; NaN for a null handle.
///
/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn vp_result_mean(res: *const VpResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.mean)
}

/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn vp_result_sigma(res: *const VpResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.sigma)
}

/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn vp_result_chi2_dof(res: *const VpResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.inner.chi2_dof)
}

/// # Safety
/// `res` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn vp_result_n_iterations(res: *const VpResult) -> usize {
    res.as_ref().map_or(0, |r| r.inner.iterations.len())
}

/// Per-iteration estimate and sigma; `included` is 1 if the iteration
/// enters the combined result. Output pointers may be null.
///
/// # Safety
/// `res` is a live result handle; non-null outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn vp_result_iteration(
    res: *const VpResult,
    index: usize,
    estimate: *mut f64,
    sigma: *mut f64,
    included: *mut c_int,
) -> VpStatus {
    let Some(r) = res.as_ref() else {
        return fail(VpStatus::NullPointer, "result is null");
    };
    let Some(it) = r.inner.iterations.get(index) else {
        return fail(
            VpStatus::InvalidArgument,
            format!("iteration {index} out of range"),
        );
    };
    if let Some(p) = estimate.as_mut() {
        *p = it.estimate;
    }
    if let Some(p) = sigma.as_mut() {
        *p = it.sigma();
    }
    if let Some(p) = included.as_mut() {
        *p = c_int::from(it.included);
    }
    VpStatus::Ok
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn vp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn vp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
