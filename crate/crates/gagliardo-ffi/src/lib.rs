//! C ABI over the `gagliardo` library.
//!
//! Configurations and parameter sets live behind opaque handles created and freed
//! here. Every fallible call returns a `GagStatus`; the message of the last failure
//! on the calling thread is available from `gag_last_error_message`. Panics are
//! caught at the boundary and reported as `GAG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gagliardo::domain::{Configuration, FractionalParams};
use gagliardo::energy::config::energy_config_tol;
use gagliardo::energy::mollified::mollified_energy;
use gagliardo::energy::zero::energy_zero;
use gagliardo::error::GagliardoError;
use gagliardo::limits::{limit_constant_s0, limit_constant_s1};
use gagliardo::optimizer::{gradient_descent, verify_equispaced, DescentOptions, Termination};
use gagliardo::quadrature::EnergyReport;
use gagliardo::variations::{gradient, hessian, mollified_gradient, mollified_hessian};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GagStatus {
    Ok = 0,
    /// a required pointer was null
    NullPointer = 1,
    /// invalid input: configuration, parameters, regime or buffer size
    Invalid = 2,
    /// numerical failure: divergent energy, cusp, stalled descent
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Opaque jump configuration.
pub struct GagConfiguration(Configuration);

/// Opaque (s, p, T, d) parameter set.
pub struct GagParams(FractionalParams);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GagEnergyReport {
    pub value: f64,
    pub tail_lower: f64,
    pub tail_upper: f64,
    pub abs_err_est: f64,
    pub nodes: u64,
}

impl From<EnergyReport> for GagEnergyReport {
    fn from(r: EnergyReport) -> Self {
        Self {
            value: r.value,
            tail_lower: r.tail_lower,
            tail_upper: r.tail_upper,
            abs_err_est: r.abs_err_est,
            nodes: r.nodes as u64,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GagDescentSummary {
    pub iters: u64,
    pub final_energy: f64,
    pub final_grad_inf: f64,
    /// 1 when the gradient tolerance was reached
    pub converged: i32,
    /// largest deviation of a circular gap from 1
    pub max_gap_deviation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &GagliardoError) -> GagStatus {
    match e {
        GagliardoError::Io(_) | GagliardoError::Json(_) => GagStatus::Io,
        e if e.is_numerical() => GagStatus::Numerical,
        _ => GagStatus::Invalid,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(GagliardoError),
}

impl From<GagliardoError> for Failure {
    fn from(e: GagliardoError) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, records any failure and maps it to a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> GagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GagStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GagStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            GagStatus::Invalid
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GagStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn out_slice<'a>(
    p: *mut f64,
    len: usize,
    need: usize,
    what: &'static str,
) -> Result<&'a mut [f64], Failure> {
    if len < need {
        return Err(Failure::Invalid(format!(
            "{what}: buffer holds {len} values, {need} needed"
        )));
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn gag_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Configuration from `n` points (n must equal the period T).
///
/// # Safety
/// `points` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_config_new(
    points: *const f64,
    n: usize,
    period: u32,
    out: *mut *mut GagConfiguration,
) -> GagStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if points.is_null() && n > 0 {
            return Err(Failure::Null("points"));
        }
        let pts = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(points, n)
        };
        *out = boxed(GagConfiguration(Configuration::new(pts, period)?));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_config_equispaced(
    period: u32,
    out: *mut *mut GagConfiguration,
) -> GagStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(GagConfiguration(Configuration::equispaced(period)?));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_config_random(
    period: u32,
    min_gap: f64,
    seed: u64,
    out: *mut *mut GagConfiguration,
) -> GagStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(GagConfiguration(Configuration::random(
            period, min_gap, seed,
        )?));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gag_config_free(config: *mut GagConfiguration) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Number of points, 0 for null.
///
/// # Safety
/// `config` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gag_config_len(config: *const GagConfiguration) -> usize {
    config.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the sorted points into `out` (capacity `len`).
///
/// # Safety
/// `config` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gag_config_points(
    config: *const GagConfiguration,
    out: *mut f64,
    len: usize,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        out_slice(out, len, c.len(), "out")?.copy_from_slice(c.points());
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_params_new(
    s: f64,
    p: f64,
    period: u32,
    d: u32,
    out: *mut *mut GagParams,
) -> GagStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(GagParams(FractionalParams::new(s, p, period, d)?));
        Ok(())
    })
}

/// # Safety
/// `params` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gag_params_free(params: *mut GagParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Energy of the configuration sawtooth (sub-critical s p < 1).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_energy(
    config: *const GagConfiguration,
    params: *const GagParams,
    tol: f64,
    out: *mut GagEnergyReport,
) -> GagStatus {
    guard(|| {
        let r = energy_config_tol(
            &deref(config, "config")?.0,
            &deref(params, "params")?.0,
            tol,
        )?;
        *out_ref(out, "out")? = r.into();
        Ok(())
    })
}

/// Limit energy at s = 0 (closed form).
///
/// # Safety
/// `config` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_energy_zero(
    config: *const GagConfiguration,
    p: f64,
    out: *mut f64,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Failure::Invalid(format!("p = {p} must be >= 1")));
        }
        *out_ref(out, "out")? = energy_zero(c, p);
        Ok(())
    })
}

/// Energy of the sawtooth mollified at radius `eps`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_mollified_energy(
    config: *const GagConfiguration,
    params: *const GagParams,
    eps: f64,
    tol: f64,
    out: *mut GagEnergyReport,
) -> GagStatus {
    guard(|| {
        let r = mollified_energy(
            &deref(config, "config")?.0,
            &deref(params, "params")?.0,
            eps,
            tol,
        )?;
        *out_ref(out, "out")? = r.into();
        Ok(())
    })
}

/// Gradient in the jump positions; `eps > 0` selects the mollified energy.
///
/// # Safety
/// Handles must be live; `out` must hold `len >= T` values.
#[no_mangle]
pub unsafe extern "C" fn gag_gradient(
    config: *const GagConfiguration,
    params: *const GagParams,
    eps: f64,
    out: *mut f64,
    len: usize,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        let prm = &deref(params, "params")?.0;
        let g = if eps > 0.0 {
            mollified_gradient(c, prm, eps)?
        } else {
            gradient(c, prm)?
        };
        out_slice(out, len, g.len(), "out")?.copy_from_slice(&g);
        Ok(())
    })
}

/// Hessian, row-major T x T; `eps > 0` selects the mollified energy.
///
/// # Safety
/// Handles must be live; `out` must hold `len >= T*T` values.
#[no_mangle]
pub unsafe extern "C" fn gag_hessian(
    config: *const GagConfiguration,
    params: *const GagParams,
    eps: f64,
    out: *mut f64,
    len: usize,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        let prm = &deref(params, "params")?.0;
        let rep = if eps > 0.0 {
            mollified_hessian(c, prm, eps)?
        } else {
            hessian(c, prm)?
        };
        let h = rep.hessian.expect("Hessian requested");
        let n = h.len();
        let dst = out_slice(out, len, n * n, "out")?;
        for (i, row) in h.iter().enumerate() {
            dst[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Projected descent from `config`. `eps > 0` runs the mollified energy with the
/// 4 eps floor. The final configuration is returned as a new handle.
///
/// # Safety
/// Handles must be live; `out_config` and `out_summary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_optimize(
    config: *const GagConfiguration,
    params: *const GagParams,
    eps: f64,
    grad_tol: f64,
    max_iters: u64,
    out_config: *mut *mut GagConfiguration,
    out_summary: *mut GagDescentSummary,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        let prm = &deref(params, "params")?.0;
        let out_config = out_ref(out_config, "out_config")?;
        let out_summary = out_ref(out_summary, "out_summary")?;
        let mut opts = if eps > 0.0 {
            DescentOptions::mollified(eps)
        } else {
            DescentOptions::default()
        };
        opts.grad_tol = grad_tol;
        opts.max_iters = usize::try_from(max_iters).unwrap_or(usize::MAX);
        let trace = gradient_descent(c, prm, &opts)?;
        *out_summary = GagDescentSummary {
            iters: trace.iters() as u64,
            final_energy: trace.final_energy(),
            final_grad_inf: trace.final_grad(),
            converged: (trace.termination == Termination::Converged) as i32,
            max_gap_deviation: verify_equispaced(trace.last(), 0.0).max_deviation,
        };
        *out_config = boxed(GagConfiguration(trace.last().clone()));
        Ok(())
    })
}

/// Writes 1 to `out` if every circular gap is within `tol` of 1, else 0.
///
/// # Safety
/// `config` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gag_verify_equispaced(
    config: *const GagConfiguration,
    tol: f64,
    out: *mut i32,
) -> GagStatus {
    guard(|| {
        let c = &deref(config, "config")?.0;
        *out_ref(out, "out")? = verify_equispaced(c, tol).equispaced as i32;
        Ok(())
    })
}

/// d omega_d / (p T^d).
#[no_mangle]
pub extern "C" fn gag_limit_constant_s0(d: u32, p: f64, period: u32) -> f64 {
    limit_constant_s0(d, p, period)
}

/// K_{d,p}.
#[no_mangle]
pub extern "C" fn gag_limit_constant_s1(d: u32, p: f64) -> f64 {
    limit_constant_s1(d, p)
}
