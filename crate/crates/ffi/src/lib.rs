//! C interface to `awgauss`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or by a
//! computation and released with the matching `*_free`. Every fallible call
//! returns an `AwStatus`; the message of the last failure on the calling
//! thread is available from `aw_last_error_message`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use awgauss::error::Error;
use awgauss::fsde::{run_scenario, Scenario};
use awgauss::gauss_aw::{continuous_aw_fbm, continuous_aw_multi, continuous_aw_unit, discrete_aw, CovMatrix, DistanceReport};
use awgauss::kernels::GaussianProcessSpec;
use awgauss::mart_approx::{mart_approx_distance, MartingaleApproxResult};
use awgauss::quadrature::{QuadratureGrid, Scheme};
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input rejected (domain, dimension, parse errors).
    InvalidInput = 2,
    /// The computation failed numerically.
    Numerical = 3,
    /// Output buffer too small; the required size was still reported.
    BufferTooSmall = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwScheme {
    Midpoint = 0,
    GaussLegendre = 1,
}

/// Symmetric positive semidefinite covariance matrix.
pub struct AwCovariance(CovMatrix);

/// Gaussian Volterra process description.
pub struct AwProcess(GaussianProcessSpec);

/// Quadrature resolution for the continuous formulas.
pub struct AwGrid(QuadratureGrid);

/// Result of a distance computation.
pub struct AwReport(DistanceReport);

/// Result of the martingale approximation.
pub struct AwMartingale(MartingaleApproxResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> AwStatus {
    let status = if e.is_validation() { AwStatus::InvalidInput } else { AwStatus::Numerical };
    set_error(e.to_string());
    status
}

fn guard<F: FnOnce() -> Result<(), AwStatus>>(f: F) -> AwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AwStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            AwStatus::Panic
        }
    }
}

fn null(what: &str) -> AwStatus {
    set_error(format!("{what} is null"));
    AwStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, AwStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), AwStatus> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_f64(out: *mut f64, v: f64) -> Result<(), AwStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, AwStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        AwStatus::InvalidInput
    })
}

/// Copies `text` plus a terminating NUL into `buf`. `*needed` always receives
/// the byte count including the NUL.
unsafe fn write_text(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), AwStatus> {
    let n = text.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        set_error(format!("buffer of {len} bytes, need {n}"));
        return Err(AwStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

unsafe fn write_array(src: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> Result<(), AwStatus> {
    if !needed.is_null() {
        *needed = src.len();
    }
    if len < src.len() || (buf.is_null() && !src.is_empty()) {
        set_error(format!("buffer of {len} values, need {}", src.len()));
        return Err(AwStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of this thread into `buf`.
#[no_mangle]
pub unsafe extern "C" fn aw_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> AwStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.to_string_lossy().into_owned()).unwrap_or_default());
    match write_text(&msg, buf, len, needed) {
        Ok(()) => AwStatus::Ok,
        Err(s) => s,
    }
}

/// Builds an `n x n` covariance from row-major `data`.
#[no_mangle]
pub unsafe extern "C" fn aw_covariance_new(data: *const f64, n: usize, out: *mut *mut AwCovariance) -> AwStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(n).ok_or_else(|| fail(Error::Dimension(format!("{n} x {n} overflows"))))?;
        let entries = std::slice::from_raw_parts(data, len);
        let cov = CovMatrix::new(DMatrix::from_row_slice(n, n, entries)).map_err(fail)?;
        put(out, AwCovariance(cov))
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_covariance_free(cov: *mut AwCovariance) {
    if !cov.is_null() {
        drop(Box::from_raw(cov));
    }
}

/// Parses a process description from JSON.
#[no_mangle]
pub unsafe extern "C" fn aw_process_from_json(json: *const c_char, out: *mut *mut AwProcess) -> AwStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let spec: GaussianProcessSpec = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        put(out, AwProcess(spec))
    })
}

/// Fractional Brownian motion with the Molchan-Golosov kernel.
#[no_mangle]
pub unsafe extern "C" fn aw_process_fbm(hurst: f64, horizon: f64, out: *mut *mut AwProcess) -> AwStatus {
    guard(|| {
        let spec = GaussianProcessSpec::fbm(hurst, horizon).map_err(fail)?;
        put(out, AwProcess(spec))
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_process_free(p: *mut AwProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn aw_grid_new(nodes: usize, scheme: AwScheme, out: *mut *mut AwGrid) -> AwStatus {
    guard(|| {
        let scheme = match scheme {
            AwScheme::Midpoint => Scheme::GradedMidpoint,
            AwScheme::GaussLegendre => Scheme::GradedGaussLegendre,
        };
        let grid = QuadratureGrid::with_nodes(nodes, nodes).with_scheme(scheme);
        grid.validate().map_err(fail)?;
        put(out, AwGrid(grid))
    })
}

/// Fails the continuous computations when the other scheme disagrees by more
/// than `tol` (relative). A negative value switches the check off.
#[no_mangle]
pub unsafe extern "C" fn aw_grid_set_crosscheck(grid: *mut AwGrid, tol: f64) -> AwStatus {
    guard(|| {
        let g = grid.as_mut().ok_or_else(|| null("grid"))?;
        g.0.crosscheck_tol = (tol >= 0.0).then_some(tol);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_grid_free(g: *mut AwGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn aw_discrete(a: *const AwCovariance, b: *const AwCovariance, out: *mut *mut AwReport) -> AwStatus {
    guard(|| {
        let (a, b) = (deref(a, "first covariance")?, deref(b, "second covariance")?);
        let r = discrete_aw(&a.0, &b.0).map_err(fail)?;
        put(out, AwReport(r))
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_fbm(h1: f64, h2: f64, horizon: f64, grid: *const AwGrid, out: *mut *mut AwReport) -> AwStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let r = continuous_aw_fbm(h1, h2, horizon, &g.0).map_err(fail)?;
        put(out, AwReport(r))
    })
}

/// Unit-multiplicity formula.
#[no_mangle]
pub unsafe extern "C" fn aw_unit(a: *const AwProcess, b: *const AwProcess, grid: *const AwGrid, out: *mut *mut AwReport) -> AwStatus {
    guard(|| {
        let (a, b, g) = (deref(a, "first process")?, deref(b, "second process")?, deref(grid, "grid")?);
        let r = continuous_aw_unit(&a.0, &b.0, &g.0).map_err(fail)?;
        put(out, AwReport(r))
    })
}

/// Higher-multiplicity formula.
#[no_mangle]
pub unsafe extern "C" fn aw_multi(a: *const AwProcess, b: *const AwProcess, grid: *const AwGrid, out: *mut *mut AwReport) -> AwStatus {
    guard(|| {
        let (a, b, g) = (deref(a, "first process")?, deref(b, "second process")?, deref(grid, "grid")?);
        let r = continuous_aw_multi(&a.0, &b.0, &g.0).map_err(fail)?;
        put(out, AwReport(r))
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_report_distance_squared(r: *const AwReport, out: *mut f64) -> AwStatus {
    guard(|| put_f64(out, deref(r, "report")?.0.distance_squared))
}

#[no_mangle]
pub unsafe extern "C" fn aw_report_trace_term(r: *const AwReport, out: *mut f64) -> AwStatus {
    guard(|| put_f64(out, deref(r, "report")?.0.trace_term))
}

#[no_mangle]
pub unsafe extern "C" fn aw_report_cross_term(r: *const AwReport, out: *mut f64) -> AwStatus {
    guard(|| put_f64(out, deref(r, "report")?.0.cross_term))
}

/// Correlations of the optimal coupling; `*needed` receives their count.
/// Empty for higher-multiplicity reports.
#[no_mangle]
pub unsafe extern "C" fn aw_report_correlation(r: *const AwReport, buf: *mut f64, len: usize, needed: *mut usize) -> AwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        write_array(r.0.optimal_correlation.as_deref().unwrap_or(&[]), buf, len, needed)
    })
}

/// Full report as JSON.
#[no_mangle]
pub unsafe extern "C" fn aw_report_to_json(r: *const AwReport, buf: *mut c_char, len: usize, needed: *mut usize) -> AwStatus {
    guard(|| {
        let r = deref(r, "report")?;
        let text = r.0.to_json().map_err(|e| fail(e.into()))?;
        write_text(&text, buf, len, needed)
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_report_free(r: *mut AwReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn aw_mart_approx(hurst: f64, horizon: f64, grid: *const AwGrid, out: *mut *mut AwMartingale) -> AwStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let r = mart_approx_distance(hurst, horizon, &g.0).map_err(fail)?;
        put(out, AwMartingale(r))
    })
}

#[no_mangle]
pub unsafe extern "C" fn aw_martingale_distance_squared(m: *const AwMartingale, out: *mut f64) -> AwStatus {
    guard(|| put_f64(out, deref(m, "martingale")?.0.distance_squared))
}

/// Optimal volatility interpolated at `r`.
#[no_mangle]
pub unsafe extern "C" fn aw_martingale_rho_at(m: *const AwMartingale, r: f64, out: *mut f64) -> AwStatus {
    guard(|| put_f64(out, deref(m, "martingale")?.0.rho_at(r)))
}

#[no_mangle]
pub unsafe extern "C" fn aw_martingale_free(m: *mut AwMartingale) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs an fSDE coupling scenario given as JSON and writes the cost estimates
/// as a JSON array.
#[no_mangle]
pub unsafe extern "C" fn aw_simulate_json(scenario: *const c_char, buf: *mut c_char, len: usize, needed: *mut usize) -> AwStatus {
    guard(|| {
        let sc = Scenario::from_json(read_str(scenario, "scenario")?).map_err(fail)?;
        let out = run_scenario(&sc).map_err(fail)?;
        let text = serde_json::to_string(&out.estimates).map_err(|e| fail(e.into()))?;
        write_text(&text, buf, len, needed)
    })
}
