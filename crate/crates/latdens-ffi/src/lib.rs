//! C ABI for the latdens library.
//!
//! Conventions:
//! - every fallible call returns a [`LatdensStatus`] and reports results
//!   through out-pointers;
//! - estimators are opaque handles created by `latdens_fit` or
//!   `latdens_load` and released with `latdens_free`;
//! - on failure, `latdens_last_error` returns a message that stays valid
//!   until the next library call on the same thread;
//! - samples and points are row-major `count x dim` buffers of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use latdens::estimator::{self, DensityEstimator};
use latdens::kernel::{KorobovKernel, ProductWeights};
use latdens::lattice::cbc_construct;
use latdens::sampling::TestDensity;
use latdens::Error;

/// Outcome of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatdensStatus {
    /// The call succeeded.
    Ok = 0,
    /// An argument was rejected (bad dimension, unsupported alpha,
    /// non-positive lambda, malformed file contents, ...).
    InvalidArgument = 1,
    /// The call failed at runtime (I/O failure, singular system, panic).
    RuntimeFailure = 2,
    /// A required pointer was null.
    NullPointer = 3,
}

/// Opaque fitted-estimator handle.
pub struct LatdensEstimator {
    inner: DensityEstimator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: LatdensStatus, message: &str) -> LatdensStatus {
    set_error(message);
    status
}

fn fail_with(err: &Error) -> LatdensStatus {
    let status = if err.is_usage() {
        LatdensStatus::InvalidArgument
    } else {
        LatdensStatus::RuntimeFailure
    };
    fail(status, &err.to_string())
}

/// Runs `body` with panics converted to `RuntimeFailure`.
fn guarded<F>(body: F) -> LatdensStatus
where
    F: FnOnce() -> LatdensStatus,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == LatdensStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(LatdensStatus::RuntimeFailure, "internal panic"),
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, LatdensStatus> {
    if ptr.is_null() {
        return Err(fail(LatdensStatus::NullPointer, "path pointer is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(
            LatdensStatus::InvalidArgument,
            "path is not valid UTF-8",
        )),
    }
}

fn buffer_len(count: usize, dim: usize) -> Result<usize, LatdensStatus> {
    count
        .checked_mul(dim)
        .ok_or_else(|| fail(LatdensStatus::InvalidArgument, "count * dim overflows"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn latdens_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Empty after a
/// successful call. The pointer is invalidated by the next library call
/// on the same thread.
#[no_mangle]
pub extern "C" fn latdens_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds the generating vector for a rank-1 lattice with prime modulus `n`
/// in dimension `dim` and writes it to `z_out` (capacity `dim`). Weights are
/// the polynomial-decay preset matching `alpha`.
///
/// # Safety
///
/// `z_out` must be valid for writing `dim` values.
#[no_mangle]
pub unsafe extern "C" fn latdens_cbc(
    n: u64,
    dim: usize,
    alpha: u32,
    z_out: *mut u64,
) -> LatdensStatus {
    guarded(|| {
        if z_out.is_null() {
            return fail(LatdensStatus::NullPointer, "z_out is null");
        }
        let weights = match ProductWeights::polynomial_decay(dim, alpha as f64) {
            Ok(w) => w,
            Err(e) => return fail_with(&e),
        };
        match cbc_construct(n, dim, alpha, &weights) {
            Ok(rule) => {
                let z = rule.generating_vector();
                std::ptr::copy_nonoverlapping(z.as_ptr(), z_out, dim);
                LatdensStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Draws `count` points from the benchmark density in dimension `dim` into
/// the row-major buffer `out` (capacity `count * dim`).
///
/// # Safety
///
/// `out` must be valid for writing `count * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn latdens_sample(
    dim: usize,
    count: usize,
    seed: u64,
    out: *mut f64,
) -> LatdensStatus {
    guarded(|| {
        if out.is_null() {
            return fail(LatdensStatus::NullPointer, "out is null");
        }
        if let Err(status) = buffer_len(count, dim) {
            return status;
        }
        let density = match TestDensity::new(dim) {
            Ok(d) => d,
            Err(e) => return fail_with(&e),
        };
        let (points, _) = density.sample(count, seed);
        for (i, p) in points.iter().enumerate() {
            std::ptr::copy_nonoverlapping(p.as_ptr(), out.add(i * dim), dim);
        }
        LatdensStatus::Ok
    })
}

fn fit_impl(
    dim: usize,
    alpha: u32,
    n: u64,
    lambda: f64,
    sample: &[f64],
) -> Result<DensityEstimator, Error> {
    let weights = ProductWeights::polynomial_decay(dim, alpha as f64)?;
    let rule = cbc_construct(n, dim, alpha, &weights)?;
    let kernel = KorobovKernel::new(alpha as f64, weights)?;
    let rows: Vec<Vec<f64>> = sample.chunks_exact(dim).map(|c| c.to_vec()).collect();
    estimator::fit(&rule, &kernel, lambda, &rows)
}

/// Fits an estimator to `count` observations stored row-major in `sample`
/// (`count * dim` doubles). The lattice vector comes from the CBC search.
/// On success `*out` owns the new handle.
///
/// # Safety
///
/// `sample` must be valid for reading `count * dim` doubles and `out` for
/// writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn latdens_fit(
    dim: usize,
    alpha: u32,
    n: u64,
    lambda: f64,
    sample: *const f64,
    count: usize,
    out: *mut *mut LatdensEstimator,
) -> LatdensStatus {
    guarded(|| {
        if sample.is_null() || out.is_null() {
            return fail(LatdensStatus::NullPointer, "sample or out is null");
        }
        let len = match buffer_len(count, dim) {
            Ok(len) => len,
            Err(status) => return status,
        };
        let flat = std::slice::from_raw_parts(sample, len);
        match fit_impl(dim, alpha, n, lambda, flat) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LatdensEstimator { inner }));
                LatdensStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Loads an estimator from a text artifact written by `latdens_save` or the
/// CLI. On success `*out` owns the new handle.
///
/// # Safety
///
/// `path` must be NUL-terminated and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn latdens_load(
    path: *const c_char,
    out: *mut *mut LatdensEstimator,
) -> LatdensStatus {
    guarded(|| {
        if out.is_null() {
            return fail(LatdensStatus::NullPointer, "out is null");
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match DensityEstimator::load(&path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LatdensEstimator { inner }));
                LatdensStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Writes the estimator's text artifact to `path`.
///
/// # Safety
///
/// `est` must be a live handle from `latdens_fit` or `latdens_load`;
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn latdens_save(
    est: *const LatdensEstimator,
    path: *const c_char,
) -> LatdensStatus {
    guarded(|| {
        if est.is_null() {
            return fail(LatdensStatus::NullPointer, "estimator handle is null");
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match (*est).inner.save(&path) {
            Ok(()) => LatdensStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Evaluates the fitted density at one point of `dim` coordinates.
///
/// # Safety
///
/// `est` must be a live handle, `point` valid for reading `dim` doubles,
/// and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn latdens_evaluate(
    est: *const LatdensEstimator,
    point: *const f64,
    dim: usize,
    out: *mut f64,
) -> LatdensStatus {
    guarded(|| {
        if est.is_null() || point.is_null() || out.is_null() {
            return fail(
                LatdensStatus::NullPointer,
                "estimator, point, or out is null",
            );
        }
        let coords = std::slice::from_raw_parts(point, dim);
        match (*est).inner.evaluate(coords) {
            Ok(v) => {
                *out = v;
                LatdensStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Integral of the fitted density over the unit cube.
///
/// # Safety
///
/// `est` must be a live handle and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn latdens_integral(
    est: *const LatdensEstimator,
    out: *mut f64,
) -> LatdensStatus {
    guarded(|| {
        if est.is_null() || out.is_null() {
            return fail(LatdensStatus::NullPointer, "estimator or out is null");
        }
        *out = (*est).inner.integral();
        LatdensStatus::Ok
    })
}

/// Dimension of the fitted estimator, or 0 for a null handle.
///
/// # Safety
///
/// `est` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn latdens_dimension(est: *const LatdensEstimator) -> usize {
    if est.is_null() {
        return 0;
    }
    (*est).inner.rule().dimension()
}

/// Number of lattice points (coefficients) in the estimator, or 0 for a
/// null handle.
///
/// # Safety
///
/// `est` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn latdens_coefficient_count(est: *const LatdensEstimator) -> usize {
    if est.is_null() {
        return 0;
    }
    (*est).inner.coefficients().len()
}

/// Releases a handle. Passing null is a no-op.
///
/// # Safety
///
/// `est` must be null or a handle not already freed; it is invalid after
/// the call.
#[no_mangle]
pub unsafe extern "C" fn latdens_free(est: *mut LatdensEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}
