//! C ABI for the differential-network estimator: opaque handles, integer
//! error codes, and a thread-local error message, so the closed-form fit is
//! callable from C or any FFI-capable runtime.
//!
//! Conventions:
//! * Every fallible function returns an error code; `DIFFEE_OK` is zero.
//! * Output parameters are written only on success.
//! * `diffee_last_error_message` describes the most recent failure on the
//!   calling thread; the pointer stays valid until that thread's next
//!   failing call.
//! * Each handle is released exactly once by its matching `_free` function;
//!   freeing a null pointer is a no-op.
//! * Matrix buffers are dense row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use diffee::estimator::{self, DiffEstimate, HyperParams};
use diffee::eval;
use diffee::linalg::{sample_covariance, TvPolicy};
use diffee::matrix::{Condition, SampleMatrix};
use diffee::Error;
use nalgebra::DMatrix;

/// Success.
pub const DIFFEE_OK: i32 = 0;
/// A caller-supplied value violates a documented precondition.
pub const DIFFEE_ERR_INVALID_INPUT: i32 = 1;
/// Two arguments that must agree in shape do not.
pub const DIFFEE_ERR_DIMENSION_MISMATCH: i32 = 2;
/// A thresholded covariance failed the positive-definiteness guard.
pub const DIFFEE_ERR_NOT_INVERTIBLE: i32 = 3;
/// No value in the threshold grid produced invertible inputs.
pub const DIFFEE_ERR_SELECTION_FAILED: i32 = 4;
/// File input or output failed (unused by this surface, reserved).
pub const DIFFEE_ERR_IO: i32 = 5;
/// A required pointer argument was null.
pub const DIFFEE_ERR_NULL_ARGUMENT: i32 = 6;
/// An internal invariant failed; the library state is still consistent.
pub const DIFFEE_ERR_PANIC: i32 = 7;

/// Length of the benchmark sparsity grid written by `diffee_lambda_grid`.
pub const DIFFEE_LAMBDA_GRID_LEN: usize = 30;

/// Opaque observation block: n samples of p variables for one condition.
pub struct DiffeeSampleMatrix {
    inner: SampleMatrix,
}

/// Opaque fitted estimate: the sparse differential matrix plus the
/// hyperparameters it was fitted at.
pub struct DiffeeEstimate {
    inner: DiffEstimate,
}

/// Opaque list of estimates, one per lambda of a path fit.
pub struct DiffeeEstimateList {
    items: Vec<DiffeeEstimate>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(code: i32, message: &str) -> i32 {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
    code
}

fn fail_error(err: &Error) -> i32 {
    let code = match err {
        Error::InvalidInput(_) => DIFFEE_ERR_INVALID_INPUT,
        Error::DimensionMismatch(_) => DIFFEE_ERR_DIMENSION_MISMATCH,
        Error::NotInvertible { .. } => DIFFEE_ERR_NOT_INVERTIBLE,
        Error::SelectionFailed { .. } => DIFFEE_ERR_SELECTION_FAILED,
        Error::Read { .. } | Error::Write { .. } | Error::MalformedMatrix { .. } => DIFFEE_ERR_IO,
    };
    fail(code, &err.to_string())
}

/// Runs an FFI body with a panic barrier so unwinding never crosses the ABI.
fn guarded(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => fail(DIFFEE_ERR_PANIC, "internal panic; state is unchanged"),
    }
}

/// Explanation of the most recent failure on this thread, NUL-terminated.
/// Empty until a call fails. Valid until the next failing call here.
#[no_mangle]
pub extern "C" fn diffee_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn borrow<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, i32> {
    ptr.as_ref()
        .ok_or_else(|| fail(DIFFEE_ERR_NULL_ARGUMENT, &format!("{name} must not be null")))
}

/// Builds an observation block from a dense row-major buffer of
/// `n_samples * p` doubles. `condition` is `'c'` or `'d'`. On success writes
/// a handle to `out`; release it with `diffee_sample_matrix_free`.
///
/// # Safety
/// `data` must point to `n_samples * p` readable doubles and `out` to a
/// writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn diffee_sample_matrix_new(
    data: *const f64,
    n_samples: usize,
    p: usize,
    condition: c_char,
    out: *mut *mut DiffeeSampleMatrix,
) -> i32 {
    guarded(|| {
        if data.is_null() || out.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "data and out must not be null");
        }
        let condition = match condition as u8 {
            b'c' => Condition::C,
            b'd' => Condition::D,
            other => {
                return fail(
                    DIFFEE_ERR_INVALID_INPUT,
                    &format!("condition must be 'c' or 'd', got byte {other}"),
                )
            }
        };
        let Some(len) = n_samples.checked_mul(p) else {
            return fail(DIFFEE_ERR_INVALID_INPUT, "n_samples * p overflows");
        };
        if len == 0 {
            return fail(DIFFEE_ERR_INVALID_INPUT, "n_samples and p must be positive");
        }
        let slice = std::slice::from_raw_parts(data, len);
        match SampleMatrix::new(DMatrix::from_row_slice(n_samples, p, slice), condition) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(DiffeeSampleMatrix { inner: m }));
                DIFFEE_OK
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Releases a sample matrix handle.
///
/// # Safety
/// `m` must be null or a pointer returned by `diffee_sample_matrix_new` that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn diffee_sample_matrix_free(m: *mut DiffeeSampleMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Picks the smallest covariance threshold in the standard grid
/// (0.001 ..= 1.000 by 0.001) whose thresholded sample covariances are both
/// safely invertible, and writes it to `out_v`.
///
/// # Safety
/// `xc` and `xd` must be live sample-matrix handles and `out_v` writable.
#[no_mangle]
pub unsafe extern "C" fn diffee_select_v(
    xc: *const DiffeeSampleMatrix,
    xd: *const DiffeeSampleMatrix,
    out_v: *mut f64,
) -> i32 {
    guarded(|| {
        let (xc, xd) = match (borrow(xc, "xc"), borrow(xd, "xd")) {
            (Ok(c), Ok(d)) => (c, d),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        if out_v.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "out_v must not be null");
        }
        let run = || -> Result<f64, Error> {
            let sigma_c = sample_covariance(&xc.inner)?;
            let sigma_d = sample_covariance(&xd.inner)?;
            estimator::select_v(&sigma_c, &sigma_d, &estimator::v_grid(), TvPolicy::default())
        };
        match run() {
            Ok(v) => {
                *out_v = v;
                DIFFEE_OK
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Writes the 30-point benchmark sparsity grid for the given dimensions into
/// `out`, which must hold `DIFFEE_LAMBDA_GRID_LEN` doubles.
///
/// # Safety
/// `out` must point to `DIFFEE_LAMBDA_GRID_LEN` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn diffee_lambda_grid(
    p: usize,
    n_c: usize,
    n_d: usize,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "out must not be null");
        }
        match eval::lambda_grid(p, n_c, n_d) {
            Ok(grid) => {
                std::slice::from_raw_parts_mut(out, DIFFEE_LAMBDA_GRID_LEN)
                    .copy_from_slice(&grid);
                DIFFEE_OK
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Fits the sparse differential estimate at a single lambda. On success
/// writes a handle to `out`; release it with `diffee_estimate_free`.
///
/// # Safety
/// `xc` and `xd` must be live sample-matrix handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diffee_fit(
    xc: *const DiffeeSampleMatrix,
    xd: *const DiffeeSampleMatrix,
    v: f64,
    lambda: f64,
    out: *mut *mut DiffeeEstimate,
) -> i32 {
    guarded(|| {
        let (xc, xd) = match (borrow(xc, "xc"), borrow(xd, "xd")) {
            (Ok(c), Ok(d)) => (c, d),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        if out.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "out must not be null");
        }
        let run = || -> Result<DiffEstimate, Error> {
            estimator::diffee_fit(&xc.inner, &xd.inner, &HyperParams::single(v, lambda)?)
        };
        match run() {
            Ok(est) => {
                *out = Box::into_raw(Box::new(DiffeeEstimate { inner: est }));
                DIFFEE_OK
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Fits one estimate per lambda of a strictly ascending grid while computing
/// the expensive thresholded-inverse step once. On success writes a list
/// handle to `out`; release it with `diffee_estimate_list_free`.
///
/// # Safety
/// `xc` and `xd` must be live handles, `lambdas` must point to `n_lambdas`
/// readable doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn diffee_path(
    xc: *const DiffeeSampleMatrix,
    xd: *const DiffeeSampleMatrix,
    v: f64,
    lambdas: *const f64,
    n_lambdas: usize,
    out: *mut *mut DiffeeEstimateList,
) -> i32 {
    guarded(|| {
        let (xc, xd) = match (borrow(xc, "xc"), borrow(xd, "xd")) {
            (Ok(c), Ok(d)) => (c, d),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        if lambdas.is_null() || out.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "lambdas and out must not be null");
        }
        let grid = std::slice::from_raw_parts(lambdas, n_lambdas).to_vec();
        let run = || -> Result<Vec<DiffEstimate>, Error> {
            estimator::diffee_path(&xc.inner, &xd.inner, &HyperParams::grid(v, grid)?)
        };
        match run() {
            Ok(ests) => {
                let items = ests.into_iter().map(|inner| DiffeeEstimate { inner }).collect();
                *out = Box::into_raw(Box::new(DiffeeEstimateList { items }));
                DIFFEE_OK
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Releases an estimate handle.
///
/// # Safety
/// `est` must be null or an unfreed pointer returned by `diffee_fit`.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_free(est: *mut DiffeeEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// Releases a path-fit list and every estimate in it.
///
/// # Safety
/// `list` must be null or an unfreed pointer returned by `diffee_path`.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_list_free(list: *mut DiffeeEstimateList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Number of estimates in a path-fit list; 0 for null.
///
/// # Safety
/// `list` must be null or a live list handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_list_len(list: *const DiffeeEstimateList) -> usize {
    list.as_ref().map_or(0, |l| l.items.len())
}

/// Borrows the estimate at `index` from a path-fit list, or null when the
/// index is out of range. The pointer is owned by the list: do not free it,
/// and do not use it after freeing the list.
///
/// # Safety
/// `list` must be null or a live list handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_list_get(
    list: *const DiffeeEstimateList,
    index: usize,
) -> *const DiffeeEstimate {
    list.as_ref()
        .and_then(|l| l.items.get(index))
        .map_or(std::ptr::null(), |est| est as *const DiffeeEstimate)
}

/// Matrix dimension p of a fitted estimate; 0 for null.
///
/// # Safety
/// `est` must be null or a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_dim(est: *const DiffeeEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.inner.delta.dim())
}

/// Sparsity level the estimate was fitted at; NaN for null.
///
/// # Safety
/// `est` must be null or a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_lambda(est: *const DiffeeEstimate) -> f64 {
    est.as_ref().map_or(f64::NAN, |e| e.inner.lambda)
}

/// Covariance threshold the estimate was fitted at; NaN for null.
///
/// # Safety
/// `est` must be null or a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_v(est: *const DiffeeEstimate) -> f64 {
    est.as_ref().map_or(f64::NAN, |e| e.inner.v)
}

/// Count of strictly nonzero off-diagonal entries (both triangles); 0 for
/// null.
///
/// # Safety
/// `est` must be null or a live estimate handle.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_support_size(est: *const DiffeeEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.inner.support_size)
}

/// Copies the fitted p-by-p differential matrix into `out` in row-major
/// order. `len` must be exactly p * p.
///
/// # Safety
/// `est` must be a live estimate handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn diffee_estimate_copy_delta(
    est: *const DiffeeEstimate,
    out: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| {
        let est = match borrow(est, "est") {
            Ok(e) => e,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(DIFFEE_ERR_NULL_ARGUMENT, "out must not be null");
        }
        let p = est.inner.delta.dim();
        if len != p * p {
            return fail(
                DIFFEE_ERR_INVALID_INPUT,
                &format!("out length {len} does not match p * p = {}", p * p),
            );
        }
        let slice = std::slice::from_raw_parts_mut(out, len);
        for i in 0..p {
            for j in 0..p {
                slice[i * p + j] = est.inner.delta.entry(i, j);
            }
        }
        DIFFEE_OK
    })
}
