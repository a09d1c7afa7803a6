//! C ABI over `smoothkm`.
//!
//! Every fallible function returns an [`SkmStatus`]; on failure the message
//! is available from [`skm_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smoothkm::data::zscore_normalize;
use smoothkm::engine::{auto_alpha, run, SkmConfig as CoreConfig};
use smoothkm::metrics;
use smoothkm::{DataMatrix, RunResult, SkmError, SmootherKind, SmootherSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmSmoother {
    /// Hard minimum (HKM).
    Hard = 0,
    /// LogSumExp with sharpness `param` (MEFC).
    LogSumExp = 1,
    /// p-Norm with exponent `param` (FKM with m = 1 + 1/p).
    PNorm = 2,
    /// Boltzmann operator with `param` = alpha (EKM).
    Boltzmann = 3,
}

/// Run settings. Obtain defaults from [`skm_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmConfig {
    pub smoother: SkmSmoother,
    pub param: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// Row-major data matrix.
pub struct SkmData {
    inner: DataMatrix,
}

/// Outcome of a clustering run.
pub struct SkmResult {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SkmError) -> SkmStatus {
    match e {
        SkmError::DimensionMismatch { .. } => SkmStatus::DimensionMismatch,
        SkmError::Numerical(_) => SkmStatus::Numerical,
        _ => SkmStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (SkmStatus, String)>) -> SkmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside smoothkm".into());
            SkmStatus::Panic
        }
    }
}

fn core_err(e: SkmError) -> (SkmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SkmStatus, String) {
    (SkmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (SkmStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SkmStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn skm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults: 500 iterations, tolerance 1e-3, one restart, seed 0.
#[no_mangle]
pub extern "C" fn skm_config_default(smoother: SkmSmoother, param: f64) -> SkmConfig {
    SkmConfig {
        smoother,
        param,
        max_iter: smoothkm::engine::DEFAULT_MAX_ITER,
        tol: smoothkm::engine::DEFAULT_TOL,
        restarts: 1,
        seed: 0,
    }
}

/// Copies `rows × cols` row-major values into a new data handle.
#[no_mangle]
pub unsafe extern "C" fn skm_data_new(values: *const f64, rows: usize, cols: usize, out: *mut *mut SkmData) -> SkmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| (SkmStatus::InvalidArgument, "rows × cols overflows".to_string()))?;
        let v = slice(values, len, "values")?;
        let inner = DataMatrix::new(rows, cols, v.to_vec()).map_err(core_err)?;
        *out = Box::into_raw(Box::new(SkmData { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn skm_data_free(data: *mut SkmData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

#[no_mangle]
pub unsafe extern "C" fn skm_data_rows(data: *const SkmData) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n_rows())
}

#[no_mangle]
pub unsafe extern "C" fn skm_data_cols(data: *const SkmData) -> usize {
    data.as_ref().map_or(0, |d| d.inner.n_cols())
}

/// Z-scores every column in place.
#[no_mangle]
pub unsafe extern "C" fn skm_data_zscore(data: *mut SkmData) -> SkmStatus {
    guard(|| {
        let d = out_ref(data, "data")?;
        d.inner = zscore_normalize(&d.inner).map_err(core_err)?.0;
        Ok(())
    })
}

/// `2 / mean(½‖x‖²)`, the default EKM alpha for `data`.
#[no_mangle]
pub unsafe extern "C" fn skm_auto_alpha(data: *const SkmData, out: *mut f64) -> SkmStatus {
    guard(|| {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let out = out_ref(out, "out")?;
        *out = auto_alpha(&d.inner).map_err(core_err)?;
        Ok(())
    })
}

fn spec_of(cfg: &SkmConfig) -> Result<SmootherSpec, SkmError> {
    let kind = match cfg.smoother {
        SkmSmoother::Hard => return Ok(SmootherSpec::hard()),
        SkmSmoother::LogSumExp => SmootherKind::LogSumExp,
        SkmSmoother::PNorm => SmootherKind::PNorm,
        SkmSmoother::Boltzmann => SmootherKind::Boltzmann,
    };
    SmootherSpec::new(kind, cfg.param)
}

/// Clusters `data` into `k` groups with k-means++ restarts and keeps the
/// lowest-objective run.
#[no_mangle]
pub unsafe extern "C" fn skm_run(
    data: *const SkmData,
    k: usize,
    config: *const SkmConfig,
    out: *mut *mut SkmResult,
) -> SkmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        let core = CoreConfig::new(spec_of(cfg).map_err(core_err)?)
            .with_max_iter(cfg.max_iter)
            .with_tol(cfg.tol)
            .with_restarts(cfg.restarts)
            .with_seed(cfg.seed);
        let inner = run(&d.inner, k, &core).map_err(core_err)?;
        *out = Box::into_raw(Box::new(SkmResult { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_free(result: *mut SkmResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_clusters(result: *const SkmResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.centroids.n_clusters())
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_cols(result: *const SkmResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.centroids.n_cols())
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_points(result: *const SkmResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.labels.len())
}

/// Objective value, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn skm_result_objective(result: *const SkmResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.objective)
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_iterations(result: *const SkmResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.iterations)
}

#[no_mangle]
pub unsafe extern "C" fn skm_result_converged(result: *const SkmResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.converged)
}

/// Copies the `clusters × cols` centroids (row-major) into `out`, which
/// must hold at least `len` values.
#[no_mangle]
pub unsafe extern "C" fn skm_result_centroids(result: *const SkmResult, out: *mut f64, len: usize) -> SkmStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let src = r.inner.centroids.as_slice();
        copy_out(src, out, len)
    })
}

/// Copies one label per data row into `out` (capacity `len`).
#[no_mangle]
pub unsafe extern "C" fn skm_result_labels(result: *const SkmResult, out: *mut usize, len: usize) -> SkmStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        copy_out(&r.inner.labels, out, len)
    })
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> Result<(), (SkmStatus, String)> {
    if len < src.len() {
        return Err((
            SkmStatus::DimensionMismatch,
            format!("output buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("out"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn metric(
    reference: *const usize,
    predicted: *const usize,
    n: usize,
    out: *mut f64,
    f: fn(&[usize], &[usize]) -> smoothkm::Result<f64>,
) -> SkmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = slice(reference, n, "reference")?;
        let p = slice(predicted, n, "predicted")?;
        *out = f(r, p).map_err(core_err)?;
        Ok(())
    })
}

/// Normalized mutual information (arithmetic-mean normalization).
#[no_mangle]
pub unsafe extern "C" fn skm_nmi(reference: *const usize, predicted: *const usize, n: usize, out: *mut f64) -> SkmStatus {
    metric(reference, predicted, n, out, metrics::nmi)
}

/// Adjusted Rand index.
#[no_mangle]
pub unsafe extern "C" fn skm_ari(reference: *const usize, predicted: *const usize, n: usize, out: *mut f64) -> SkmStatus {
    metric(reference, predicted, n, out, metrics::ari)
}

/// Accuracy under the best one-to-one cluster-to-class matching.
#[no_mangle]
pub unsafe extern "C" fn skm_acc(reference: *const usize, predicted: *const usize, n: usize, out: *mut f64) -> SkmStatus {
    metric(reference, predicted, n, out, metrics::acc)
}
