//! C ABI for the `uniloc` library.
//!
//! Every fallible call returns a [`UnilocStatus`]; on failure the message is
//! available from [`uniloc_last_error`] on the same thread until the next
//! call. Matrices are opaque handles released with [`uniloc_matrix_free`],
//! strings returned by the library are released with [`uniloc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use uniloc::experiment::{run, ExperimentConfig};
use uniloc::models::ModelSpec;
use uniloc::solve::resolvent_column;
use uniloc::{ComplexBandMatrix, Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnilocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    InvalidParameter = 4,
    DimensionMismatch = 5,
    OnUnitCircle = 6,
    Singular = 7,
    Exceptional = 8,
    DenseLimit = 9,
    BoundaryContamination = 10,
    Io = 11,
    Other = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnilocComplex {
    pub re: f64,
    pub im: f64,
}

impl From<UnilocComplex> for C64 {
    fn from(z: UnilocComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

impl From<C64> for UnilocComplex {
    fn from(z: C64) -> Self {
        UnilocComplex { re: z.re, im: z.im }
    }
}

/// A finite unitary band matrix.
pub struct UnilocMatrix {
    inner: ComplexBandMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> UnilocStatus {
    match e {
        Error::Validation(_) | Error::Json(_) => UnilocStatus::Validation,
        Error::InvalidParameter { .. } | Error::IndexOutOfRange { .. } => UnilocStatus::InvalidParameter,
        Error::DimensionMismatch { .. } => UnilocStatus::DimensionMismatch,
        Error::OnUnitCircle(_) => UnilocStatus::OnUnitCircle,
        Error::Singular(_) => UnilocStatus::Singular,
        Error::Exceptional { .. } => UnilocStatus::Exceptional,
        Error::DenseLimit { .. } => UnilocStatus::DenseLimit,
        Error::BoundaryContamination(_) => UnilocStatus::BoundaryContamination,
        Error::Io(_) | Error::Csv(_) => UnilocStatus::Io,
        Error::NoConvergence | Error::Mismatch(_) => UnilocStatus::Other,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (UnilocStatus, String)>) -> UnilocStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnilocStatus::Ok,
        Ok(Err((st, msg))) => {
            set_error(msg);
            st
        }
        Err(_) => {
            set_error("internal panic");
            UnilocStatus::Panic
        }
    }
}

fn lib(e: Error) -> (UnilocStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (UnilocStatus, String) {
    (UnilocStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (UnilocStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (UnilocStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn matrix<'a>(m: *const UnilocMatrix) -> Result<&'a ComplexBandMatrix, (UnilocStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uniloc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn uniloc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Builds realization `realization` of the model described by `model_json`
/// (the `model` object of an experiment config).
///
/// # Safety
/// `model_json` must be a NUL-terminated string and `out` a valid pointer.
/// On success `*out` owns a handle to be released with
/// [`uniloc_matrix_free`].
#[no_mangle]
pub unsafe extern "C" fn uniloc_model_build(
    model_json: *const c_char,
    seed: u64,
    realization: u64,
    out: *mut *mut UnilocMatrix,
) -> UnilocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(model_json, "model_json")?;
        let model: ModelSpec = serde_json::from_str(text).map_err(|e| (UnilocStatus::Validation, e.to_string()))?;
        let problems = model.problems("model");
        if !problems.is_empty() {
            return Err(lib(Error::Validation(problems)));
        }
        let inner = model.sample(seed, realization).map_err(lib)?;
        *out = Box::into_raw(Box::new(UnilocMatrix { inner }));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle from [`uniloc_model_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_free(m: *mut UnilocMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the matrix, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_dim(m: *const UnilocMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// `max |(M* M - 1)_{ij}|`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_unitarity_residual(m: *const UnilocMatrix, out: *mut f64) -> UnilocStatus {
    guard(|| {
        let m = matrix(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.unitarity_residual();
        Ok(())
    })
}

/// `y = M x` for vectors of length `len`, which must equal the dimension.
///
/// # Safety
/// `x` and `y` must point to `len` elements each and must not overlap.
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_matvec(
    m: *const UnilocMatrix,
    x: *const UnilocComplex,
    y: *mut UnilocComplex,
    len: usize,
) -> UnilocStatus {
    guard(|| {
        let m = matrix(m)?;
        if x.is_null() || y.is_null() {
            return Err(null("vector"));
        }
        if len != m.dim() {
            return Err(lib(Error::DimensionMismatch { expected: m.dim(), got: len }));
        }
        let v: Vec<C64> = std::slice::from_raw_parts(x, len).iter().map(|&z| z.into()).collect();
        let r = m.matvec(&v).map_err(lib)?;
        for (dst, src) in std::slice::from_raw_parts_mut(y, len).iter_mut().zip(r) {
            *dst = src.into();
        }
        Ok(())
    })
}

/// Column `l` of `(M - z)^{-1}` written to `out` (length `len`, equal to the
/// dimension). Fails with `UNILOC_STATUS_ON_UNIT_CIRCLE` when `|z| = 1`.
///
/// # Safety
/// `out` must point to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_resolvent_column(
    m: *const UnilocMatrix,
    z: UnilocComplex,
    l: usize,
    out: *mut UnilocComplex,
    len: usize,
) -> UnilocStatus {
    guard(|| {
        let m = matrix(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != m.dim() {
            return Err(lib(Error::DimensionMismatch { expected: m.dim(), got: len }));
        }
        let g = resolvent_column(m, z.into(), l).map_err(lib)?;
        for (dst, src) in std::slice::from_raw_parts_mut(out, len).iter_mut().zip(g) {
            *dst = src.into();
        }
        Ok(())
    })
}

/// The matrix in the library's JSON form: `dim`, `lower_bw`, `upper_bw`,
/// `periodic`, one `[re, im]` array per stored diagonal and the site labels.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer. The string written
/// to `*out` is released with [`uniloc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn uniloc_matrix_to_json(m: *const UnilocMatrix, out: *mut *mut c_char) -> UnilocStatus {
    guard(|| {
        let m = matrix(m)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(serde_json::to_string(m).map_err(|e| lib(e.into()))?);
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uniloc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and range-checks an experiment config given as JSON text.
///
/// # Safety
/// `config_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uniloc_config_validate(config_json: *const c_char) -> UnilocStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(str_arg(config_json, "config_json")?).map_err(lib)?;
        cfg.validate().map_err(|e| lib(Error::Validation(e)))
    })
}

/// Runs an experiment and writes its artifacts into `out_dir`. `threads`
/// of 0 uses the default pool. On success the run summary (JSON) is written
/// to `*summary` unless `summary` is NULL.
///
/// # Safety
/// `config_json` and `out_dir` must be NUL-terminated strings; `summary`
/// must be NULL or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uniloc_run(
    config_json: *const c_char,
    out_dir: *const c_char,
    threads: usize,
    summary: *mut *mut c_char,
) -> UnilocStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(str_arg(config_json, "config_json")?).map_err(lib)?;
        let dir = str_arg(out_dir, "out_dir")?;
        let out = run(&cfg, Path::new(dir), (threads > 0).then_some(threads)).map_err(lib)?;
        if !summary.is_null() {
            *summary = into_c_string(out.summary.to_string());
        }
        Ok(())
    })
}
