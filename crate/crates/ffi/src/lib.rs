//! C ABI over `sae_probe`.
//!
//! Objects are opaque handles created by `sp_*` constructors and released
//! with the matching `sp_*_free`. Every fallible call returns an
//! [`SpStatus`]; on failure [`sp_last_error`] describes the error for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sae_probe::classifier::{cross_validate, macro_f1, train_logistic, LogisticModel, TrainConfig};
use sae_probe::harness::{generate_synthetic, SyntheticSpec};
use sae_probe::pooling::{pool_dataset, PooledMatrix, PoolingStrategy};
use sae_probe::select::{jaccard_overlap, FeatureOrigin, FeatureSet};
use sae_probe::store::{read_dump, write_dump, Dataset};
use sae_probe::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Validation = 4,
    DimensionMismatch = 5,
    NonConvergence = 6,
    Io = 7,
    Config = 8,
    Panic = 9,
}

/// A validated activation dump.
pub struct SpDataset(Dataset);

/// Pooled feature rows with labels.
pub struct SpMatrix(PooledMatrix);

/// A trained logistic probe.
pub struct SpModel(LogisticModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::BadMagic { .. } | Error::UnsupportedVersion { .. } | Error::Truncated { .. } | Error::Malformed { .. } => {
            SpStatus::Format
        }
        Error::Validation(_) => SpStatus::Validation,
        Error::InvalidArgument(_) => SpStatus::InvalidArgument,
        Error::DimensionMismatch(_) => SpStatus::DimensionMismatch,
        Error::NonConvergence { .. } => SpStatus::NonConvergence,
        Error::Io { .. } => SpStatus::Io,
        Error::Config(_) | Error::Json(_) => SpStatus::Config,
    }
}

struct Fail(SpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SpStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next `sp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Reads and validates a binary dump.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_read(path: *const c_char, out: *mut *mut SpDataset) -> SpStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put(out, SpDataset(read_dump(path)?))
    })
}

/// # Safety
/// `dataset` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_write(dataset: *const SpDataset, path: *const c_char) -> SpStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        write_dump(&d.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Generates a synthetic dataset from a JSON spec.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_synthetic(spec_json: *const c_char, out: *mut *mut SpDataset) -> SpStatus {
    guard(|| {
        let text = str_arg(spec_json, "spec_json")?;
        let spec: SyntheticSpec = serde_json::from_str(text).map_err(Error::from)?;
        put(out, SpDataset(generate_synthetic(&spec)?))
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_len(dataset: *const SpDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// SAE width, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_width(dataset: *const SpDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.width())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_free(dataset: *mut SpDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Pools every record: optional per-token top-`top_n` mask (0 = none), sum,
/// then optional binarization at `threshold`.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_pool(
    dataset: *const SpDataset,
    top_n: usize,
    binarize: bool,
    threshold: f64,
    out: *mut *mut SpMatrix,
) -> SpStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        let strategy = PoolingStrategy { top_n, binarize, threshold };
        strategy.validate()?;
        put(out, SpMatrix(pool_dataset(&d.0, &strategy)?))
    })
}

/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_matrix_rows(matrix: *const SpMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_matrix_width(matrix: *const SpMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.width)
}

/// # Safety
/// `matrix` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_matrix_free(matrix: *mut SpMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Trains an L2-regularized multinomial logistic probe.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_train(
    matrix: *const SpMatrix,
    l2_strength: f64,
    max_iterations: usize,
    gradient_tolerance: f64,
    out: *mut *mut SpModel,
) -> SpStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let config = TrainConfig { l2_strength, max_iterations, gradient_tolerance, ..TrainConfig::default() };
        put(out, SpModel(train_logistic(&m.0, &config)?))
    })
}

/// Writes one predicted class per row into `labels`, which must hold
/// `capacity >= rows` entries.
///
/// # Safety
/// Handles must be live; `labels` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn sp_predict(
    model: *const SpModel,
    matrix: *const SpMatrix,
    labels: *mut usize,
    capacity: usize,
) -> SpStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let m = handle(matrix, "matrix")?;
        if labels.is_null() {
            return Err(null("labels"));
        }
        if capacity < m.0.len() {
            return Err(Fail(SpStatus::InvalidArgument, format!("capacity {capacity} < {} rows", m.0.len())));
        }
        let predicted = model.0.predict(&m.0)?;
        std::slice::from_raw_parts_mut(labels, predicted.len()).copy_from_slice(&predicted);
        Ok(())
    })
}

/// Serializes a model to JSON. Free the string with [`sp_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_to_json(model: *const SpModel, out: *mut *mut c_char) -> SpStatus {
    guard(|| {
        let model = handle(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = CString::new(model.0.to_json()?).expect("JSON has no NUL");
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_from_json(json: *const c_char, out: *mut *mut SpModel) -> SpStatus {
    guard(|| put(out, SpModel(LogisticModel::from_json(str_arg(json, "json")?)?)))
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_model_free(model: *mut SpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Stratified `k`-fold CV of the pooled probe with default regularization.
/// Writes the mean and population standard deviation of fold macro-F1.
///
/// # Safety
/// `dataset` must be a live handle; `mean` and `std` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_cross_validate(
    dataset: *const SpDataset,
    top_n: usize,
    binarize: bool,
    threshold: f64,
    k: usize,
    seed: u64,
    mean: *mut f64,
    std: *mut f64,
) -> SpStatus {
    guard(|| {
        let d = handle(dataset, "dataset")?;
        if mean.is_null() || std.is_null() {
            return Err(null("mean/std"));
        }
        let strategy = PoolingStrategy { top_n, binarize, threshold };
        strategy.validate()?;
        let report = cross_validate(&d.0, &strategy, &TrainConfig { seed, ..TrainConfig::default() }, k)?;
        *mean = report.mean;
        *std = report.std;
        Ok(())
    })
}

/// Macro-F1 over `class_count` classes of `n` true/predicted label pairs.
///
/// # Safety
/// `y_true` and `y_pred` must each point to `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn sp_macro_f1(
    y_true: *const usize,
    y_pred: *const usize,
    n: usize,
    class_count: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        if out.is_null() || (n > 0 && (y_true.is_null() || y_pred.is_null())) {
            return Err(null("y_true/y_pred/out"));
        }
        let (t, p) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(y_true, n), std::slice::from_raw_parts(y_pred, n))
        };
        *out = macro_f1(t, p, class_count)?;
        Ok(())
    })
}

/// Jaccard overlap of two index sets (duplicates ignored; two empty sets
/// give 1). Returns a negative value if a non-empty set is null.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` readable values.
#[no_mangle]
pub unsafe extern "C" fn sp_jaccard(a: *const u32, na: usize, b: *const u32, nb: usize) -> f64 {
    if (na > 0 && a.is_null()) || (nb > 0 && b.is_null()) {
        return -1.0;
    }
    let set = |p: *const u32, n: usize| {
        let items = if n == 0 { &[][..] } else { std::slice::from_raw_parts(p, n) };
        FeatureSet::new(FeatureOrigin::ClassifierWeights, items.iter().copied())
    };
    jaccard_overlap(&set(a, na), &set(b, nb))
}
