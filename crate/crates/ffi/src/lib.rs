//! C ABI over the `artiforest` core: load compact models, predict, and
//! extract window features.
//!
//! Every fallible function returns an [`AfStatus`]. On failure a description
//! is kept per thread and can be copied out with [`af_last_error`]. Models
//! are opaque [`AfForest`] handles released with [`af_forest_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use artiforest::compact::{deserialize, read_ctf, serialize, CompactForest};
use artiforest::forest::Classifier;
use artiforest::signal::{FeatureExtractor, Window, FEATURES_PER_CHANNEL};
use artiforest::Error;

/// Result of an FFI call. Values 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfStatus {
    Ok = 0,
    InvalidArgument = 1,
    Format = 2,
    Capacity = 3,
    Io = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque model handle.
pub struct AfForest {
    inner: CompactForest,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(error: &Error) -> AfStatus {
    match error {
        Error::InvalidArgument(_) => AfStatus::InvalidArgument,
        Error::Capacity { .. } => AfStatus::Capacity,
        Error::Io { .. } => AfStatus::Io,
        _ => AfStatus::Format,
    }
}

fn fail(status: AfStatus, message: impl Into<String>) -> AfStatus {
    set_error(message.into());
    status
}

/// Runs `body`, turning core errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<AfStatus, AfStatus>) -> AfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) | Ok(Err(status)) => status,
        Err(_) => fail(AfStatus::Panic, "internal panic"),
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), AfStatus> {
    if p.is_null() {
        Err(fail(AfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn forest_ref<'a>(forest: *const AfForest) -> Result<&'a CompactForest, AfStatus> {
    non_null(forest, "forest")?;
    Ok(&(*forest).inner)
}

unsafe fn store(out: *mut *mut AfForest, forest: artiforest::Result<CompactForest>) -> Result<AfStatus, AfStatus> {
    let inner = forest.map_err(|e| fail(status_of(&e), e.to_string()))?;
    *out = Box::into_raw(Box::new(AfForest { inner }));
    Ok(AfStatus::Ok)
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `len` bytes. Returns the length the
/// full message needs including the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn af_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn af_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a `.ctf` model from a file path.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_forest_load(path: *const c_char, out: *mut *mut AfForest) -> AfStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(AfStatus::InvalidArgument, "path is not valid UTF-8"))?;
        store(out, read_ctf(path))
    })
}

/// Loads a model from an in-memory `.ctf` image.
///
/// # Safety
/// `data` must be valid for `len` bytes and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_forest_from_bytes(
    data: *const u8,
    len: usize,
    out: *mut *mut AfForest,
) -> AfStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        store(out, deserialize(std::slice::from_raw_parts(data, len)))
    })
}

/// Writes the model's `.ctf` image into `buf`. `written` receives the image
/// size, also when the buffer is too small.
///
/// # Safety
/// `forest` must come from this library, `buf` be valid for `len` bytes (or
/// null with `len` 0) and `written` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_forest_serialize(
    forest: *const AfForest,
    buf: *mut u8,
    len: usize,
    written: *mut usize,
) -> AfStatus {
    guard(|| {
        let forest = forest_ref(forest)?;
        non_null(written, "written")?;
        let bytes = serialize(forest).map_err(|e| fail(status_of(&e), e.to_string()))?;
        *written = bytes.len();
        if bytes.len() > len {
            return Err(fail(
                AfStatus::BufferTooSmall,
                format!("model needs {} bytes, buffer has {len}", bytes.len()),
            ));
        }
        non_null(buf, "buf")?;
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(AfStatus::Ok)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `forest` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn af_forest_free(forest: *mut AfForest) {
    if !forest.is_null() {
        drop(Box::from_raw(forest));
    }
}

/// Feature vector length the model expects; 0 for a null handle.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_n_features(forest: *const AfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.n_features())
}

/// Predicted labels per feature vector: 1 for BC, one per channel otherwise.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_n_outputs(forest: *const AfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.n_outputs())
}

/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_n_classes(forest: *const AfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.n_classes())
}

/// Label scheme code: 0 BC, 1 MC, 2 MMC; -1 for a null handle.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_scheme(forest: *const AfForest) -> i32 {
    forest.as_ref().map_or(-1, |f| i32::from(f.inner.scheme.code()))
}

/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_tree_count(forest: *const AfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.tree_count())
}

/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn af_forest_node_count(forest: *const AfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.node_count())
}

/// Classifies `n_rows` row-major feature vectors of `n_features` values each.
/// `out` receives `n_rows * n_outputs` labels, row-major.
///
/// # Safety
/// `forest` must be a live handle, `features` valid for
/// `n_rows * n_features` reads and `out` for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn af_forest_predict(
    forest: *const AfForest,
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    out: *mut u16,
    out_len: usize,
) -> AfStatus {
    guard(|| {
        let forest = forest_ref(forest)?;
        if n_features != forest.n_features() {
            return Err(fail(
                AfStatus::InvalidArgument,
                format!("model takes {} features, got {n_features}", forest.n_features()),
            ));
        }
        let n_outputs = forest.n_outputs();
        let needed = n_rows * n_outputs;
        if out_len < needed {
            return Err(fail(
                AfStatus::BufferTooSmall,
                format!("output needs {needed} labels, buffer has {out_len}"),
            ));
        }
        if n_rows == 0 {
            return Ok(AfStatus::Ok);
        }
        non_null(features, "features")?;
        non_null(out, "out")?;
        let x = std::slice::from_raw_parts(features, n_rows * n_features);
        let y = std::slice::from_raw_parts_mut(out, needed);
        for (row, labels) in x.chunks_exact(n_features).zip(y.chunks_exact_mut(n_outputs)) {
            let predicted = forest.predict(row).map_err(|e| fail(status_of(&e), e.to_string()))?;
            labels.copy_from_slice(&predicted);
        }
        Ok(AfStatus::Ok)
    })
}

/// Features of one one-second window. `samples` holds `n_channels` runs of
/// `fs` samples each, channel after channel. `out` receives
/// `5 * n_channels` values: per channel the high-band FFT energy and the four
/// Haar detail energies.
///
/// # Safety
/// `samples` must be valid for `n_channels * fs` reads and `out` for
/// `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn af_extract_features(
    samples: *const f64,
    n_channels: usize,
    fs: u32,
    out: *mut f64,
    out_len: usize,
) -> AfStatus {
    guard(|| {
        let needed = n_channels * FEATURES_PER_CHANNEL;
        if out_len < needed {
            return Err(fail(
                AfStatus::BufferTooSmall,
                format!("output needs {needed} values, buffer has {out_len}"),
            ));
        }
        if n_channels == 0 {
            return Ok(AfStatus::Ok);
        }
        non_null(samples, "samples")?;
        non_null(out, "out")?;
        let extractor = FeatureExtractor::new(fs).map_err(|e| fail(status_of(&e), e.to_string()))?;
        let flat = std::slice::from_raw_parts(samples, n_channels * fs as usize);
        let window = Window {
            samples: flat.chunks_exact(fs as usize).map(<[f64]>::to_vec).collect(),
            start_time: 0.0,
            fs,
        };
        let values = extractor
            .extract(&window)
            .map_err(|e| fail(status_of(&e), e.to_string()))?;
        std::slice::from_raw_parts_mut(out, needed).copy_from_slice(values.as_slice());
        Ok(AfStatus::Ok)
    })
}
