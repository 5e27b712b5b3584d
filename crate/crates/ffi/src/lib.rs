//! C ABI over `sda-core`.
//!
//! Every entry point returns an [`SdaStatus`]. On failure a description is
//! kept per thread and can be copied out with [`sda_last_error_message`].
//! Results come back as an opaque [`SdaSelection`] that the caller releases
//! with [`sda_selection_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sda_core::baselines::{bh, PValues};
use sda_core::filter::{run_rsda, run_sda, run_two_sample, run_two_sample_rsda, Flags, TwoSampleSpec};
use sda_core::{DataMatrix, PrecisionSpec, SdaError, SdaOptions, SymMatrix, T1Mode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdaStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    NotPsd = 3,
    Singular = 4,
    NumericalFailure = 5,
    NotConverged = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdaPrecisionKind {
    Identity = 0,
    /// `omega` must point at a row-major p×p precision matrix.
    Known = 1,
    GraphicalLasso = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SdaConfig {
    pub alpha: f64,
    /// Conservative `+1` threshold.
    pub plus: bool,
    /// Number of splits to aggregate; 0 or 1 runs a single split.
    pub rsda_runs: usize,
    /// Rank with the unscaled first-half coefficient.
    pub t1_raw: bool,
    pub precision: SdaPrecisionKind,
    pub seed: u64,
}

pub const SDA_FLAG_RIDGE_FALLBACK: u32 = 1;
pub const SDA_FLAG_EMPTY_SELECTION: u32 = 2;
pub const SDA_FLAG_LASSO_NONCONVERGED: u32 = 4;

/// Opaque selection result.
pub struct SdaSelection {
    indices: Vec<usize>,
    threshold: f64,
    statistics: Vec<f64>,
    flags: u32,
    chosen_run: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(message: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.as_bytes().to_vec());
}

fn status_of(e: &SdaError) -> SdaStatus {
    match e {
        SdaError::InvalidInput(_) => SdaStatus::InvalidArgument,
        SdaError::NotPsd { .. } => SdaStatus::NotPsd,
        SdaError::SingularSystem(_) => SdaStatus::Singular,
        SdaError::NumericalFailure(_) => SdaStatus::NumericalFailure,
        SdaError::DidNotConverge { .. } => SdaStatus::NotConverged,
    }
}

struct Failure(SdaStatus, String);

impl From<SdaError> for Failure {
    fn from(e: SdaError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SdaStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SdaStatus::InvalidArgument, msg.into())
}

/// Runs `body`, stores its result in `*out` and translates errors and panics
/// into status codes.
fn guarded(out: *mut *mut SdaSelection, body: impl FnOnce() -> Result<SdaSelection, Failure>) -> SdaStatus {
    if out.is_null() {
        set_error("output pointer is null");
        return SdaStatus::NullPointer;
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = ptr::null_mut() };
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(sel)) => {
            // SAFETY: as above.
            unsafe { *out = Box::into_raw(Box::new(sel)) };
            set_error("");
            SdaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SdaStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn flag_bits(flags: &Flags) -> u32 {
    let mut bits = 0;
    if flags.ridge_fallback {
        bits |= SDA_FLAG_RIDGE_FALLBACK;
    }
    if flags.empty_selection {
        bits |= SDA_FLAG_EMPTY_SELECTION;
    }
    if flags.lasso_nonconverged > 0 {
        bits |= SDA_FLAG_LASSO_NONCONVERGED;
    }
    bits
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sda_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sda_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a NUL byte"),
    };
    VERSION.as_ptr()
}

/// Data-adaptive threshold on precomputed ranking statistics. Indices in the
/// result are positions in `w`.
///
/// # Safety
/// `w` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn sda_threshold(
    w: *const f64,
    len: usize,
    alpha: f64,
    plus: bool,
    out: *mut *mut SdaSelection,
) -> SdaStatus {
    guarded(out, || {
        let w = slice(w, len, "w")?;
        let sel = sda_core::sda_threshold(w, alpha, plus)?;
        Ok(SdaSelection {
            indices: sel.rejected,
            threshold: sel.threshold,
            statistics: w.to_vec(),
            flags: 0,
            chosen_run: -1,
        })
    })
}

/// Benjamini–Hochberg step-up over `len` p-values. The threshold is the
/// largest rejected p-value, or 0 when nothing is rejected.
///
/// # Safety
/// `p_values` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn sda_bh(
    p_values: *const f64,
    len: usize,
    alpha: f64,
    out: *mut *mut SdaSelection,
) -> SdaStatus {
    guarded(out, || {
        let p = slice(p_values, len, "p_values")?;
        let rejected = bh(&PValues::new(p.to_vec())?, alpha)?;
        let threshold = rejected.iter().map(|&j| p[j]).fold(0.0, f64::max);
        Ok(SdaSelection { indices: rejected, threshold, statistics: p.to_vec(), flags: 0, chosen_run: -1 })
    })
}

fn options(config: &SdaConfig) -> SdaOptions {
    SdaOptions {
        plus: config.plus,
        t1_mode: if config.t1_raw { T1Mode::Raw } else { T1Mode::Scaled },
        ..SdaOptions::default()
    }
}

unsafe fn precision(config: &SdaConfig, omega: *const f64, p: usize) -> Result<PrecisionSpec, Failure> {
    Ok(match config.precision {
        SdaPrecisionKind::Identity => PrecisionSpec::IdentityWorking,
        SdaPrecisionKind::GraphicalLasso => PrecisionSpec::glasso(),
        SdaPrecisionKind::Known => {
            let values = slice(omega, p * p, "omega")?;
            if values.is_empty() {
                return Err(null("omega"));
            }
            PrecisionSpec::Known(SymMatrix::from_row_major(p, values.to_vec())?)
        }
    })
}

unsafe fn matrix(data: *const f64, n: usize, p: usize, what: &str) -> Result<DataMatrix, Failure> {
    let len = n.checked_mul(p).ok_or_else(|| invalid(format!("{what} dimensions overflow")))?;
    if len == 0 {
        return Err(invalid(format!("{what} is empty")));
    }
    Ok(DataMatrix::from_row_major(n, p, slice(data, len, what)?.to_vec())?)
}

/// One-sample filter on a row-major `n × p` data matrix. The statistics
/// array of the result has length `p` with NaN for unscreened features.
///
/// # Safety
/// `data` must be valid for `n·p` reads, `omega` for `p·p` reads when the
/// precision kind is `Known`, `config` for one read and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn sda_run(
    data: *const f64,
    n: usize,
    p: usize,
    omega: *const f64,
    config: *const SdaConfig,
    out: *mut *mut SdaSelection,
) -> SdaStatus {
    guarded(out, || {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let data = matrix(data, n, p, "data")?;
        let spec = precision(config, omega, p)?;
        let options = options(config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (fit, sel, chosen) = if config.rsda_runs > 1 {
            let agg = run_rsda(&data, &spec, config.alpha, config.rsda_runs, &options, &mut rng)?;
            (agg.final_fit, agg.final_selection, agg.chosen_run as i64)
        } else {
            let out = run_sda(&data, &spec, config.alpha, &options, &mut rng)?;
            (out.fit, out.selection, -1)
        };
        Ok(SdaSelection {
            flags: flag_bits(&sel.flags),
            indices: sel.rejected,
            threshold: sel.threshold,
            statistics: fit.ranking.full_w(p).into_iter().map(|w| w.unwrap_or(f64::NAN)).collect(),
            chosen_run: chosen,
        })
    })
}

/// Two-sample filter for `μᵃ = μᵇ` on row-major `n_a × p` and `n_b × p`
/// matrices. With `Known` precision, `omega` is the common precision of
/// both groups.
///
/// # Safety
/// As for [`sda_run`], with `data_a` and `data_b` valid for `n_a·p` and
/// `n_b·p` reads.
#[no_mangle]
pub unsafe extern "C" fn sda_two_sample(
    data_a: *const f64,
    n_a: usize,
    data_b: *const f64,
    n_b: usize,
    p: usize,
    omega: *const f64,
    config: *const SdaConfig,
    out: *mut *mut SdaSelection,
) -> SdaStatus {
    guarded(out, || {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let a = matrix(data_a, n_a, p, "data_a")?;
        let b = matrix(data_b, n_b, p, "data_b")?;
        let spec = TwoSampleSpec::shared(precision(config, omega, p)?);
        let options = options(config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (fit, sel, chosen) = if config.rsda_runs > 1 {
            let agg = run_two_sample_rsda(&a, &b, &spec, config.alpha, config.rsda_runs, &options, &mut rng)?;
            (agg.final_fit, agg.final_selection, agg.chosen_run as i64)
        } else {
            let out = run_two_sample(&a, &b, &spec, config.alpha, &options, &mut rng)?;
            (out.fit, out.selection, -1)
        };
        Ok(SdaSelection {
            flags: flag_bits(&sel.flags),
            indices: sel.rejected,
            threshold: sel.threshold,
            statistics: fit.ranking.full_w(p).into_iter().map(|w| w.unwrap_or(f64::NAN)).collect(),
            chosen_run: chosen,
        })
    })
}

/// Number of selected indices; 0 for a null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_len(sel: *const SdaSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.indices.len())
}

/// Copies up to `capacity` selected indices (ascending) into `buf` and
/// returns the total number selected.
///
/// # Safety
/// `sel` must be null or a live handle; `buf` must be null or valid for
/// `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_indices(sel: *const SdaSelection, buf: *mut usize, capacity: usize) -> usize {
    let Some(s) = sel.as_ref() else { return 0 };
    if !buf.is_null() {
        let n = s.indices.len().min(capacity);
        ptr::copy_nonoverlapping(s.indices.as_ptr(), buf, n);
    }
    s.indices.len()
}

/// Copies up to `capacity` per-feature statistics into `buf` and returns
/// their total count.
///
/// # Safety
/// As for [`sda_selection_indices`].
#[no_mangle]
pub unsafe extern "C" fn sda_selection_statistics(sel: *const SdaSelection, buf: *mut f64, capacity: usize) -> usize {
    let Some(s) = sel.as_ref() else { return 0 };
    if !buf.is_null() {
        let n = s.statistics.len().min(capacity);
        ptr::copy_nonoverlapping(s.statistics.as_ptr(), buf, n);
    }
    s.statistics.len()
}

/// Selection threshold; `+inf` when no threshold qualified and NaN for a
/// null handle.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_threshold(sel: *const SdaSelection) -> f64 {
    sel.as_ref().map_or(f64::NAN, |s| s.threshold)
}

/// Bitwise OR of the `SDA_FLAG_*` constants.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_flags(sel: *const SdaSelection) -> u32 {
    sel.as_ref().map_or(0, |s| s.flags)
}

/// Zero-based split chosen by aggregation, or -1 for a single split.
///
/// # Safety
/// `sel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_chosen_run(sel: *const SdaSelection) -> i64 {
    sel.as_ref().map_or(-1, |s| s.chosen_run)
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sda_selection_free(sel: *mut SdaSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}
