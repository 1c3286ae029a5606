//! C ABI over the `sigqual` library.
//!
//! Objects cross the boundary as opaque handles; each handle returned
//! through an out-pointer is released with the matching `sq_*_free`. Every fallible
//! call returns an [`SqStatus`]; on failure a message is kept per thread and
//! read with [`sq_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sigqual::eval::{eer, far_frr, spearman, threshold_grid};
use sigqual::features::{extract_features, FeatureVector, HistogramSpec};
use sigqual::ingest::{parse_svc, SignatureSample};
use sigqual::quality::{
    complexity, distinctiveness, generic_population_stats, repeatability, Template,
};
use sigqual::verify::{dtw_distance, histogram_score};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    FeatureError = 5,
    QualityError = 6,
    VerifyError = 7,
    EvalError = 8,
    BufferTooSmall = 9,
    Panic = 99,
}

/// Parsed signature sample.
pub struct SqSample(SignatureSample);
/// Extracted histogram feature vector.
pub struct SqFeatures(FeatureVector);
/// Enrolled template.
pub struct SqTemplate(Template);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (SqStatus, String)>) -> SqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SqStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SqStatus::Panic
        }
    }
}

fn err<E: std::fmt::Display>(status: SqStatus) -> impl Fn(E) -> (SqStatus, String) {
    move |e| (status, e.to_string())
}

fn null() -> (SqStatus, String) {
    (SqStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (SqStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, (SqStatus, String)> {
    p.as_mut().ok_or_else(null)
}

unsafe fn doubles<'a>(p: *const f64, n: usize) -> Result<&'a [f64], (SqStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sq_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Parses SVC text (NUL-terminated) into a new sample handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_sample_parse_svc(
    text: *const c_char,
    out: *mut *mut SqSample,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(err(SqStatus::InvalidUtf8))?;
        let sample = parse_svc(text).map_err(err(SqStatus::ParseError))?;
        *out = Box::into_raw(Box::new(SqSample(sample)));
        Ok(())
    })
}

/// Number of points in a sample, 0 for NULL.
///
/// # Safety
/// `sample` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_sample_len(sample: *const SqSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.points().len())
}

/// # Safety
/// `sample` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_sample_free(sample: *mut SqSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Extracts default-layout histogram features (4 speed bins, 16 angle bins,
/// 16 pressure bins) with the given pressure ceiling.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_features_extract(
    sample: *const SqSample,
    pressure_max: u32,
    out: *mut *mut SqFeatures,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let sample = deref(sample)?;
        let spec = HistogramSpec {
            pressure_max,
            ..HistogramSpec::default()
        };
        let fv = extract_features(&sample.0, &spec).map_err(err(SqStatus::FeatureError))?;
        *out = Box::into_raw(Box::new(SqFeatures(fv)));
        Ok(())
    })
}

/// Length of the flattened feature vector, 0 for NULL.
///
/// # Safety
/// `features` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sq_features_len(features: *const SqFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the flattened features (first-half speed-angle, second-half
/// speed-angle, then pressure halves) into `buf`.
///
/// # Safety
/// `features` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sq_features_copy(
    features: *const SqFeatures,
    buf: *mut f64,
    cap: usize,
) -> SqStatus {
    guard(|| {
        let flat = deref(features)?.0.flat();
        if cap < flat.len() {
            return Err((
                SqStatus::BufferTooSmall,
                format!("buffer holds {cap}, need {}", flat.len()),
            ));
        }
        if buf.is_null() {
            return Err(null());
        }
        slice::from_raw_parts_mut(buf, flat.len()).copy_from_slice(&flat);
        Ok(())
    })
}

/// # Safety
/// `features` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_features_free(features: *mut SqFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// Enrols a template from `n` feature handles.
///
/// # Safety
/// `features` must point to `n` live handles; `user_id` must be NULL or a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_template_enroll(
    user_id: *const c_char,
    features: *const *const SqFeatures,
    n: usize,
    out: *mut *mut SqTemplate,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let id = if user_id.is_null() {
            ""
        } else {
            CStr::from_ptr(user_id)
                .to_str()
                .map_err(err(SqStatus::InvalidUtf8))?
        };
        if features.is_null() && n > 0 {
            return Err(null());
        }
        let handles = if n == 0 {
            &[][..]
        } else {
            slice::from_raw_parts(features, n)
        };
        let fvs = handles
            .iter()
            .map(|&h| deref(h).map(|f| f.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let t = Template::enroll(id, &fvs).map_err(err(SqStatus::QualityError))?;
        *out = Box::into_raw(Box::new(SqTemplate(t)));
        Ok(())
    })
}

/// # Safety
/// `template` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sq_template_free(template: *mut SqTemplate) {
    if !template.is_null() {
        drop(Box::from_raw(template));
    }
}

/// Distinctiveness against the binomial random-signature population with
/// `l_pop` drawing vectors per half.
///
/// # Safety
/// `template` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_distinctiveness(
    template: *const SqTemplate,
    l_pop: u32,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        let t = &deref(template)?.0;
        let pop = generic_population_stats(&HistogramSpec::default(), l_pop)
            .map_err(err(SqStatus::QualityError))?;
        *out = distinctiveness(t, &pop)
            .map_err(err(SqStatus::QualityError))?
            .total;
        Ok(())
    })
}

/// Complexity (EMD times inverse dispersion).
///
/// # Safety
/// `template` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_complexity(template: *const SqTemplate, out: *mut f64) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = complexity(&deref(template)?.0)
            .map_err(err(SqStatus::QualityError))?
            .value;
        Ok(())
    })
}

/// Quantized-Manhattan dissimilarity of `features` to `template`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_histogram_score(
    template: *const SqTemplate,
    features: *const SqFeatures,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = histogram_score(&deref(template)?.0, &deref(features)?.0)
            .map_err(err(SqStatus::VerifyError))?;
        Ok(())
    })
}

/// Repeatability from `n` validation scores. All-zero scores give +inf.
///
/// # Safety
/// `scores` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_repeatability(scores: *const f64, n: usize, out: *mut f64) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = repeatability(doubles(scores, n)?)
            .map_err(err(SqStatus::QualityError))?
            .value;
        Ok(())
    })
}

/// Length-normalized DTW distance between two samples.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_dtw_distance(
    a: *const SqSample,
    b: *const SqSample,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = dtw_distance(&deref(a)?.0, &deref(b)?.0).map_err(err(SqStatus::VerifyError))?;
        Ok(())
    })
}

/// Spearman rank correlation of two length-`n` arrays.
///
/// # Safety
/// `x` and `y` must each hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_spearman(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> SqStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = spearman(doubles(x, n)?, doubles(y, n)?).map_err(err(SqStatus::EvalError))?;
        Ok(())
    })
}

/// Equal error rate of genuine vs imposter dissimilarity scores.
///
/// # Safety
/// Arrays must hold the stated counts; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sq_eer(
    genuine: *const f64,
    n_genuine: usize,
    imposter: *const f64,
    n_imposter: usize,
    out_threshold: *mut f64,
    out_rate: *mut f64,
) -> SqStatus {
    guard(|| {
        let t_out = out_ref(out_threshold)?;
        let r_out = out_ref(out_rate)?;
        let g = doubles(genuine, n_genuine)?;
        let i = doubles(imposter, n_imposter)?;
        let all: Vec<f64> = g.iter().chain(i).copied().collect();
        let curve = far_frr(g, i, &threshold_grid(&all)).map_err(err(SqStatus::EvalError))?;
        let (t, r) = eer(&curve).map_err(err(SqStatus::EvalError))?;
        *t_out = t;
        *r_out = r;
        Ok(())
    })
}
