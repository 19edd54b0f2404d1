//! C ABI for the tubeseg segmentation pipeline.
//!
//! The surface is deliberately small: fill a [`TubesegConfig`] (start from
//! [`tubeseg_config_default`]), hand `tubeseg_segment` a row-major `double`
//! image in [0, 1], and read the mask and iteration trace back out of the
//! opaque result handle.  All functions are panic-safe: a Rust panic is
//! caught and surfaced as `TUBESEG_STATUS_PANIC` instead of unwinding
//! across the boundary.
//!
//! Error details beyond the status code are available per thread via
//! [`tubeseg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tubeseg::image::Image;
use tubeseg::segmenter::{run, Mode, SegmenterConfig, TerminationReason};
use tubeseg::sure::SureMode;
use tubeseg::tight_frame::Family;
use tubeseg::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubesegStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A configuration value is out of domain.
    InvalidParameter = 2,
    /// Image dimensions are unusable (zero, overflowing, or too small for
    /// the configured filters).
    InvalidDimension = 3,
    /// The pixel data could not be processed (e.g. non-finite values).
    DataError = 4,
    /// A caller-supplied buffer is too small.
    BufferTooSmall = 5,
    /// An internal panic was caught; see `tubeseg_last_error_message`.
    Panic = 6,
}

/// Segmentation mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubesegMode {
    Tfa = 0,
    Tfae = 1,
}

/// Tight-frame family used by the denoising step.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubesegTransform {
    Framelet = 0,
    Curvelet = 1,
}

/// Source of the SURE threshold estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubesegSureMode {
    Coefficients = 0,
    Image = 1,
}

/// Segmentation settings; mirror of the library configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TubesegConfig {
    /// Gaussian derivative scale (> 0).
    pub sigma: f64,
    /// Gradient-magnitude seeding threshold (> 0).
    pub epsilon: f64,
    pub mode: TubesegMode,
    pub transform: TubesegTransform,
    pub sure_mode: TubesegSureMode,
    /// Iteration cap (>= 1).
    pub max_iterations: u32,
    /// Consecutive no-shrink iterations tolerated before fallback (>= 1).
    pub stall_patience: u32,
}

/// Opaque segmentation result; release with `tubeseg_result_free`.
pub struct TubesegResult {
    width: usize,
    height: usize,
    mask: Vec<u8>,
    vessel_count: usize,
    iterations: usize,
    reason: TerminationReason,
    trace_jsonl: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: TubesegStatus, message: &str) -> TubesegStatus {
    set_last_error(message);
    status
}

fn status_for(e: &Error) -> TubesegStatus {
    match e {
        Error::Parameter(_) => TubesegStatus::InvalidParameter,
        Error::Dimension(_) => TubesegStatus::InvalidDimension,
        _ => TubesegStatus::DataError,
    }
}

fn guarded(f: impl FnOnce() -> TubesegStatus) -> TubesegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TubesegStatus::Panic, "internal panic in tubeseg"),
    }
}

/// Returns the library defaults (sigma 2, epsilon 0.02, tfae, curvelet,
/// coefficient-domain SURE, 50 iterations, patience 3).
#[no_mangle]
pub extern "C" fn tubeseg_config_default() -> TubesegConfig {
    let cfg = SegmenterConfig::default();
    TubesegConfig {
        sigma: cfg.sigma,
        epsilon: cfg.epsilon,
        mode: TubesegMode::Tfae,
        transform: TubesegTransform::Curvelet,
        sure_mode: TubesegSureMode::Coefficients,
        max_iterations: cfg.max_iterations as u32,
        stall_patience: cfg.stall_patience as u32,
    }
}

fn to_library_config(config: &TubesegConfig) -> SegmenterConfig {
    SegmenterConfig {
        sigma: config.sigma,
        epsilon: config.epsilon,
        mode: match config.mode {
            TubesegMode::Tfa => Mode::Tfa,
            TubesegMode::Tfae => Mode::Tfae,
        },
        transform: match config.transform {
            TubesegTransform::Framelet => Family::Framelet,
            TubesegTransform::Curvelet => Family::Curvelet,
        },
        sure_mode: match config.sure_mode {
            TubesegSureMode::Coefficients => SureMode::Coefficients,
            TubesegSureMode::Image => SureMode::Image,
        },
        max_iterations: config.max_iterations as usize,
        stall_patience: config.stall_patience as usize,
    }
}

/// Segments a row-major `width * height` image of doubles in [0, 1]
/// (values are clamped into that range) and stores a result handle in
/// `out_result`.  On any failure `out_result` is left untouched.
///
/// # Safety
/// `pixels` must point to at least `width * height` readable doubles and
/// `out_result` to a writable pointer slot; the usual aliasing rules apply.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_segment(
    pixels: *const f64,
    width: usize,
    height: usize,
    config: *const TubesegConfig,
    out_result: *mut *mut TubesegResult,
) -> TubesegStatus {
    guarded(|| {
        if pixels.is_null() || config.is_null() || out_result.is_null() {
            return fail(TubesegStatus::NullArgument, "null pointer argument");
        }
        let Some(len) = width.checked_mul(height) else {
            return fail(TubesegStatus::InvalidDimension, "width * height overflows");
        };
        if len == 0 {
            return fail(TubesegStatus::InvalidDimension, "image has zero pixels");
        }
        let data = unsafe { std::slice::from_raw_parts(pixels, len) };
        if data.iter().any(|v| !v.is_finite()) {
            return fail(TubesegStatus::DataError, "pixel data contains non-finite values");
        }
        let img = match Image::from_rows(
            width,
            height,
            data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        ) {
            Ok(img) => img,
            Err(e) => return fail(status_for(&e), &e.to_string()),
        };

        let cfg = to_library_config(unsafe { &*config });
        let (mask, trace) = match run(&img, &cfg) {
            Ok(pair) => pair,
            Err(e) => return fail(status_for(&e), &e.to_string()),
        };

        let mut mask_bytes = Vec::with_capacity(len);
        for row in 0..height {
            for col in 0..width {
                mask_bytes.push(mask.get(row, col) as u8);
            }
        }
        let trace_jsonl =
            CString::new(trace.to_jsonl()).unwrap_or_default();
        let result = Box::new(TubesegResult {
            width,
            height,
            vessel_count: mask.count(),
            mask: mask_bytes,
            iterations: trace.iterations(),
            reason: trace.reason(),
            trace_jsonl,
        });
        unsafe { *out_result = Box::into_raw(result) };
        clear_last_error();
        TubesegStatus::Ok
    })
}

/// Image width of the result, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_width(result: *const TubesegResult) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { (*result).width }
}

/// Image height of the result, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_height(result: *const TubesegResult) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { (*result).height }
}

/// Number of iterations the segmentation executed.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_iterations(result: *const TubesegResult) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { (*result).iterations }
}

/// Number of vessel pixels in the mask.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_vessel_count(result: *const TubesegResult) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { (*result).vessel_count }
}

const REASON_EMPTY_SET: &[u8] = b"empty_set\0";
const REASON_STALL_FALLBACK: &[u8] = b"stall_fallback\0";
const REASON_MAX_ITERATIONS: &[u8] = b"max_iterations\0";

/// Termination reason as a static NUL-terminated string ("empty_set",
/// "stall_fallback", or "max_iterations"); null for a null handle.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_reason(result: *const TubesegResult) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    let bytes: &[u8] = match unsafe { (*result).reason } {
        TerminationReason::EmptySet => REASON_EMPTY_SET,
        TerminationReason::StallFallback => REASON_STALL_FALLBACK,
        TerminationReason::MaxIterations => REASON_MAX_ITERATIONS,
    };
    bytes.as_ptr() as *const c_char
}

/// Copies the row-major 0/1 mask into `out` (`out_len` >= width * height).
///
/// # Safety
/// `out` must point to `out_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_copy_mask(
    result: *const TubesegResult,
    out: *mut u8,
    out_len: usize,
) -> TubesegStatus {
    guarded(|| {
        if result.is_null() || out.is_null() {
            return fail(TubesegStatus::NullArgument, "null pointer argument");
        }
        let mask = unsafe { &(*result).mask };
        if out_len < mask.len() {
            return fail(
                TubesegStatus::BufferTooSmall,
                "mask buffer smaller than width * height",
            );
        }
        unsafe { std::ptr::copy_nonoverlapping(mask.as_ptr(), out, mask.len()) };
        TubesegStatus::Ok
    })
}

/// Iteration trace as JSON lines (one object per iteration; empty string
/// for zero-iteration runs).  The pointer stays valid until the handle is
/// freed.
///
/// # Safety
/// `result` must be null or a live handle from `tubeseg_segment`.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_trace_jsonl(
    result: *const TubesegResult,
) -> *const c_char {
    if result.is_null() {
        return std::ptr::null();
    }
    unsafe { (*result).trace_jsonl.as_ptr() }
}

/// Releases a result handle; null is a no-op.
///
/// # Safety
/// `result` must be a pointer returned by `tubeseg_segment` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn tubeseg_result_free(result: *mut TubesegResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded.  The pointer is invalidated by the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn tubeseg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tubeseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    /// A bright vertical ridge, the same shape the library tests use.
    fn ridge_pixels(width: usize, height: usize) -> Vec<f64> {
        let mut data = Vec::with_capacity(width * height);
        for _row in 0..height {
            for col in 0..width {
                let d = col as f64 - width as f64 / 2.0;
                data.push(0.1 + 0.8 * (-d * d / 8.0).exp());
            }
        }
        data
    }

    fn segment_ridge(config: &TubesegConfig) -> (TubesegStatus, *mut TubesegResult) {
        let pixels = ridge_pixels(48, 48);
        let mut handle: *mut TubesegResult = std::ptr::null_mut();
        let status =
            unsafe { tubeseg_segment(pixels.as_ptr(), 48, 48, config, &mut handle) };
        (status, handle)
    }

    #[test]
    fn segments_a_ridge_end_to_end() {
        let config = tubeseg_config_default();
        let (status, handle) = segment_ridge(&config);
        assert_eq!(status, TubesegStatus::Ok);
        assert!(!handle.is_null());
        assert!(tubeseg_last_error_message().is_null());

        unsafe {
            assert_eq!(tubeseg_result_width(handle), 48);
            assert_eq!(tubeseg_result_height(handle), 48);
            assert!(tubeseg_result_iterations(handle) >= 1);

            let reason = CStr::from_ptr(tubeseg_result_reason(handle));
            assert!(["empty_set", "stall_fallback", "max_iterations"]
                .contains(&reason.to_str().unwrap()));

            let mut mask = vec![0u8; 48 * 48];
            assert_eq!(
                tubeseg_result_copy_mask(handle, mask.as_mut_ptr(), mask.len()),
                TubesegStatus::Ok
            );
            assert!(mask.iter().all(|&v| v <= 1));
            let ones = mask.iter().filter(|&&v| v == 1).count();
            assert_eq!(ones, tubeseg_result_vessel_count(handle));
            assert!(ones > 0);
            // The ridge core is vessel, the far background is not.
            assert_eq!(mask[24 * 48 + 24], 1);
            assert_eq!(mask[24 * 48 + 2], 0);

            let trace = CStr::from_ptr(tubeseg_result_trace_jsonl(handle))
                .to_str()
                .unwrap();
            assert!(trace.contains("\"iter\":0"));
            assert!(trace.contains("\"reason\""));

            tubeseg_result_free(handle);
        }
    }

    #[test]
    fn null_arguments_are_reported() {
        let config = tubeseg_config_default();
        let pixels = ridge_pixels(48, 48);
        let mut handle: *mut TubesegResult = std::ptr::null_mut();
        unsafe {
            assert_eq!(
                tubeseg_segment(std::ptr::null(), 48, 48, &config, &mut handle),
                TubesegStatus::NullArgument
            );
            assert_eq!(
                tubeseg_segment(pixels.as_ptr(), 48, 48, std::ptr::null(), &mut handle),
                TubesegStatus::NullArgument
            );
            assert_eq!(
                tubeseg_segment(pixels.as_ptr(), 48, 48, &config, std::ptr::null_mut()),
                TubesegStatus::NullArgument
            );
        }
        assert!(handle.is_null());
        assert!(!tubeseg_last_error_message().is_null());
    }

    #[test]
    fn invalid_parameters_and_dimensions_are_distinguished() {
        let mut config = tubeseg_config_default();
        config.sigma = -1.0;
        let (status, handle) = segment_ridge(&config);
        assert_eq!(status, TubesegStatus::InvalidParameter);
        assert!(handle.is_null());
        let message = unsafe {
            CStr::from_ptr(tubeseg_last_error_message())
                .to_str()
                .unwrap()
                .to_owned()
        };
        assert!(message.contains("sigma"), "unhelpful message: {message}");

        let config = tubeseg_config_default();
        let pixels = ridge_pixels(48, 48);
        let mut handle: *mut TubesegResult = std::ptr::null_mut();
        let status = unsafe { tubeseg_segment(pixels.as_ptr(), 0, 0, &config, &mut handle) };
        assert_eq!(status, TubesegStatus::InvalidDimension);
    }

    #[test]
    fn non_finite_pixels_are_a_data_error() {
        let config = tubeseg_config_default();
        let mut pixels = ridge_pixels(48, 48);
        pixels[5] = f64::NAN;
        let mut handle: *mut TubesegResult = std::ptr::null_mut();
        let status =
            unsafe { tubeseg_segment(pixels.as_ptr(), 48, 48, &config, &mut handle) };
        assert_eq!(status, TubesegStatus::DataError);
    }

    #[test]
    fn small_mask_buffers_are_rejected() {
        let config = tubeseg_config_default();
        let (status, handle) = segment_ridge(&config);
        assert_eq!(status, TubesegStatus::Ok);
        let mut tiny = vec![0u8; 7];
        unsafe {
            assert_eq!(
                tubeseg_result_copy_mask(handle, tiny.as_mut_ptr(), tiny.len()),
                TubesegStatus::BufferTooSmall
            );
            tubeseg_result_free(handle);
        }
    }

    #[test]
    fn freeing_null_is_a_no_op_and_version_is_exposed() {
        unsafe { tubeseg_result_free(std::ptr::null_mut()) };
        let version = unsafe { CStr::from_ptr(tubeseg_version()) };
        assert!(!version.to_str().unwrap().is_empty());
    }

    #[test]
    fn generated_header_declares_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("tubeseg.h");
        let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
        for needle in [
            "TUBESEG_H",
            "tubeseg_segment",
            "tubeseg_result_free",
            "tubeseg_config_default",
            "TubesegStatus",
            "TubesegConfig",
        ] {
            assert!(text.contains(needle), "header missing {needle}");
        }
    }
}
