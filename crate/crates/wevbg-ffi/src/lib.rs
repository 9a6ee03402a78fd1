//! C ABI for the block eigenspace background pipeline: load or supply
//! frames, train per-block models with a chosen eigenvector selection,
//! then estimate backgrounds and foreground masks frame by frame.
//!
//! Conventions:
//! - Handles (`wevbg_frames`, `wevbg_models`) are opaque; free them with
//!   the matching `_free` function exactly once. `_free` accepts null.
//! - Every fallible function returns a [`wevbg_status`]; on failure a
//!   human-readable message is available from
//!   [`wevbg_last_error_message`] until the same thread's next failure.
//! - Pixel buffers are row-major `f64` in `[0, 1]`; masks are one byte
//!   per pixel, `1` foreground, `0` background.
//! - No function panics across the boundary: internal panics are caught
//!   and reported as [`wevbg_status::WEVBG_PANIC`].

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use wevbg::eigenmodel::Selection;
use wevbg::frames::FrameSequence;
use wevbg::io::load_frames;
use wevbg::segmenter::{tile_blocks, train_block_models, ModelSet};
use wevbg::Error;

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum wevbg_status {
    /// The call succeeded.
    WEVBG_OK = 0,
    /// A pointer was null, a buffer had the wrong size, or a parameter
    /// (selection string, block size, threshold, ...) was rejected.
    WEVBG_INVALID_ARGUMENT = 1,
    /// A named file or directory does not exist or matched nothing.
    WEVBG_NOT_FOUND = 2,
    /// Data was found but could not be decoded (image, model container,
    /// or label file).
    WEVBG_FORMAT = 3,
    /// A numerical routine could not produce a usable result.
    WEVBG_NUMERIC = 4,
    /// The operating system reported an I/O failure.
    WEVBG_IO = 5,
    /// An internal invariant broke; the library state is still valid.
    WEVBG_PANIC = 6,
}

/// An owned, immutable frame sequence.
pub struct wevbg_frames(FrameSequence);

/// A trained set of per-block background models.
pub struct wevbg_models(ModelSet);

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty message"));
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).expect("sanitized message");
    });
}

fn status_for(e: &Error) -> wevbg_status {
    match e {
        Error::NotFound(_) => wevbg_status::WEVBG_NOT_FOUND,
        Error::Format(_) | Error::Label(_) => wevbg_status::WEVBG_FORMAT,
        Error::Convergence(_) | Error::DegenerateInput(_) | Error::SkippedDegenerate(_) => {
            wevbg_status::WEVBG_NUMERIC
        }
        Error::Io(_) => wevbg_status::WEVBG_IO,
        _ => wevbg_status::WEVBG_INVALID_ARGUMENT,
    }
}

fn fail(e: &Error) -> wevbg_status {
    set_error(&e.to_string());
    status_for(e)
}

fn invalid(msg: &str) -> wevbg_status {
    set_error(msg);
    wevbg_status::WEVBG_INVALID_ARGUMENT
}

/// Runs a fallible body, converting panics into `WEVBG_PANIC`.
fn guarded(body: impl FnOnce() -> wevbg_status) -> wevbg_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            wevbg_status::WEVBG_PANIC
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, wevbg_status> {
    if ptr.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wevbg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing this thread's most recent failure, or an empty
/// string when nothing failed yet. The pointer stays valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wevbg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads frames from a directory of PGM/PNG files whose names match
/// `pattern` (e.g. `"*.pgm"`), sorted by filename. On success stores a
/// new handle in `*out`.
///
/// # Safety
/// `dir` and `pattern` must be NUL-terminated strings; `out` must be a
/// valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wevbg_frames_load(
    dir: *const c_char,
    pattern: *const c_char,
    out: *mut *mut wevbg_frames,
) -> wevbg_status {
    guarded(|| {
        if out.is_null() {
            return invalid("out is null");
        }
        let dir = match utf8_arg(dir, "dir") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let pattern = match utf8_arg(pattern, "pattern") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match load_frames(Path::new(dir), pattern) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(wevbg_frames(seq)));
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a frame sequence from a packed buffer of `n_frames`
/// consecutive row-major `height`×`width` images, values in `[0, 1]`.
/// The buffer is copied; the caller keeps ownership of `pixels`.
///
/// # Safety
/// `pixels` must point to `n_frames * height * width` doubles; `out`
/// must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wevbg_frames_from_buffer(
    height: usize,
    width: usize,
    n_frames: usize,
    pixels: *const f64,
    out: *mut *mut wevbg_frames,
) -> wevbg_status {
    guarded(|| {
        if out.is_null() {
            return invalid("out is null");
        }
        if pixels.is_null() {
            return invalid("pixels is null");
        }
        let per_frame = match height.checked_mul(width) {
            Some(p) if p > 0 => p,
            _ => return invalid(&format!("frame shape {height}x{width} has no pixels")),
        };
        if per_frame.checked_mul(n_frames).is_none() {
            return invalid("buffer length overflows");
        }
        let frames: Vec<Vec<f64>> = (0..n_frames)
            .map(|i| std::slice::from_raw_parts(pixels.add(i * per_frame), per_frame).to_vec())
            .collect();
        match FrameSequence::new(height, width, frames, None, "buffer".into()) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(wevbg_frames(seq)));
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of frames behind a handle; zero for null.
///
/// # Safety
/// `frames` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn wevbg_frames_count(frames: *const wevbg_frames) -> usize {
    if frames.is_null() {
        return 0;
    }
    (*frames).0.len()
}

/// Stores the frame shape in `*out_height` and `*out_width`.
///
/// # Safety
/// `frames` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wevbg_frames_shape(
    frames: *const wevbg_frames,
    out_height: *mut usize,
    out_width: *mut usize,
) -> wevbg_status {
    guarded(|| {
        if frames.is_null() {
            return invalid("frames is null");
        }
        if out_height.is_null() || out_width.is_null() {
            return invalid("shape out pointer is null");
        }
        *out_height = (*frames).0.height;
        *out_width = (*frames).0.width;
        wevbg_status::WEVBG_OK
    })
}

/// Releases a frames handle. Null is ignored.
///
/// # Safety
/// `frames` must be null or a live handle, and must not be used again.
#[no_mangle]
pub unsafe extern "C" fn wevbg_frames_free(frames: *mut wevbg_frames) {
    if !frames.is_null() {
        drop(Box::from_raw(frames));
    }
}

/// Trains per-block background models on `frames`, tiling each frame
/// with `block_height`×`block_width` blocks and keeping the eigenvector
/// subset described by `selection` (`"strongest:k"`, `"weakest:k"`,
/// `"idx:1,3,5"`, or `"all"`). On success stores a new handle in `*out`.
///
/// # Safety
/// `frames` must be a live handle; `selection` must be a NUL-terminated
/// string; `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wevbg_models_train(
    frames: *const wevbg_frames,
    block_height: usize,
    block_width: usize,
    selection: *const c_char,
    out: *mut *mut wevbg_models,
) -> wevbg_status {
    guarded(|| {
        if out.is_null() {
            return invalid("out is null");
        }
        if frames.is_null() {
            return invalid("frames is null");
        }
        let spec = match utf8_arg(selection, "selection") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let selection = match Selection::parse(spec) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let seq = &(*frames).0;
        let result = tile_blocks((seq.height, seq.width), (block_height, block_width))
            .and_then(|grid| train_block_models(seq, &grid, &selection));
        match result {
            Ok(set) => {
                *out = Box::into_raw(Box::new(wevbg_models(set)));
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serializes a model set into `dir` (created if missing).
///
/// # Safety
/// `models` must be a live handle; `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn wevbg_models_save(
    models: *const wevbg_models,
    dir: *const c_char,
) -> wevbg_status {
    guarded(|| {
        if models.is_null() {
            return invalid("models is null");
        }
        let dir = match utf8_arg(dir, "dir") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match (*models).0.save(Path::new(dir)) {
            Ok(()) => wevbg_status::WEVBG_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Loads a model set serialized by [`wevbg_models_save`]. On success
/// stores a new handle in `*out`.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be a valid pointer
/// to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn wevbg_models_load(
    dir: *const c_char,
    out: *mut *mut wevbg_models,
) -> wevbg_status {
    guarded(|| {
        if out.is_null() {
            return invalid("out is null");
        }
        let dir = match utf8_arg(dir, "dir") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match ModelSet::load(Path::new(dir)) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(wevbg_models(set)));
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Pixels per frame the models expect; zero for null.
///
/// # Safety
/// `models` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wevbg_models_pixel_count(models: *const wevbg_models) -> usize {
    if models.is_null() {
        return 0;
    }
    let (h, w) = (*models).0.grid.frame_shape;
    h * w
}

/// Releases a models handle. Null is ignored.
///
/// # Safety
/// `models` must be null or a live handle, and must not be used again.
#[no_mangle]
pub unsafe extern "C" fn wevbg_models_free(models: *mut wevbg_models) {
    if !models.is_null() {
        drop(Box::from_raw(models));
    }
}

unsafe fn frame_arg<'a>(
    models: *const wevbg_models,
    frame: *const f64,
    pixel_count: usize,
) -> Result<(&'a ModelSet, &'a [f64]), wevbg_status> {
    if models.is_null() {
        return Err(invalid("models is null"));
    }
    if frame.is_null() {
        return Err(invalid("frame is null"));
    }
    let set = &(*models).0;
    let (h, w) = set.grid.frame_shape;
    if pixel_count != h * w {
        return Err(invalid(&format!(
            "frame has {pixel_count} pixels, models expect {}",
            h * w
        )));
    }
    Ok((set, std::slice::from_raw_parts(frame, pixel_count)))
}

/// Estimates the background of one frame into `out_background`, a
/// caller-owned buffer of `pixel_count` doubles.
///
/// # Safety
/// `models` must be a live handle; `frame` and `out_background` must
/// point to `pixel_count` doubles each.
#[no_mangle]
pub unsafe extern "C" fn wevbg_estimate_background(
    models: *const wevbg_models,
    frame: *const f64,
    pixel_count: usize,
    out_background: *mut f64,
) -> wevbg_status {
    guarded(|| {
        if out_background.is_null() {
            return invalid("out_background is null");
        }
        let (set, frame) = match frame_arg(models, frame, pixel_count) {
            Ok(pair) => pair,
            Err(status) => return status,
        };
        match set.estimate_background(frame) {
            Ok(background) => {
                std::ptr::copy_nonoverlapping(background.as_ptr(), out_background, pixel_count);
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Segments one frame: pixels whose absolute residual against the
/// estimated background exceeds `tau` are marked `1` in `out_mask`, a
/// caller-owned buffer of `pixel_count` bytes.
///
/// # Safety
/// `models` must be a live handle; `frame` must point to `pixel_count`
/// doubles and `out_mask` to `pixel_count` bytes.
#[no_mangle]
pub unsafe extern "C" fn wevbg_segment(
    models: *const wevbg_models,
    frame: *const f64,
    pixel_count: usize,
    tau: f64,
    out_mask: *mut u8,
) -> wevbg_status {
    guarded(|| {
        if out_mask.is_null() {
            return invalid("out_mask is null");
        }
        let (set, frame) = match frame_arg(models, frame, pixel_count) {
            Ok(pair) => pair,
            Err(status) => return status,
        };
        match set.segment(frame, tau) {
            Ok(segmentation) => {
                for (i, &fg) in segmentation.mask.iter().enumerate() {
                    *out_mask.add(i) = fg as u8;
                }
                wevbg_status::WEVBG_OK
            }
            Err(e) => fail(&e),
        }
    })
}
