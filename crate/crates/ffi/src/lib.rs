//! C interface to `rauzy-core`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`RauzyStatus`]; on failure a description is available from
//! [`rauzy_last_error`] until the next failing call on the same thread.
//! Panics are caught and reported as [`RauzyStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rauzy_core::balanced::{intersection_morphism, BlockMorphism, Caps, IntersectionStatus};
use rauzy_core::cli::{exit_code, parse_substitution};
use rauzy_core::fractal::rauzy_cloud;
use rauzy_core::render::render_ppm;
use rauzy_core::spectral::{char_poly, perron_data};
use rauzy_core::word::Substitution;
use rauzy_core::Error;

/// Result codes. The first five agree with the exit codes of the `rauzy`
/// command line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RauzyStatus {
    Ok = 0,
    /// Unreadable or malformed input, including invalid UTF-8.
    Parse = 1,
    /// Input violates a precondition or a numeric routine failed.
    Invalid = 2,
    /// A resource cap was hit.
    Resource = 3,
    /// No balanced prefix pair was found.
    EmptyIntersection = 4,
    NullPointer = 5,
    /// The output buffer is too small.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque substitution handle.
pub struct RauzySubstitution(Substitution);

/// Opaque block morphism handle.
pub struct RauzyMorphism(BlockMorphism);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: RauzyStatus, msg: impl Into<String>) -> RauzyStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> RauzyStatus {
    let status = match exit_code(&err) {
        1 => RauzyStatus::Parse,
        3 => RauzyStatus::Resource,
        _ => RauzyStatus::Invalid,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> RauzyStatus) -> RauzyStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(RauzyStatus::Panic, "internal panic"))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rauzy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses rules such as `"a -> ab\nb -> ac\nc -> a"`.
///
/// # Safety
/// `text` must be NULL or a NUL-terminated string; `out` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_substitution_parse(
    text: *const c_char,
    out: *mut *mut RauzySubstitution,
) -> RauzyStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(RauzyStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(RauzyStatus::Parse, "input is not valid UTF-8");
        };
        match parse_substitution(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(RauzySubstitution(s)));
                RauzyStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `sub` must be NULL or a handle from [`rauzy_substitution_parse`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn rauzy_substitution_free(sub: *mut RauzySubstitution) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// Alphabet size, or 0 for NULL.
///
/// # Safety
/// `sub` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rauzy_substitution_dim(sub: *const RauzySubstitution) -> usize {
    sub.as_ref().map_or(0, |s| s.0.dim())
}

/// Characteristic polynomial of the incidence matrix, lowest degree first.
/// `*len` receives the number of coefficients (dimension + 1) even when
/// `capacity` is too small.
///
/// # Safety
/// `coeffs` must have room for `capacity` values; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_char_poly(
    sub: *const RauzySubstitution,
    coeffs: *mut i64,
    capacity: usize,
    len: *mut usize,
) -> RauzyStatus {
    guard(|| {
        let (Some(sub), false, false) = (sub.as_ref(), coeffs.is_null(), len.is_null()) else {
            return fail(RauzyStatus::NullPointer, "null argument");
        };
        let p = char_poly(&sub.0.incidence_matrix());
        *len = p.coeffs().len();
        if capacity < p.coeffs().len() {
            return fail(
                RauzyStatus::BufferTooSmall,
                format!("{} coefficients do not fit in {capacity}", p.coeffs().len()),
            );
        }
        ptr::copy_nonoverlapping(p.coeffs().as_ptr(), coeffs, p.coeffs().len());
        RauzyStatus::Ok
    })
}

/// Dominant eigenvalue of the incidence matrix.
///
/// # Safety
/// `sub` must be a live handle and `beta` writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_beta(
    sub: *const RauzySubstitution,
    tolerance: f64,
    beta: *mut f64,
) -> RauzyStatus {
    guard(|| {
        let (Some(sub), false) = (sub.as_ref(), beta.is_null()) else {
            return fail(RauzyStatus::NullPointer, "null argument");
        };
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return fail(RauzyStatus::Invalid, "tolerance must be positive");
        }
        match perron_data(&sub.0.incidence_matrix(), tolerance) {
            Ok(pd) => {
                *beta = pd.beta;
                RauzyStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Block morphism generating the common points of two substitutions.
/// A cap of 0 selects the default. On anything but `RAUZY_STATUS_OK`,
/// `*out` is set to NULL.
///
/// # Safety
/// `first`, `second` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_intersect(
    first: *const RauzySubstitution,
    second: *const RauzySubstitution,
    seed_cap: usize,
    block_len_cap: usize,
    block_count_cap: usize,
    out: *mut *mut RauzyMorphism,
) -> RauzyStatus {
    guard(|| {
        let (Some(s1), Some(s2), false) = (first.as_ref(), second.as_ref(), out.is_null()) else {
            return fail(RauzyStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        let defaults = Caps::default();
        let pick = |v: usize, d: usize| if v == 0 { d } else { v };
        let caps = Caps {
            seed: pick(seed_cap, defaults.seed),
            block_len: pick(block_len_cap, defaults.block_len),
            block_count: pick(block_count_cap, defaults.block_count),
        };
        let report = match intersection_morphism(&s1.0, &s2.0, caps) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        match (report.status, report.morphism) {
            (IntersectionStatus::Success, Some(m)) => {
                *out = Box::into_raw(Box::new(RauzyMorphism(m)));
                RauzyStatus::Ok
            }
            (IntersectionStatus::CapExceeded, _) => fail(RauzyStatus::Resource, report.message),
            (_, _) => fail(RauzyStatus::EmptyIntersection, report.message),
        }
    })
}

/// # Safety
/// `m` must be NULL or a live handle from [`rauzy_intersect`].
#[no_mangle]
pub unsafe extern "C" fn rauzy_morphism_free(m: *mut RauzyMorphism) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of blocks, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rauzy_morphism_block_count(m: *const RauzyMorphism) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Text form of the morphism (`block A = a | a`, `phi A -> AB` lines).
/// Free the result with [`rauzy_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_morphism_to_text(
    m: *const RauzyMorphism,
    out: *mut *mut c_char,
) -> RauzyStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else {
            return fail(RauzyStatus::NullPointer, "null argument");
        };
        match CString::new(m.0.to_text()) {
            Ok(s) => {
                *out = s.into_raw();
                RauzyStatus::Ok
            }
            Err(_) => fail(RauzyStatus::Invalid, "morphism text contains NUL"),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rauzy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Renders the Rauzy fractal from `points` prefixes as a binary PPM file
/// image. Free the buffer with [`rauzy_buffer_free`].
///
/// # Safety
/// `sub` must be a live handle; `data` and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rauzy_render_ppm(
    sub: *const RauzySubstitution,
    points: usize,
    width: usize,
    height: usize,
    subtiles: bool,
    data: *mut *mut u8,
    len: *mut usize,
) -> RauzyStatus {
    guard(|| {
        let (Some(sub), false, false) = (sub.as_ref(), data.is_null(), len.is_null()) else {
            return fail(RauzyStatus::NullPointer, "null argument");
        };
        *data = ptr::null_mut();
        *len = 0;
        let image = perron_data(&sub.0.incidence_matrix(), rauzy_core::spectral::DEFAULT_TOLERANCE)
            .and_then(|pd| rauzy_cloud(&sub.0, points, &pd))
            .and_then(|cloud| {
                let cloud = if subtiles { cloud } else { cloud.unlabeled() };
                render_ppm(&cloud, width, height)
            });
        match image {
            Ok(img) => {
                let bytes = img.to_ppm().into_boxed_slice();
                *len = bytes.len();
                *data = Box::into_raw(bytes).cast::<u8>();
                RauzyStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `data` and `len` must come from one call to [`rauzy_render_ppm`].
#[no_mangle]
pub unsafe extern "C" fn rauzy_buffer_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}
