//! C interface to tincalc.
//!
//! TINs are opaque handles created by `tincalc_tin_parse`,
//! `tincalc_tin_read` or `tincalc_tin_generate` and released with
//! `tincalc_tin_free`. Functions return a `TincalcStatus`; on failure a
//! message is available from `tincalc_last_error` until the next call on the
//! same thread. Exact results are returned as `p/q` strings owned by the
//! caller and released with `tincalc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tincalc::fastinner::FastOptions;
use tincalc::geom::{generate_tin, parse_tin, validate_pair, validate_tin, GenParams, Tin};
use tincalc::matching::{best_fit, l2_distance, inner_product, Method};
use tincalc::scalar::to_fraction;
use tincalc::Error;

/// Opaque TIN handle.
pub struct TincalcTin(Tin);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TincalcStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed TIN text or non-UTF-8 input.
    Parse = 2,
    /// A single TIN is invalid (bad triangle, gap, overlap).
    InvalidTin = 3,
    /// The pair is not in general position.
    Degenerate = 4,
    /// `g` is constant in a fit; `s = 0` and `t` are still reported.
    DegenerateFit = 5,
    Io = 6,
    InvalidArgument = 7,
    /// Internal failure (a caught panic).
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TincalcMethod {
    Naive = 0,
    Fast = 1,
}

impl From<TincalcMethod> for Method {
    fn from(m: TincalcMethod) -> Self {
        match m {
            TincalcMethod::Naive => Method::Naive,
            TincalcMethod::Fast => Method::Fast,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> TincalcStatus {
    match e {
        Error::Parse { .. } | Error::BadScalar(_) => TincalcStatus::Parse,
        Error::InvalidTin(_) | Error::DegenerateTriangle | Error::VerticalEdge(..) => TincalcStatus::InvalidTin,
        Error::DegenerateInput(_) => TincalcStatus::Degenerate,
        Error::Io(_) => TincalcStatus::Io,
        Error::InvalidParameter(_) => TincalcStatus::InvalidArgument,
        _ => TincalcStatus::Internal,
    }
}

/// Runs `body`, recording errors and converting panics.
fn guard(body: impl FnOnce() -> Result<TincalcStatus, (TincalcStatus, String)>) -> TincalcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal error");
            TincalcStatus::Internal
        }
    }
}

fn fail(e: Error) -> (TincalcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TincalcStatus, String) {
    (TincalcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn tin_ref<'a>(p: *const TincalcTin, what: &str) -> Result<&'a Tin, (TincalcStatus, String)> {
    p.as_ref().map(|t| &t.0).ok_or_else(|| null(what))
}

unsafe fn text_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TincalcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (TincalcStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn put_tin(out: *mut *mut TincalcTin, t: Tin) {
    *out = Box::into_raw(Box::new(TincalcTin(t)));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut());
}

fn checked(t: Tin) -> Result<Tin, (TincalcStatus, String)> {
    validate_tin(&t).map_err(fail)?;
    Ok(t)
}

fn checked_pair(f: &Tin, g: &Tin) -> Result<(), (TincalcStatus, String)> {
    let rep = validate_pair(f, g);
    if rep.passed() {
        return Ok(());
    }
    let list: Vec<String> = rep.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect();
    Err((TincalcStatus::Degenerate, list.join("\n")))
}

fn options(seed: u64) -> FastOptions {
    FastOptions { validate: false, seed, ..FastOptions::default() }
}

/// Parses TIN text (`TIN 1` format) into a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tincalc_tin_parse(text: *const c_char, out: *mut *mut TincalcTin) -> TincalcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = checked(parse_tin(text_arg(text, "text")?).map_err(fail)?)?;
        put_tin(out, t);
        Ok(TincalcStatus::Ok)
    })
}

/// Reads a TIN file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tincalc_tin_read(path: *const c_char, out: *mut *mut TincalcTin) -> TincalcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = std::fs::read_to_string(text_arg(path, "path")?).map_err(|e| fail(Error::Io(e)))?;
        let t = checked(parse_tin(&text).map_err(fail)?)?;
        put_tin(out, t);
        Ok(TincalcStatus::Ok)
    })
}

/// A random TIN with `triangles` triangles over the unit square.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tincalc_tin_generate(triangles: usize, seed: u64, out: *mut *mut TincalcTin) -> TincalcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_tin(out, generate_tin(&GenParams::new(triangles, seed)).map_err(fail)?);
        Ok(TincalcStatus::Ok)
    })
}

/// # Safety
/// `tin` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tincalc_tin_free(tin: *mut TincalcTin) {
    if !tin.is_null() {
        drop(Box::from_raw(tin));
    }
}

/// Number of triangles, or 0 for a null handle.
///
/// # Safety
/// `tin` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tincalc_tin_num_triangles(tin: *const TincalcTin) -> usize {
    tin.as_ref().map_or(0, |t| t.0.num_triangles())
}

/// Checks general position. Returns `DEGENERATE` with the violation count
/// in `violations` (may be null) and the list in the last error.
///
/// # Safety
/// `f` and `g` must be live handles; `violations` null or valid.
#[no_mangle]
pub unsafe extern "C" fn tincalc_validate_pair(
    f: *const TincalcTin,
    g: *const TincalcTin,
    violations: *mut usize,
) -> TincalcStatus {
    guard(|| {
        let (f, g) = (tin_ref(f, "f")?, tin_ref(g, "g")?);
        let rep = validate_pair(f, g);
        if let Some(v) = violations.as_mut() {
            *v = rep.violations.len();
        }
        checked_pair(f, g)?;
        Ok(TincalcStatus::Ok)
    })
}

/// Exact ∬fg as a `p/q` string.
///
/// # Safety
/// `f`, `g` live handles; `out` a valid pointer. Free the string with
/// `tincalc_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tincalc_inner(
    f: *const TincalcTin,
    g: *const TincalcTin,
    method: TincalcMethod,
    out: *mut *mut c_char,
) -> TincalcStatus {
    guard(|| {
        let (f, g) = (tin_ref(f, "f")?, tin_ref(g, "g")?);
        if out.is_null() {
            return Err(null("out"));
        }
        checked_pair(f, g)?;
        let v = inner_product(f, g, method.into(), &options(0)).map_err(fail)?;
        put_string(out, to_fraction(&v));
        Ok(TincalcStatus::Ok)
    })
}

/// `‖f − g‖₂²` exactly and `‖f − g‖₂` as a 17-digit decimal.
///
/// # Safety
/// As for `tincalc_inner`; both outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tincalc_distance(
    f: *const TincalcTin,
    g: *const TincalcTin,
    method: TincalcMethod,
    squared: *mut *mut c_char,
    decimal: *mut *mut c_char,
) -> TincalcStatus {
    guard(|| {
        let (f, g) = (tin_ref(f, "f")?, tin_ref(g, "g")?);
        if squared.is_null() || decimal.is_null() {
            return Err(null("output"));
        }
        checked_pair(f, g)?;
        let d = l2_distance(f, g, method.into(), &options(0)).map_err(fail)?;
        put_string(squared, to_fraction(&d.squared));
        put_string(decimal, d.decimal);
        Ok(TincalcStatus::Ok)
    })
}

/// Least-squares `s`, `t` with `f ≈ s·g + t` and the exact residual.
/// Returns `DEGENERATE_FIT` (outputs still set) when `g` is constant.
///
/// # Safety
/// As for `tincalc_inner`; all three outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tincalc_match(
    f: *const TincalcTin,
    g: *const TincalcTin,
    method: TincalcMethod,
    s: *mut *mut c_char,
    t: *mut *mut c_char,
    residual2: *mut *mut c_char,
) -> TincalcStatus {
    guard(|| {
        let (f, g) = (tin_ref(f, "f")?, tin_ref(g, "g")?);
        if s.is_null() || t.is_null() || residual2.is_null() {
            return Err(null("output"));
        }
        checked_pair(f, g)?;
        let fit = best_fit(f, g, method.into(), &options(0)).map_err(fail)?;
        put_string(s, to_fraction(&fit.s));
        put_string(t, to_fraction(&fit.t));
        put_string(residual2, to_fraction(&fit.residual2));
        if fit.degenerate {
            set_error("g is constant; s is undetermined and reported as 0");
            return Ok(TincalcStatus::DegenerateFit);
        }
        Ok(TincalcStatus::Ok)
    })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn tincalc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn tincalc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
