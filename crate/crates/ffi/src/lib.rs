//! C ABI over the gerbecheck library.
//!
//! Bundles, reports and expressions cross the boundary as opaque handles.
//! Every fallible call returns a `GerbeStatus` code and writes its result
//! through an out pointer. Strings returned to C are owned by the caller and
//! must be released with `gerbe_string_free`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gerbecheck::bundle::{load_bundle, parse_bundle, Bundle};
use gerbecheck::report::Report;
use gerbecheck::suites::run_suite;
use gerbecheck::symexpr::{parse, Expr, Oracle, Point};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GerbeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidBundle = 4,
    UnknownSuite = 5,
    ParseError = 6,
    EvalError = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Loaded geometry bundle.
pub struct GerbeBundle(Bundle);

/// Result of a suite run.
pub struct GerbeReport(Report);

/// Parsed scalar expression.
pub struct GerbeExpr(Expr);

fn guard(f: impl FnOnce() -> GerbeStatus) -> GerbeStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(GerbeStatus::Panic)
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, GerbeStatus> {
    if s.is_null() {
        return Err(GerbeStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| GerbeStatus::InvalidUtf8)
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Loads a bundle from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_bundle_load(path: *const c_char, out: *mut *mut GerbeBundle) -> GerbeStatus {
    guard(|| {
        if out.is_null() {
            return GerbeStatus::NullPointer;
        }
        let path = match text(path) {
            Ok(p) => p,
            Err(e) => return e,
        };
        match load_bundle(path) {
            Ok(b) => {
                put(out, GerbeBundle(b));
                GerbeStatus::Ok
            }
            Err(gerbecheck::bundle::BundleError::Io { .. }) => GerbeStatus::Io,
            Err(_) => GerbeStatus::InvalidBundle,
        }
    })
}

/// Parses a bundle from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_bundle_parse(json: *const c_char, out: *mut *mut GerbeBundle) -> GerbeStatus {
    guard(|| {
        if out.is_null() {
            return GerbeStatus::NullPointer;
        }
        let json = match text(json) {
            Ok(j) => j,
            Err(e) => return e,
        };
        match parse_bundle(json) {
            Ok(b) => {
                put(out, GerbeBundle(b));
                GerbeStatus::Ok
            }
            Err(_) => GerbeStatus::InvalidBundle,
        }
    })
}

/// Releases a bundle. Null is ignored.
///
/// # Safety
/// `bundle` must come from `gerbe_bundle_load` or `gerbe_bundle_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gerbe_bundle_free(bundle: *mut GerbeBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Runs a named suite with the given sampling parameters.
///
/// # Safety
/// `bundle` must be a live handle, `suite` a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_run_suite(
    bundle: *const GerbeBundle,
    suite: *const c_char,
    samples: usize,
    tol: f64,
    seed: u64,
    out: *mut *mut GerbeReport,
) -> GerbeStatus {
    guard(|| {
        if bundle.is_null() || out.is_null() {
            return GerbeStatus::NullPointer;
        }
        let suite = match text(suite) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if samples == 0 || tol.is_nan() || tol <= 0.0 {
            return GerbeStatus::InvalidArgument;
        }
        match run_suite(&(*bundle).0, suite, &Oracle { samples, tol, seed }) {
            Ok(r) => {
                put(out, GerbeReport(r));
                GerbeStatus::Ok
            }
            Err(_) => GerbeStatus::UnknownSuite,
        }
    })
}

/// Returns 1 if every check passed or was skipped, 0 otherwise or for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gerbe_report_passed(report: *const GerbeReport) -> i32 {
    (!report.is_null() && (*report).0.passed()) as i32
}

/// Number of checks in a report, 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gerbe_report_len(report: *const GerbeReport) -> usize {
    if report.is_null() {
        0
    } else {
        (*report).0.entries.len()
    }
}

/// Renders a report as text (`structured` = 0) or JSON lines (`structured` != 0).
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_report_text(
    report: *const GerbeReport,
    structured: i32,
    out: *mut *mut c_char,
) -> GerbeStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return GerbeStatus::NullPointer;
        }
        let r = &(*report).0;
        *out = owned(if structured != 0 { r.to_json_lines() } else { r.to_text() });
        GerbeStatus::Ok
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from `gerbe_run_suite` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gerbe_report_free(report: *mut GerbeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gerbe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scalar expression.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_expr_parse(src: *const c_char, out: *mut *mut GerbeExpr) -> GerbeStatus {
    guard(|| {
        if out.is_null() {
            return GerbeStatus::NullPointer;
        }
        let src = match text(src) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match parse(src) {
            Ok(e) => {
                put(out, GerbeExpr(e));
                GerbeStatus::Ok
            }
            Err(_) => GerbeStatus::ParseError,
        }
    })
}

/// Evaluates an expression at the point `names[i] = values[i]` for `i < len`.
///
/// # Safety
/// `expr` must be a live handle, `names` and `values` arrays of `len` entries
/// (either may be null when `len` is 0) and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_expr_eval(
    expr: *const GerbeExpr,
    names: *const *const c_char,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> GerbeStatus {
    guard(|| {
        if expr.is_null() || out.is_null() || (len > 0 && (names.is_null() || values.is_null())) {
            return GerbeStatus::NullPointer;
        }
        let mut p = Point::new();
        for i in 0..len {
            match text(*names.add(i)) {
                Ok(n) => p.set(n, *values.add(i)),
                Err(e) => return e,
            }
        }
        match (*expr).0.eval(&p) {
            Ok(v) => {
                *out = v;
                GerbeStatus::Ok
            }
            Err(_) => GerbeStatus::EvalError,
        }
    })
}

/// Renders an expression in its canonical text form.
///
/// # Safety
/// `expr` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gerbe_expr_text(expr: *const GerbeExpr, out: *mut *mut c_char) -> GerbeStatus {
    guard(|| {
        if expr.is_null() || out.is_null() {
            return GerbeStatus::NullPointer;
        }
        *out = owned((*expr).0.to_string());
        GerbeStatus::Ok
    })
}

/// Releases an expression. Null is ignored.
///
/// # Safety
/// `expr` must come from `gerbe_expr_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gerbe_expr_free(expr: *mut GerbeExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}
