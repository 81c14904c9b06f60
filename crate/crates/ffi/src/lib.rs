//! C interface to the scenario runner.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with `mc_scenario_free` / `mc_report_free`. Every fallible call returns an
//! [`McStatus`]; the message of the last failure on the calling thread is
//! available from `mc_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use microcontinuum::harness::{parse_scenario, run, Regime, RunReport, Scenario};
use microcontinuum::Error;

/// Status of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON.
    Parse = 3,
    /// Well-formed JSON that violates the scenario schema.
    Schema = 4,
    /// Scenario rejected before running (unstable step, missing field).
    Invalid = 5,
    /// Non-finite values or a state leaving its admissible range.
    NumericBlowUp = 6,
    OutOfRange = 7,
    Internal = 8,
}

/// Parsed, validated scenario.
pub struct McScenario(Scenario);

/// Result of running a scenario.
pub struct McReport {
    report: RunReport,
    laws: Vec<(CString, f64, f64, f64, bool)>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> McStatus {
    match e {
        Error::Parse(_) => McStatus::Parse,
        Error::Schema { .. } => McStatus::Schema,
        Error::NumericBlowUp(_) | Error::VoidFractionOutOfRange { .. } | Error::NonFiniteEnergy | Error::NonFiniteDensity => {
            McStatus::NumericBlowUp
        }
        _ => McStatus::Invalid,
    }
}

fn guard(f: impl FnOnce() -> Result<(), McStatus>) -> McStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside microcontinuum");
            McStatus::Internal
        }
    }
}

fn fail(e: Error) -> McStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, McStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(McStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(e.to_string());
        McStatus::InvalidUtf8
    })
}

fn null<T>(p: *const T, what: &str) -> Result<(), McStatus> {
    if p.is_null() {
        set_error(format!("null {what}"));
        Err(McStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread; empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn mc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn mc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates scenario JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_scenario_parse(json: *const c_char, out: *mut *mut McScenario) -> McStatus {
    guard(|| {
        null(out, "output pointer")?;
        *out = ptr::null_mut();
        let s = parse_scenario(text(json)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(McScenario(s)));
        Ok(())
    })
}

/// Built-in scenario for a regime name (`free`, `scs`, `gnr`, `material`,
/// `voids`, `mixture`, `variational`).
///
/// # Safety
/// `regime` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_scenario_default(regime: *const c_char, seed: u64, out: *mut *mut McScenario) -> McStatus {
    guard(|| {
        null(out, "output pointer")?;
        *out = ptr::null_mut();
        let r: Regime = text(regime)?.parse().map_err(fail)?;
        *out = Box::into_raw(Box::new(McScenario(Scenario::minimal(r, seed))));
        Ok(())
    })
}

/// Replaces the seed of a scenario.
///
/// # Safety
/// `scenario` must come from this library and not have been freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_scenario_set_seed(scenario: *mut McScenario, seed: u64) -> McStatus {
    guard(|| {
        null(scenario, "scenario")?;
        (*scenario).0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library or be null; it is invalid afterwards.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_scenario_free(scenario: *mut McScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a scenario. A run whose laws fail still returns `MC_STATUS_OK`; check
/// `mc_report_passed`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_run(scenario: *const McScenario, out: *mut *mut McReport) -> McStatus {
    guard(|| {
        null(scenario, "scenario")?;
        null(out, "output pointer")?;
        *out = ptr::null_mut();
        let report = run(&(*scenario).0).map_err(fail)?;
        let laws = report
            .reports
            .iter()
            .flat_map(|r| r.laws.iter().map(move |l| (r.regime.clone(), l)))
            .map(|(regime, l)| {
                let name = CString::new(format!("{regime}/{}", l.law)).unwrap_or_default();
                (name, l.linf, l.l2, l.tol, l.pass)
            })
            .collect();
        *out = Box::into_raw(Box::new(McReport { report, laws }));
        Ok(())
    })
}

/// 1 when every law passed, 0 otherwise (including a null handle).
///
/// # Safety
/// `report` must be a live handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_report_passed(report: *const McReport) -> i32 {
    if report.is_null() {
        return 0;
    }
    (*report).report.passed as i32
}

/// Number of law rows in the report.
///
/// # Safety
/// `report` must be a live handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_report_law_count(report: *const McReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (&(*report).laws).len()
}

/// Row `index`: `name` is `"<report>/<law>"` and lives as long as the report.
/// Any output pointer may be null.
///
/// # Safety
/// `report` must be a live handle; non-null outputs must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_report_law(
    report: *const McReport,
    index: usize,
    name: *mut *const c_char,
    linf: *mut f64,
    tol: *mut f64,
    passed: *mut i32,
) -> McStatus {
    guard(|| {
        null(report, "report")?;
        let Some((n, li, _, t, p)) = (&(*report).laws).get(index) else {
            set_error(format!("law index {index} out of range"));
            return Err(McStatus::OutOfRange);
        };
        if !name.is_null() {
            *name = n.as_ptr();
        }
        if !linf.is_null() {
            *linf = *li;
        }
        if !tol.is_null() {
            *tol = *t;
        }
        if !passed.is_null() {
            *passed = *p as i32;
        }
        Ok(())
    })
}

/// Full report as JSON. Release the string with `mc_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_report_json(report: *const McReport, out: *mut *mut c_char) -> McStatus {
    guard(|| {
        null(report, "report")?;
        null(out, "output pointer")?;
        let json = serde_json::to_string(&(*report).report).map_err(|e| {
            set_error(e.to_string());
            McStatus::Internal
        })?;
        *out = CString::new(json).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library or be null; it is invalid afterwards.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_report_free(report: *mut McReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from `mc_report_json` or be null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn mc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
