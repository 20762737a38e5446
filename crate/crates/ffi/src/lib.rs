//! C ABI over `scod`.
//!
//! Every function returns a [`ScodStatus`]; on failure a message is kept
//! per thread and read with [`scod_last_error_message`]. Handles are opaque
//! and released with their `_free` function. Strings handed out by the
//! library are released with [`scod_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use scod::cli::{run_scenario, RunResult};
use scod::numerics::Backend;
use scod::scenarios::{build_paper_example, Scenario};
use scod::Error;

/// Status code returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScodStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Dimension = 4,
    Domain = 5,
    Backend = 6,
    Catalog = 7,
    Model = 8,
    Io = 9,
    OutOfRange = 10,
    NotPeriodic = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScodOutcome {
    Terminated = 0,
    Periodic = 1,
    ConvergentNonTerminating = 2,
    Undetermined = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScodBackend {
    Exact = 0,
    Float = 1,
}

/// A parsed scenario.
pub struct ScodScenario(Scenario);

/// A finished run: trajectory, classification and report.
pub struct ScodRun(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(ScodStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension(_) => ScodStatus::Dimension,
            Error::Domain(_) => ScodStatus::Domain,
            Error::Backend { .. } => ScodStatus::Backend,
            Error::Catalog(_) => ScodStatus::Catalog,
            Error::Model(_) => ScodStatus::Model,
            Error::Parse(_) => ScodStatus::Parse,
            Error::Io { .. } => ScodStatus::Io,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ScodStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScodStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ScodStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(ScodStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ScodStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scod_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scod_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn scod_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scenario document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_from_json(json: *const c_char, out: *mut *mut ScodScenario) -> ScodStatus {
    guard(|| {
        let text = text(json, "json")?;
        let s = Scenario::from_json_str(text)?;
        write(out, Box::into_raw(Box::new(ScodScenario(s))), "out")
    })
}

/// Builds one of the built-in scenarios by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_builtin(name: *const c_char, out: *mut *mut ScodScenario) -> ScodStatus {
    guard(|| {
        let s = build_paper_example(text(name, "name")?)?;
        write(out, Box::into_raw(Box::new(ScodScenario(s))), "out")
    })
}

/// # Safety
/// `scenario` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_free(scenario: *mut ScodScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_shape(
    scenario: *const ScodScenario,
    n: *mut usize,
    d: *mut usize,
) -> ScodStatus {
    guard(|| {
        let s = &handle(scenario, "scenario")?.0;
        write(n, s.n(), "n")?;
        write(d, s.dim(), "d")
    })
}

/// # Safety
/// `scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_set_backend(scenario: *mut ScodScenario, backend: ScodBackend) -> ScodStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.0.backend = match backend {
            ScodBackend::Exact => Backend::Exact,
            ScodBackend::Float => Backend::Float,
        };
        Ok(())
    })
}

/// # Safety
/// `scenario` must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_set_max_steps(scenario: *mut ScodScenario, max_steps: usize) -> ScodStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        if max_steps == 0 {
            return Err(Fail(ScodStatus::Domain, "max_steps must be positive".into()));
        }
        s.0.limits.max_steps = max_steps;
        Ok(())
    })
}

/// Serializes the scenario as a document; free the result with [`scod_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_scenario_to_json(scenario: *const ScodScenario, out: *mut *mut c_char) -> ScodStatus {
    guard(|| {
        let doc = handle(scenario, "scenario")?.0.to_document()?;
        write(out, c_string(serde_json::to_string_pretty(&doc).expect("json values serialize")), "out")
    })
}

/// Simulates and analyses the scenario. When `out_dir` is not NULL the
/// requested output files are written there.
///
/// # Safety
/// `scenario` must be valid, `out_dir` NULL or a NUL-terminated string,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scod_run(
    scenario: *const ScodScenario,
    out_dir: *const c_char,
    out: *mut *mut ScodRun,
) -> ScodStatus {
    guard(|| {
        let s = &handle(scenario, "scenario")?.0;
        let dir = if out_dir.is_null() { None } else { Some(Path::new(text(out_dir, "out_dir")?)) };
        let r = run_scenario(s, dir)?;
        write(out, Box::into_raw(Box::new(ScodRun(r))), "out")
    })
}

/// # Safety
/// `run` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn scod_run_free(run: *mut ScodRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_outcome(run: *const ScodRun, out: *mut ScodOutcome) -> ScodStatus {
    guard(|| {
        let kind = match handle(run, "run")?.0.trajectory.outcome_kind() {
            "terminated" => ScodOutcome::Terminated,
            "periodic" => ScodOutcome::Periodic,
            "convergent_non_terminating" => ScodOutcome::ConvergentNonTerminating,
            _ => ScodOutcome::Undetermined,
        };
        write(out, kind, "out")
    })
}

/// Number of recorded states, the initial state included.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_state_count(run: *const ScodRun, out: *mut usize) -> ScodStatus {
    guard(|| write(out, handle(run, "run")?.0.trajectory.len(), "out"))
}

/// Offset and period of the detected cycle; `SCOD_STATUS_NOT_PERIODIC`
/// when the run is not periodic.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_cycle(run: *const ScodRun, offset: *mut usize, period: *mut usize) -> ScodStatus {
    guard(|| {
        let (o, p) = handle(run, "run")?
            .0
            .trajectory
            .cycle()
            .ok_or_else(|| Fail(ScodStatus::NotPeriodic, "the run is not periodic".into()))?;
        write(offset, o, "offset")?;
        write(period, p, "period")
    })
}

/// Writes 1 or 0 to `out`, or -1 when the scenario carries no expectation.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_expectation_met(run: *const ScodRun, out: *mut i32) -> ScodStatus {
    guard(|| {
        let v = match handle(run, "run")?.0.expectation_met {
            Some(true) => 1,
            Some(false) => 0,
            None => -1,
        };
        write(out, v, "out")
    })
}

/// Coordinate `coord` of `agent` (both from 0) at step `t`, as a double.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_opinion(
    run: *const ScodRun,
    t: usize,
    agent: usize,
    coord: usize,
    out: *mut f64,
) -> ScodStatus {
    guard(|| {
        let (x, _) = coordinate(handle(run, "run")?, t, agent, coord)?;
        write(out, x, "out")
    })
}

/// Same as [`scod_run_opinion`] but as text, `p/q` on the exact backend.
/// Free the result with [`scod_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_opinion_text(
    run: *const ScodRun,
    t: usize,
    agent: usize,
    coord: usize,
    out: *mut *mut c_char,
) -> ScodStatus {
    guard(|| {
        let (_, s) = coordinate(handle(run, "run")?, t, agent, coord)?;
        write(out, c_string(s), "out")
    })
}

fn coordinate(run: &ScodRun, t: usize, agent: usize, coord: usize) -> Result<(f64, String), Fail> {
    run.0
        .trajectory
        .coordinate(t, agent, coord)
        .ok_or_else(|| Fail(ScodStatus::OutOfRange, format!("no coordinate {coord} of agent {agent} at step {t}")))
}

/// The run report as JSON; free the result with [`scod_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn scod_run_report_json(run: *const ScodRun, out: *mut *mut c_char) -> ScodStatus {
    guard(|| {
        let r = &handle(run, "run")?.0;
        write(out, c_string(serde_json::to_string_pretty(&r.report).expect("json values serialize")), "out")
    })
}
