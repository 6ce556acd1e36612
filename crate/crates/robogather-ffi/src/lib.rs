//! C ABI over the robogather simulator.
//!
//! Scenarios and run results are opaque handles owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`RgStatus`]; on failure the
//! message is kept per thread and can be read with [`rg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robogather::harness::{catalog_scenario, monte_carlo, run, Outcome, RunResult, Scenario};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Scenario = 3,
    Run = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgOutcomeKind {
    StrongGathered = 0,
    WeakGathered = 1,
    Recurrence = 2,
    BudgetExhausted = 3,
}

/// Classified end of a run. `step` is the gathering step or the first step of the
/// recurring state; `period` is non-zero only for recurrences.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RgOutcome {
    pub kind: RgOutcomeKind,
    pub step: u64,
    pub period: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgStats {
    pub runs: u64,
    pub successes: u64,
    pub mean_steps: f64,
    pub stddev: f64,
    pub ci_half_width: f64,
    pub recurrences: u64,
    pub budget_exhausted: u64,
}

/// Opaque scenario handle.
pub struct RgScenario(Scenario);

/// Opaque run result handle.
pub struct RgRun(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (RgStatus, String)>) -> RgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RgStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RgStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, (RgStatus, String)> {
    if p.is_null() {
        return Err((RgStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (RgStatus::InvalidUtf8, e.to_string()))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, (RgStatus, String)> {
    p.as_mut().ok_or((RgStatus::NullPointer, "null output pointer".into()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, (RgStatus, String)> {
    p.as_ref().ok_or((RgStatus::NullPointer, "null handle".into()))
}

/// Parses a scenario file's text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_from_toml(toml: *const c_char, out: *mut *mut RgScenario) -> RgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = ptr::null_mut();
        let s = Scenario::from_toml(text(toml)?).map_err(|e| (RgStatus::Scenario, e.to_string()))?;
        *out = Box::into_raw(Box::new(RgScenario(s)));
        Ok(())
    })
}

/// Loads a built-in scenario by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_from_catalog(name: *const c_char, out: *mut *mut RgScenario) -> RgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = ptr::null_mut();
        let s = catalog_scenario(text(name)?).map_err(|e| (RgStatus::Scenario, e.to_string()))?;
        *out = Box::into_raw(Box::new(RgScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_set_seed(scenario: *mut RgScenario, seed: u64) -> RgStatus {
    guard(|| {
        out_ptr(scenario)?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_set_max_steps(scenario: *mut RgScenario, max_steps: u64) -> RgStatus {
    guard(|| {
        if max_steps == 0 {
            return Err((RgStatus::OutOfRange, "max_steps must be positive".into()));
        }
        out_ptr(scenario)?.0.max_steps = max_steps;
        Ok(())
    })
}

/// Number of robots in the scenario, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_robot_count(scenario: *const RgScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.robots.len())
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_scenario_free(scenario: *mut RgScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario to completion.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_run(scenario: *const RgScenario, out: *mut *mut RgRun) -> RgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = ptr::null_mut();
        let r = run(&handle(scenario)?.0).map_err(|e| (RgStatus::Run, e.to_string()))?;
        *out = Box::into_raw(Box::new(RgRun(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_run_outcome(result: *const RgRun, out: *mut RgOutcome) -> RgStatus {
    guard(|| {
        let o = match handle(result)?.0.outcome {
            Outcome::StrongGathered(s) => RgOutcome { kind: RgOutcomeKind::StrongGathered, step: s, period: 0 },
            Outcome::WeakGathered(s) => RgOutcome { kind: RgOutcomeKind::WeakGathered, step: s, period: 0 },
            Outcome::Recurrence { first, period } => RgOutcome { kind: RgOutcomeKind::Recurrence, step: first, period },
            Outcome::BudgetExhausted => RgOutcome { kind: RgOutcomeKind::BudgetExhausted, step: 0, period: 0 },
        };
        *out_ptr(out)? = o;
        Ok(())
    })
}

/// Steps executed, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_run_steps(result: *const RgRun) -> u64 {
    result.as_ref().map_or(0, |r| r.0.steps_executed)
}

/// Final position of robot `index`.
///
/// # Safety
/// `result` must be a live handle; `x` and `y` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_run_final_position(
    result: *const RgRun,
    index: usize,
    x: *mut f64,
    y: *mut f64,
) -> RgStatus {
    guard(|| {
        let robots = &handle(result)?.0.final_config.robots;
        let r = robots.get(index).ok_or((RgStatus::OutOfRange, format!("robot {index} of {}", robots.len())))?;
        *out_ptr(x)? = r.position.x;
        *out_ptr(y)? = r.position.y;
        Ok(())
    })
}

/// Writes the run's trace as CSV to `path`.
///
/// # Safety
/// `result` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rg_run_write_trace(result: *const RgRun, path: *const c_char) -> RgStatus {
    guard(|| {
        let r = handle(result)?;
        let path = text(path)?;
        let file = File::create(path).map_err(|e| (RgStatus::Io, format!("{path}: {e}")))?;
        r.0.write_trace_csv(BufWriter::new(file)).map_err(|e| (RgStatus::Io, e.to_string()))
    })
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_run_free(result: *mut RgRun) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Repeats the scenario with seeds `seed + i·stride` and aggregates the outcomes.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_monte_carlo(
    scenario: *const RgScenario,
    repeats: usize,
    stride: u64,
    out: *mut RgStats,
) -> RgStatus {
    guard(|| {
        let s = monte_carlo(&handle(scenario)?.0, repeats, stride).map_err(|e| (RgStatus::Run, e.to_string()))?;
        *out_ptr(out)? = RgStats {
            runs: s.runs as u64,
            successes: s.successes as u64,
            mean_steps: s.mean_steps,
            stddev: s.stddev,
            ci_half_width: s.ci_half_width,
            recurrences: s.recurrences as u64,
            budget_exhausted: s.budget_exhausted as u64,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length without the terminator; 0 if none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn rg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
