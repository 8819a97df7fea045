//! C ABI for the splitqp solver.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_from_json` and released by the matching `*_free`. Every fallible call
//! returns a [`SplitqpStatus`]; on failure, [`splitqp_last_error`] describes
//! the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use splitqp::subsolvers::{SolverBudget, SolverKind};
use splitqp::{Assignment, Error, QuadraticProgram, SolveReport, SplitConfig, SweepKind};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitqpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Infeasible = 5,
    SolverFailure = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A binary quadratic program.
pub struct SplitqpProblem {
    inner: QuadraticProgram,
}

/// Solver configuration.
pub struct SplitqpConfig {
    inner: SplitConfig,
}

/// Result of a solve.
pub struct SplitqpReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn status_of(e: &Error) -> SplitqpStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Io(_) | Error::InvalidProblem(_) => SplitqpStatus::Parse,
        Error::InvalidParameter(_) | Error::Dimension { .. } | Error::IndexOutOfRange { .. } => {
            SplitqpStatus::InvalidArgument
        }
        Error::Infeasible(_) => SplitqpStatus::Infeasible,
        Error::GraphTooLarge { .. } | Error::SizeCapExceeded { .. } | Error::Unsupported(_) => {
            SplitqpStatus::SolverFailure
        }
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), SplitqpStatus>) -> SplitqpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SplitqpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SplitqpStatus::Panic
        }
    }
}

fn fail(e: Error) -> SplitqpStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> SplitqpStatus {
    set_error(&format!("{what} is null"));
    SplitqpStatus::NullPointer
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, SplitqpStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        SplitqpStatus::InvalidUtf8
    })
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, SplitqpStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SplitqpStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SplitqpStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn splitqp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a problem from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_problem_from_json(json: *const c_char, out: *mut *mut SplitqpProblem) -> SplitqpStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let inner = QuadraticProgram::from_json(text).map_err(fail)?;
        write(out, Box::into_raw(Box::new(SplitqpProblem { inner })))
    })
}

/// # Safety
/// `problem` must come from [`splitqp_problem_from_json`] and not be freed
/// already; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn splitqp_problem_free(problem: *mut SplitqpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_problem_num_vars(problem: *const SplitqpProblem, out: *mut usize) -> SplitqpStatus {
    guard(|| write(out, get(problem, "problem")?.inner.n()))
}

/// Cost of the assignment `bits[0..len]` (each 0 or 1).
///
/// # Safety
/// `problem` must be a live handle, `bits` must point to `len` readable
/// bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_problem_evaluate(
    problem: *const SplitqpProblem,
    bits: *const u8,
    len: usize,
    out: *mut f64,
) -> SplitqpStatus {
    guard(|| {
        let qp = &get(problem, "problem")?.inner;
        if bits.is_null() && len > 0 {
            return Err(null("bits"));
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bits, len) };
        let x = Assignment::from_bits(slice.to_vec()).map_err(fail)?;
        write(out, qp.evaluate(&x).map_err(fail)?)
    })
}

/// Default configuration with `k` parts and a deterministic unlimited
/// subsolver budget.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_new(k: usize, out: *mut *mut SplitqpConfig) -> SplitqpStatus {
    guard(|| {
        let inner = SplitConfig {
            budget: SolverBudget::unlimited(),
            ..SplitConfig::new(k)
        };
        write(out, Box::into_raw(Box::new(SplitqpConfig { inner })))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_from_json(json: *const c_char, out: *mut *mut SplitqpConfig) -> SplitqpStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let inner = SplitConfig::from_json(text).map_err(fail)?;
        write(out, Box::into_raw(Box::new(SplitqpConfig { inner })))
    })
}

/// # Safety
/// `config` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_free(config: *mut SplitqpConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_seed(config: *mut SplitqpConfig, seed: u64) -> SplitqpStatus {
    guard(|| {
        get_mut(config, "config")?.inner.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_iterations(config: *mut SplitqpConfig, n_iter: usize) -> SplitqpStatus {
    guard(|| {
        get_mut(config, "config")?.inner.n_iter = n_iter;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_workers(config: *mut SplitqpConfig, workers: usize) -> SplitqpStatus {
    guard(|| {
        get_mut(config, "config")?.inner.worker_count = workers;
        Ok(())
    })
}

/// Subsolver search limits; 0 leaves the corresponding limit off.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_budget(
    config: *mut SplitqpConfig,
    node_budget: u64,
    wall_limit_s: f64,
) -> SplitqpStatus {
    guard(|| {
        get_mut(config, "config")?.inner.budget = SolverBudget {
            node_budget: (node_budget > 0).then_some(node_budget),
            wall_limit: (wall_limit_s > 0.0).then_some(wall_limit_s),
        };
        Ok(())
    })
}

/// `name` is one of `exhaustive`, `branch_bound`, `greedy`.
///
/// # Safety
/// `config` must be a live handle; `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_subsolver(config: *mut SplitqpConfig, name: *const c_char) -> SplitqpStatus {
    guard(|| {
        let kind: SolverKind = read_str(name, "name")?.parse().map_err(fail)?;
        get_mut(config, "config")?.inner.subsolver = kind;
        Ok(())
    })
}

/// `name` is one of `auto`, `single_flip`, `double_flip`, `both`, `none`.
///
/// # Safety
/// `config` must be a live handle; `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn splitqp_config_set_sweep(config: *mut SplitqpConfig, name: *const c_char) -> SplitqpStatus {
    guard(|| {
        let kind: SweepKind = read_str(name, "name")?.parse().map_err(fail)?;
        get_mut(config, "config")?.inner.sweep = kind;
        Ok(())
    })
}

/// # Safety
/// `problem` and `config` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_solve(
    problem: *const SplitqpProblem,
    config: *const SplitqpConfig,
    out: *mut *mut SplitqpReport,
) -> SplitqpStatus {
    guard(|| {
        let qp = &get(problem, "problem")?.inner;
        let cfg = &get(config, "config")?.inner;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let inner = splitqp::split_solve(qp, cfg).map_err(fail)?;
        write(out, Box::into_raw(Box::new(SplitqpReport { inner })))
    })
}

/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_free(report: *mut SplitqpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Cost of the best assignment under the solved objective.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_best_cost(report: *const SplitqpReport, out: *mut f64) -> SplitqpStatus {
    guard(|| write(out, get(report, "report")?.inner.best_cost))
}

/// Whether the best assignment satisfies every constraint.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_feasible(report: *const SplitqpReport, out: *mut bool) -> SplitqpStatus {
    guard(|| write(out, get(report, "report")?.inner.feasible))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_iterations(report: *const SplitqpReport, out: *mut usize) -> SplitqpStatus {
    guard(|| write(out, get(report, "report")?.inner.iterations_run))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_num_vars(report: *const SplitqpReport, out: *mut usize) -> SplitqpStatus {
    guard(|| write(out, get(report, "report")?.inner.n))
}

/// Copies the best assignment into `buf`, which must hold `num_vars` bytes.
///
/// # Safety
/// `report` must be a live handle; `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_copy_assignment(
    report: *const SplitqpReport,
    buf: *mut u8,
    len: usize,
) -> SplitqpStatus {
    guard(|| {
        let x = &get(report, "report")?.inner.best_x;
        if len < x.len() {
            set_error(&format!("buffer holds {len} bytes, {} needed", x.len()));
            return Err(SplitqpStatus::BufferTooSmall);
        }
        if x.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(x.as_slice().as_ptr(), buf, x.len());
        Ok(())
    })
}

/// Full report as JSON; free the string with [`splitqp_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn splitqp_report_to_json(report: *const SplitqpReport, out: *mut *mut c_char) -> SplitqpStatus {
    guard(|| {
        let text = get(report, "report")?.inner.to_json().map_err(fail)?;
        let s = CString::new(text).map_err(|_| fail(Error::Json("embedded NUL".into())))?;
        write(out, s.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be freed already; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn splitqp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
