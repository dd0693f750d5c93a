//! C ABI for the mxsefl library.
//!
//! All handles are opaque; every object returned by this library must be
//! released with its matching `*_free` function. Strings crossing the
//! boundary are UTF-8 and NUL-terminated; strings returned by the library
//! are owned by the caller and released with `mxsefl_string_free`.
//!
//! Every fallible function returns a status code. On failure a
//! human-readable message is stored in thread-local storage and can be read
//! with `mxsefl_last_error_message`; the pointer stays valid until the next
//! failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use mxsefl::io::{AllocationFile, InstanceFile};
use mxsefl::oracle::{audit_allocation, AuditOptions};
use mxsefl::solver::{mxs_efl_allocate, Allocation, SolverConfig, SolverTrace};
use mxsefl::{Error, Instance};

/// Success.
pub const MXSEFL_OK: i32 = 0;
/// Malformed input: bad JSON, failed validation, or a null pointer.
pub const MXSEFL_ERR_INVALID: i32 = 1;
/// The enumeration budget was exceeded.
pub const MXSEFL_ERR_TOO_LARGE: i32 = 2;
/// An internal invariant failed; this is a bug, never an unlucky input.
pub const MXSEFL_ERR_INVARIANT: i32 = 3;
/// The audit completed but found an agent without MXS or EFL.
pub const MXSEFL_ERR_UNFAIR: i32 = 4;

/// An immutable fair-division instance.
pub struct MxseflInstance {
    inner: Instance,
}

/// A solved allocation together with its replayable trace.
pub struct MxseflAllocation {
    inner: Allocation,
    trace: SolverTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).expect("NULs stripped");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::InstanceTooLarge { .. } => MXSEFL_ERR_TOO_LARGE,
        Error::InvariantViolation(_) | Error::IterationCapExceeded(_) => MXSEFL_ERR_INVARIANT,
        _ => MXSEFL_ERR_INVALID,
    }
}

fn fail(e: &Error) -> i32 {
    set_error(&e.to_string());
    code_for(e)
}

fn invalid(message: &str) -> i32 {
    set_error(message);
    MXSEFL_ERR_INVALID
}

/// # Safety
/// `input` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(input: *const c_char, what: &str) -> Result<&'a str, i32> {
    if input.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(input)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

fn give_string(out: *mut *mut c_char, content: String) -> i32 {
    if out.is_null() {
        return invalid("output pointer is null");
    }
    match CString::new(content) {
        Ok(owned) => {
            unsafe { *out = owned.into_raw() };
            MXSEFL_OK
        }
        Err(_) => invalid("output contains an interior NUL"),
    }
}

/// Returns the message of the most recent error on this thread, or an empty
/// string if no error has occurred. The pointer is owned by the library and
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mxsefl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses an instance from its JSON representation.
///
/// On success writes a new handle to `out` and returns `MXSEFL_OK`; the
/// handle must be released with `mxsefl_instance_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_instance_from_json(
    json: *const c_char,
    out: *mut *mut MxseflInstance,
) -> i32 {
    if out.is_null() {
        return invalid("output pointer is null");
    }
    let text = match read_str(json, "instance JSON") {
        Ok(t) => t,
        Err(code) => return code,
    };
    let file: InstanceFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) => return invalid(&format!("parsing instance JSON: {e}")),
    };
    match file.to_instance() {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(MxseflInstance { inner }));
            MXSEFL_OK
        }
        Err(e) => fail(&e),
    }
}

/// Number of agents in the instance, or 0 if the handle is null.
///
/// # Safety
/// `inst` must be null or a handle from `mxsefl_instance_from_json`.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_instance_num_agents(inst: *const MxseflInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.num_agents())
}

/// Number of goods in the instance, or 0 if the handle is null.
///
/// # Safety
/// `inst` must be null or a handle from `mxsefl_instance_from_json`.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_instance_num_goods(inst: *const MxseflInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inner.num_goods())
}

/// Releases an instance handle. Null is a no-op.
///
/// # Safety
/// `inst` must be null or a handle from `mxsefl_instance_from_json` that has
/// not been freed before.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_instance_free(inst: *mut MxseflInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Computes an MXS+EFL allocation for the instance.
///
/// `enumeration_budget` bounds the partitions enumerated per share
/// computation (0 selects the default); `debug_assertions` enables the
/// per-iteration invariant checks. On success writes a new handle to `out`;
/// release it with `mxsefl_allocation_free`.
///
/// # Safety
/// `inst` must be a live instance handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_solve(
    inst: *const MxseflInstance,
    enumeration_budget: u64,
    debug_assertions: bool,
    out: *mut *mut MxseflAllocation,
) -> i32 {
    if out.is_null() {
        return invalid("output pointer is null");
    }
    let Some(handle) = inst.as_ref() else {
        return invalid("instance handle is null");
    };
    let mut cfg = SolverConfig {
        debug_assertions,
        ..SolverConfig::default()
    };
    if enumeration_budget != 0 {
        cfg.enumeration_budget = enumeration_budget;
    }
    match mxs_efl_allocate(&handle.inner, &cfg) {
        Ok((inner, trace)) => {
            *out = Box::into_raw(Box::new(MxseflAllocation { inner, trace }));
            MXSEFL_OK
        }
        Err(e) => fail(&e),
    }
}

/// Serializes an allocation to JSON. The caller owns the returned string.
///
/// # Safety
/// `alloc` must be a live allocation handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_allocation_to_json(
    alloc: *const MxseflAllocation,
    out: *mut *mut c_char,
) -> i32 {
    let Some(handle) = alloc.as_ref() else {
        return invalid("allocation handle is null");
    };
    let file = AllocationFile::from_allocation(&handle.inner);
    give_string(out, serde_json::to_string(&file).expect("allocation serializes"))
}

/// Returns the solver trace as JSON lines. The caller owns the returned
/// string.
///
/// # Safety
/// `alloc` must be a live allocation handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_allocation_trace_jsonl(
    alloc: *const MxseflAllocation,
    out: *mut *mut c_char,
) -> i32 {
    let Some(handle) = alloc.as_ref() else {
        return invalid("allocation handle is null");
    };
    give_string(out, handle.trace.to_jsonl())
}

/// Releases an allocation handle. Null is a no-op.
///
/// # Safety
/// `alloc` must be null or a handle from `mxsefl_solve` that has not been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_allocation_free(alloc: *mut MxseflAllocation) {
    if !alloc.is_null() {
        drop(Box::from_raw(alloc));
    }
}

/// Audits an allocation against an instance and writes the report as JSON.
///
/// The allocation is given as JSON so that externally produced allocations
/// can be audited too. Returns `MXSEFL_OK` if every agent has both MXS and
/// EFL, `MXSEFL_ERR_UNFAIR` if the audit completed with a negative verdict
/// (the report is still written), and another error code if the audit could
/// not run. `gmms_budget` bounds the group sweep (0 selects the default).
///
/// # Safety
/// `inst` must be a live instance handle; `allocation_json` must be a valid
/// NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_audit_json(
    inst: *const MxseflInstance,
    allocation_json: *const c_char,
    gmms_budget: u64,
    out: *mut *mut c_char,
) -> i32 {
    let Some(handle) = inst.as_ref() else {
        return invalid("instance handle is null");
    };
    let text = match read_str(allocation_json, "allocation JSON") {
        Ok(t) => t,
        Err(code) => return code,
    };
    let file: AllocationFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) => return invalid(&format!("parsing allocation JSON: {e}")),
    };
    let alloc = match file.to_allocation(&handle.inner) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let mut opts = AuditOptions::default();
    if gmms_budget != 0 {
        opts.gmms_budget = gmms_budget;
    }
    let report = match audit_allocation(&handle.inner, &alloc, &opts) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let verdict = report.verdict;
    let status = give_string(
        out,
        serde_json::to_string(&report).expect("report serializes"),
    );
    if status != MXSEFL_OK {
        status
    } else if verdict {
        MXSEFL_OK
    } else {
        set_error("audit found an agent without MXS or EFL");
        MXSEFL_ERR_UNFAIR
    }
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library that has not been
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn mxsefl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
