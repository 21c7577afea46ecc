//! C ABI for the layertree solver: opaque handles, integer status codes,
//! and a thread-local last-error message. See the generated
//! `include/layertree.h`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::slice;

use layertree::dp::{solve, Budget, Decision, OptConfig};
use layertree::instance::{read_instance, write_instance, Instance, LayerSpec};
use layertree::tree::{verify_tree, write_tree, LayerTree};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum clt_status {
    CLT_OK = 0,
    CLT_ERR_NULL_ARGUMENT = 1,
    CLT_ERR_UTF8 = 2,
    CLT_ERR_PARSE = 3,
    CLT_ERR_INVALID_ARGUMENT = 4,
}

/// Solver outcome for `clt_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum clt_outcome {
    CLT_FEASIBLE = 0,
    CLT_INFEASIBLE = 1,
    CLT_TIMEOUT = 2,
}

/// Opaque instance handle.
pub struct clt_instance(Instance);

/// Opaque certificate tree handle.
pub struct clt_tree(LayerTree);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let text = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn clt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses the `clt` text format into a new instance handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_parse(
    text: *const c_char,
    out: *mut *mut clt_instance,
) -> clt_status {
    if text.is_null() || out.is_null() {
        set_error("null argument");
        return clt_status::CLT_ERR_NULL_ARGUMENT;
    }
    let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
        set_error("instance text is not valid utf-8");
        return clt_status::CLT_ERR_UTF8;
    };
    match read_instance(text) {
        Ok(inst) => {
            unsafe { *out = Box::into_raw(Box::new(clt_instance(inst))) };
            clt_status::CLT_OK
        }
        Err(e) => {
            set_error(e.to_string());
            clt_status::CLT_ERR_PARSE
        }
    }
}

/// Builds an instance from arrays of length `lambda`: per-layer vertex
/// budgets and capacity intervals.
///
/// # Safety
/// The three arrays must hold `lambda` readable elements; `out` must be a
/// valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_new(
    sources: u64,
    lambda: usize,
    counts: *const u64,
    cap_lo: *const u64,
    cap_hi: *const u64,
    out: *mut *mut clt_instance,
) -> clt_status {
    if counts.is_null() || cap_lo.is_null() || cap_hi.is_null() || out.is_null() {
        set_error("null argument");
        return clt_status::CLT_ERR_NULL_ARGUMENT;
    }
    let counts = unsafe { slice::from_raw_parts(counts, lambda) };
    let lo = unsafe { slice::from_raw_parts(cap_lo, lambda) };
    let hi = unsafe { slice::from_raw_parts(cap_hi, lambda) };
    let layers = (0..lambda)
        .map(|i| LayerSpec::new(counts[i], lo[i], hi[i]))
        .collect();
    match Instance::new(sources, layers) {
        Ok(inst) => {
            unsafe { *out = Box::into_raw(Box::new(clt_instance(inst))) };
            clt_status::CLT_OK
        }
        Err(e) => {
            set_error(e.to_string());
            clt_status::CLT_ERR_INVALID_ARGUMENT
        }
    }
}

/// # Safety
/// `instance` must come from this library and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_free(instance: *mut clt_instance) {
    if !instance.is_null() {
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// Number of sources, or 0 on a null handle.
///
/// # Safety
/// `instance` must be a valid handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_sources(instance: *const clt_instance) -> u64 {
    unsafe { instance.as_ref() }.map_or(0, |i| i.0.sources())
}

/// Number of layers above the sources, or 0 on a null handle.
///
/// # Safety
/// `instance` must be a valid handle or null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_layers(instance: *const clt_instance) -> usize {
    unsafe { instance.as_ref() }.map_or(0, |i| i.0.lambda())
}

/// Canonical `clt` text of the instance; free with `clt_string_free`.
///
/// # Safety
/// `instance` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_instance_to_text(
    instance: *const clt_instance,
    out: *mut *mut c_char,
) -> clt_status {
    let (Some(inst), false) = (unsafe { instance.as_ref() }, out.is_null()) else {
        set_error("null argument");
        return clt_status::CLT_ERR_NULL_ARGUMENT;
    };
    let text = CString::new(write_instance(&inst.0)).expect("clt text has no NUL bytes");
    unsafe { *out = text.into_raw() };
    clt_status::CLT_OK
}

/// Decides feasibility. `opt_set` selects the optimization set by tag
/// (`all`, `none`, `no-pareto`, ...); null means `all`. `timeout_ms` of 0
/// runs without a time limit. On a feasible outcome and a non-null
/// `out_tree`, the certificate is returned and must be freed with
/// `clt_tree_free`.
///
/// # Safety
/// All pointers must be valid or null as documented.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_solve(
    instance: *const clt_instance,
    opt_set: *const c_char,
    timeout_ms: u64,
    out_outcome: *mut clt_outcome,
    out_tree: *mut *mut clt_tree,
) -> clt_status {
    let (Some(inst), false) = (unsafe { instance.as_ref() }, out_outcome.is_null()) else {
        set_error("null argument");
        return clt_status::CLT_ERR_NULL_ARGUMENT;
    };
    let cfg = if opt_set.is_null() {
        OptConfig::all()
    } else {
        let Ok(tag) = unsafe { CStr::from_ptr(opt_set) }.to_str() else {
            set_error("optimization set is not valid utf-8");
            return clt_status::CLT_ERR_UTF8;
        };
        match OptConfig::from_tag(tag) {
            Some(cfg) => cfg,
            None => {
                set_error(format!("unknown optimization set `{tag}`"));
                return clt_status::CLT_ERR_INVALID_ARGUMENT;
            }
        }
    };
    let budget = if timeout_ms == 0 { Budget::unlimited() } else { Budget::with_time(timeout_ms) };
    let (decision, _) = solve(&inst.0, cfg, budget);
    let outcome = match decision {
        Decision::Feasible(tree) => {
            if !out_tree.is_null() {
                unsafe { *out_tree = Box::into_raw(Box::new(clt_tree(tree))) };
            }
            clt_outcome::CLT_FEASIBLE
        }
        Decision::Infeasible => clt_outcome::CLT_INFEASIBLE,
        Decision::Timeout => clt_outcome::CLT_TIMEOUT,
    };
    unsafe { *out_outcome = outcome };
    clt_status::CLT_OK
}

/// # Safety
/// `tree` must come from this library and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_tree_free(tree: *mut clt_tree) {
    if !tree.is_null() {
        drop(unsafe { Box::from_raw(tree) });
    }
}

/// 1 when the tree is a valid certificate for the instance, 0 otherwise.
///
/// # Safety
/// Both handles must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_tree_is_valid(
    instance: *const clt_instance,
    tree: *const clt_tree,
) -> c_int {
    match (unsafe { instance.as_ref() }, unsafe { tree.as_ref() }) {
        (Some(inst), Some(tree)) => verify_tree(&inst.0, &tree.0).is_valid() as c_int,
        _ => 0,
    }
}

/// Certificate tree as JSON; free with `clt_string_free`.
///
/// # Safety
/// `tree` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_tree_to_json(
    tree: *const clt_tree,
    out: *mut *mut c_char,
) -> clt_status {
    let (Some(tree), false) = (unsafe { tree.as_ref() }, out.is_null()) else {
        set_error("null argument");
        return clt_status::CLT_ERR_NULL_ARGUMENT;
    };
    let text = CString::new(write_tree(&tree.0)).expect("tree json has no NUL bytes");
    unsafe { *out = text.into_raw() };
    clt_status::CLT_OK
}

/// Frees strings returned by this library.
///
/// # Safety
/// `text` must come from this library and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn clt_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn parse_solve_verify_round_trip() {
        let text = CString::new("clt 1\n2 4\n2 2 2\n1 4 4\n").unwrap();
        let mut inst: *mut clt_instance = ptr::null_mut();
        assert_eq!(
            unsafe { clt_instance_parse(text.as_ptr(), &mut inst) },
            clt_status::CLT_OK
        );
        assert_eq!(unsafe { clt_instance_sources(inst) }, 4);
        assert_eq!(unsafe { clt_instance_layers(inst) }, 2);

        let mut outcome = clt_outcome::CLT_TIMEOUT;
        let mut tree: *mut clt_tree = ptr::null_mut();
        let status = unsafe { clt_solve(inst, ptr::null(), 0, &mut outcome, &mut tree) };
        assert_eq!(status, clt_status::CLT_OK);
        assert_eq!(outcome, clt_outcome::CLT_FEASIBLE);
        assert!(!tree.is_null());
        assert_eq!(unsafe { clt_tree_is_valid(inst, tree) }, 1);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { clt_tree_to_json(tree, &mut json) }, clt_status::CLT_OK);
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
        assert!(text.contains("\"layers\""));
        unsafe {
            clt_string_free(json);
            clt_tree_free(tree);
            clt_instance_free(inst);
        }
    }

    #[test]
    fn parse_errors_set_message() {
        let text = CString::new("clt 9\n1 1\n1 0 1\n").unwrap();
        let mut inst: *mut clt_instance = ptr::null_mut();
        assert_eq!(
            unsafe { clt_instance_parse(text.as_ptr(), &mut inst) },
            clt_status::CLT_ERR_PARSE
        );
        let message = unsafe { CStr::from_ptr(clt_last_error()) }.to_str().unwrap();
        assert!(message.contains("version"));
    }

    #[test]
    fn infeasible_instance_reports_outcome() {
        let mut inst: *mut clt_instance = ptr::null_mut();
        let counts = [1u64];
        let lo = [0u64];
        let hi = [3u64];
        assert_eq!(
            unsafe {
                clt_instance_new(4, 1, counts.as_ptr(), lo.as_ptr(), hi.as_ptr(), &mut inst)
            },
            clt_status::CLT_OK
        );
        let mut outcome = clt_outcome::CLT_FEASIBLE;
        let status =
            unsafe { clt_solve(inst, ptr::null(), 1000, &mut outcome, ptr::null_mut()) };
        assert_eq!(status, clt_status::CLT_OK);
        assert_eq!(outcome, clt_outcome::CLT_INFEASIBLE);
        unsafe { clt_instance_free(inst) };
    }

    #[test]
    fn unknown_opt_set_is_rejected() {
        let text = CString::new("clt 1\n1 1\n1 0 1\n").unwrap();
        let mut inst: *mut clt_instance = ptr::null_mut();
        unsafe { clt_instance_parse(text.as_ptr(), &mut inst) };
        let tag = CString::new("no-such-set").unwrap();
        let mut outcome = clt_outcome::CLT_FEASIBLE;
        let status =
            unsafe { clt_solve(inst, tag.as_ptr(), 0, &mut outcome, ptr::null_mut()) };
        assert_eq!(status, clt_status::CLT_ERR_INVALID_ARGUMENT);
        unsafe { clt_instance_free(inst) };
    }
}
