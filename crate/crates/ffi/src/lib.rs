//! C interface to `nomdd`.
//!
//! Instances are opaque handles created by `nomdd_instance_parse` or
//! `nomdd_instance_generate` and released with `nomdd_instance_free`.
//! Every fallible function returns a [`NomddStatus`]; on failure a message
//! is available from `nomdd_last_error` on the same thread until the next
//! call. Strings returned by the library are released with
//! `nomdd_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nomdd::engine::Outcome;
use nomdd::instance::generate_instance_on_stream;
use nomdd::jobset::MAX_JOBS;
use nomdd::search::{solve, SearchLimits};
use nomdd::{Error, Instance, Model, ModelVariant};

#[repr(C)]
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum NomddStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Infeasible = 5,
    TooManyJobs = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum NomddVariant {
    Baseline = 0,
    RelaxedBc = 1,
    PrecedenceExtraction = 2,
    ExactBc = 3,
}

/// Opaque instance handle.
pub struct NomddInstance {
    inner: Instance,
}

/// Outcome of `nomdd_solve`. `best_cost` is meaningful only when
/// `has_solution` is true.
#[repr(C)]
#[derive(Debug, Copy, Clone, Default, PartialEq, Eq)]
pub struct NomddSolveResult {
    pub nodes: u64,
    pub failures: u64,
    pub best_cost: i64,
    pub has_solution: bool,
    pub complete: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (NomddStatus, String);

fn set_error(msg: Option<String>) {
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).unwrap());
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NomddStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            NomddStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            set_error(Some(format!("internal panic: {msg}")));
            NomddStatus::Panic
        }
    }
}

fn from_error(e: Error) -> Failure {
    let status = match e {
        Error::Parse { .. } => NomddStatus::ParseError,
        Error::TooManyJobs { .. } => NomddStatus::TooManyJobs,
        Error::InfeasibleSchedule(_) => NomddStatus::Infeasible,
        _ => NomddStatus::InvalidArgument,
    };
    (status, e.to_string())
}

fn null(what: &str) -> Failure {
    (NomddStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn instance_ref<'a>(p: *const NomddInstance) -> Result<&'a Instance, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("instance"))
}

fn model_variant(v: NomddVariant, width: usize) -> Result<ModelVariant, Failure> {
    let name = match v {
        NomddVariant::Baseline => "baseline",
        NomddVariant::RelaxedBc => "relaxed-bc",
        NomddVariant::PrecedenceExtraction => "pe",
        NomddVariant::ExactBc => "exact-bc",
    };
    ModelVariant::from_name(name, Some(width)).map_err(from_error)
}

fn boxed(inst: Instance) -> *mut NomddInstance {
    Box::into_raw(Box::new(NomddInstance { inner: inst }))
}

/// Parses the instance text format. On success `*out` receives a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nomdd_instance_parse(text: *const c_char, out: *mut *mut NomddInstance) -> NomddStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (NomddStatus::InvalidUtf8, e.to_string()))?;
        let inst = Instance::parse(s).map_err(from_error)?;
        *out = boxed(inst);
        Ok(())
    })
}

/// Generates a just-in-time instance with `n` jobs.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nomdd_instance_generate(
    n: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut NomddInstance,
) -> NomddStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 || n > MAX_JOBS {
            return Err((NomddStatus::InvalidArgument, format!("job count {n} outside 1..={MAX_JOBS}")));
        }
        *out = boxed(generate_instance_on_stream(n, seed, stream));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `instance` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nomdd_instance_free(instance: *mut NomddInstance) {
    if !instance.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(instance))));
    }
}

/// # Safety
/// `instance` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nomdd_instance_num_jobs(instance: *const NomddInstance, out: *mut usize) -> NomddStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = inst.len();
        Ok(())
    })
}

/// Canonical text of the instance, to be released with `nomdd_string_free`.
///
/// # Safety
/// `instance` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nomdd_instance_to_text(instance: *const NomddInstance, out: *mut *mut c_char) -> NomddStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(inst.to_text()).unwrap().into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nomdd_string_free(s: *mut c_char) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(CString::from_raw(s))));
    }
}

/// Propagates the model `variant` (width is used by the relaxed variants)
/// at the root and writes each job's earliest start and latest completion.
/// Both arrays must hold `len >= number of jobs` entries.
///
/// # Safety
/// `instance` must be a live handle; `est` and `lct` must point to `len`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn nomdd_filter_bounds(
    instance: *const NomddInstance,
    variant: NomddVariant,
    width: usize,
    est: *mut i64,
    lct: *mut i64,
    len: usize,
) -> NomddStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        if est.is_null() || lct.is_null() {
            return Err(null("est/lct"));
        }
        if len < inst.len() {
            return Err((NomddStatus::BufferTooSmall, format!("need {} entries, got {len}", inst.len())));
        }
        let mut model = Model::new(inst, model_variant(variant, width)?);
        if model.propagate() == Outcome::Infeasible {
            return Err((NomddStatus::Infeasible, "propagation proved the instance infeasible".into()));
        }
        let w = model.windows();
        let est = std::slice::from_raw_parts_mut(est, len);
        let lct = std::slice::from_raw_parts_mut(lct, len);
        est[..inst.len()].copy_from_slice(&w.est);
        lct[..inst.len()].copy_from_slice(&w.lct);
        Ok(())
    })
}

/// Branch and bound under `variant`, stopping after `node_limit` nodes
/// (0 means no limit). The best start times are written to `starts`
/// (`len` entries) when a solution is found; `starts` may be null.
///
/// # Safety
/// `instance` must be a live handle, `result` a valid pointer, and
/// `starts`, if not null, must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn nomdd_solve(
    instance: *const NomddInstance,
    variant: NomddVariant,
    width: usize,
    node_limit: u64,
    result: *mut NomddSolveResult,
    starts: *mut i64,
    len: usize,
) -> NomddStatus {
    guard(|| {
        let inst = instance_ref(instance)?;
        if result.is_null() {
            return Err(null("result"));
        }
        if !starts.is_null() && len < inst.len() {
            return Err((NomddStatus::BufferTooSmall, format!("need {} entries, got {len}", inst.len())));
        }
        let limits = SearchLimits {
            nodes: (node_limit > 0).then_some(node_limit),
            time: None,
        };
        let r = solve(&mut Model::new(inst, model_variant(variant, width)?), limits);
        *result = NomddSolveResult {
            nodes: r.stats.nodes,
            failures: r.stats.failures,
            best_cost: r.stats.best_cost.unwrap_or(0),
            has_solution: r.best.is_some(),
            complete: r.stats.complete,
        };
        if let (Some(best), false) = (&r.best, starts.is_null()) {
            std::slice::from_raw_parts_mut(starts, len)[..inst.len()].copy_from_slice(&best.start);
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null after a
/// successful one. Owned by the library; valid until the next call.
#[no_mangle]
pub extern "C" fn nomdd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
