//! IPASIR shared-library shim over the embedded CDCL engine.
//!
//! Builds as a cdylib exporting the ten IPASIR entry points, so the
//! dynamic-loading backend can be exercised against a solver we control.
//! Point `IPASIR_SHARED_LIBRARY` at the built `libipasir_shim.so` to run
//! any IPASIR client against it.

use std::ffi::{c_char, c_int, c_void};

use aigsweep_core::lits::Lit;
use aigsweep_core::solver::{EngineAnswer, EngineState};

const SIGNATURE: &[u8] =
    concat!("aigsweep-ipasir-shim ", env!("CARGO_PKG_VERSION"), "\0").as_bytes();

type TerminateCallback = unsafe extern "C" fn(*mut c_void) -> c_int;
type LearnCallback = unsafe extern "C" fn(*mut c_void, *const c_int);

struct ShimSolver {
    engine: EngineState,
    new_clause: Vec<Lit>,
    assumptions: Vec<Lit>,
    model: Vec<Option<bool>>,
    core: Vec<i32>,
    terminate_data: *mut c_void,
    terminate: Option<TerminateCallback>,
}

impl ShimSolver {
    fn new() -> ShimSolver {
        ShimSolver {
            engine: EngineState::new(),
            new_clause: Vec::new(),
            assumptions: Vec::new(),
            model: Vec::new(),
            core: Vec::new(),
            terminate_data: std::ptr::null_mut(),
            terminate: None,
        }
    }
}

unsafe fn solver<'a>(ptr: *mut c_void) -> &'a mut ShimSolver {
    unsafe { &mut *(ptr as *mut ShimSolver) }
}

#[no_mangle]
pub extern "C" fn ipasir_signature() -> *const c_char {
    SIGNATURE.as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn ipasir_init() -> *mut c_void {
    Box::into_raw(Box::new(ShimSolver::new())) as *mut c_void
}

/// # Safety
/// `ptr` must come from `ipasir_init` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ipasir_release(ptr: *mut c_void) {
    if !ptr.is_null() {
        drop(unsafe { Box::from_raw(ptr as *mut ShimSolver) });
    }
}

/// # Safety
/// `ptr` must come from `ipasir_init`.
#[no_mangle]
pub unsafe extern "C" fn ipasir_add(ptr: *mut c_void, lit_or_zero: c_int) {
    let s = unsafe { solver(ptr) };
    if lit_or_zero == 0 {
        let clause = std::mem::take(&mut s.new_clause);
        s.engine.add_clause(&clause);
    } else if let Ok(l) = Lit::from_dimacs(lit_or_zero) {
        s.new_clause.push(l);
    }
}

/// # Safety
/// `ptr` must come from `ipasir_init`.
#[no_mangle]
pub unsafe extern "C" fn ipasir_assume(ptr: *mut c_void, lit: c_int) {
    let s = unsafe { solver(ptr) };
    if let Ok(l) = Lit::from_dimacs(lit) {
        s.assumptions.push(l);
    }
}

/// # Safety
/// `ptr` must come from `ipasir_init`.
#[no_mangle]
pub unsafe extern "C" fn ipasir_solve(ptr: *mut c_void) -> c_int {
    let s = unsafe { solver(ptr) };
    let assumptions = std::mem::take(&mut s.assumptions);
    s.model.clear();
    s.core.clear();

    let answer = match (s.terminate, s.terminate_data) {
        (Some(cb), data) => {
            let mut stop = move || unsafe { cb(data) } != 0;
            s.engine.solve_with_callback(&assumptions, &mut stop)
        }
        (None, _) => s.engine.solve(&assumptions, None),
    };
    match answer {
        EngineAnswer::Sat(model) => {
            let max = model.iter().map(|(v, _)| v).max();
            if let Some(max) = max {
                s.model = vec![None; max as usize + 1];
                for (v, b) in model.iter() {
                    s.model[v as usize] = Some(b);
                }
            }
            10
        }
        EngineAnswer::Unsat(core) => {
            s.core = core.iter().map(|l| l.to_dimacs()).collect();
            20
        }
        EngineAnswer::Interrupted => 0,
    }
}

/// # Safety
/// `ptr` must come from `ipasir_init`; only valid in the SAT state.
#[no_mangle]
pub unsafe extern "C" fn ipasir_val(ptr: *mut c_void, lit: c_int) -> c_int {
    let s = unsafe { solver(ptr) };
    if lit == 0 {
        return 0;
    }
    let var = lit.unsigned_abs() as usize - 1;
    match s.model.get(var).copied().flatten() {
        None => 0,
        Some(value) => {
            if value == (lit > 0) {
                lit
            } else {
                -lit
            }
        }
    }
}

/// # Safety
/// `ptr` must come from `ipasir_init`; only valid in the UNSAT state.
#[no_mangle]
pub unsafe extern "C" fn ipasir_failed(ptr: *mut c_void, lit: c_int) -> c_int {
    let s = unsafe { solver(ptr) };
    s.core.contains(&lit) as c_int
}

/// # Safety
/// `ptr` must come from `ipasir_init`; `callback`, when called, receives `data`.
#[no_mangle]
pub unsafe extern "C" fn ipasir_set_terminate(
    ptr: *mut c_void,
    data: *mut c_void,
    callback: Option<TerminateCallback>,
) {
    let s = unsafe { solver(ptr) };
    s.terminate = callback;
    s.terminate_data = data;
}

/// # Safety
/// `ptr` must come from `ipasir_init`. Learned-clause export is accepted
/// but never invoked.
#[no_mangle]
pub unsafe extern "C" fn ipasir_set_learn(
    _ptr: *mut c_void,
    _data: *mut c_void,
    _max_length: c_int,
    _callback: Option<LearnCallback>,
) {
}
