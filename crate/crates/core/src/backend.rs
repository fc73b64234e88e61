//! Engine backed by a native shared library speaking the IPASIR calling
//! convention.
//!
//! The library is located through an explicit path or the
//! `IPASIR_SHARED_LIBRARY` environment variable. All ten entry points are
//! resolved at load time; a missing symbol is reported by name. Literals
//! cross the boundary in DIMACS form, and the solve return codes 10/20/0
//! map to SAT/UNSAT/FAILED.

use std::ffi::{c_char, c_int, c_void, CStr};
use std::path::{Path, PathBuf};

use libloading::{Library, Symbol};
use thiserror::Error;

use crate::lits::{Assignment, Lit, Var};
use crate::session::{Engine, EngineError, EngineSolve, SolveResult, SolverStats, SolverStatus};
use crate::solver::EngineAnswer;

pub const IPASIR_ENV: &str = "IPASIR_SHARED_LIBRARY";

/// The ten entry points a conforming library must export.
pub const IPASIR_SYMBOLS: [&str; 10] = [
    "ipasir_signature",
    "ipasir_init",
    "ipasir_release",
    "ipasir_add",
    "ipasir_assume",
    "ipasir_solve",
    "ipasir_val",
    "ipasir_failed",
    "ipasir_set_terminate",
    "ipasir_set_learn",
];

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("cannot load IPASIR library {path}: {source}")]
    Load {
        path: PathBuf,
        source: libloading::Error,
    },
    #[error("IPASIR library {path} is missing symbol {symbol}")]
    MissingSymbol { path: PathBuf, symbol: String },
    #[error("{IPASIR_ENV} is not set and no library path was given")]
    NotConfigured,
    #[error("ipasir_init returned a null solver")]
    NullSolver,
    #[error("unknown ipasir_solve return code {code}")]
    Protocol { code: i32 },
}

type SignatureFn = unsafe extern "C" fn() -> *const c_char;
type InitFn = unsafe extern "C" fn() -> *mut c_void;
type ReleaseFn = unsafe extern "C" fn(*mut c_void);
type AddFn = unsafe extern "C" fn(*mut c_void, c_int);
type AssumeFn = unsafe extern "C" fn(*mut c_void, c_int);
type SolveFn = unsafe extern "C" fn(*mut c_void) -> c_int;
type ValFn = unsafe extern "C" fn(*mut c_void, c_int) -> c_int;
type FailedFn = unsafe extern "C" fn(*mut c_void, c_int) -> c_int;
type TerminateCallback = unsafe extern "C" fn(*mut c_void) -> c_int;
type SetTerminateFn = unsafe extern "C" fn(*mut c_void, *mut c_void, Option<TerminateCallback>);
type LearnCallback = unsafe extern "C" fn(*mut c_void, *const c_int);
type SetLearnFn = unsafe extern "C" fn(*mut c_void, *mut c_void, c_int, Option<LearnCallback>);

/// A loaded IPASIR library with all ten entry points resolved.
#[derive(Debug)]
pub struct IpasirLibrary {
    signature: SignatureFn,
    init: InitFn,
    release: ReleaseFn,
    add: AddFn,
    assume: AssumeFn,
    solve: SolveFn,
    val: ValFn,
    failed: FailedFn,
    set_terminate: SetTerminateFn,
    #[allow(dead_code)]
    set_learn: SetLearnFn,
    // dropped last; the function pointers above dangle without it
    _lib: Library,
}

impl IpasirLibrary {
    pub fn signature(&self) -> String {
        let raw = unsafe { (self.signature)() };
        if raw.is_null() {
            return String::new();
        }
        unsafe { CStr::from_ptr(raw) }
            .to_string_lossy()
            .into_owned()
    }
}

/// Resolves the library path, preferring an explicit argument over the
/// `IPASIR_SHARED_LIBRARY` environment variable.
pub fn resolve_library_path(path: Option<&Path>) -> Result<PathBuf, BackendError> {
    if let Some(p) = path {
        return Ok(p.to_path_buf());
    }
    match std::env::var_os(IPASIR_ENV) {
        Some(v) if !v.is_empty() => Ok(PathBuf::from(v)),
        _ => Err(BackendError::NotConfigured),
    }
}

/// Copies a function pointer out of the library. The pointer stays valid
/// for as long as the owning [`Library`] does.
fn resolve<T: Copy>(lib: &Library, path: &Path, name: &'static str) -> Result<T, BackendError> {
    let cname = format!("{name}\0");
    let sym: Symbol<T> =
        unsafe { lib.get(cname.as_bytes()) }.map_err(|_| BackendError::MissingSymbol {
            path: path.to_path_buf(),
            symbol: name.to_string(),
        })?;
    Ok(*sym)
}

/// Loads the shared library and resolves every IPASIR symbol, failing with
/// the offending symbol's name when one is absent.
pub fn load_library(path: &Path) -> Result<IpasirLibrary, BackendError> {
    let lib = unsafe { Library::new(path) }.map_err(|source| BackendError::Load {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(IpasirLibrary {
        signature: resolve::<SignatureFn>(&lib, path, "ipasir_signature")?,
        init: resolve::<InitFn>(&lib, path, "ipasir_init")?,
        release: resolve::<ReleaseFn>(&lib, path, "ipasir_release")?,
        add: resolve::<AddFn>(&lib, path, "ipasir_add")?,
        assume: resolve::<AssumeFn>(&lib, path, "ipasir_assume")?,
        solve: resolve::<SolveFn>(&lib, path, "ipasir_solve")?,
        val: resolve::<ValFn>(&lib, path, "ipasir_val")?,
        failed: resolve::<FailedFn>(&lib, path, "ipasir_failed")?,
        set_terminate: resolve::<SetTerminateFn>(&lib, path, "ipasir_set_terminate")?,
        set_learn: resolve::<SetLearnFn>(&lib, path, "ipasir_set_learn")?,
        _lib: lib,
    })
}

/// Signature of the library a path (or the environment) denotes, without
/// creating a solver.
pub fn library_signature(path: Option<&Path>) -> Result<String, BackendError> {
    let path = resolve_library_path(path)?;
    Ok(load_library(&path)?.signature())
}

/// Maps the C solve return code to the session-level result.
pub fn solve_rc_to_result(code: i32) -> Result<SolveResult, BackendError> {
    match code {
        10 => Ok(SolveResult::Sat),
        20 => Ok(SolveResult::Unsat),
        0 => Ok(SolveResult::Failed),
        _ => Err(BackendError::Protocol { code }),
    }
}

/// Callback bookkeeping shared with the native terminate callback.
struct CallbackState {
    count: u64,
    limit: i64,
}

unsafe extern "C" fn terminate_callback(data: *mut c_void) -> c_int {
    let state = unsafe { &mut *(data as *mut CallbackState) };
    if state.limit >= 0 && state.count >= state.limit as u64 {
        return 1;
    }
    state.count += 1;
    0
}

/// Backend state: the native solver pointer, the callback count/limit
/// cell, the cached status, the empty-new-clause flag, the
/// ever-initialized flag, the current assumption, and the last solved
/// assumption.
pub struct BackendEngine {
    lib: IpasirLibrary,
    solver: *mut c_void,
    callback: Box<CallbackState>,
    status: SolverStatus,
    empty_new_clause: bool,
    initialized: bool,
    assumption: Vec<Lit>,
    solved_assumption: Vec<Lit>,
    max_var: Option<Var>,
}

// The solver pointer is only touched through &mut self; IPASIR is
// reentrant, so moving the owner across threads is fine.
unsafe impl Send for BackendEngine {}

impl BackendEngine {
    pub fn open(path: Option<&Path>) -> Result<BackendEngine, BackendError> {
        let path = resolve_library_path(path)?;
        let lib = load_library(&path)?;
        let solver = unsafe { (lib.init)() };
        if solver.is_null() {
            return Err(BackendError::NullSolver);
        }
        let mut engine = BackendEngine {
            lib,
            solver,
            callback: Box::new(CallbackState {
                count: 0,
                limit: -1,
            }),
            status: SolverStatus::Input,
            empty_new_clause: true,
            initialized: true,
            assumption: Vec::new(),
            solved_assumption: Vec::new(),
            max_var: None,
        };
        engine.install_terminate();
        Ok(engine)
    }

    fn install_terminate(&mut self) {
        let data = self.callback.as_mut() as *mut CallbackState as *mut c_void;
        unsafe { (self.lib.set_terminate)(self.solver, data, Some(terminate_callback)) };
    }

    fn note_var(&mut self, l: Lit) {
        self.max_var = Some(self.max_var.map_or(l.var(), |m| m.max(l.var())));
    }

    pub fn status(&self) -> SolverStatus {
        self.status
    }

    pub fn assumption_mirror(&self) -> &[Lit] {
        &self.assumption
    }

    pub fn empty_new_clause(&self) -> bool {
        self.empty_new_clause
    }

    pub fn ever_initialized(&self) -> bool {
        self.initialized
    }

    pub fn solved_assumption_mirror(&self) -> &[Lit] {
        &self.solved_assumption
    }

    pub fn callback_count(&self) -> u64 {
        self.callback.count
    }
}

impl Drop for BackendEngine {
    fn drop(&mut self) {
        if !self.solver.is_null() {
            unsafe { (self.lib.release)(self.solver) };
            self.solver = std::ptr::null_mut();
        }
    }
}

impl Engine for BackendEngine {
    fn signature(&self) -> String {
        self.lib.signature()
    }

    fn add_clause(&mut self, clause: &[Lit]) {
        self.empty_new_clause = false;
        for &l in clause {
            self.note_var(l);
            unsafe { (self.lib.add)(self.solver, l.to_dimacs()) };
        }
        unsafe { (self.lib.add)(self.solver, 0) };
        self.empty_new_clause = true;
        self.status = SolverStatus::Input;
    }

    fn solve(
        &mut self,
        assumptions: &[Lit],
        limit: Option<u64>,
    ) -> Result<EngineSolve, EngineError> {
        self.callback.count = 0;
        self.callback.limit = limit.map_or(-1, |l| l.min(i64::MAX as u64) as i64);
        self.assumption = assumptions.to_vec();
        for &a in assumptions {
            self.note_var(a);
            unsafe { (self.lib.assume)(self.solver, a.to_dimacs()) };
        }
        let code = unsafe { (self.lib.solve)(self.solver) };
        let callbacks = self.callback.count;
        let answer =
            match solve_rc_to_result(code).map_err(|e| EngineError::Backend(e.to_string()))? {
                SolveResult::Sat => {
                    let mut model = Assignment::new();
                    if let Some(max) = self.max_var {
                        for v in 0..=max {
                            let raw = unsafe { (self.lib.val)(self.solver, v as c_int + 1) };
                            // 0 means the library left the variable undefined
                            if raw > 0 {
                                model.set(v, true);
                            } else if raw < 0 {
                                model.set(v, false);
                            }
                        }
                    }
                    self.status = SolverStatus::Sat;
                    EngineAnswer::Sat(model)
                }
                SolveResult::Unsat => {
                    let mut core = Vec::new();
                    for &a in assumptions {
                        let raw = unsafe { (self.lib.failed)(self.solver, a.to_dimacs()) };
                        if raw != 0 {
                            core.push(a);
                        }
                    }
                    self.solved_assumption = std::mem::take(&mut self.assumption);
                    self.status = SolverStatus::Unsat;
                    EngineAnswer::Unsat(core)
                }
                SolveResult::Failed => {
                    self.status = SolverStatus::Input;
                    EngineAnswer::Interrupted
                }
            };
        self.assumption.clear();
        Ok(EngineSolve { answer, callbacks })
    }

    fn bump_activity(&mut self, _lits: &[Lit]) {
        // not part of the IPASIR API; stubbed out
    }

    fn stats(&self) -> SolverStats {
        SolverStats::default()
    }

    fn release(&mut self) {
        if !self.solver.is_null() {
            unsafe { (self.lib.release)(self.solver) };
            self.solver = std::ptr::null_mut();
        }
        self.status = SolverStatus::Undef;
        self.assumption.clear();
        self.solved_assumption.clear();
    }

    fn reinit(&mut self) -> Result<(), EngineError> {
        debug_assert!(self.solver.is_null());
        let solver = unsafe { (self.lib.init)() };
        if solver.is_null() {
            return Err(EngineError::Backend(BackendError::NullSolver.to_string()));
        }
        self.solver = solver;
        self.callback.count = 0;
        self.callback.limit = -1;
        self.install_terminate();
        self.status = SolverStatus::Input;
        self.empty_new_clause = true;
        self.max_var = None;
        Ok(())
    }
}
