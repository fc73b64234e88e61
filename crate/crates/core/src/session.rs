//! Stateful incremental-SAT session.
//!
//! A [`SolverSession`] tracks the permanent formula, the assumption under
//! construction, the clause under construction, a status flag, and the last
//! solve's result, while delegating the actual search to an [`Engine`]. The
//! embedded CDCL engine and a dynamically loaded IPASIR library are
//! interchangeable behind the same contract.
//!
//! Every mutating operation checks its guard and advances a monotone
//! history counter, so a session can never be observed in the same state
//! twice. Guard violations are reported as recoverable errors.

use std::path::PathBuf;

use thiserror::Error;

use crate::lits::{Assignment, Clause, Formula, Lit};
use crate::solver::EngineAnswer;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    Undef,
    Input,
    Unsat,
    Sat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    Failed,
}

/// Engine counters for heuristic monitoring. Engines without native
/// support report zeros.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub clauses: u64,
    pub variables: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("solver backend returned unknown solve code {code}")]
    Protocol { code: i32 },
    #[error("{0}")]
    Backend(String),
}

/// Answer of one engine solve, plus the number of termination callbacks
/// observed while producing it.
#[derive(Debug)]
pub struct EngineSolve {
    pub answer: EngineAnswer,
    pub callbacks: u64,
}

/// The computational solver bound to a session.
pub trait Engine: Send {
    fn signature(&self) -> String;
    fn add_clause(&mut self, clause: &[Lit]);
    fn solve(
        &mut self,
        assumptions: &[Lit],
        limit: Option<u64>,
    ) -> Result<EngineSolve, EngineError>;
    fn bump_activity(&mut self, lits: &[Lit]);
    fn stats(&self) -> SolverStats;
    fn release(&mut self);
    fn reinit(&mut self) -> Result<(), EngineError>;
}

/// Which engine a session should run on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum EngineConfig {
    #[default]
    Embedded,
    /// Shared library speaking the IPASIR calling convention; `None` reads
    /// the `IPASIR_SHARED_LIBRARY` environment variable.
    External { library: Option<PathBuf> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("session is not initialized (status is UNDEF)")]
    Undefined,
    #[error("release/reinit mismatch: status is not UNDEF")]
    NotReleased,
    #[error("solve requires an empty new-clause")]
    ClauseInProgress,
    #[error("val requires status SAT")]
    NotSat,
    #[error("failed requires status UNSAT")]
    NotUnsat,
    #[error("literal {0:?} is not part of the solved assumption")]
    NotAnAssumption(Lit),
    #[error("engine initialization failed: {0}")]
    EngineInit(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Read-only view of the session state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub status: SolverStatus,
    pub some_history: bool,
    pub empty_new_clause: bool,
    pub assumption: Vec<Lit>,
    /// Present only while the status is UNSAT.
    pub solved_assumption: Option<Vec<Lit>>,
    pub callback_count: u64,
}

pub struct SolverSession {
    formula: Formula,
    assumption: Vec<Lit>,
    new_clause: Clause,
    status: SolverStatus,
    solution: Vec<Lit>,
    model: Assignment,
    solved_assumption: Vec<Lit>,
    callback_count: u64,
    history: u64,
    limit: Option<u64>,
    engine: Box<dyn Engine>,
}

impl SolverSession {
    /// Creates a fresh session in status INPUT on the configured engine.
    pub fn init(config: &EngineConfig) -> Result<SolverSession, SessionError> {
        let engine = make_engine(config)?;
        Ok(SolverSession {
            formula: Formula::new(),
            assumption: Vec::new(),
            new_clause: Vec::new(),
            status: SolverStatus::Input,
            solution: Vec::new(),
            model: Assignment::new(),
            solved_assumption: Vec::new(),
            callback_count: 0,
            history: 1,
            limit: None,
            engine,
        })
    }

    fn require_initialized(&self) -> Result<(), SessionError> {
        if self.status == SolverStatus::Undef {
            Err(SessionError::Undefined)
        } else {
            Ok(())
        }
    }

    /// Frees the engine and moves the session to UNDEF. Only reinit is
    /// legal afterwards.
    pub fn release(&mut self) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.engine.release();
        self.status = SolverStatus::Undef;
        self.history += 1;
        Ok(())
    }

    /// Brings a released session back to the same state init produces,
    /// except that the history keeps increasing.
    pub fn reinit(&mut self) -> Result<(), SessionError> {
        if self.status != SolverStatus::Undef {
            return Err(SessionError::NotReleased);
        }
        debug_assert!(self.history > 0);
        self.engine.reinit()?;
        self.formula = Formula::new();
        self.assumption.clear();
        self.new_clause.clear();
        self.solution.clear();
        self.model = Assignment::new();
        self.solved_assumption.clear();
        self.callback_count = 0;
        self.limit = None;
        self.status = SolverStatus::Input;
        self.history += 1;
        Ok(())
    }

    /// Appends a literal to the clause under construction.
    pub fn add_lit(&mut self, l: Lit) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.new_clause.push(l);
        self.status = SolverStatus::Input;
        self.history += 1;
        Ok(())
    }

    /// Moves the clause under construction into the permanent formula.
    /// Finalizing an empty new-clause adds the empty clause, making the
    /// formula unsatisfiable.
    pub fn finalize_clause(&mut self) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.engine.add_clause(&self.new_clause);
        self.formula.push(std::mem::take(&mut self.new_clause));
        self.status = SolverStatus::Input;
        self.history += 1;
        Ok(())
    }

    /// Assumes a literal for the next solve only.
    pub fn assume(&mut self, l: Lit) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.assumption.push(l);
        self.status = SolverStatus::Input;
        self.history += 1;
        Ok(())
    }

    /// Forces the status to INPUT without touching anything else.
    pub fn input(&mut self) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.status = SolverStatus::Input;
        self.history += 1;
        Ok(())
    }

    /// Solves the permanent formula under the current assumptions, which
    /// are consumed regardless of the outcome.
    pub fn solve(&mut self) -> Result<SolveResult, SessionError> {
        self.require_initialized()?;
        if !self.new_clause.is_empty() {
            return Err(SessionError::ClauseInProgress);
        }
        let assumption_in = std::mem::take(&mut self.assumption);
        let outcome = match self.engine.solve(&assumption_in, self.limit) {
            Ok(outcome) => outcome,
            Err(e) => {
                self.assumption = assumption_in;
                return Err(e.into());
            }
        };
        self.callback_count += outcome.callbacks;
        self.history += 1;
        Ok(match outcome.answer {
            EngineAnswer::Sat(model) => {
                self.solution = model.iter().map(|(v, b)| Lit::new(v, !b)).collect();
                self.model = model;
                self.status = SolverStatus::Sat;
                SolveResult::Sat
            }
            EngineAnswer::Unsat(core) => {
                self.solution = core;
                self.model = Assignment::new();
                self.solved_assumption = assumption_in;
                self.status = SolverStatus::Unsat;
                SolveResult::Unsat
            }
            EngineAnswer::Interrupted => {
                self.solution.clear();
                self.model = Assignment::new();
                self.status = SolverStatus::Input;
                SolveResult::Failed
            }
        })
    }

    /// Truth value of `l` in the satisfying assignment, or `None` when the
    /// variable is undefined there.
    pub fn val(&self, l: Lit) -> Result<Option<bool>, SessionError> {
        if self.status != SolverStatus::Sat {
            return Err(SessionError::NotSat);
        }
        Ok(self.model.get(l.var()).map(|b| b ^ l.is_negated()))
    }

    /// Whether `l` is part of the unsat core identified by the last solve.
    /// `l` must be a member of the solved assumption.
    pub fn failed(&self, l: Lit) -> Result<bool, SessionError> {
        if self.status != SolverStatus::Unsat {
            return Err(SessionError::NotUnsat);
        }
        if !self.solved_assumption.contains(&l) {
            return Err(SessionError::NotAnAssumption(l));
        }
        Ok(self.solution.contains(&l))
    }

    /// Installs or removes the callback budget and resets the callback
    /// count to 0. The status is unchanged.
    pub fn set_limit(&mut self, limit: Option<u64>) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.limit = limit;
        self.callback_count = 0;
        self.history += 1;
        Ok(())
    }

    pub fn inspect(&self) -> Snapshot {
        Snapshot {
            status: self.status,
            some_history: self.history > 0,
            empty_new_clause: self.new_clause.is_empty(),
            assumption: self.assumption.clone(),
            solved_assumption: (self.status == SolverStatus::Unsat)
                .then(|| self.solved_assumption.clone()),
            callback_count: self.callback_count,
        }
    }

    /// Heuristic-only hint; engines without support treat this as a no-op.
    pub fn bump_activity_vars(&mut self, lits: &[Lit]) -> Result<(), SessionError> {
        self.require_initialized()?;
        self.engine.bump_activity(lits);
        self.history += 1;
        Ok(())
    }

    pub fn get_curr_stats(&self) -> Result<SolverStats, SessionError> {
        self.require_initialized()?;
        Ok(self.engine.stats())
    }

    pub fn signature(&self) -> String {
        self.engine.signature()
    }

    pub fn status(&self) -> SolverStatus {
        self.status
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn assumption(&self) -> &[Lit] {
        &self.assumption
    }

    /// Satisfying assignment (one literal per assigned variable) after a
    /// SAT solve, or the unsat core after an UNSAT solve.
    pub fn solution(&self) -> &[Lit] {
        &self.solution
    }

    pub fn history(&self) -> u64 {
        self.history
    }

    pub fn callback_count(&self) -> u64 {
        self.callback_count
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }
}

fn make_engine(config: &EngineConfig) -> Result<Box<dyn Engine>, SessionError> {
    match config {
        EngineConfig::Embedded => Ok(Box::new(crate::solver::EmbeddedEngine::new())),
        EngineConfig::External { library } => {
            let engine = crate::backend::BackendEngine::open(library.as_deref())
                .map_err(|e| SessionError::EngineInit(e.to_string()))?;
            Ok(Box::new(engine))
        }
    }
}

/// Name and version string of the engine a config denotes. Stable per
/// engine build: the same config always reports the same string.
pub fn signature(config: &EngineConfig) -> Result<String, SessionError> {
    match config {
        EngineConfig::Embedded => Ok(crate::solver::embedded_signature()),
        EngineConfig::External { library } => crate::backend::library_signature(library.as_deref())
            .map_err(|e| SessionError::EngineInit(e.to_string())),
    }
}
