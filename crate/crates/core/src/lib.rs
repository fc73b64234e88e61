//! Incremental SAT sessions and AIG SAT sweeping.
//!
//! The crate has two halves. The SAT half models a stateful incremental
//! solver session ([`session::SolverSession`]) with explicit guards on
//! every operation, backed either by the embedded CDCL engine
//! ([`solver::EngineState`]) or by a dynamically loaded shared library
//! speaking the IPASIR calling convention ([`backend`]). The circuit half
//! provides and-inverter graphs with AIGER I/O ([`aig`]), on-demand
//! Tseitin encoding of fanin cones into a session ([`encode`]), and SAT
//! sweeping with simulation-derived equivalence classes and
//! counterexample refinement ([`fraig`]).
//!
//! With the default `parallel` feature, the exhaustive test oracles
//! (truth-table solving, pattern-space equivalence checks) fan out with
//! rayon; disabling the feature falls back to sequential scans with
//! identical results.

pub mod aig;
pub mod backend;
pub mod encode;
pub mod fraig;
pub mod lits;
pub mod rng;
pub mod session;
pub mod solver;

pub use lits::{Assignment, Clause, Formula, Lit};
pub use session::{EngineConfig, SolveResult, SolverSession, SolverStatus};
