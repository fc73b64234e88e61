//! Direct backend checks against the workspace's own IPASIR shim (or a
//! library named by IPASIR_SHARED_LIBRARY). Skipped when neither exists.

mod common;

use aigsweep_core::backend::{load_library, BackendEngine};
use aigsweep_core::lits::Lit;
use aigsweep_core::session::{Engine, EngineConfig, SolveResult, SolverSession, SolverStatus};
use aigsweep_core::solver::EngineAnswer;

use common::external_library;

macro_rules! require_library {
    () => {
        match external_library() {
            Some(lib) => lib,
            None => {
                eprintln!("skipping: no IPASIR library available");
                return;
            }
        }
    };
}

fn lit(v: u32, neg: bool) -> Lit {
    Lit::new(v, neg)
}

#[test]
fn signature_is_stable_and_nonempty() {
    let lib = require_library!();
    let l1 = load_library(&lib).unwrap();
    let l2 = load_library(&lib).unwrap();
    assert!(!l1.signature().is_empty());
    assert_eq!(l1.signature(), l2.signature());
}

#[test]
fn solve_val_failed_roundtrip() {
    let lib = require_library!();
    let mut e = BackendEngine::open(Some(&lib)).unwrap();

    // (v0 | v1) & (!v0 | v1)  =>  v1 forced
    e.add_clause(&[lit(0, false), lit(1, false)]);
    e.add_clause(&[lit(0, true), lit(1, false)]);
    let outcome = e.solve(&[], None).unwrap();
    match outcome.answer {
        EngineAnswer::Sat(model) => assert_eq!(model.get(1), Some(true)),
        other => panic!("expected SAT, got {other:?}"),
    }
    assert_eq!(e.status(), SolverStatus::Sat);

    // assumption mirror fills during solve and clears afterwards
    let outcome = e.solve(&[lit(1, true)], None).unwrap();
    match outcome.answer {
        EngineAnswer::Unsat(core) => assert_eq!(core, vec![lit(1, true)]),
        other => panic!("expected UNSAT, got {other:?}"),
    }
    assert_eq!(e.status(), SolverStatus::Unsat);
    assert!(e.assumption_mirror().is_empty());
    assert_eq!(e.solved_assumption_mirror(), &[lit(1, true)]);
    assert!(e.empty_new_clause());
    assert!(e.ever_initialized());
    // IPASIR exposes no counters; the stub reports zeros
    assert_eq!(e.stats(), Default::default());

    // recoverable: same formula without assumptions is SAT again
    assert!(e.solve(&[], None).unwrap().answer.is_sat());
}

#[test]
fn terminate_callback_counts_and_interrupts() {
    let lib = require_library!();
    let mut e = BackendEngine::open(Some(&lib)).unwrap();
    // v0 xor v1 asserted both ways: one decision, then conflicts
    e.add_clause(&[lit(0, true), lit(1, false)]);
    e.add_clause(&[lit(0, false), lit(1, true)]);
    e.add_clause(&[lit(0, false), lit(1, false)]);
    e.add_clause(&[lit(0, true), lit(1, true)]);

    let outcome = e.solve(&[], Some(0)).unwrap();
    assert_eq!(outcome.answer, EngineAnswer::Interrupted);
    assert!(
        outcome.callbacks <= 1,
        "count {} exceeds limit",
        outcome.callbacks
    );

    let outcome = e.solve(&[], None).unwrap();
    assert!(outcome.answer.is_unsat());
}

#[test]
fn release_and_reinit_cycle() {
    let lib = require_library!();
    let mut e = BackendEngine::open(Some(&lib)).unwrap();
    e.add_clause(&[lit(0, false)]);
    assert!(e.solve(&[], None).unwrap().answer.is_sat());
    e.release();
    assert_eq!(e.status(), SolverStatus::Undef);
    e.reinit().unwrap();
    assert_eq!(e.status(), SolverStatus::Input);
    // fresh solver: the old unit clause is gone
    assert!(e.solve(&[lit(0, true)], None).unwrap().answer.is_sat());
}

#[test]
fn session_over_external_engine_matches_embedded() {
    let lib = require_library!();
    let external = EngineConfig::External { library: Some(lib) };
    for seed in 0..50u64 {
        common::run_solve_contract_scenario(0xE57 + seed, &external);
    }

    // spot-check a full session flow
    let mut s = SolverSession::init(&external).unwrap();
    s.add_lit(Lit::from_code(2)).unwrap();
    s.finalize_clause().unwrap();
    s.assume(Lit::from_code(3)).unwrap();
    assert_eq!(s.solve().unwrap(), SolveResult::Unsat);
    assert_eq!(s.failed(Lit::from_code(3)), Ok(true));
    s.release().unwrap();
    s.reinit().unwrap();
    assert_eq!(s.solve().unwrap(), SolveResult::Sat);
}
