//! Shared generators and contract checkers for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use std::path::PathBuf;

use aigsweep_core::aig::{Aig, AigLit, AigNode, NodeId};
use aigsweep_core::lits::{eval_formula, Assignment, Lit};
use aigsweep_core::rng::SplitMix64;
use aigsweep_core::session::{EngineConfig, SolveResult, SolverSession, SolverStatus};
use aigsweep_core::solver::brute_force_solve;

/// The IPASIR library to test against: the environment variable when set,
/// otherwise the workspace's own shim if it has been built.
pub fn external_library() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(aigsweep_core::backend::IPASIR_ENV) {
        if !p.is_empty() {
            return Some(PathBuf::from(p));
        }
    }
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libipasir_shim.so");
    lib.exists().then_some(lib)
}

pub fn random_lit(rng: &mut SplitMix64, nvars: u32) -> Lit {
    Lit::new(rng.below(nvars as u64) as u32, rng.next_bool())
}

pub fn random_clause(rng: &mut SplitMix64, nvars: u32) -> Vec<Lit> {
    let len = 1 + rng.below(3) as usize;
    (0..len).map(|_| random_lit(rng, nvars)).collect()
}

/// Completes a solution literal list into a total assignment over `nvars`
/// variables, defaulting unmentioned variables to false.
pub fn complete_assignment(solution: &[Lit], nvars: u32) -> Assignment {
    let mut env = Assignment::new();
    for v in 0..nvars {
        env.set(v, false);
    }
    for &l in solution {
        env.set(l.var(), !l.is_negated());
    }
    env
}

/// One random incremental scenario: interleaved clause batches and solves
/// under random assumptions, with every solve checked against the
/// brute-force oracle and the solve contract. Panics on any violation.
pub fn run_solve_contract_scenario(seed: u64, engine: &EngineConfig) {
    let mut rng = SplitMix64::new(seed);
    let nvars = 1 + rng.below(20) as u32;
    let mut clause_budget = 90u64;
    let nsolves = 1 + rng.below(5);

    let mut session = SolverSession::init(engine).expect("init");
    for _ in 0..nsolves {
        let batch = rng.below(clause_budget / nsolves + 2).min(clause_budget);
        clause_budget -= batch;
        for _ in 0..batch {
            for l in random_clause(&mut rng, nvars) {
                session.add_lit(l).expect("add_lit");
            }
            session.finalize_clause().expect("finalize");
        }
        let assumption_in: Vec<Lit> = (0..rng.below(5))
            .map(|_| random_lit(&mut rng, nvars))
            .collect();
        for &a in &assumption_in {
            session.assume(a).expect("assume");
        }

        let formula_before = session.formula().clone();
        let callbacks_before = session.callback_count();
        let result = session.solve().expect("solve");
        let snap = session.inspect();

        // result/status correspondence
        let expected_status = match result {
            SolveResult::Sat => SolverStatus::Sat,
            SolveResult::Unsat => SolverStatus::Unsat,
            SolveResult::Failed => SolverStatus::Input,
        };
        assert_eq!(snap.status, expected_status, "seed {seed}");

        // assumption consumed, new-clause empty, formula preserved
        assert!(
            snap.assumption.is_empty(),
            "seed {seed}: assumption not consumed"
        );
        assert!(snap.empty_new_clause, "seed {seed}");
        assert_eq!(
            session.formula(),
            &formula_before,
            "seed {seed}: formula changed"
        );

        // callback count is monotone
        assert!(
            session.callback_count() >= callbacks_before,
            "seed {seed}: callback count decreased"
        );

        let oracle = brute_force_solve(&formula_before, &assumption_in).expect("oracle");
        match result {
            SolveResult::Sat => {
                assert!(oracle.is_sat(), "seed {seed}: engine SAT, oracle UNSAT");
                let env = complete_assignment(
                    session.solution(),
                    nvars.max(formula_before.max_var().map_or(0, |v| v + 1)),
                );
                assert_eq!(
                    eval_formula(&formula_before, &env),
                    Ok(true),
                    "seed {seed}: SAT solution does not satisfy the formula"
                );
                for &a in &assumption_in {
                    assert_eq!(
                        a.eval(&env),
                        Ok(true),
                        "seed {seed}: assumption {a:?} violated"
                    );
                }
            }
            SolveResult::Unsat => {
                assert!(oracle.is_unsat(), "seed {seed}: engine UNSAT, oracle SAT");
                for l in session.solution() {
                    assert!(
                        assumption_in.contains(l),
                        "seed {seed}: core literal {l:?} not among assumptions"
                    );
                }
                assert_eq!(
                    snap.solved_assumption.as_deref(),
                    Some(assumption_in.as_slice()),
                    "seed {seed}: solved assumption mismatch"
                );
                let confirm =
                    brute_force_solve(&formula_before, session.solution()).expect("oracle");
                assert!(
                    confirm.is_unsat(),
                    "seed {seed}: reported core is satisfiable with the formula"
                );
                for &l in session.solution() {
                    assert_eq!(session.failed(l), Ok(true), "seed {seed}");
                }
            }
            SolveResult::Failed => {
                panic!("seed {seed}: FAILED returned with no limit set");
            }
        }
    }
}

/// Drives one random operation sequence against a fresh session, checking
/// every guard against a shadow model and the history counter against the
/// mutator/accessor split. Panics on any violation.
pub fn run_state_machine_sequence(seed: u64, engine: &EngineConfig) {
    const NVARS: u32 = 5;
    let mut rng = SplitMix64::new(seed);
    let mut session = SolverSession::init(engine).expect("init");

    // shadow expectations
    let mut status = SolverStatus::Input;
    let mut new_clause_empty = true;
    let mut solved_assumption: Vec<Lit> = Vec::new();
    let mut assumption: Vec<Lit> = Vec::new();
    let mut history = session.history();
    assert_eq!(history, 1);

    let steps = 5 + rng.below(25);
    for step in 0..steps {
        let initialized = status != SolverStatus::Undef;
        let op = rng.below(12);
        let mutated: Option<bool> = match op {
            0 => {
                let l = random_lit(&mut rng, NVARS);
                let r = session.add_lit(l);
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: add_lit");
                if r.is_ok() {
                    new_clause_empty = false;
                    status = SolverStatus::Input;
                }
                Some(r.is_ok())
            }
            1 => {
                let r = session.finalize_clause();
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: finalize");
                if r.is_ok() {
                    new_clause_empty = true;
                    status = SolverStatus::Input;
                }
                Some(r.is_ok())
            }
            2 => {
                let l = random_lit(&mut rng, NVARS);
                let r = session.assume(l);
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: assume");
                if r.is_ok() {
                    assumption.push(l);
                    status = SolverStatus::Input;
                }
                Some(r.is_ok())
            }
            3 => {
                let r = session.input();
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: input");
                if r.is_ok() {
                    status = SolverStatus::Input;
                }
                Some(r.is_ok())
            }
            4 => {
                let legal = initialized && new_clause_empty;
                let r = session.solve();
                assert_eq!(r.is_ok(), legal, "seed {seed} step {step}: solve");
                if let Ok(result) = r {
                    status = match result {
                        SolveResult::Sat => SolverStatus::Sat,
                        SolveResult::Unsat => SolverStatus::Unsat,
                        SolveResult::Failed => SolverStatus::Input,
                    };
                    if result == SolveResult::Unsat {
                        solved_assumption = assumption.clone();
                    }
                    assumption.clear();
                    assert!(
                        session.inspect().assumption.is_empty(),
                        "seed {seed} step {step}: assumption kept after solve"
                    );
                }
                Some(r.is_ok())
            }
            5 => {
                let l = random_lit(&mut rng, NVARS);
                let r = session.val(l);
                assert_eq!(
                    r.is_ok(),
                    status == SolverStatus::Sat,
                    "seed {seed} step {step}: val"
                );
                None
            }
            6 => {
                let l = if !solved_assumption.is_empty() && rng.next_bool() {
                    solved_assumption[rng.below(solved_assumption.len() as u64) as usize]
                } else {
                    random_lit(&mut rng, NVARS)
                };
                let legal = status == SolverStatus::Unsat && solved_assumption.contains(&l);
                let r = session.failed(l);
                assert_eq!(r.is_ok(), legal, "seed {seed} step {step}: failed({l:?})");
                None
            }
            7 => {
                let limit = if rng.next_bool() {
                    Some(rng.below(4))
                } else {
                    None
                };
                let r = session.set_limit(limit);
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: set_limit");
                if r.is_ok() {
                    assert_eq!(session.callback_count(), 0, "seed {seed} step {step}");
                    // status must be untouched by set_limit
                    assert_eq!(session.status(), status, "seed {seed} step {step}");
                }
                Some(r.is_ok())
            }
            8 => {
                let lits = [random_lit(&mut rng, NVARS)];
                let r = session.bump_activity_vars(&lits);
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: bump");
                Some(r.is_ok())
            }
            9 => {
                let r = session.get_curr_stats();
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: stats");
                None
            }
            10 => {
                let r = session.release();
                assert_eq!(r.is_ok(), initialized, "seed {seed} step {step}: release");
                if r.is_ok() {
                    status = SolverStatus::Undef;
                }
                Some(r.is_ok())
            }
            _ => {
                let legal = status == SolverStatus::Undef;
                let r = session.reinit();
                assert_eq!(r.is_ok(), legal, "seed {seed} step {step}: reinit");
                if r.is_ok() {
                    status = SolverStatus::Input;
                    new_clause_empty = true;
                    assumption.clear();
                    solved_assumption.clear();
                }
                Some(r.is_ok())
            }
        };

        assert_eq!(
            session.status(),
            status,
            "seed {seed} step {step}: status diverged"
        );
        let h = session.history();
        match mutated {
            Some(true) => assert!(h > history, "seed {seed} step {step}: history not bumped"),
            Some(false) => assert_eq!(
                h, history,
                "seed {seed} step {step}: failed op bumped history"
            ),
            None => assert_eq!(
                h, history,
                "seed {seed} step {step}: accessor bumped history"
            ),
        }
        history = h;
        let _ = session.inspect();
        assert_eq!(
            session.history(),
            history,
            "seed {seed} step {step}: inspect bumped history"
        );
    }
}

/// Random AIG with deliberate structural and semantic redundancy, at most
/// `max_cis` combinational inputs and `max_ands` AND nodes.
pub fn random_aig(rng: &mut SplitMix64, max_cis: usize, max_ands: usize) -> Aig {
    let total_cis = 1 + rng.below(max_cis as u64) as usize;
    let nregs = if total_cis >= 2 && rng.below(3) == 0 {
        1 + rng.below(2.min(total_cis as u64 - 1)) as usize
    } else {
        0
    };
    let ninputs = total_cis - nregs;

    let mut g = Aig::new();
    let mut pool: Vec<AigLit> = Vec::new();
    for _ in 0..ninputs {
        pool.push(g.add_input());
    }
    for _ in 0..nregs {
        pool.push(g.add_reg());
    }
    let mut ands: Vec<NodeId> = Vec::new();

    let nands = rng.below(max_ands as u64 + 1);
    for _ in 0..nands {
        let style = if ands.is_empty() { 0 } else { rng.below(10) };
        let lit = match style {
            // fresh random gate, raw half the time so duplicates survive
            0..=4 => {
                let a = pool[rng.below(pool.len() as u64) as usize].invert_if(rng.next_bool());
                let b = pool[rng.below(pool.len() as u64) as usize].invert_if(rng.next_bool());
                if rng.next_bool() {
                    g.push_and_raw(a, b).unwrap()
                } else {
                    g.add_and(a, b).unwrap()
                }
            }
            // structural duplicate of an existing gate
            5..=7 => {
                let id = ands[rng.below(ands.len() as u64) as usize];
                let AigNode::And(a, b) = *g.node(id).unwrap() else {
                    unreachable!()
                };
                g.push_and_raw(a, b).unwrap()
            }
            // absorption: AND(n, fanin(n)) is equivalent to n
            _ => {
                let id = ands[rng.below(ands.len() as u64) as usize];
                let AigNode::And(a, _) = *g.node(id).unwrap() else {
                    unreachable!()
                };
                g.push_and_raw(AigLit::new(id, false), a).unwrap()
            }
        };
        if lit.node() != 0
            && !matches!(
                g.node(lit.node()),
                Some(AigNode::Input(_) | AigNode::Reg(_))
            )
        {
            ands.push(lit.node());
        }
        pool.push(lit);
    }

    let nouts = 1 + rng.below(3);
    for _ in 0..nouts {
        let l = pool[rng.below(pool.len() as u64) as usize].invert_if(rng.next_bool());
        g.add_output(l).unwrap();
    }
    for k in 0..nregs {
        let l = pool[rng.below(pool.len() as u64) as usize].invert_if(rng.next_bool());
        g.set_next_state(k, l).unwrap();
    }
    g
}

/// The deterministic graph corpus shared by the sweep-related suites.
pub fn corpus(count: usize, max_cis: usize, max_ands: usize) -> Vec<Aig> {
    (0..count)
        .map(|i| {
            let mut rng = SplitMix64::new(0xC0FFEE ^ (i as u64).wrapping_mul(0x9e37));
            random_aig(&mut rng, max_cis, max_ands)
        })
        .collect()
}
