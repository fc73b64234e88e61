//! Exhaustive truth-table oracle for small instances.
//!
//! Used by tests as an independent reference for the CDCL engine; the two
//! must never be reconciled by sharing search code. Enumeration is over raw
//! bit masks, with clauses precompiled to positive/negative variable masks.

use thiserror::Error;

use super::EngineAnswer;
use crate::lits::{Assignment, Formula, Lit, Var};

/// Enumeration bound; `2^24` assignments is the most we are willing to scan.
pub const BRUTE_FORCE_MAX_VARS: u32 = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute force limited to {BRUTE_FORCE_MAX_VARS} variables, instance has {0}")]
    TooManyVariables(u32),
}

#[derive(Clone, Copy)]
struct ClauseMask {
    pos: u32,
    neg: u32,
}

fn compile(formula: &Formula, assumptions: &[Lit]) -> Result<(Vec<ClauseMask>, u32), OracleError> {
    let mut num_vars = formula.max_var().map_or(0, |v| v + 1);
    for a in assumptions {
        num_vars = num_vars.max(a.var() + 1);
    }
    if num_vars > BRUTE_FORCE_MAX_VARS {
        return Err(OracleError::TooManyVariables(num_vars));
    }
    let mut masks = Vec::with_capacity(formula.len() + assumptions.len());
    for clause in formula.clauses() {
        let mut m = ClauseMask { pos: 0, neg: 0 };
        for &l in clause {
            if l.is_negated() {
                m.neg |= 1 << l.var();
            } else {
                m.pos |= 1 << l.var();
            }
        }
        masks.push(m);
    }
    for &a in assumptions {
        masks.push(if a.is_negated() {
            ClauseMask {
                pos: 0,
                neg: 1 << a.var(),
            }
        } else {
            ClauseMask {
                pos: 1 << a.var(),
                neg: 0,
            }
        });
    }
    Ok((masks, num_vars))
}

#[inline]
fn satisfies(masks: &[ClauseMask], m: u32) -> bool {
    masks.iter().all(|c| (m & c.pos) != 0 || (!m & c.neg) != 0)
}

fn scan(masks: &[ClauseMask], lo: u64, hi: u64) -> Option<u32> {
    (lo..hi).map(|m| m as u32).find(|&m| satisfies(masks, m))
}

fn model_of(m: u32, num_vars: u32) -> Assignment {
    let mut model = Assignment::new();
    for v in 0..num_vars {
        model.set(v as Var, (m >> v) & 1 != 0);
    }
    model
}

/// Exhaustive solve. On UNSAT the reported core is the full assumption
/// set, which is always a valid (maximal) subset.
pub fn brute_force_solve(
    formula: &Formula,
    assumptions: &[Lit],
) -> Result<EngineAnswer, OracleError> {
    let (masks, num_vars) = compile(formula, assumptions)?;
    let total = 1u64 << num_vars;
    let hit = search(&masks, total);
    Ok(match hit {
        Some(m) => EngineAnswer::Sat(model_of(m, num_vars)),
        None => EngineAnswer::Unsat(assumptions.to_vec()),
    })
}

/// Sequential variant of [`brute_force_solve`], kept callable regardless of
/// the `parallel` feature so benchmarks can compare the two paths.
pub fn brute_force_solve_seq(
    formula: &Formula,
    assumptions: &[Lit],
) -> Result<EngineAnswer, OracleError> {
    let (masks, num_vars) = compile(formula, assumptions)?;
    let total = 1u64 << num_vars;
    Ok(match scan(&masks, 0, total) {
        Some(m) => EngineAnswer::Sat(model_of(m, num_vars)),
        None => EngineAnswer::Unsat(assumptions.to_vec()),
    })
}

#[cfg(feature = "parallel")]
fn search(masks: &[ClauseMask], total: u64) -> Option<u32> {
    use rayon::prelude::*;

    const CHUNK: u64 = 1 << 14;
    if total <= CHUNK {
        return scan(masks, 0, total);
    }
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .find_map_any(|c| scan(masks, c * CHUNK, ((c + 1) * CHUNK).min(total)))
}

#[cfg(not(feature = "parallel"))]
fn search(masks: &[ClauseMask], total: u64) -> Option<u32> {
    scan(masks, 0, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::eval_formula;

    fn lit(v: Var, neg: bool) -> Lit {
        Lit::new(v, neg)
    }

    #[test]
    fn positive_unit_is_sat() {
        let f: Formula = [vec![lit(0, false)]].into_iter().collect();
        assert!(brute_force_solve(&f, &[]).unwrap().is_sat());
    }

    #[test]
    fn unit_with_contradicting_assumption_is_unsat() {
        let f: Formula = [vec![lit(0, false)]].into_iter().collect();
        let answer = brute_force_solve(&f, &[lit(0, true)]).unwrap();
        assert_eq!(answer, EngineAnswer::Unsat(vec![lit(0, true)]));
    }

    #[test]
    fn empty_formula_is_sat() {
        assert!(brute_force_solve(&Formula::new(), &[]).unwrap().is_sat());
    }

    #[test]
    fn empty_clause_is_unsat() {
        let f: Formula = [vec![]].into_iter().collect();
        assert!(brute_force_solve(&f, &[]).unwrap().is_unsat());
    }

    #[test]
    fn too_many_variables_is_an_error() {
        let f: Formula = [vec![lit(30, false)]].into_iter().collect();
        assert_eq!(
            brute_force_solve(&f, &[]),
            Err(OracleError::TooManyVariables(31))
        );
        // bound is enforced before any mask is built, so word-width
        // overflow cannot happen either
        let f: Formula = [vec![lit(77, false)]].into_iter().collect();
        assert_eq!(
            brute_force_solve_seq(&f, &[]),
            Err(OracleError::TooManyVariables(78))
        );
    }

    #[test]
    fn sat_models_satisfy_the_formula() {
        let f: Formula = [
            vec![lit(0, false), lit(1, true)],
            vec![lit(1, false), lit(2, true)],
            vec![lit(2, false), lit(0, true)],
        ]
        .into_iter()
        .collect();
        match brute_force_solve(&f, &[lit(0, false)]).unwrap() {
            EngineAnswer::Sat(model) => {
                assert!(eval_formula(&f, &model).unwrap());
                assert_eq!(model.get(0), Some(true));
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let f: Formula = [
            vec![lit(0, false), lit(5, true), lit(9, false)],
            vec![lit(3, true), lit(7, false)],
            vec![lit(2, false)],
            vec![lit(2, true), lit(8, false)],
        ]
        .into_iter()
        .collect();
        for assumptions in [vec![], vec![lit(8, true)], vec![lit(9, true), lit(0, true)]] {
            let a = brute_force_solve(&f, &assumptions).unwrap();
            let b = brute_force_solve_seq(&f, &assumptions).unwrap();
            assert_eq!(a.is_sat(), b.is_sat());
        }
    }
}
