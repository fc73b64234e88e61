//! Literals, clauses, and CNF formulas.
//!
//! A literal is a natural number whose least significant bit carries the
//! polarity and whose remaining bits carry the 0-based variable index.
//! The solver-facing C convention uses signed non-zero integers instead
//! (sign is polarity, absolute value is the 1-based variable); we call
//! those DIMACS literals and convert at the boundary.

use std::fmt;

use thiserror::Error;

/// 0-based variable index.
pub type Var = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LitsError {
    #[error("0 is a clause terminator, not a DIMACS literal")]
    ZeroDimacsLit,
    #[error("variable {0} is unassigned")]
    Unassigned(Var),
}

/// A literal encoded as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit((var << 1) | negated as u32)
    }

    /// Builds a literal from its raw encoding.
    #[inline]
    pub fn from_code(code: u32) -> Lit {
        Lit(code)
    }

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn var(self) -> Var {
        self.0 >> 1
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 != 0
    }

    #[inline]
    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Signed non-zero integer form; variables shift to 1-based.
    pub fn to_dimacs(self) -> i32 {
        let v = (self.var() + 1) as i32;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Inverse of [`Lit::to_dimacs`]. Rejects 0, which terminates a
    /// clause in the C convention and denotes no literal.
    pub fn from_dimacs(d: i32) -> Result<Lit, LitsError> {
        if d == 0 {
            return Err(LitsError::ZeroDimacsLit);
        }
        Ok(Lit::new(d.unsigned_abs() - 1, d < 0))
    }

    /// Truth value under `env`; errors if the variable is unassigned.
    pub fn eval(self, env: &Assignment) -> Result<bool, LitsError> {
        match env.get(self.var()) {
            Some(v) => Ok(v ^ self.is_negated()),
            None => Err(LitsError::Unassigned(self.var())),
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        self.negate()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "!v{}", self.var())
        } else {
            write!(f, "v{}", self.var())
        }
    }
}

/// A clause is a disjunction of literals; the empty clause is unsatisfiable.
pub type Clause = Vec<Lit>;

/// An ordered list of clauses; the empty formula is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Formula {
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new() -> Formula {
        Formula::default()
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Largest variable index mentioned, if any.
    pub fn max_var(&self) -> Option<Var> {
        self.clauses
            .iter()
            .flat_map(|c| c.iter())
            .map(|l| l.var())
            .max()
    }

    /// DIMACS CNF text: `p cnf <max-var> <num-clauses>` followed by one
    /// 0-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let num_vars = self.max_var().map_or(0, |v| v + 1);
        let mut out = format!("p cnf {} {}\n", num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl FromIterator<Clause> for Formula {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Formula {
        Formula {
            clauses: iter.into_iter().collect(),
        }
    }
}

/// Partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_values(values: Vec<Option<bool>>) -> Assignment {
        Assignment { values }
    }

    pub fn set(&mut self, var: Var, value: bool) {
        let idx = var as usize;
        if idx >= self.values.len() {
            self.values.resize(idx + 1, None);
        }
        self.values[idx] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var as usize).copied().flatten()
    }

    /// Number of assigned variables.
    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(|v| v.is_none())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (i as Var, b)))
    }
}

pub fn eval_lit(l: Lit, env: &Assignment) -> Result<bool, LitsError> {
    l.eval(env)
}

/// Disjunction over the clause; the empty clause evaluates to false.
pub fn eval_clause(clause: &[Lit], env: &Assignment) -> Result<bool, LitsError> {
    let mut sat = false;
    for &lit in clause {
        sat |= lit.eval(env)?;
    }
    Ok(sat)
}

/// Conjunction over all clauses; the empty formula evaluates to true.
pub fn eval_formula(formula: &Formula, env: &Assignment) -> Result<bool, LitsError> {
    let mut sat = true;
    for clause in formula.clauses() {
        sat &= eval_clause(clause, env)?;
    }
    Ok(sat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env(pairs: &[(Var, bool)]) -> Assignment {
        let mut a = Assignment::new();
        for &(v, b) in pairs {
            a.set(v, b);
        }
        a
    }

    #[test]
    fn make_lit_encoding() {
        assert_eq!(Lit::new(2, true).code(), 5);
        assert_eq!(Lit::new(0, false).code(), 0);
        assert_eq!(Lit::new(7, false).code(), 14);
    }

    #[test]
    fn negate_flips_polarity_only() {
        assert_eq!(Lit::from_code(5).negate(), Lit::from_code(4));
        assert_eq!(Lit::from_code(0).negate(), Lit::from_code(1));
        assert_eq!(Lit::from_code(9).negate().negate(), Lit::from_code(9));
    }

    #[test]
    fn dimacs_conversion() {
        assert_eq!(Lit::from_code(5).to_dimacs(), -3);
        assert_eq!(Lit::from_code(0).to_dimacs(), 1);
        assert_eq!(Lit::from_code(14).to_dimacs(), 8);
        assert_eq!(Lit::from_dimacs(-3), Ok(Lit::from_code(5)));
        assert_eq!(Lit::from_dimacs(1), Ok(Lit::from_code(0)));
        assert_eq!(Lit::from_dimacs(0), Err(LitsError::ZeroDimacsLit));
    }

    #[test]
    fn lit_eval() {
        let e = env(&[(2, true)]);
        assert_eq!(Lit::from_code(4).eval(&e), Ok(true));
        assert_eq!(Lit::from_code(5).eval(&e), Ok(false));
        let e0 = env(&[(2, false)]);
        assert_eq!(Lit::from_code(5).eval(&e0), Ok(true));
        assert_eq!(Lit::from_code(0).eval(&e), Err(LitsError::Unassigned(0)));
    }

    #[test]
    fn clause_eval() {
        let e = env(&[(0, false), (1, false)]);
        assert_eq!(eval_clause(&[], &e), Ok(false));
        assert_eq!(
            eval_clause(&[Lit::from_code(0), Lit::from_code(3)], &e),
            Ok(true)
        );
        assert_eq!(eval_clause(&[Lit::from_code(0)], &e), Ok(false));
    }

    #[test]
    fn formula_eval() {
        let empty = Formula::new();
        assert_eq!(eval_formula(&empty, &env(&[])), Ok(true));

        let contradiction: Formula = [vec![Lit::from_code(0)], vec![Lit::from_code(1)]]
            .into_iter()
            .collect();
        assert_eq!(eval_formula(&contradiction, &env(&[(0, true)])), Ok(false));
        assert_eq!(eval_formula(&contradiction, &env(&[(0, false)])), Ok(false));

        let f: Formula = [
            vec![Lit::from_code(0), Lit::from_code(2)],
            vec![Lit::from_code(1), Lit::from_code(2)],
        ]
        .into_iter()
        .collect();
        assert_eq!(eval_formula(&f, &env(&[(0, true), (1, true)])), Ok(true));
    }

    #[test]
    fn dimacs_text() {
        let f: Formula = [
            vec![Lit::new(0, false), Lit::new(2, true)],
            vec![Lit::new(1, true)],
        ]
        .into_iter()
        .collect();
        assert_eq!(f.to_dimacs(), "p cnf 3 2\n1 -3 0\n-2 0\n");
        assert_eq!(Formula::new().to_dimacs(), "p cnf 0 0\n");
    }

    proptest! {
        #[test]
        fn dimacs_roundtrip(var in 0u32..100_000, neg in any::<bool>()) {
            let l = Lit::new(var, neg);
            let d = l.to_dimacs();
            prop_assert_ne!(d, 0);
            prop_assert_eq!(Lit::from_dimacs(d).unwrap(), l);
        }

        #[test]
        fn negation_complements_eval(var in 0u32..64, neg in any::<bool>(), value in any::<bool>()) {
            let l = Lit::new(var, neg);
            let mut e = Assignment::new();
            e.set(var, value);
            prop_assert_eq!(l.eval(&e).unwrap(), !l.negate().eval(&e).unwrap());
        }

        #[test]
        fn formula_concat_is_conjunction(
            a in proptest::collection::vec(proptest::collection::vec(0u32..16, 0..4), 0..6),
            b in proptest::collection::vec(proptest::collection::vec(0u32..16, 0..4), 0..6),
            bits in any::<[bool; 8]>(),
        ) {
            let to_formula = |cs: &[Vec<u32>]| -> Formula {
                cs.iter()
                    .map(|c| c.iter().map(|&code| Lit::from_code(code)).collect())
                    .collect()
            };
            let fa = to_formula(&a);
            let fb = to_formula(&b);
            let mut both = fa.clone();
            for c in fb.clauses() {
                both.push(c.clone());
            }
            let mut e = Assignment::new();
            for v in 0..8 {
                e.set(v, bits[v as usize]);
            }
            prop_assert_eq!(
                eval_formula(&both, &e).unwrap(),
                eval_formula(&fa, &e).unwrap() && eval_formula(&fb, &e).unwrap()
            );
        }
    }
}
