//! On-demand Tseitin encoding of AIG fanin cones into a solver session.
//!
//! Only positive-phase AIG literals get CNF variables; a literal's invert
//! bit is carried into the SAT literal instead. Encoding a cone maintains
//! the invariant that every evaluation of the graph extends to a
//! satisfying assignment of the session's formula, so an UNSAT answer can
//! only ever blame the assumptions.

use std::collections::HashMap;

use thiserror::Error;

use crate::aig::{Aig, AigError, AigLit, AigNode, NodeId};
use crate::lits::{Assignment, Lit, Var};
use crate::session::{SessionError, SolverSession};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("SAT variable {0} is not mapped to an AIG literal")]
    UnmappedVar(Var),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Aig(#[from] AigError),
}

/// Bidirectional mapping between positive-phase AIG literals and SAT
/// variables.
#[derive(Clone, Debug, Default)]
pub struct SatLitMap {
    node_to_var: HashMap<NodeId, Var>,
    var_to_node: Vec<NodeId>,
}

impl SatLitMap {
    pub fn new() -> SatLitMap {
        SatLitMap::default()
    }

    pub fn num_vars(&self) -> usize {
        self.var_to_node.len()
    }

    /// SAT literal for an AIG literal whose node is already encoded.
    pub fn sat_lit(&self, l: AigLit) -> Option<Lit> {
        self.node_to_var
            .get(&l.node())
            .map(|&v| Lit::new(v, l.is_inverted()))
    }

    pub fn var_of(&self, node: NodeId) -> Option<Var> {
        self.node_to_var.get(&node).copied()
    }

    /// The AIG literal registered for a SAT variable.
    pub fn sat_var_to_aig_lit(&self, v: Var) -> Result<AigLit, EncodeError> {
        self.var_to_node
            .get(v as usize)
            .map(|&n| AigLit::new(n, false))
            .ok_or(EncodeError::UnmappedVar(v))
    }

    fn alloc(&mut self, node: NodeId) -> Var {
        debug_assert!(!self.node_to_var.contains_key(&node));
        let v = self.var_to_node.len() as Var;
        self.var_to_node.push(node);
        self.node_to_var.insert(node, v);
        v
    }
}

fn push_clause(s: &mut SolverSession, lits: &[Lit]) -> Result<(), SessionError> {
    for &l in lits {
        s.add_lit(l)?;
    }
    s.finalize_clause()
}

/// Encodes the fanin cone of `l` into the session (idempotently) and
/// returns the SAT literal for `l`.
///
/// Inputs and registers get an unconstrained variable. An AND node with
/// fanin literals `a`, `b` and output variable `o` contributes the three
/// clauses `(!o | a)`, `(!o | b)`, `(o | !a | !b)`. The constant-false
/// node, when reached, is pinned by a unit clause.
pub fn ensure_encoded(
    g: &Aig,
    l: AigLit,
    m: &mut SatLitMap,
    s: &mut SolverSession,
) -> Result<Lit, EncodeError> {
    let mut stack: Vec<(NodeId, bool)> = vec![(l.node(), false)];
    while let Some((id, expanded)) = stack.pop() {
        if m.var_of(id).is_some() {
            continue;
        }
        let node = *g.node(id).ok_or(AigError::DanglingNode(id))?;
        match node {
            AigNode::ConstFalse => {
                let v = m.alloc(id);
                push_clause(s, &[Lit::new(v, true)])?;
            }
            AigNode::Input(_) | AigNode::Reg(_) => {
                m.alloc(id);
            }
            AigNode::And(a, b) => {
                if !expanded {
                    stack.push((id, true));
                    stack.push((a.node(), false));
                    stack.push((b.node(), false));
                    continue;
                }
                let sa = m.sat_lit(a).expect("fanin encoded before gate");
                let sb = m.sat_lit(b).expect("fanin encoded before gate");
                let o = Lit::new(m.alloc(id), false);
                push_clause(s, &[o.negate(), sa])?;
                push_clause(s, &[o.negate(), sb])?;
                push_clause(s, &[o, sa.negate(), sb.negate()])?;
            }
        }
    }
    Ok(m.sat_lit(l).expect("root encoded"))
}

/// Maps an evaluation of the graph onto the CNF variables: every mapped
/// variable is assigned the value of its registered AIG literal.
pub fn aig_to_cnf_vals(
    g: &Aig,
    invals: &[bool],
    regvals: &[bool],
    m: &SatLitMap,
) -> Result<Assignment, EncodeError> {
    let values = g.eval_all(invals, regvals)?;
    let mut assignment = Assignment::new();
    for (v, &node) in m.var_to_node.iter().enumerate() {
        assignment.set(v as Var, values[node as usize]);
    }
    Ok(assignment)
}
