//! And-inverter graphs with combinational evaluation and ASCII AIGER I/O.
//!
//! Node 0 is the constant-false node. Inputs and registers are sources;
//! registers are treated as combinational inputs, with one next-state
//! literal per register describing the transition function. AND nodes
//! reference strictly smaller node ids, so the node list is topologically
//! ordered by construction.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub type NodeId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigError {
    #[error("literal references node {0} which does not exist")]
    DanglingNode(NodeId),
    #[error("expected {expected} input values, got {got}")]
    InputLenMismatch { expected: usize, got: usize },
    #[error("expected {expected} register values, got {got}")]
    RegLenMismatch { expected: usize, got: usize },
    #[error("register index {0} out of range")]
    NoSuchReg(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct AigerError {
    pub line: usize,
    pub msg: String,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, AigerError> {
    Err(AigerError {
        line,
        msg: msg.into(),
    })
}

/// An AIG literal: `2 * node + invert`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AigLit(u32);

impl AigLit {
    pub const FALSE: AigLit = AigLit(0);
    pub const TRUE: AigLit = AigLit(1);

    pub fn new(node: NodeId, inverted: bool) -> AigLit {
        AigLit((node << 1) | inverted as u32)
    }

    #[inline]
    pub fn from_code(code: u32) -> AigLit {
        AigLit(code)
    }

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn node(self) -> NodeId {
        self.0 >> 1
    }

    #[inline]
    pub fn is_inverted(self) -> bool {
        self.0 & 1 != 0
    }

    #[inline]
    pub fn invert(self) -> AigLit {
        AigLit(self.0 ^ 1)
    }

    /// Conditional inversion.
    #[inline]
    pub fn invert_if(self, flip: bool) -> AigLit {
        AigLit(self.0 ^ flip as u32)
    }
}

impl std::ops::Not for AigLit {
    type Output = AigLit;
    fn not(self) -> AigLit {
        self.invert()
    }
}

impl fmt::Debug for AigLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverted() {
            write!(f, "!n{}", self.node())
        } else {
            write!(f, "n{}", self.node())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AigNode {
    ConstFalse,
    /// k-th primary input.
    Input(u32),
    /// k-th register, read as a combinational input.
    Reg(u32),
    And(AigLit, AigLit),
}

#[derive(Clone, Debug, Default)]
pub struct Aig {
    nodes: Vec<AigNode>,
    inputs: Vec<NodeId>,
    regs: Vec<NodeId>,
    outputs: Vec<AigLit>,
    next_states: Vec<AigLit>,
    strash: HashMap<(u32, u32), NodeId>,
}

impl Aig {
    pub fn new() -> Aig {
        Aig {
            nodes: vec![AigNode::ConstFalse],
            ..Aig::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn and_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, AigNode::And(..)))
            .count()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_regs(&self) -> usize {
        self.regs.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&AigNode> {
        self.nodes.get(id as usize)
    }

    pub fn nodes(&self) -> &[AigNode] {
        &self.nodes
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn regs(&self) -> &[NodeId] {
        &self.regs
    }

    pub fn outputs(&self) -> &[AigLit] {
        &self.outputs
    }

    pub fn next_states(&self) -> &[AigLit] {
        &self.next_states
    }

    pub fn add_input(&mut self) -> AigLit {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(AigNode::Input(self.inputs.len() as u32));
        self.inputs.push(id);
        AigLit::new(id, false)
    }

    /// Adds a register with a constant-false next state; use
    /// [`Aig::set_next_state`] once the transition function exists.
    pub fn add_reg(&mut self) -> AigLit {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(AigNode::Reg(self.regs.len() as u32));
        self.regs.push(id);
        self.next_states.push(AigLit::FALSE);
        AigLit::new(id, false)
    }

    pub fn set_next_state(&mut self, reg_index: usize, l: AigLit) -> Result<(), AigError> {
        self.check_lit(l)?;
        if reg_index >= self.regs.len() {
            return Err(AigError::NoSuchReg(reg_index));
        }
        self.next_states[reg_index] = l;
        Ok(())
    }

    pub fn add_output(&mut self, l: AigLit) -> Result<(), AigError> {
        self.check_lit(l)?;
        self.outputs.push(l);
        Ok(())
    }

    fn check_lit(&self, l: AigLit) -> Result<(), AigError> {
        if (l.node() as usize) < self.nodes.len() {
            Ok(())
        } else {
            Err(AigError::DanglingNode(l.node()))
        }
    }

    /// Returns the literal an AND of `a` and `b` would fold or hash to,
    /// without mutating the graph.
    pub fn find_and(&self, a: AigLit, b: AigLit) -> Result<Option<AigLit>, AigError> {
        self.check_lit(a)?;
        self.check_lit(b)?;
        if a == AigLit::FALSE || b == AigLit::FALSE || a == b.invert() {
            return Ok(Some(AigLit::FALSE));
        }
        if a == AigLit::TRUE {
            return Ok(Some(b));
        }
        if b == AigLit::TRUE || a == b {
            return Ok(Some(a));
        }
        let key = strash_key(a, b);
        Ok(self.strash.get(&key).map(|&id| AigLit::new(id, false)))
    }

    /// AND with constant folding and structural hashing: identical fanin
    /// pairs share one node.
    pub fn add_and(&mut self, a: AigLit, b: AigLit) -> Result<AigLit, AigError> {
        if let Some(hit) = self.find_and(a, b)? {
            return Ok(hit);
        }
        let key = strash_key(a, b);
        let id = self.nodes.len() as NodeId;
        self.nodes.push(AigNode::And(
            AigLit::from_code(key.0),
            AigLit::from_code(key.1),
        ));
        self.strash.insert(key, id);
        Ok(AigLit::new(id, false))
    }

    /// AND without folds or hashing; always creates a node. Exists so
    /// tests and generators can build graphs with structural redundancy.
    pub fn push_and_raw(&mut self, a: AigLit, b: AigLit) -> Result<AigLit, AigError> {
        self.check_lit(a)?;
        self.check_lit(b)?;
        let id = self.nodes.len() as NodeId;
        self.nodes.push(AigNode::And(a, b));
        self.strash.entry(strash_key(a, b)).or_insert(id);
        Ok(AigLit::new(id, false))
    }

    /// Values of every node under the given combinational inputs.
    pub fn eval_all(&self, invals: &[bool], regvals: &[bool]) -> Result<Vec<bool>, AigError> {
        if invals.len() != self.inputs.len() {
            return Err(AigError::InputLenMismatch {
                expected: self.inputs.len(),
                got: invals.len(),
            });
        }
        if regvals.len() != self.regs.len() {
            return Err(AigError::RegLenMismatch {
                expected: self.regs.len(),
                got: regvals.len(),
            });
        }
        let mut values = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                AigNode::ConstFalse => false,
                AigNode::Input(k) => invals[k as usize],
                AigNode::Reg(k) => regvals[k as usize],
                AigNode::And(a, b) => {
                    (values[a.node() as usize] ^ a.is_inverted())
                        && (values[b.node() as usize] ^ b.is_inverted())
                }
            };
            values.push(v);
        }
        Ok(values)
    }

    /// Evaluates one literal under the given combinational inputs.
    pub fn lit_eval(&self, l: AigLit, invals: &[bool], regvals: &[bool]) -> Result<bool, AigError> {
        self.check_lit(l)?;
        let values = self.eval_all(invals, regvals)?;
        Ok(values[l.node() as usize] ^ l.is_inverted())
    }

    /// Copy of this graph without AND nodes unreachable from the outputs
    /// and next-states. Inputs and registers are always retained, so the
    /// arity is unchanged.
    pub fn prune_unreachable(&self) -> Aig {
        let mut keep = vec![false; self.nodes.len()];
        keep[0] = true;
        for &id in self.inputs.iter().chain(self.regs.iter()) {
            keep[id as usize] = true;
        }
        for &l in self.outputs.iter().chain(self.next_states.iter()) {
            keep[l.node() as usize] = true;
        }
        for id in (1..self.nodes.len()).rev() {
            if keep[id] {
                if let AigNode::And(a, b) = self.nodes[id] {
                    keep[a.node() as usize] = true;
                    keep[b.node() as usize] = true;
                }
            }
        }
        let mut pruned = Aig::new();
        let mut remap: Vec<AigLit> = vec![AigLit::FALSE; self.nodes.len()];
        for id in 1..self.nodes.len() {
            if !keep[id] {
                continue;
            }
            remap[id] = match self.nodes[id] {
                AigNode::ConstFalse => unreachable!("only node 0 is constant"),
                AigNode::Input(_) => pruned.add_input(),
                AigNode::Reg(_) => pruned.add_reg(),
                AigNode::And(a, b) => {
                    let ra = remap[a.node() as usize].invert_if(a.is_inverted());
                    let rb = remap[b.node() as usize].invert_if(b.is_inverted());
                    pruned.add_and(ra, rb).expect("kept fanins exist")
                }
            };
        }
        for &o in &self.outputs {
            let l = remap[o.node() as usize].invert_if(o.is_inverted());
            pruned.add_output(l).expect("kept");
        }
        for (k, &ns) in self.next_states.iter().enumerate() {
            let l = remap[ns.node() as usize].invert_if(ns.is_inverted());
            pruned.set_next_state(k, l).expect("kept");
        }
        pruned
    }

    /// ASCII AIGER text for this graph. Node ids map one-to-one onto
    /// AIGER variables, so parsing the output reproduces the graph.
    pub fn write_aiger(&self) -> String {
        let max_var = self.nodes.len() - 1;
        let mut out = format!(
            "aag {} {} {} {} {}\n",
            max_var,
            self.inputs.len(),
            self.regs.len(),
            self.outputs.len(),
            self.and_count(),
        );
        for &id in &self.inputs {
            out.push_str(&format!("{}\n", id << 1));
        }
        for (k, &id) in self.regs.iter().enumerate() {
            out.push_str(&format!("{} {}\n", id << 1, self.next_states[k].code()));
        }
        for &o in &self.outputs {
            out.push_str(&format!("{}\n", o.code()));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if let AigNode::And(a, b) = node {
                out.push_str(&format!("{} {} {}\n", (id as u32) << 1, a.code(), b.code()));
            }
        }
        out
    }

    /// Parses ASCII AIGER. Requires `M == I + L + A`, each variable
    /// defined exactly once, and AND fanins referencing strictly smaller
    /// variables. Symbol table and comment sections are skipped.
    pub fn parse_aiger(text: &str) -> Result<Aig, AigerError> {
        let mut lines = text.lines().enumerate();
        let (lno, header) = match lines.next() {
            Some(l) => l,
            None => return perr(1, "empty file"),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "aag" {
            return perr(lno + 1, "expected header `aag M I L O A`");
        }
        let nums: Vec<u64> = fields[1..]
            .iter()
            .map(|f| f.parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| AigerError {
                line: lno + 1,
                msg: "header fields must be numbers".into(),
            })?;
        let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
        if m != i + l + a {
            return perr(
                lno + 1,
                format!("header count mismatch: M={m} but I+L+A={}", i + l + a),
            );
        }
        if m > (u32::MAX >> 1) as u64 {
            return perr(lno + 1, "graph too large");
        }
        let max_lit = 2 * m + 1;

        let mut next_line = |what: &str| -> Result<(usize, &str), AigerError> {
            match lines.next() {
                Some((n, line)) => Ok((n + 1, line)),
                None => perr(0, format!("unexpected end of file, expected {what}")),
            }
        };
        let parse_lit = |lno: usize, tok: &str| -> Result<u32, AigerError> {
            let v: u64 = tok.parse().map_err(|_| AigerError {
                line: lno,
                msg: format!("bad literal `{tok}`"),
            })?;
            if v > max_lit {
                return perr(lno, format!("literal {v} out of range (max {max_lit})"));
            }
            Ok(v as u32)
        };

        let mut defs: Vec<Option<AigNode>> = vec![None; m as usize + 1];
        defs[0] = Some(AigNode::ConstFalse);
        let define = |defs: &mut Vec<Option<AigNode>>,
                      lno: usize,
                      lit: u32,
                      node: AigNode|
         -> Result<NodeId, AigerError> {
            if lit & 1 != 0 {
                return perr(lno, format!("definition literal {lit} must be positive"));
            }
            let id = lit >> 1;
            if id == 0 {
                return perr(lno, "cannot redefine the constant node");
            }
            if defs[id as usize].is_some() {
                return perr(lno, format!("variable {id} defined twice"));
            }
            defs[id as usize] = Some(node);
            Ok(id)
        };

        let mut inputs = Vec::with_capacity(i as usize);
        for k in 0..i {
            let (lno, line) = next_line("an input definition")?;
            let lit = parse_lit(lno, line.trim())?;
            inputs.push(define(&mut defs, lno, lit, AigNode::Input(k as u32))?);
        }
        let mut regs = Vec::with_capacity(l as usize);
        let mut next_states = Vec::with_capacity(l as usize);
        for k in 0..l {
            let (lno, line) = next_line("a latch definition")?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return perr(lno, "latch line must be `current next`");
            }
            let cur = parse_lit(lno, toks[0])?;
            let next = parse_lit(lno, toks[1])?;
            regs.push(define(&mut defs, lno, cur, AigNode::Reg(k as u32))?);
            next_states.push(AigLit::from_code(next));
        }
        let mut outputs = Vec::with_capacity(o as usize);
        for _ in 0..o {
            let (lno, line) = next_line("an output")?;
            outputs.push(AigLit::from_code(parse_lit(lno, line.trim())?));
        }
        for _ in 0..a {
            let (lno, line) = next_line("an AND definition")?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return perr(lno, "AND line must be `lhs rhs0 rhs1`");
            }
            let lhs = parse_lit(lno, toks[0])?;
            let rhs0 = parse_lit(lno, toks[1])?;
            let rhs1 = parse_lit(lno, toks[2])?;
            if rhs0 >> 1 >= lhs >> 1 || rhs1 >> 1 >= lhs >> 1 {
                return perr(
                    lno,
                    format!(
                        "AND {} has a fanin not strictly earlier (cyclic or non-topological)",
                        lhs >> 1
                    ),
                );
            }
            define(
                &mut defs,
                lno,
                lhs,
                AigNode::And(AigLit::from_code(rhs0), AigLit::from_code(rhs1)),
            )?;
        }
        // anything after the body is symbols/comments; ignored

        let mut nodes = Vec::with_capacity(defs.len());
        for (id, def) in defs.into_iter().enumerate() {
            match def {
                Some(n) => nodes.push(n),
                None => return perr(0, format!("variable {id} never defined")),
            }
        }
        let mut strash = HashMap::new();
        for (id, node) in nodes.iter().enumerate() {
            if let AigNode::And(a, b) = node {
                strash.entry(strash_key(*a, *b)).or_insert(id as NodeId);
            }
        }
        Ok(Aig {
            nodes,
            inputs,
            regs,
            outputs,
            next_states,
            strash,
        })
    }
}

fn strash_key(a: AigLit, b: AigLit) -> (u32, u32) {
    if a.code() <= b.code() {
        (a.code(), b.code())
    } else {
        (b.code(), a.code())
    }
}

/// A combinational input pattern: primary input values and register values.
pub type Pattern = (Vec<bool>, Vec<bool>);

/// First input/register pattern on which the two graphs disagree on some
/// output or next-state, or `None` when they agree everywhere. Exhaustive
/// over all `2^(inputs+regs)` patterns; independent of the SAT path.
pub fn equiv_exhaustive(g1: &Aig, g2: &Aig) -> Result<Option<Pattern>, AigError> {
    let n = check_arity(g1, g2)?;
    let total = 1u64 << n;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        const CHUNK: u64 = 1 << 10;
        if total > CHUNK {
            let chunks = total.div_ceil(CHUNK);
            return Ok((0..chunks).into_par_iter().find_map_first(|c| {
                scan_patterns(g1, g2, c * CHUNK, ((c + 1) * CHUNK).min(total))
            }));
        }
    }
    Ok(scan_patterns(g1, g2, 0, total))
}

/// Sequential variant of [`equiv_exhaustive`], for benchmarking against
/// the parallel path.
pub fn equiv_exhaustive_seq(g1: &Aig, g2: &Aig) -> Result<Option<Pattern>, AigError> {
    let n = check_arity(g1, g2)?;
    Ok(scan_patterns(g1, g2, 0, 1u64 << n))
}

fn check_arity(g1: &Aig, g2: &Aig) -> Result<u32, AigError> {
    if g1.num_inputs() != g2.num_inputs() {
        return Err(AigError::InputLenMismatch {
            expected: g1.num_inputs(),
            got: g2.num_inputs(),
        });
    }
    if g1.num_regs() != g2.num_regs() || g1.outputs().len() != g2.outputs().len() {
        return Err(AigError::RegLenMismatch {
            expected: g1.num_regs(),
            got: g2.num_regs(),
        });
    }
    let n = (g1.num_inputs() + g1.num_regs()) as u32;
    assert!(
        n <= 26,
        "exhaustive check limited to 26 combinational inputs"
    );
    Ok(n)
}

fn pattern_of(bits: u64, g: &Aig) -> Pattern {
    let ni = g.num_inputs();
    let invals: Vec<bool> = (0..ni).map(|k| (bits >> k) & 1 != 0).collect();
    let regvals: Vec<bool> = (0..g.num_regs())
        .map(|k| (bits >> (ni + k)) & 1 != 0)
        .collect();
    (invals, regvals)
}

fn scan_patterns(g1: &Aig, g2: &Aig, lo: u64, hi: u64) -> Option<Pattern> {
    for bits in lo..hi {
        let (invals, regvals) = pattern_of(bits, g1);
        let v1 = g1.eval_all(&invals, &regvals).expect("arity checked");
        let v2 = g2.eval_all(&invals, &regvals).expect("arity checked");
        let outputs_differ = g1.outputs().iter().zip(g2.outputs()).any(|(a, b)| {
            (v1[a.node() as usize] ^ a.is_inverted()) != (v2[b.node() as usize] ^ b.is_inverted())
        });
        let next_differ = g1.next_states().iter().zip(g2.next_states()).any(|(a, b)| {
            (v1[a.node() as usize] ^ a.is_inverted()) != (v2[b.node() as usize] ^ b.is_inverted())
        });
        if outputs_differ || next_differ {
            return Some((invals, regvals));
        }
    }
    None
}
