//! SAT sweeping (fraiging) over and-inverter graphs.
//!
//! Random simulation groups nodes into candidate equivalence classes,
//! phase-normalized so complement-equivalent nodes share a class. A single
//! topological sweep then rebuilds the graph: each node is reconstructed
//! from the analogues of its fanins, and when a processed candidate
//! exists, one incremental SAT session proves or refutes the merge. A
//! refuting model is replayed as a simulation pattern to split classes
//! before the node is re-examined; a solver limit leaves the node
//! unmerged but never wrong.
//!
//! The invariant carried across the sweep is that every processed node
//! evaluates identically to its analogue on all inputs, which makes the
//! output graph combinationally equivalent to the input graph.

use thiserror::Error;

use crate::aig::{Aig, AigError, AigLit, AigNode, NodeId};
use crate::encode::{ensure_encoded, EncodeError, SatLitMap};
use crate::lits::{Assignment, Lit};
use crate::rng::SplitMix64;
use crate::session::{EngineConfig, SessionError, SolveResult, SolverSession};

#[derive(Debug, Error)]
pub enum FraigError {
    #[error("graphs differ in arity: {0}")]
    ArityMismatch(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Aig(#[from] AigError),
}

impl From<EncodeError> for FraigError {
    fn from(e: EncodeError) -> FraigError {
        match e {
            EncodeError::Session(s) => FraigError::Session(s),
            EncodeError::Aig(a) => FraigError::Aig(a),
            EncodeError::UnmappedVar(_) => unreachable!("sweep encodes before lookup"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FraigConfig {
    /// 64-bit words of simulation data per node.
    pub sim_words: usize,
    /// Initial random simulation rounds before the sweep.
    pub sim_rounds: usize,
    /// Conflict budget per directed SAT check; `None` never gives up.
    pub solve_limit: Option<u64>,
    pub rng_seed: u64,
    /// Record one event per counterexample for replay in tests.
    pub trace_cex: bool,
}

impl Default for FraigConfig {
    fn default() -> FraigConfig {
        FraigConfig {
            sim_words: 4,
            sim_rounds: 2,
            solve_limit: Some(1000),
            rng_seed: 0,
            trace_cex: false,
        }
    }
}

/// Per-node simulation signature: one bit per simulated input vector.
pub type SimSignature = Vec<u64>;

/// Fresh random input vectors for `num_cis` combinational inputs.
pub fn random_sim_vectors(num_cis: usize, words: usize, rng: &mut SplitMix64) -> Vec<SimSignature> {
    (0..num_cis)
        .map(|_| (0..words).map(|_| rng.next_u64()).collect())
        .collect()
}

/// Word-parallel evaluation of every node. `invecs` carries one row per
/// combinational input: primary inputs first, then registers.
pub fn simulate(g: &Aig, invecs: &[SimSignature]) -> Result<Vec<SimSignature>, AigError> {
    let num_cis = g.num_inputs() + g.num_regs();
    if invecs.len() != num_cis {
        return Err(AigError::InputLenMismatch {
            expected: num_cis,
            got: invecs.len(),
        });
    }
    let words = invecs.first().map_or(0, |v| v.len());
    debug_assert!(invecs.iter().all(|v| v.len() == words));
    let mut sigs: Vec<SimSignature> = Vec::with_capacity(g.node_count());
    for node in g.nodes() {
        let sig = match *node {
            AigNode::ConstFalse => vec![0; words],
            AigNode::Input(k) => invecs[k as usize].clone(),
            AigNode::Reg(k) => invecs[g.num_inputs() + k as usize].clone(),
            AigNode::And(a, b) => {
                let ma = if a.is_inverted() { !0u64 } else { 0 };
                let mb = if b.is_inverted() { !0u64 } else { 0 };
                let sa = &sigs[a.node() as usize];
                let sb = &sigs[b.node() as usize];
                (0..words).map(|w| (sa[w] ^ ma) & (sb[w] ^ mb)).collect()
            }
        };
        sigs.push(sig);
    }
    Ok(sigs)
}

/// Candidate equivalence classes over nodes, refined by simulation.
///
/// Each member stores the first bit of the signature it was grouped
/// under; two members are hypothetically equal up to the XOR of their
/// stored phases. The representative is always the smallest node id.
#[derive(Clone, Debug, Default)]
pub struct EquivClasses {
    class_of: Vec<Option<u32>>,
    phase: Vec<bool>,
    classes: Vec<Vec<NodeId>>,
}

impl EquivClasses {
    /// Groups nodes by phase-normalized signature (the signature or its
    /// complement, normalized so bit 0 is 0) and drops singletons.
    pub fn from_signatures(sigs: &[SimSignature]) -> EquivClasses {
        use std::collections::HashMap;
        let mut phase = vec![false; sigs.len()];
        let mut groups: HashMap<Vec<u64>, Vec<NodeId>> = HashMap::new();
        for (id, sig) in sigs.iter().enumerate() {
            let inverted = sig.first().is_some_and(|w| w & 1 != 0);
            phase[id] = inverted;
            let key: Vec<u64> = if inverted {
                sig.iter().map(|w| !w).collect()
            } else {
                sig.clone()
            };
            groups.entry(key).or_default().push(id as NodeId);
        }
        let mut classes: Vec<Vec<NodeId>> = groups
            .into_values()
            .filter(|members| members.len() > 1)
            .collect();
        classes.sort_by_key(|members| members[0]);
        let mut class_of = vec![None; sigs.len()];
        for (ci, members) in classes.iter().enumerate() {
            for &m in members {
                class_of[m as usize] = Some(ci as u32);
            }
        }
        EquivClasses {
            class_of,
            phase,
            classes,
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().filter(|c| c.len() > 1).count()
    }

    pub fn class_of(&self, n: NodeId) -> Option<u32> {
        self.class_of.get(n as usize).copied().flatten()
    }

    pub fn members(&self, class: u32) -> &[NodeId] {
        &self.classes[class as usize]
    }

    /// The earliest candidate for `n`: the class representative, which is
    /// already processed whenever it differs from `n`. Returns the
    /// representative and the phase between the two nodes.
    pub fn candidate(&self, n: NodeId) -> Option<(NodeId, bool)> {
        let c = self.class_of(n)?;
        let rep = self.classes[c as usize][0];
        if rep == n {
            None
        } else {
            Some((rep, self.phase[n as usize] ^ self.phase[rep as usize]))
        }
    }

    /// Splits every class by the new signatures (phase-adjusted per
    /// member); never merges. Returns how many classes split.
    pub fn refine(&mut self, new_sigs: &[SimSignature]) -> u64 {
        use std::collections::HashMap;
        let mut splits = 0;
        for ci in 0..self.classes.len() {
            if self.classes[ci].len() < 2 {
                continue;
            }
            let mut groups: HashMap<Vec<u64>, Vec<NodeId>> = HashMap::new();
            for &m in &self.classes[ci] {
                let sig = &new_sigs[m as usize];
                let adj: Vec<u64> = if self.phase[m as usize] {
                    sig.iter().map(|w| !w).collect()
                } else {
                    sig.clone()
                };
                groups.entry(adj).or_default().push(m);
            }
            if groups.len() == 1 {
                continue;
            }
            splits += 1;
            let mut subgroups: Vec<Vec<NodeId>> = groups.into_values().collect();
            subgroups.sort_by_key(|g| g[0]);
            self.classes[ci].clear();
            let mut old_slot_taken = false;
            for members in subgroups {
                if members.len() < 2 {
                    for &m in &members {
                        self.class_of[m as usize] = None;
                    }
                    continue;
                }
                let slot = if old_slot_taken {
                    self.classes.push(Vec::new());
                    self.classes.len() - 1
                } else {
                    old_slot_taken = true;
                    ci
                };
                for &m in &members {
                    self.class_of[m as usize] = Some(slot as u32);
                }
                self.classes[slot] = members;
            }
        }
        splits
    }
}

/// Outcome of a pairwise equivalence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairCheck {
    Proved,
    /// Satisfying assignment of the first directed check that came back
    /// SAT, with undefined variables completed as 0.
    Cex(Assignment),
    Limit,
}

fn directed_check(
    s: &mut SolverSession,
    m: &SatLitMap,
    pos: Lit,
    neg: Lit,
) -> Result<Option<PairCheck>, SessionError> {
    s.assume(pos)?;
    s.assume(neg.negate())?;
    match s.solve()? {
        SolveResult::Unsat => Ok(None),
        SolveResult::Failed => Ok(Some(PairCheck::Limit)),
        SolveResult::Sat => {
            let mut env = Assignment::new();
            for v in 0..m.num_vars() as u32 {
                env.set(v, s.val(Lit::new(v, false))?.unwrap_or(false));
            }
            Ok(Some(PairCheck::Cex(env)))
        }
    }
}

/// Checks `a == b` with two directed solves: one assuming `a && !b`, one
/// assuming `!a && b`. Both UNSAT proves the literals equal everywhere.
/// Both literals must already be encoded under `m`.
pub fn check_equiv_pair(
    s: &mut SolverSession,
    m: &SatLitMap,
    a: Lit,
    b: Lit,
) -> Result<PairCheck, SessionError> {
    if a == b {
        return Ok(PairCheck::Proved);
    }
    if let Some(outcome) = directed_check(s, m, a, b)? {
        return Ok(outcome);
    }
    if let Some(outcome) = directed_check(s, m, b, a)? {
        return Ok(outcome);
    }
    Ok(PairCheck::Proved)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepCounters {
    /// Pair checks proving equivalence (including structurally identical
    /// pairs that needed no solver call).
    pub proved: u64,
    /// Pair checks refuted by a counterexample.
    pub cex: u64,
    /// Pair checks abandoned at the solve limit.
    pub limited: u64,
    /// Class refinements triggered by counterexamples.
    pub refinements: u64,
}

impl SweepCounters {
    pub fn checks(&self) -> u64 {
        self.proved + self.cex + self.limited
    }
}

/// One counterexample observed during a sweep, replayable against the
/// input graph: `node` and `rep` (phase-adjusted) must differ under the
/// recorded pattern.
#[derive(Clone, Debug)]
pub struct CexEvent {
    pub node: NodeId,
    pub rep: NodeId,
    pub rel_phase: bool,
    pub invals: Vec<bool>,
    pub regvals: Vec<bool>,
    /// Whether the refinement separated `node` and `rep` (it always must).
    pub split: bool,
}

#[derive(Debug)]
pub struct SweepResult {
    pub aig: Aig,
    /// For every input-graph node, the equivalent literal in `aig`.
    pub analogue: Vec<AigLit>,
    pub counters: SweepCounters,
    pub cex_events: Vec<CexEvent>,
}

struct SweepState {
    out: Aig,
    analogue: Vec<AigLit>,
    session: SolverSession,
    map: SatLitMap,
    counters: SweepCounters,
    cex_events: Vec<CexEvent>,
    rng: SplitMix64,
}

fn sweep_state(
    g: &Aig,
    cfg: &FraigConfig,
    engine: &EngineConfig,
) -> Result<SweepState, FraigError> {
    let num_cis = g.num_inputs() + g.num_regs();
    let words = cfg.sim_words.max(1);
    let mut rng = SplitMix64::new(cfg.rng_seed);

    let sigs = simulate(g, &random_sim_vectors(num_cis, words, &mut rng))?;
    let mut classes = EquivClasses::from_signatures(&sigs);
    for _ in 1..cfg.sim_rounds.max(1) {
        let sigs = simulate(g, &random_sim_vectors(num_cis, words, &mut rng))?;
        classes.refine(&sigs);
    }

    let mut session = SolverSession::init(engine)?;
    session.set_limit(cfg.solve_limit)?;
    let mut map = SatLitMap::new();
    let mut out = Aig::new();
    let mut analogue: Vec<AigLit> = Vec::with_capacity(g.node_count());
    analogue.push(AigLit::FALSE);
    let mut counters = SweepCounters::default();
    let mut cex_events = Vec::new();

    for id in 1..g.node_count() as NodeId {
        let lit = match *g.node(id).expect("dense ids") {
            AigNode::ConstFalse => unreachable!("only node 0 is constant"),
            AigNode::Input(_) => out.add_input(),
            AigNode::Reg(_) => out.add_reg(),
            AigNode::And(f0, f1) => {
                let a0 = analogue[f0.node() as usize].invert_if(f0.is_inverted());
                let a1 = analogue[f1.node() as usize].invert_if(f1.is_inverted());
                let qp = out.add_and(a0, a1)?;
                let mut merged = None;
                let mut attempted: Vec<NodeId> = Vec::new();
                while let Some((rep, rel_phase)) = classes.candidate(id) {
                    if attempted.contains(&rep) {
                        break;
                    }
                    attempted.push(rep);
                    let target = analogue[rep as usize].invert_if(rel_phase);
                    if qp == target {
                        counters.proved += 1;
                        merged = Some(target);
                        break;
                    }
                    let la = ensure_encoded(&out, qp, &mut map, &mut session)?;
                    let lb = ensure_encoded(&out, target, &mut map, &mut session)?;
                    match check_equiv_pair(&mut session, &map, la, lb)? {
                        PairCheck::Proved => {
                            counters.proved += 1;
                            merged = Some(target);
                            break;
                        }
                        PairCheck::Limit => {
                            counters.limited += 1;
                            break;
                        }
                        PairCheck::Cex(env) => {
                            counters.cex += 1;
                            counters.refinements += 1;
                            let (invals, regvals) = cex_pattern(g, &out, &map, &env, &mut rng);
                            let vecs = cex_sim_vectors(&invals, &regvals, words, &mut rng);
                            let new_sigs = simulate(g, &vecs)?;
                            classes.refine(&new_sigs);
                            if cfg.trace_cex {
                                let split = match (classes.class_of(id), classes.class_of(rep)) {
                                    (Some(a), Some(b)) => a != b,
                                    _ => true,
                                };
                                cex_events.push(CexEvent {
                                    node: id,
                                    rep,
                                    rel_phase,
                                    invals,
                                    regvals,
                                    split,
                                });
                            }
                        }
                    }
                }
                merged.unwrap_or(qp)
            }
        };
        analogue.push(lit);
    }

    for &o in g.outputs() {
        let l = analogue[o.node() as usize].invert_if(o.is_inverted());
        out.add_output(l)?;
    }
    for (k, &ns) in g.next_states().iter().enumerate() {
        let l = analogue[ns.node() as usize].invert_if(ns.is_inverted());
        out.set_next_state(k, l)?;
    }

    Ok(SweepState {
        out,
        analogue,
        session,
        map,
        counters,
        cex_events,
        rng,
    })
}

/// Input pattern behind a counterexample: encoded inputs read their model
/// value, unencoded inputs get fresh random bits.
fn cex_pattern(
    g: &Aig,
    out: &Aig,
    map: &SatLitMap,
    env: &Assignment,
    rng: &mut SplitMix64,
) -> (Vec<bool>, Vec<bool>) {
    let read = |id: NodeId, rng: &mut SplitMix64| match map.var_of(id) {
        Some(v) => env.get(v).unwrap_or(false),
        None => rng.next_bool(),
    };
    let invals = (0..g.num_inputs())
        .map(|k| read(out.inputs()[k], rng))
        .collect();
    let regvals = (0..g.num_regs())
        .map(|k| read(out.regs()[k], rng))
        .collect();
    (invals, regvals)
}

/// Simulation vectors whose bit 0 replays the counterexample; the other
/// bits are random perturbations.
fn cex_sim_vectors(
    invals: &[bool],
    regvals: &[bool],
    words: usize,
    rng: &mut SplitMix64,
) -> Vec<SimSignature> {
    invals
        .iter()
        .chain(regvals.iter())
        .map(|&bit| {
            let mut row: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
            row[0] = (row[0] & !1) | bit as u64;
            row
        })
        .collect()
}

/// Dead-node elimination: keeps the constant, all inputs and registers,
/// every analogue image, and their fanin closures, then renumbers.
fn compact(out: &Aig, analogue: &[AigLit]) -> (Aig, Vec<AigLit>) {
    let n = out.node_count();
    let mut keep = vec![false; n];
    keep[0] = true;
    for &id in out.inputs() {
        keep[id as usize] = true;
    }
    for &id in out.regs() {
        keep[id as usize] = true;
    }
    for &l in analogue {
        keep[l.node() as usize] = true;
    }
    for &l in out.outputs() {
        keep[l.node() as usize] = true;
    }
    for &l in out.next_states() {
        keep[l.node() as usize] = true;
    }
    for id in (1..n).rev() {
        if keep[id] {
            if let AigNode::And(a, b) = out.node(id as NodeId).expect("dense") {
                keep[a.node() as usize] = true;
                keep[b.node() as usize] = true;
            }
        }
    }

    let mut compacted = Aig::new();
    let mut remap: Vec<AigLit> = vec![AigLit::FALSE; n];
    for id in 1..n {
        if !keep[id] {
            continue;
        }
        remap[id] = match *out.node(id as NodeId).expect("dense") {
            AigNode::ConstFalse => unreachable!("only node 0 is constant"),
            AigNode::Input(_) => compacted.add_input(),
            AigNode::Reg(_) => compacted.add_reg(),
            AigNode::And(a, b) => {
                let ra = remap[a.node() as usize].invert_if(a.is_inverted());
                let rb = remap[b.node() as usize].invert_if(b.is_inverted());
                compacted.add_and(ra, rb).expect("remapped fanins exist")
            }
        };
    }
    for &o in out.outputs() {
        let l = remap[o.node() as usize].invert_if(o.is_inverted());
        compacted.add_output(l).expect("kept");
    }
    for (k, &ns) in out.next_states().iter().enumerate() {
        let l = remap[ns.node() as usize].invert_if(ns.is_inverted());
        compacted.set_next_state(k, l).expect("kept");
    }
    let analogue = analogue
        .iter()
        .map(|l| remap[l.node() as usize].invert_if(l.is_inverted()))
        .collect();
    (compacted, analogue)
}

/// Sweeps with the embedded engine. The output graph is combinationally
/// equivalent to the input and never has more AND nodes.
pub fn sweep(g: &Aig, cfg: &FraigConfig) -> SweepResult {
    sweep_with_engine(g, cfg, &EngineConfig::Embedded).expect("embedded sweep cannot fail")
}

pub fn sweep_with_engine(
    g: &Aig,
    cfg: &FraigConfig,
    engine: &EngineConfig,
) -> Result<SweepResult, FraigError> {
    let state = sweep_state(g, cfg, engine)?;
    let (aig, analogue) = compact(&state.out, &state.analogue);
    Ok(SweepResult {
        aig,
        analogue,
        counters: state.counters,
        cex_events: state.cex_events,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MiterOutcome {
    Equivalent,
    /// Distinguishing combinational inputs, verified by evaluation on
    /// both graphs.
    Differ {
        invals: Vec<bool>,
        regvals: Vec<bool>,
    },
    Undecided,
}

/// Joins two graphs of identical arity over shared inputs and registers.
/// The result's outputs are `g1`'s outputs, then `g1`'s next-states, then
/// the same for `g2`, so combinational equivalence of the originals is
/// pairwise equality of the joined outputs.
pub fn join_outputs(g1: &Aig, g2: &Aig) -> Result<Aig, FraigError> {
    check_same_arity(g1, g2)?;
    let mut joined = Aig::new();
    let inputs: Vec<AigLit> = (0..g1.num_inputs()).map(|_| joined.add_input()).collect();
    let regs: Vec<AigLit> = (0..g1.num_regs()).map(|_| joined.add_reg()).collect();
    for g in [g1, g2] {
        let mut map: Vec<AigLit> = Vec::with_capacity(g.node_count());
        map.push(AigLit::FALSE);
        for id in 1..g.node_count() as NodeId {
            let lit = match *g.node(id).expect("dense") {
                AigNode::ConstFalse => unreachable!("only node 0 is constant"),
                AigNode::Input(k) => inputs[k as usize],
                AigNode::Reg(k) => regs[k as usize],
                AigNode::And(a, b) => {
                    let ja = map[a.node() as usize].invert_if(a.is_inverted());
                    let jb = map[b.node() as usize].invert_if(b.is_inverted());
                    joined.add_and(ja, jb)?
                }
            };
            map.push(lit);
        }
        for &o in g.outputs() {
            joined.add_output(map[o.node() as usize].invert_if(o.is_inverted()))?;
        }
        for &ns in g.next_states() {
            joined.add_output(map[ns.node() as usize].invert_if(ns.is_inverted()))?;
        }
    }
    Ok(joined)
}

fn check_same_arity(g1: &Aig, g2: &Aig) -> Result<(), FraigError> {
    if g1.num_inputs() != g2.num_inputs()
        || g1.num_regs() != g2.num_regs()
        || g1.outputs().len() != g2.outputs().len()
    {
        return Err(FraigError::ArityMismatch(format!(
            "{} inputs / {} regs / {} outputs vs {} inputs / {} regs / {} outputs",
            g1.num_inputs(),
            g1.num_regs(),
            g1.outputs().len(),
            g2.num_inputs(),
            g2.num_regs(),
            g2.outputs().len(),
        )));
    }
    Ok(())
}

/// Combinational equivalence check: fraig the joined graph, then check
/// each output pair with incremental SAT. A counterexample is verified by
/// evaluating both graphs before it is reported.
pub fn miter_check(g1: &Aig, g2: &Aig, cfg: &FraigConfig) -> Result<MiterOutcome, FraigError> {
    miter_check_with_engine(g1, g2, cfg, &EngineConfig::Embedded)
}

pub fn miter_check_with_engine(
    g1: &Aig,
    g2: &Aig,
    cfg: &FraigConfig,
    engine: &EngineConfig,
) -> Result<MiterOutcome, FraigError> {
    let joined = join_outputs(g1, g2)?;
    let mut st = sweep_state(&joined, cfg, engine)?;
    let pairs = g1.outputs().len() + g1.num_regs();
    let outs = st.out.outputs().to_vec();
    let mut undecided = false;
    for k in 0..pairs {
        let a = outs[k];
        let b = outs[pairs + k];
        if a == b {
            continue;
        }
        let la = ensure_encoded(&st.out, a, &mut st.map, &mut st.session)?;
        let lb = ensure_encoded(&st.out, b, &mut st.map, &mut st.session)?;
        match check_equiv_pair(&mut st.session, &st.map, la, lb)? {
            PairCheck::Proved => {}
            PairCheck::Limit => undecided = true,
            PairCheck::Cex(env) => {
                let (invals, regvals) = cex_pattern(&joined, &st.out, &st.map, &env, &mut st.rng);
                let differs = {
                    let (l1, l2) = if k < g1.outputs().len() {
                        (g1.outputs()[k], g2.outputs()[k])
                    } else {
                        (
                            g1.next_states()[k - g1.outputs().len()],
                            g2.next_states()[k - g1.outputs().len()],
                        )
                    };
                    g1.lit_eval(l1, &invals, &regvals)? != g2.lit_eval(l2, &invals, &regvals)?
                };
                if differs {
                    return Ok(MiterOutcome::Differ { invals, regvals });
                }
                // an engine that reports partial models can hand back a
                // pattern the random completion spoiled
                undecided = true;
            }
        }
    }
    Ok(if undecided {
        MiterOutcome::Undecided
    } else {
        MiterOutcome::Equivalent
    })
}
