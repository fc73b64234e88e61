//! Embedded incremental CDCL engine.
//!
//! The clause database only grows: problem clauses arrive between solves,
//! learned clauses accumulate across solves, and nothing is ever deleted.
//! Solving under assumptions yields either a model covering every allocated
//! variable, an unsat core drawn from the assumptions, or an interruption
//! when a conflict budget runs out. Propagation uses two watched literals,
//! learning is first-UIP, branching is activity-ordered with phase saving,
//! and restarts follow the Luby sequence.

mod oracle;

pub use oracle::{brute_force_solve, brute_force_solve_seq, OracleError, BRUTE_FORCE_MAX_VARS};

use crate::lits::{Assignment, Lit, Var};
use crate::session::{Engine, EngineError, EngineSolve, SolverStats};

/// Outcome of one engine solve call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineAnswer {
    Sat(Assignment),
    Unsat(Vec<Lit>),
    Interrupted,
}

impl EngineAnswer {
    pub fn is_sat(&self) -> bool {
        matches!(self, EngineAnswer::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, EngineAnswer::Unsat(_))
    }
}

const NO_REASON: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

/// Incremental CDCL solver state.
#[derive(Clone)]
pub struct EngineState {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    conflicts: u64,
    propagations: u64,
    clauses_added: u64,
    callbacks_last: u64,
}

impl Default for EngineState {
    fn default() -> Self {
        Self::new()
    }
}

impl EngineState {
    pub fn new() -> EngineState {
        EngineState {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            order: VarOrder::new(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            conflicts: 0,
            propagations: 0,
            clauses_added: 0,
            callbacks_last: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses_added(&self) -> u64 {
        self.clauses_added
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    /// Termination callbacks observed during the most recent solve.
    pub fn callbacks_last_solve(&self) -> u64 {
        self.callbacks_last
    }

    fn ensure_var(&mut self, v: Var) {
        let want = v as usize + 1;
        while self.assigns.len() < want {
            let idx = self.assigns.len() as Var;
            self.assigns.push(None);
            self.level.push(0);
            self.reason.push(NO_REASON);
            self.activity.push(0.0);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.order.insert(idx, &self.activity);
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var() as usize].map(|b| b ^ l.is_negated())
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn unchecked_enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var() as usize;
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(!l.is_negated());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target as usize];
        for i in (bound..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = !l.is_negated();
            self.assigns[v] = None;
            self.reason[v] = NO_REASON;
            self.order.insert(l.var(), &self.activity);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.trail.len();
    }

    /// Appends a clause to the permanent database. Unit clauses take
    /// effect at the next solve; an empty (or immediately contradictory)
    /// clause makes the formula unsatisfiable for good.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.clauses_added += 1;
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        for &l in lits {
            self.ensure_var(l.var());
        }
        let mut lits = lits.to_vec();
        lits.sort_unstable();
        lits.dedup();
        for pair in lits.windows(2) {
            if pair[0].var() == pair[1].var() {
                return; // tautology
            }
        }
        // drop literals already false at top level; skip satisfied clauses
        lits.retain(|&l| self.value(l) != Some(false));
        if lits.iter().any(|&l| self.value(l) == Some(true)) {
            return;
        }
        match lits.len() {
            0 => self.ok = false,
            1 => self.unchecked_enqueue(lits[0], NO_REASON),
            _ => {
                let ci = self.clauses.len() as u32;
                self.watches[lits[0].code() as usize].push(Watch {
                    clause: ci,
                    blocker: lits[1],
                });
                self.watches[lits[1].code() as usize].push(Watch {
                    clause: ci,
                    blocker: lits[0],
                });
                self.clauses.push(lits);
            }
        }
    }

    pub fn bump_vars(&mut self, lits: &[Lit]) {
        for &l in lits {
            self.ensure_var(l.var());
            self.bump_var(l.var());
        }
    }

    fn bump_var(&mut self, v: Var) {
        let idx = v as usize;
        self.activity[idx] += self.var_inc;
        if self.activity[idx] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.update(v, &self.activity);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code() as usize]);
            let mut i = 0;
            let mut j = 0;
            'watches: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[ci][1], false_lit);
                let first = self.clauses[ci][0];
                if first != w.blocker && self.value(first) == Some(true) {
                    ws[j] = Watch {
                        clause: w.clause,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                for k in 2..self.clauses[ci].len() {
                    if self.value(self.clauses[ci][k]) != Some(false) {
                        self.clauses[ci].swap(1, k);
                        let nw = self.clauses[ci][1];
                        self.watches[nw.code() as usize].push(Watch {
                            clause: w.clause,
                            blocker: first,
                        });
                        continue 'watches;
                    }
                }
                // unit or conflicting
                ws[j] = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == Some(false) {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    ws.truncate(j);
                    self.watches[false_lit.code() as usize] = ws;
                    self.qhead = self.trail.len();
                    return Some(w.clause);
                }
                self.unchecked_enqueue(first, w.clause);
            }
            ws.truncate(j);
            self.watches[false_lit.code() as usize] = ws;
        }
        None
    }

    /// First-UIP conflict analysis; returns the learned clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path_c = 0u32;
        let mut idx = self.trail.len();
        let mut first_round = true;
        loop {
            let start = if first_round { 0 } else { 1 };
            for k in start..self.clauses[confl as usize].len() {
                let q = self.clauses[confl as usize][k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] >= self.decision_level() {
                        path_c += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[p.var() as usize] = false;
            path_c -= 1;
            if path_c == 0 {
                learnt[0] = !p;
                break;
            }
            confl = self.reason[p.var() as usize];
            debug_assert_ne!(confl, NO_REASON);
            first_round = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var() as usize]
        };
        for &l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        (learnt, bt)
    }

    /// Collects the assumptions responsible for forcing `p` false. Every
    /// decision on the trail is an assumption when this runs, because the
    /// failure is detected while assumptions are still being placed.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut core = vec![p];
        if self.decision_level() == 0 || self.level[p.var() as usize] == 0 {
            return core;
        }
        self.seen[p.var() as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i];
            let v = x.var() as usize;
            if !self.seen[v] {
                continue;
            }
            let r = self.reason[v];
            if r == NO_REASON {
                core.push(x);
            } else {
                for k in 1..self.clauses[r as usize].len() {
                    let q = self.clauses[r as usize][k];
                    if self.level[q.var() as usize] > 0 {
                        self.seen[q.var() as usize] = true;
                    }
                }
            }
            self.seen[v] = false;
        }
        core
    }

    fn pick_branch(&mut self) -> Option<Var> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize].is_none() {
                return Some(v);
            }
        }
        None
    }

    fn extract_model(&self) -> Assignment {
        let mut model = Assignment::new();
        for (v, val) in self.assigns.iter().enumerate() {
            if let Some(b) = val {
                model.set(v as Var, *b);
            }
        }
        model
    }

    /// Solves under the given assumptions. With a budget, the search is
    /// interrupted once that many conflicts have been observed.
    pub fn solve(&mut self, assumptions: &[Lit], budget: Option<u64>) -> EngineAnswer {
        self.solve_inner(assumptions, budget, None)
    }

    /// Like [`EngineState::solve`] but consults `terminate` at each
    /// conflict; a `true` return interrupts the search.
    pub fn solve_with_callback(
        &mut self,
        assumptions: &[Lit],
        terminate: &mut dyn FnMut() -> bool,
    ) -> EngineAnswer {
        self.solve_inner(assumptions, None, Some(terminate))
    }

    fn solve_inner(
        &mut self,
        assumptions: &[Lit],
        budget: Option<u64>,
        mut terminate: Option<&mut dyn FnMut() -> bool>,
    ) -> EngineAnswer {
        self.callbacks_last = 0;
        for &a in assumptions {
            self.ensure_var(a.var());
        }
        self.cancel_until(0);
        if !self.ok {
            return EngineAnswer::Unsat(Vec::new());
        }
        let restart_base = 64u64;
        let mut restart_num = 0u64;
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    self.cancel_until(0);
                    return EngineAnswer::Unsat(Vec::new());
                }
                let stop = match (&mut terminate, budget) {
                    (Some(cb), _) => cb(),
                    (None, Some(b)) => self.callbacks_last >= b,
                    (None, None) => false,
                };
                if stop {
                    self.cancel_until(0);
                    return EngineAnswer::Interrupted;
                }
                self.callbacks_last += 1;
                conflicts_since_restart += 1;
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.unchecked_enqueue(learnt[0], NO_REASON);
                } else {
                    let ci = self.clauses.len() as u32;
                    self.watches[learnt[0].code() as usize].push(Watch {
                        clause: ci,
                        blocker: learnt[1],
                    });
                    self.watches[learnt[1].code() as usize].push(Watch {
                        clause: ci,
                        blocker: learnt[0],
                    });
                    let assert_lit = learnt[0];
                    self.clauses.push(learnt);
                    self.unchecked_enqueue(assert_lit, ci);
                }
                self.var_inc /= 0.95;
            } else {
                if conflicts_since_restart >= luby(restart_num) * restart_base {
                    restart_num += 1;
                    conflicts_since_restart = 0;
                    self.cancel_until(0);
                    continue;
                }
                let dl = self.decision_level() as usize;
                if dl < assumptions.len() {
                    let a = assumptions[dl];
                    match self.value(a) {
                        Some(true) => self.new_decision_level(),
                        Some(false) => {
                            let core = self.analyze_final(a);
                            self.cancel_until(0);
                            return EngineAnswer::Unsat(core);
                        }
                        None => {
                            self.new_decision_level();
                            self.unchecked_enqueue(a, NO_REASON);
                        }
                    }
                } else {
                    match self.pick_branch() {
                        None => {
                            let model = self.extract_model();
                            self.cancel_until(0);
                            return EngineAnswer::Sat(model);
                        }
                        Some(v) => {
                            let lit = Lit::new(v, !self.phase[v as usize]);
                            self.new_decision_level();
                            self.unchecked_enqueue(lit, NO_REASON);
                        }
                    }
                }
            }
        }
    }
}

fn luby(mut x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Indexed max-heap over variable activities.
#[derive(Clone, Default)]
struct VarOrder {
    heap: Vec<Var>,
    index: Vec<i32>,
}

impl VarOrder {
    fn new() -> VarOrder {
        VarOrder::default()
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        let vi = v as usize;
        if vi >= self.index.len() {
            self.index.resize(vi + 1, -1);
        }
        if self.index[vi] >= 0 {
            return;
        }
        self.index[vi] = self.heap.len() as i32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn update(&mut self, v: Var, act: &[f64]) {
        let vi = v as usize;
        if vi < self.index.len() && self.index[vi] >= 0 {
            self.sift_up(self.index[vi] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        self.index[top as usize] = -1;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[i] as usize] <= act[self.heap[parent] as usize] {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && act[self.heap[l] as usize] > act[self.heap[best] as usize] {
                best = l;
            }
            if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[best] as usize] {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.index[self.heap[a] as usize] = a as i32;
        self.index[self.heap[b] as usize] = b as i32;
    }
}

/// The default engine behind a solver session.
#[derive(Clone, Default)]
pub struct EmbeddedEngine {
    state: EngineState,
}

impl EmbeddedEngine {
    pub fn new() -> EmbeddedEngine {
        EmbeddedEngine {
            state: EngineState::new(),
        }
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }
}

pub fn embedded_signature() -> String {
    format!("aigsweep-embedded-cdcl {}", env!("CARGO_PKG_VERSION"))
}

impl Engine for EmbeddedEngine {
    fn signature(&self) -> String {
        embedded_signature()
    }

    fn add_clause(&mut self, clause: &[Lit]) {
        self.state.add_clause(clause);
    }

    fn solve(
        &mut self,
        assumptions: &[Lit],
        limit: Option<u64>,
    ) -> Result<EngineSolve, EngineError> {
        let answer = self.state.solve(assumptions, limit);
        Ok(EngineSolve {
            answer,
            callbacks: self.state.callbacks_last_solve(),
        })
    }

    fn bump_activity(&mut self, lits: &[Lit]) {
        self.state.bump_vars(lits);
    }

    fn stats(&self) -> SolverStats {
        SolverStats {
            clauses: self.state.num_clauses_added(),
            variables: self.state.num_vars() as u64,
            conflicts: self.state.conflicts(),
            propagations: self.state.propagations(),
        }
    }

    fn release(&mut self) {
        self.state = EngineState::new();
    }

    fn reinit(&mut self) -> Result<(), EngineError> {
        self.state = EngineState::new();
        Ok(())
    }
}
