//! Saturation: repeatedly pick the shortest odd parity cycle and contract it
//! with rule applications until it collapses into ⟨w⟩□.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use log::debug;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::gadgets::{CompileReport, VarAllocator};
use crate::model::{OrClause, Term, Var, WeightedClause, X2XProblem, XorConstraint};
use crate::proofs::rules::{self, RuleError};
use crate::proofs::{Proof, ProofInput, ProofStep, ProofSummary, RoundStats, RuleId};
use crate::rational::{fmt_rational, int, Frac, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("premise '{0}' is not present")]
    MissingPremise(String),
    #[error("premise '{premise}' has weight {available}, less than {applied}")]
    InsufficientWeight {
        premise: String,
        available: String,
        applied: String,
    },
    #[error("applied weight {applied} must equal the smaller premise weight {min}")]
    NotMinWeight { applied: String, min: String },
    #[error("invalid weight {0}")]
    InvalidWeight(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("rule {expected} requested but the premises form {found}")]
    RuleMismatch { expected: RuleId, found: RuleId },
    #[error("{0} is not applicable through this entry point")]
    WrongEntryPoint(RuleId),
    #[error("summary was derived from problem {found:016x}, report describes {expected:016x}")]
    Linkage { expected: u64, found: u64 },
}

/// Entries, residue clauses and accumulated □ weight during a derivation.
/// Equal constraints merge; opposite pairs stay apart until a contra step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofState {
    entries: BTreeMap<XorConstraint, Rational>,
    residues: BTreeMap<OrClause, Rational>,
    floor: Rational,
    offset: Rational,
    var_count: u32,
}

impl ProofState {
    pub fn new(input: &ProofInput) -> Result<ProofState, EngineError> {
        if input.floor.is_negative() {
            return Err(EngineError::InvalidWeight(fmt_rational(&input.floor)));
        }
        let mut state = ProofState {
            entries: BTreeMap::new(),
            residues: BTreeMap::new(),
            floor: input.floor.clone(),
            offset: Rational::zero(),
            var_count: input.var_count,
        };
        for e in &input.entries {
            if !e.weight.is_positive() {
                return Err(EngineError::InvalidWeight(fmt_rational(&e.weight)));
            }
            state.add_xor(e.constraint.clone(), e.weight.clone());
        }
        Ok(state)
    }

    pub fn entries(&self) -> &BTreeMap<XorConstraint, Rational> {
        &self.entries
    }

    pub fn residues(&self) -> &BTreeMap<OrClause, Rational> {
        &self.residues
    }

    /// □ weight derived so far, input floor included.
    pub fn floor(&self) -> &Rational {
        &self.floor
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    /// `floor − offset`: the input cost is at least this.
    pub fn bound(&self) -> Rational {
        &self.floor - &self.offset
    }

    /// Remaining parity entries as a normalized problem.
    pub fn residual(&self) -> X2XProblem {
        let mut p = X2XProblem::new(self.var_count);
        for (c, w) in &self.entries {
            p.add(w.clone(), c.clone())
                .expect("stored weights are positive");
        }
        p
    }

    pub fn residue_clauses(&self) -> Vec<WeightedClause> {
        self.residues
            .iter()
            .map(|(c, w)| WeightedClause::new(w.clone(), c.clone()))
            .collect()
    }

    fn add_xor(&mut self, c: XorConstraint, w: Rational) {
        if let Some(max) = c.vars().iter().map(|v| v.id()).max() {
            self.var_count = self.var_count.max(max);
        }
        if c.is_empty_clause() {
            self.floor += w;
        } else if !c.is_tautology() {
            *self.entries.entry(c).or_insert_with(Rational::zero) += w;
        }
    }

    fn premise_weight(&self, t: &Term) -> Option<&Rational> {
        match t {
            Term::Xor(c) => self.entries.get(c),
            Term::Clause(c) => self.residues.get(c),
        }
    }

    /// Replaces the step's premises by its conclusions and residues.
    pub fn apply(&mut self, step: &ProofStep) -> Result<(), EngineError> {
        let w = &step.weight;
        if !w.is_positive() {
            return Err(EngineError::InvalidWeight(fmt_rational(w)));
        }
        for t in &step.premises {
            let have = self
                .premise_weight(t)
                .ok_or_else(|| EngineError::MissingPremise(term_text(t)))?;
            if have < w {
                return Err(EngineError::InsufficientWeight {
                    premise: term_text(t),
                    available: fmt_rational(have),
                    applied: fmt_rational(w),
                });
            }
        }
        for t in &step.premises {
            match t {
                Term::Xor(c) => debit(&mut self.entries, c, w),
                Term::Clause(c) => debit(&mut self.residues, c, w),
            }
        }
        for (c, m) in &step.conclusions {
            self.add_xor(c.clone(), w * m);
        }
        for (c, m) in &step.residues {
            if let Some(max) = c.vars().map(Var::id).max() {
                self.var_count = self.var_count.max(max);
            }
            *self
                .residues
                .entry(c.clone())
                .or_insert_with(Rational::zero) += w * m;
        }
        self.offset += &step.offset;
        if let Some(y) = step.fresh {
            self.var_count = self.var_count.max(y.id());
        }
        Ok(())
    }
}

fn debit<K: Ord>(map: &mut BTreeMap<K, Rational>, key: &K, w: &Rational) {
    let left = map.get_mut(key).expect("presence checked");
    *left -= w;
    if left.is_zero() {
        map.remove(key);
    }
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Xor(c) => c.to_string(),
        Term::Clause(c) => c.to_string(),
    }
}

fn min_premise_weight(
    state: &ProofState,
    c1: &XorConstraint,
    c2: &XorConstraint,
    weight: &Rational,
) -> Result<(), EngineError> {
    let get = |c: &XorConstraint| {
        state
            .entries
            .get(c)
            .ok_or_else(|| EngineError::MissingPremise(c.to_string()))
    };
    let (w1, w2) = (get(c1)?, get(c2)?);
    let min = w1.min(w2);
    if weight != min {
        return Err(EngineError::NotMinWeight {
            applied: fmt_rational(weight),
            min: fmt_rational(min),
        });
    }
    Ok(())
}

/// The variable both premises mention, or the unit premise's variable.
fn pivot(c1: &XorConstraint, c2: &XorConstraint) -> Result<Var, EngineError> {
    let shared: Vec<Var> = c1
        .vars()
        .iter()
        .copied()
        .filter(|v| c2.contains(*v))
        .collect();
    match shared[..] {
        [x] => Ok(x),
        _ => Err(RuleError::Pattern(format!(
            "'{c1}' and '{c2}' do not share exactly one variable"
        ))
        .into()),
    }
}

/// Applies a contra, chain or unit rule at the smaller premise weight.
pub fn apply_rule(
    state: &mut ProofState,
    rule: RuleId,
    premises: (&XorConstraint, &XorConstraint),
    weight: &Rational,
) -> Result<ProofStep, EngineError> {
    let (c1, c2) = premises;
    if rule.is_compact() || rule == RuleId::Translate {
        return Err(EngineError::WrongEntryPoint(rule));
    }
    min_premise_weight(state, c1, c2, weight)?;
    let step = if rule == RuleId::Contra {
        rules::contra(c1, c2, weight)?
    } else {
        rules::resolve(pivot(c1, c2)?, c1, c2, weight)?
    };
    if step.rule != rule {
        return Err(EngineError::RuleMismatch {
            expected: rule,
            found: step.rule,
        });
    }
    state.apply(&step)?;
    Ok(step)
}

/// Applies a compact rule at the smaller premise weight with a fresh
/// variable from `alloc`.
pub fn apply_compact_rule(
    state: &mut ProofState,
    rule: RuleId,
    premises: (&XorConstraint, &XorConstraint),
    weight: &Rational,
    alloc: &mut VarAllocator,
) -> Result<ProofStep, EngineError> {
    let (c1, c2) = premises;
    if !rule.is_compact() {
        return Err(EngineError::WrongEntryPoint(rule));
    }
    min_premise_weight(state, c1, c2, weight)?;
    let x = pivot(c1, c2)?;
    let step = rules::compact(x, c1, c2, weight, alloc.fresh())?;
    if step.rule != rule {
        return Err(EngineError::RuleMismatch {
            expected: rule,
            found: step.rule,
        });
    }
    state.apply(&step)?;
    Ok(step)
}

/// A cycle of parity constraints whose parities sum to 1. Unit constraints
/// are edges to the constant node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddCycle {
    /// In walk order; consecutive constraints share a node.
    pub constraints: Vec<XorConstraint>,
    pub weights: Vec<Rational>,
    pub min_weight: Rational,
}

impl OddCycle {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// Node ids of an edge; 0 is the constant node.
fn endpoints(c: &XorConstraint) -> (u32, u32) {
    match c.vars() {
        [v] => (0, v.id()),
        [u, v] => (u.id(), v.id()),
        _ => unreachable!("entries have one or two variables"),
    }
}

/// Shortest odd cycle, lowest start node on ties.
pub fn find_odd_cycle(problem: &X2XProblem) -> Option<OddCycle> {
    odd_cycle_in(problem.entries())
}

fn odd_cycle_in(entries: &BTreeMap<XorConstraint, Rational>) -> Option<OddCycle> {
    let cycle = |cs: Vec<XorConstraint>| {
        let weights: Vec<Rational> = cs.iter().map(|c| entries[c].clone()).collect();
        let min_weight = weights.iter().min().cloned().expect("cycles are non-empty");
        OddCycle {
            constraints: cs,
            weights,
            min_weight,
        }
    };
    if let Some(c) = entries.keys().find(|c| entries.contains_key(&c.negated())) {
        return Some(cycle(vec![c.clone(), c.negated()]));
    }

    let edges: Vec<&XorConstraint> = entries.keys().collect();
    let mut adj: BTreeMap<u32, Vec<(u32, bool, usize)>> = BTreeMap::new();
    for (i, c) in edges.iter().enumerate() {
        let (u, v) = endpoints(c);
        adj.entry(u).or_default().push((v, c.parity(), i));
        adj.entry(v).or_default().push((u, c.parity(), i));
    }

    let mut best: Option<Vec<usize>> = None;
    for &start in adj.keys() {
        if best.as_ref().is_some_and(|b| b.len() == 3) {
            break;
        }
        let limit = best.as_ref().map_or(usize::MAX, |b| b.len());
        if let Some(walk) = shortest_odd_walk(&adj, start, limit) {
            best = Some(walk);
        }
    }
    best.map(|walk| cycle(walk.into_iter().map(|i| edges[i].clone()).collect()))
}

/// BFS state: (node, parity so far).
type BfsState = (u32, bool);

/// Edge indices of a shortest closed walk from `start` with odd parity,
/// if one is strictly shorter than `limit`.
fn shortest_odd_walk(
    adj: &BTreeMap<u32, Vec<(u32, bool, usize)>>,
    start: u32,
    limit: usize,
) -> Option<Vec<usize>> {
    // state (node, parity so far) → (depth, predecessor state, edge)
    let mut seen: BTreeMap<BfsState, (usize, Option<(BfsState, usize)>)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    seen.insert((start, false), (0, None));
    queue.push_back((start, false));
    while let Some(s) = queue.pop_front() {
        let depth = seen[&s].0;
        if depth + 1 >= limit {
            break;
        }
        for &(next, p, e) in &adj[&s.0] {
            let t = (next, s.1 ^ p);
            if seen.contains_key(&t) {
                continue;
            }
            seen.insert(t, (depth + 1, Some((s, e))));
            if t == (start, true) {
                let mut walk = Vec::new();
                let mut cur = t;
                while let Some((prev, e)) = seen[&cur].1 {
                    walk.push(e);
                    cur = prev;
                }
                walk.reverse();
                return Some(walk);
            }
            queue.push_back(t);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidueMode {
    /// One round; residue clauses are left aside.
    #[default]
    Discard,
    /// After the first round, translate residues back into parities and
    /// saturate again, at most `max_rounds` more times.
    Retranslate { max_rounds: usize },
    /// One round with the compact rules, which produce no residues.
    Compact,
}

impl fmt::Display for ResidueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueMode::Discard => write!(f, "discard"),
            ResidueMode::Retranslate { max_rounds } => write!(f, "retranslate={max_rounds}"),
            ResidueMode::Compact => write!(f, "compact"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleFamily {
    /// contra, chain and unit rules.
    #[default]
    Residue,
    /// contra and the compact rules.
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturateOptions {
    pub mode: ResidueMode,
    pub family: RuleFamily,
    /// No fresh variable above this id is introduced.
    pub max_vars: Option<u32>,
}

impl SaturateOptions {
    pub fn new(mode: ResidueMode) -> SaturateOptions {
        SaturateOptions {
            mode,
            ..SaturateOptions::default()
        }
    }

    fn family(&self) -> RuleFamily {
        match self.mode {
            ResidueMode::Compact => RuleFamily::Compact,
            _ => self.family,
        }
    }
}

struct Run<'a> {
    state: ProofState,
    proof: Proof,
    options: &'a SaturateOptions,
}

impl Run<'_> {
    fn fresh_allowed(&self, n: u32) -> bool {
        self.options
            .max_vars
            .is_none_or(|max| self.state.var_count + n <= max)
    }

    fn push(&mut self, step: ProofStep) {
        self.proof.steps.push(step);
    }

    /// Contracts odd cycles until none is left or the round budget is spent.
    fn saturate_round(&mut self) -> Result<usize, EngineError> {
        let budget = self.state.entries.len();
        let mut steps = 0;
        while let Some(cycle) = odd_cycle_in(&self.state.entries) {
            let w = cycle.min_weight.clone();
            if cycle.len() == 2 {
                if steps + 1 > budget {
                    break;
                }
                let (c1, c2) = (&cycle.constraints[0], &cycle.constraints[1]);
                let step = apply_rule(&mut self.state, RuleId::Contra, (c1, c2), &w)?;
                self.push(step);
                steps += 1;
                continue;
            }
            if steps + 2 > budget {
                break;
            }
            let (c1, c2) = contraction_pair(&cycle);
            let x = pivot(c1, c2)?;
            let step = match self.options.family() {
                RuleFamily::Residue => rules::resolve(x, c1, c2, &w)?,
                RuleFamily::Compact => {
                    if !self.fresh_allowed(1) {
                        break;
                    }
                    let y = Var::from_id(self.state.var_count + 1);
                    rules::compact(x, c1, c2, &w, y)?
                }
            };
            self.state.apply(&step)?;
            self.push(step);
            steps += 1;
        }
        debug!("round finished after {steps} of {budget} steps");
        Ok(steps)
    }

    /// Replaces every residue clause by its translation.
    fn translate_residues(&mut self) -> Result<usize, EngineError> {
        let pending: Vec<(OrClause, Rational)> = self
            .state
            .residues
            .iter()
            .map(|(c, w)| (c.clone(), w.clone()))
            .collect();
        let mut steps = 0;
        for (c, w) in pending {
            let fresh = c.arity().saturating_sub(2) as u32;
            if !self.fresh_allowed(fresh) || !(2..=3).contains(&c.arity()) {
                continue;
            }
            let mut alloc = VarAllocator::after(self.state.var_count);
            let step = rules::translate(&c, &w, &mut alloc)?;
            self.state.apply(&step)?;
            self.push(step);
            steps += 1;
        }
        Ok(steps)
    }
}

/// First min-weight edge of the cycle and a neighbouring edge joined to it
/// at a variable (not the constant node).
fn contraction_pair(cycle: &OddCycle) -> (&XorConstraint, &XorConstraint) {
    let n = cycle.len();
    let i = cycle
        .weights
        .iter()
        .position(|w| *w == cycle.min_weight)
        .expect("the minimum is attained");
    let e = &cycle.constraints[i];
    let next = &cycle.constraints[(i + 1) % n];
    let prev = &cycle.constraints[(i + n - 1) % n];
    let (a, b) = endpoints(e);
    let joined_at = |o: &XorConstraint| {
        let (c, d) = endpoints(o);
        if a == c || a == d {
            a
        } else {
            b
        }
    };
    // a simple cycle passes the constant node at most once
    if joined_at(next) != 0 {
        (e, next)
    } else {
        (e, prev)
    }
}

/// Runs the saturation strategy on `input`.
pub fn saturate(
    input: &ProofInput,
    options: &SaturateOptions,
) -> Result<(ProofSummary, Proof), EngineError> {
    let mut run = Run {
        state: ProofState::new(input)?,
        proof: Proof::default(),
        options,
    };
    let mut round_stats = Vec::new();

    run.proof.round_starts.push(0);
    let initial_entries = run.state.entries.len();
    let rule_steps = run.saturate_round()?;
    round_stats.push(RoundStats {
        initial_entries,
        rule_steps,
        translate_steps: 0,
    });

    if let ResidueMode::Retranslate { max_rounds } = options.mode {
        for _ in 0..max_rounds {
            if run.state.residues.is_empty() {
                break;
            }
            let start = run.proof.steps.len();
            let translate_steps = run.translate_residues()?;
            if translate_steps == 0 {
                break;
            }
            run.proof.round_starts.push(start);
            let initial_entries = run.state.entries.len();
            let rule_steps = run.saturate_round()?;
            round_stats.push(RoundStats {
                initial_entries,
                rule_steps,
                translate_steps,
            });
        }
    }

    let state = run.state;
    let mut proof = run.proof;
    proof.claimed_bound = Some(state.bound());
    let summary = ProofSummary {
        bound_m: state.bound(),
        residual: state.residual(),
        residue_clauses: state.residue_clauses(),
        offset: state.offset.clone(),
        rounds: round_stats.len(),
        steps: proof.steps.len(),
        round_stats,
        source_fingerprint: input.fingerprint(),
    };
    debug!(
        "saturated: m = {} after {} steps in {} rounds",
        Frac(&summary.bound_m),
        summary.steps,
        summary.rounds
    );
    Ok((summary, proof))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Unsat,
    Unknown,
}

/// What a derived bound says about the source instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundVerdict {
    pub status: BoundStatus,
    /// The source cost is at least this.
    pub lower_bound: Rational,
    pub bound_m: Rational,
    pub shift: Rational,
}

impl BoundVerdict {
    /// `m − shift ≥ 1` proves the source unsatisfiable.
    pub fn new(bound_m: Rational, shift: Rational) -> BoundVerdict {
        let net = &bound_m - &shift;
        let status = if net >= int(1) {
            BoundStatus::Unsat
        } else {
            BoundStatus::Unknown
        };
        BoundVerdict {
            status,
            lower_bound: net.max(Rational::zero()),
            bound_m,
            shift,
        }
    }
}

impl fmt::Display for BoundVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            BoundStatus::Unsat => write!(f, "UNSAT lb={}", Frac(&self.lower_bound)),
            BoundStatus::Unknown => write!(f, "UNKNOWN lb={}", Frac(&self.lower_bound)),
        }
    }
}

/// Carries a bound on the compiled problem back to the source instance.
pub fn bound_to_original(
    summary: &ProofSummary,
    report: &CompileReport,
) -> Result<BoundVerdict, EngineError> {
    if summary.source_fingerprint != report.fingerprint {
        return Err(EngineError::Linkage {
            expected: report.fingerprint,
            found: summary.source_fingerprint,
        });
    }
    Ok(BoundVerdict::new(
        summary.bound_m.clone(),
        report.shift.clone(),
    ))
}
