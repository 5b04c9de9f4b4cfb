//! Replays a proof against its input and re-derives every step's soundness
//! from a truth table. Shares no code with the engine or the rule builders.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{OrClause, Term, Var, WeightedClause, X2XProblem, XorConstraint};
use crate::proofs::{Proof, ProofInput, ProofStep, ProofSummary, RuleId};
use crate::rational::{fmt_rational, int, ratio, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("input: {0}")]
    Input(String),
    /// `step` is the 0-based index into the proof.
    #[error("step {step} ({rule}): {fault}")]
    Step {
        step: usize,
        rule: RuleId,
        fault: StepFault,
    },
    #[error("round {round}: {rule_steps} rule steps exceed the {budget} entries it started with")]
    Length {
        round: usize,
        rule_steps: usize,
        budget: usize,
    },
    #[error("final state: {0}")]
    Final(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepFault {
    #[error("pattern: {0}")]
    Pattern(String),
    #[error("weight: {0}")]
    Weight(String),
    #[error("truth table: {0}")]
    TruthTable(String),
}

/// What an accepted proof establishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub steps: usize,
    /// Derived □ weight minus offsets.
    pub bound_m: Rational,
    pub offset: Rational,
    pub residual: X2XProblem,
    pub residue_clauses: Vec<WeightedClause>,
}

struct Replay {
    xors: BTreeMap<XorConstraint, Rational>,
    clauses: BTreeMap<OrClause, Rational>,
    empty: Rational,
    offset: Rational,
    /// Every variable id at or below this may already be in use.
    high: u32,
}

fn pattern(msg: impl Into<String>) -> StepFault {
    StepFault::Pattern(msg.into())
}

fn weight_fault(msg: impl Into<String>) -> StepFault {
    StepFault::Weight(msg.into())
}

fn arity(t: &Term) -> usize {
    match t {
        Term::Xor(c) => c.vars().len(),
        Term::Clause(c) => c.arity(),
    }
}

fn as_xor(t: &Term) -> Result<&XorConstraint, StepFault> {
    match t {
        Term::Xor(c) => Ok(c),
        Term::Clause(c) => Err(pattern(format!("'{c}' should be a parity premise"))),
    }
}

fn multipliers<T>(items: &[(T, Rational)]) -> Vec<Rational> {
    items.iter().map(|(_, m)| m.clone()).collect()
}

fn expect_multipliers<T>(
    items: &[(T, Rational)],
    want: &[Rational],
    what: &str,
) -> Result<(), StepFault> {
    if multipliers(items) != want {
        return Err(pattern(format!(
            "{what} multipliers should be [{}]",
            want.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(())
}

/// Checks the shape prescribed by the rule id: premise kinds and parities,
/// multipliers, offset and fresh variable.
fn check_shape(step: &ProofStep, high: u32) -> Result<(), StepFault> {
    let w = &step.weight;
    let rule = step.rule;
    if rule != RuleId::Translate && step.premises.len() != 2 {
        return Err(pattern("expected two premises"));
    }
    if !step.rule.is_compact()
        && rule != RuleId::Translate
        && (!step.offset.is_zero() || step.fresh.is_some())
    {
        return Err(pattern("this rule has no offset and no fresh variable"));
    }
    match rule {
        RuleId::Contra => {
            let (c0, c1) = (as_xor(&step.premises[0])?, as_xor(&step.premises[1])?);
            if c0.vars() != c1.vars() || c0.parity() || !c1.parity() {
                return Err(pattern("premises must be C=0 then C=1"));
            }
            if step.conclusions != [(XorConstraint::empty(true), int(1))]
                || !step.residues.is_empty()
            {
                return Err(pattern("the only conclusion is ⟨w⟩□"));
            }
        }
        _ if rule.is_chain() || rule.is_unit() || rule.is_compact() => {
            let (c0, c1) = (as_xor(&step.premises[0])?, as_xor(&step.premises[1])?);
            let shared: Vec<&Var> = c0.vars().iter().filter(|v| c1.contains(**v)).collect();
            if shared.len() != 1 || c1.vars().len() != 2 {
                return Err(pattern(
                    "premises must share exactly one variable, the second binary",
                ));
            }
            let (p, q) = (c0.parity(), c1.parity());
            let want = rule.parities().expect("named parities");
            // compact rules are named by the unordered parity pair
            let ok = if rule.is_compact() {
                (p.min(q), p.max(q)) == want
            } else {
                (p, q) == want
            };
            if !ok {
                return Err(pattern("premise parities do not match the rule name"));
            }
            if rule.is_chain() {
                if c0.vars().len() != 2 {
                    return Err(pattern("chain premises are binary"));
                }
                expect_multipliers(&step.conclusions, &[int(1)], "conclusion")?;
                expect_multipliers(&step.residues, &[int(2), int(2)], "residue")?;
            } else if rule.is_unit() {
                if c0.vars().len() != 1 {
                    return Err(pattern("the first unit-rule premise is x=P"));
                }
                expect_multipliers(&step.conclusions, &[int(1)], "conclusion")?;
                expect_multipliers(&step.residues, &[int(2)], "residue")?;
            } else {
                expect_multipliers(
                    &step.conclusions,
                    &[int(1), int(2), int(2), int(2)],
                    "conclusion",
                )?;
                if !step.residues.is_empty() {
                    return Err(pattern("compact rules have no residues"));
                }
                if &step.offset != w {
                    return Err(pattern(format!(
                        "compact offset must be the applied weight {}",
                        fmt_rational(w)
                    )));
                }
                fresh_above(step, high, 1)?;
            }
        }
        RuleId::Translate => {
            let k = match step.premises.as_slice() {
                [Term::Clause(c)] => c.arity(),
                _ => return Err(pattern("a translation consumes exactly one clause")),
            };
            if !(2..=3).contains(&k) {
                return Err(pattern(format!("cannot translate a clause of arity {k}")));
            }
            if !step.residues.is_empty() {
                return Err(pattern("translations have no residues"));
            }
            if step.conclusions.iter().any(|(_, m)| *m != ratio(1, 2)) {
                return Err(pattern("translation multipliers are 1/2"));
            }
            let want = w * ratio(k as i64 - 1, 2);
            if step.offset != want {
                return Err(pattern(format!("offset must be {}", fmt_rational(&want))));
            }
            fresh_above(step, high, k - 2)?;
        }
        _ => unreachable!("every rule id is covered"),
    }
    Ok(())
}

fn fresh_above(step: &ProofStep, high: u32, count: usize) -> Result<(), StepFault> {
    match (step.fresh, count) {
        (None, 0) => Ok(()),
        (Some(y), 1) if y.id() > high => Ok(()),
        (Some(y), 1) => Err(pattern(format!("fresh variable {y} may already be in use"))),
        _ => Err(pattern(format!("expected {count} fresh variable(s)"))),
    }
}

fn falsified(t: &Term, value: &impl Fn(Var) -> bool) -> bool {
    match t {
        Term::Xor(c) => c.vars().iter().fold(c.parity(), |acc, v| acc ^ value(*v)),
        Term::Clause(c) => c.literals().iter().all(|l| value(l.var) == l.negated),
    }
}

/// For every assignment to the non-fresh variables: min over the fresh
/// variable of Ī(conclusions + residues) − Ī(premises) equals the offset.
fn check_table(step: &ProofStep) -> Result<(), StepFault> {
    let mut vars = BTreeSet::new();
    let after: Vec<(Term, Rational)> = step
        .conclusions
        .iter()
        .map(|(c, m)| (Term::Xor(c.clone()), m.clone()))
        .chain(
            step.residues
                .iter()
                .map(|(c, m)| (Term::Clause(c.clone()), m.clone())),
        )
        .collect();
    for t in step.premises.iter().chain(after.iter().map(|(t, _)| t)) {
        match t {
            Term::Xor(c) => vars.extend(c.vars().iter().copied()),
            Term::Clause(c) => vars.extend(c.literals().iter().map(|l| l.var)),
        }
    }
    if let Some(y) = step.fresh {
        if step.premises.iter().any(|t| mentions(t, y)) {
            return Err(pattern(format!("fresh variable {y} occurs in a premise")));
        }
        vars.remove(&y);
    }
    let vars: Vec<Var> = vars.into_iter().collect();
    if vars.len() > 16 {
        return Err(pattern("too many variables in one step"));
    }
    let fresh_values: &[bool] = if step.fresh.is_some() {
        &[false, true]
    } else {
        &[false]
    };
    for bits in 0u32..1 << vars.len() {
        let base = |v: Var| {
            vars.iter()
                .position(|u| *u == v)
                .is_some_and(|i| bits >> i & 1 == 1)
        };
        let before: Rational = step
            .premises
            .iter()
            .filter(|t| falsified(t, &base))
            .fold(Rational::zero(), |acc, _| acc + &step.weight);
        let best = fresh_values
            .iter()
            .map(|&y| {
                let value = |v: Var| if Some(v) == step.fresh { y } else { base(v) };
                after
                    .iter()
                    .filter(|(t, _)| falsified(t, &value))
                    .fold(Rational::zero(), |acc, (_, m)| acc + m * &step.weight)
            })
            .min()
            .expect("at least one fresh value");
        let diff = best - before;
        if diff != step.offset {
            let shown: Vec<String> = vars
                .iter()
                .map(|&v| format!("{}{v}", if base(v) { "" } else { "-" }))
                .collect();
            return Err(StepFault::TruthTable(format!(
                "at [{}] the cost changes by {}, recorded offset {}",
                shown.join(" "),
                fmt_rational(&diff),
                fmt_rational(&step.offset)
            )));
        }
    }
    Ok(())
}

fn mentions(t: &Term, y: Var) -> bool {
    match t {
        Term::Xor(c) => c.contains(y),
        Term::Clause(c) => c.literals().iter().any(|l| l.var == y),
    }
}

impl Replay {
    fn new(input: &ProofInput) -> Result<Replay, CheckError> {
        if input.floor.is_negative() {
            return Err(CheckError::Input(format!(
                "negative floor {}",
                fmt_rational(&input.floor)
            )));
        }
        let mut r = Replay {
            xors: BTreeMap::new(),
            clauses: BTreeMap::new(),
            empty: input.floor.clone(),
            offset: Rational::zero(),
            high: input.var_count,
        };
        for e in &input.entries {
            if !e.weight.is_positive() {
                return Err(CheckError::Input(format!(
                    "non-positive weight {}",
                    fmt_rational(&e.weight)
                )));
            }
            r.credit_xor(&e.constraint, e.weight.clone());
        }
        Ok(r)
    }

    fn credit_xor(&mut self, c: &XorConstraint, w: Rational) {
        self.high = self
            .high
            .max(c.vars().iter().map(|v| v.id()).max().unwrap_or(0));
        match c.vars().len() {
            0 if c.parity() => self.empty += w,
            0 => {}
            _ => *self.xors.entry(c.clone()).or_insert_with(Rational::zero) += w,
        }
    }

    fn held(&self, t: &Term) -> Option<&Rational> {
        match t {
            Term::Xor(c) => self.xors.get(c),
            Term::Clause(c) => self.clauses.get(c),
        }
    }

    fn check_weights(&self, step: &ProofStep) -> Result<(), StepFault> {
        let w = &step.weight;
        if !w.is_positive() {
            return Err(weight_fault("applied weight must be positive"));
        }
        let mut min: Option<&Rational> = None;
        for t in &step.premises {
            if arity(t) == 0 {
                return Err(pattern("premises mention at least one variable"));
            }
            let have = self
                .held(t)
                .ok_or_else(|| weight_fault(format!("premise '{}' is not present", show(t))))?;
            if have < w {
                return Err(weight_fault(format!(
                    "premise '{}' holds {}, less than {}",
                    show(t),
                    fmt_rational(have),
                    fmt_rational(w)
                )));
            }
            min = Some(min.map_or(have, |m| m.min(have)));
        }
        if min != Some(w) {
            return Err(weight_fault("applied weight must fully consume a premise"));
        }
        if step.premises.len() == 2 && step.premises[0] == step.premises[1] {
            return Err(pattern("premises must be distinct"));
        }
        Ok(())
    }

    fn apply(&mut self, step: &ProofStep) {
        let w = &step.weight;
        for t in &step.premises {
            match t {
                Term::Xor(c) => debit(&mut self.xors, c, w),
                Term::Clause(c) => debit(&mut self.clauses, c, w),
            }
        }
        for (c, m) in &step.conclusions {
            self.credit_xor(c, w * m);
        }
        for (c, m) in &step.residues {
            self.high = self
                .high
                .max(c.literals().iter().map(|l| l.var.id()).max().unwrap_or(0));
            *self.clauses.entry(c.clone()).or_insert_with(Rational::zero) += w * m;
        }
        if let Some(y) = step.fresh {
            self.high = self.high.max(y.id());
        }
        self.offset += &step.offset;
    }

    fn bound(&self) -> Rational {
        &self.empty - &self.offset
    }

    fn residual(&self) -> X2XProblem {
        let mut p = X2XProblem::new(0);
        for (c, w) in &self.xors {
            p.add(w.clone(), c.clone()).expect("weights stay positive");
        }
        p
    }
}

fn debit<K: Ord>(map: &mut BTreeMap<K, Rational>, key: &K, w: &Rational) {
    let left = map.get_mut(key).expect("presence checked");
    *left -= w;
    if left.is_zero() {
        map.remove(key);
    }
}

fn show(t: &Term) -> String {
    match t {
        Term::Xor(c) => c.to_string(),
        Term::Clause(c) => c.to_string(),
    }
}

/// Replays `proof` on `input`. When `claimed` is given, its bound, residual
/// problem, residue clauses and input fingerprint must match the replay.
pub fn check_proof(
    input: &ProofInput,
    proof: &Proof,
    claimed: Option<&ProofSummary>,
) -> Result<CheckReport, CheckError> {
    let mut replay = Replay::new(input)?;
    let starts = &proof.round_starts;
    if starts.windows(2).any(|p| p[0] > p[1])
        || starts.last().is_some_and(|&s| s > proof.steps.len())
    {
        return Err(CheckError::Final("round starts are out of order".into()));
    }
    let mut round: Option<(usize, usize, usize)> = None; // (round, budget, rule steps)
    for (i, step) in proof.steps.iter().enumerate() {
        let fail = |fault| CheckError::Step {
            step: i,
            rule: step.rule,
            fault,
        };
        if let Some(r) = starts.iter().rposition(|&s| s <= i) {
            if step.rule != RuleId::Translate && round.is_none_or(|(cur, _, _)| cur != r) {
                round = Some((r, replay.xors.len(), 0));
            }
        }
        check_shape(step, replay.high).map_err(fail)?;
        replay.check_weights(step).map_err(fail)?;
        check_table(step).map_err(fail)?;
        if step.rule != RuleId::Translate {
            if let Some((r, budget, n)) = round.as_mut() {
                *n += 1;
                if *n > *budget {
                    return Err(CheckError::Length {
                        round: *r + 1,
                        rule_steps: *n,
                        budget: *budget,
                    });
                }
            }
        }
        replay.apply(step);
    }

    let bound_m = replay.bound();
    if let Some(m) = &proof.claimed_bound {
        if *m != bound_m {
            return Err(CheckError::Final(format!(
                "claimed bound {} but the steps derive {}",
                fmt_rational(m),
                fmt_rational(&bound_m)
            )));
        }
    }
    let residual = replay.residual();
    let residue_clauses: Vec<WeightedClause> = replay
        .clauses
        .iter()
        .map(|(c, w)| WeightedClause::new(w.clone(), c.clone()))
        .collect();
    if let Some(s) = claimed {
        if s.bound_m != bound_m {
            return Err(CheckError::Final(format!(
                "summary bound {} but the steps derive {}",
                fmt_rational(&s.bound_m),
                fmt_rational(&bound_m)
            )));
        }
        if s.residual.entries() != residual.entries() || s.residual.floor() != residual.floor() {
            return Err(CheckError::Final(
                "summary residual differs from the replay".into(),
            ));
        }
        if s.residue_clauses != residue_clauses {
            return Err(CheckError::Final(
                "summary residue clauses differ from the replay".into(),
            ));
        }
        if s.source_fingerprint != input.fingerprint() {
            return Err(CheckError::Final(
                "summary was derived from a different input".into(),
            ));
        }
        if s.steps != proof.steps.len() {
            return Err(CheckError::Final("summary step count differs".into()));
        }
    }
    Ok(CheckReport {
        steps: proof.steps.len(),
        bound_m,
        offset: replay.offset,
        residual,
        residue_clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, WeightedXor};
    use crate::proofs::{saturate, ResidueMode, SaturateOptions};
    use crate::rational::half;

    fn v(i: u32) -> Var {
        Var::from_id(i)
    }

    fn xor(w: Rational, vars: &[u32], p: u8) -> WeightedXor {
        WeightedXor::new(
            w,
            XorConstraint::new(vars.iter().map(|&i| v(i)), p == 1).unwrap(),
        )
    }

    fn sample() -> ProofInput {
        let p = normalize(vec![
            xor(int(1), &[1, 2], 1),
            xor(half(), &[2, 3], 0),
            xor(int(2), &[1, 3], 0),
            xor(int(1), &[3], 1),
            xor(ratio(3, 4), &[1], 0),
        ])
        .unwrap();
        ProofInput::from(&p)
    }

    fn proved(mode: ResidueMode) -> (ProofInput, Proof, ProofSummary) {
        let input = sample();
        let (s, proof) = saturate(&input, &SaturateOptions::new(mode)).unwrap();
        (input, proof, s)
    }

    #[test]
    fn accepts_engine_proofs() {
        for mode in [
            ResidueMode::Discard,
            ResidueMode::Retranslate { max_rounds: 3 },
            ResidueMode::Compact,
        ] {
            let (input, proof, s) = proved(mode);
            assert!(!proof.steps.is_empty());
            let r = check_proof(&input, &proof, Some(&s)).unwrap();
            assert_eq!(r.bound_m, s.bound_m);
        }
    }

    #[test]
    fn empty_proof_with_zero_bound() {
        let proof = Proof {
            claimed_bound: Some(int(0)),
            ..Proof::default()
        };
        let r = check_proof(
            &ProofInput::raw(vec![xor(int(1), &[1, 2], 1)]),
            &proof,
            None,
        )
        .unwrap();
        assert_eq!(r.bound_m, int(0));
    }

    fn first_rule(proof: &Proof, pred: impl Fn(RuleId) -> bool) -> usize {
        proof.steps.iter().position(|s| pred(s.rule)).unwrap()
    }

    fn rejected_at(input: &ProofInput, proof: &Proof, i: usize) {
        match check_proof(input, proof, None) {
            Err(CheckError::Step { step, .. }) => assert_eq!(step, i),
            other => panic!("expected rejection at step {i}, got {other:?}"),
        }
    }

    #[test]
    fn residue_weight_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Discard);
        let i = first_rule(&proof, RuleId::is_chain);
        proof.steps[i].residues[0].1 = int(1);
        rejected_at(&input, &proof, i);
    }

    #[test]
    fn conclusion_parity_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Discard);
        let i = first_rule(&proof, RuleId::is_chain);
        let c = &mut proof.steps[i].conclusions[0].0;
        *c = c.negated();
        rejected_at(&input, &proof, i);
    }

    #[test]
    fn weight_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Discard);
        proof.steps[0].weight = &proof.steps[0].weight * ratio(1, 2);
        rejected_at(&input, &proof, 0);
    }

    #[test]
    fn premise_parity_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Discard);
        let Term::Xor(c) = &proof.steps[0].premises[0] else {
            unreachable!()
        };
        proof.steps[0].premises[0] = Term::Xor(c.negated());
        rejected_at(&input, &proof, 0);
    }

    #[test]
    fn compact_offset_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Compact);
        let i = first_rule(&proof, RuleId::is_compact);
        proof.steps[i].offset = int(0);
        rejected_at(&input, &proof, i);
    }

    #[test]
    fn claimed_bound_tamper_is_rejected() {
        let (input, mut proof, _) = proved(ResidueMode::Discard);
        proof.claimed_bound = proof.claimed_bound.map(|m| m + int(1));
        assert!(matches!(
            check_proof(&input, &proof, None),
            Err(CheckError::Final(_))
        ));
    }

    #[test]
    fn summary_must_match() {
        let (input, proof, mut s) = proved(ResidueMode::Discard);
        s.residue_clauses.pop();
        assert!(matches!(
            check_proof(&input, &proof, Some(&s)),
            Err(CheckError::Final(_))
        ));
    }
}
