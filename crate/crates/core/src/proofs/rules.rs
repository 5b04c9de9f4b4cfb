//! Builders for rule instances. Each takes premises in any order, checks
//! their shape and returns the step in the canonical premise order of its
//! rule id.
//!
//! With premises `x⊕a=P`, `x⊕b=Q` (a unit premise `x=P` is the case where
//! `a` is the constant node):
//! - chain/unit: conclusion `a⊕b = P⊕Q`, plus ⟨2⟩ clauses excluding the
//!   assignments that falsify both premises;
//! - compact: conclusions `a⊕b = 1⊕P⊕Q`, ⟨2⟩`x⊕y=0`, ⟨2⟩`a⊕y=P`,
//!   ⟨2⟩`b⊕y=Q` for a fresh `y`, over-counting by exactly `w`.

use num_traits::Zero;
use thiserror::Error;

use crate::gadgets::{translate_clause, GadgetError, GadgetParams, Strategy, VarAllocator};
use crate::model::{Literal, OrClause, Term, Var, XorConstraint};
use crate::proofs::{ProofStep, RuleId};
use crate::rational::{int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("premises do not match any rule: {0}")]
    Pattern(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// A premise seen from the pivot: `x ⊕ other = parity`, `None` for the
/// constant node.
#[derive(Debug, Clone, Copy)]
struct Side {
    other: Option<Var>,
    parity: bool,
}

fn side(c: &XorConstraint, x: Var) -> Result<Side, RuleError> {
    let other = match c.vars() {
        [v] if *v == x => None,
        [u, v] if *u == x => Some(*v),
        [u, v] if *v == x => Some(*u),
        _ => return Err(RuleError::Pattern(format!("'{c}' does not contain {x}"))),
    };
    Ok(Side {
        other,
        parity: c.parity(),
    })
}

fn pair(a: Option<Var>, b: Option<Var>, parity: bool) -> XorConstraint {
    XorConstraint::new(a.into_iter().chain(b), parity).expect("at most two variables")
}

/// Literal that is false exactly when `var` takes `value`.
fn falsified_at(var: Var, value: bool) -> Literal {
    Literal {
        var,
        negated: value,
    }
}

fn clause(lits: impl IntoIterator<Item = Literal>) -> OrClause {
    OrClause::new(lits).expect("residue literals mention distinct variables")
}

/// Orders the two premises around pivot `x`: unit premise first, else by parity.
fn oriented(
    x: Var,
    c1: &XorConstraint,
    c2: &XorConstraint,
) -> Result<(XorConstraint, Side, XorConstraint, Side), RuleError> {
    let (s1, s2) = (side(c1, x)?, side(c2, x)?);
    if s1.other == s2.other {
        return Err(RuleError::Pattern(format!(
            "'{c1}' and '{c2}' are over the same variables"
        )));
    }
    let swap = match (s1.other, s2.other) {
        (Some(_), None) => true,
        (None, Some(_)) => false,
        _ => s1.parity && !s2.parity,
    };
    Ok(if swap {
        (c2.clone(), s2, c1.clone(), s1)
    } else {
        (c1.clone(), s1, c2.clone(), s2)
    })
}

/// `C=0, C=1 ⊢ □`.
pub fn contra(
    c1: &XorConstraint,
    c2: &XorConstraint,
    weight: &Rational,
) -> Result<ProofStep, RuleError> {
    if c1.vars() != c2.vars() || c1.parity() == c2.parity() {
        return Err(RuleError::Pattern(format!(
            "'{c1}' and '{c2}' are not opposite"
        )));
    }
    let (zero, one) = if c1.parity() { (c2, c1) } else { (c1, c2) };
    Ok(ProofStep {
        rule: RuleId::Contra,
        weight: weight.clone(),
        premises: vec![Term::Xor(zero.clone()), Term::Xor(one.clone())],
        conclusions: vec![(XorConstraint::empty(true), int(1))],
        residues: Vec::new(),
        offset: Rational::zero(),
        fresh: None,
    })
}

/// Chain rule (two binary premises) or unit rule (one unit premise) on pivot `x`.
pub fn resolve(
    x: Var,
    c1: &XorConstraint,
    c2: &XorConstraint,
    weight: &Rational,
) -> Result<ProofStep, RuleError> {
    let (p1, s1, p2, s2) = oriented(x, c1, c2)?;
    let (pp, qq) = (s1.parity, s2.parity);
    let b = s2.other.expect("the second oriented premise is binary");
    let (rule, residues) = match s1.other {
        None => {
            // both premises false at x = ¬P, b = P⊕Q
            let r = clause([falsified_at(x, !pp), falsified_at(b, pp ^ qq)]);
            (RuleId::unit(pp, qq), vec![(r, int(2))])
        }
        Some(a) => {
            let residues = [false, true]
                .into_iter()
                .map(|v| {
                    let r = clause([
                        falsified_at(x, v),
                        falsified_at(a, v ^ pp ^ true),
                        falsified_at(b, v ^ qq ^ true),
                    ]);
                    (r, int(2))
                })
                .collect();
            (RuleId::chain(pp, qq), residues)
        }
    };
    Ok(ProofStep {
        rule,
        weight: weight.clone(),
        premises: vec![Term::Xor(p1), Term::Xor(p2)],
        conclusions: vec![(pair(s1.other, Some(b), pp ^ qq), int(1))],
        residues,
        offset: Rational::zero(),
        fresh: None,
    })
}

/// Compact rule on pivot `x` with fresh variable `y`.
pub fn compact(
    x: Var,
    c1: &XorConstraint,
    c2: &XorConstraint,
    weight: &Rational,
    y: Var,
) -> Result<ProofStep, RuleError> {
    let (p1, s1, p2, s2) = oriented(x, c1, c2)?;
    let (pp, qq) = (s1.parity, s2.parity);
    for v in [Some(x), s1.other, s2.other].into_iter().flatten() {
        if v == y {
            return Err(RuleError::Pattern(format!(
                "fresh variable {y} occurs in a premise"
            )));
        }
    }
    let (a, b) = (s1.other, s2.other);
    Ok(ProofStep {
        rule: RuleId::compact(pp, qq),
        weight: weight.clone(),
        premises: vec![Term::Xor(p1), Term::Xor(p2)],
        conclusions: vec![
            (pair(a, b, !(pp ^ qq)), int(1)),
            (XorConstraint::binary(x, y, false), int(2)),
            (pair(a, Some(y), pp), int(2)),
            (pair(b, Some(y), qq), int(2)),
        ],
        residues: Vec::new(),
        offset: weight.clone(),
        fresh: Some(y),
    })
}

/// Replaces a residue clause (arity 2 or 3) by its Max2XOR translation. The
/// translation raises the cost by `(β − α)·w`, recorded as the offset.
pub fn translate(
    clause: &OrClause,
    weight: &Rational,
    alloc: &mut VarAllocator,
) -> Result<ProofStep, RuleError> {
    let k = clause.arity();
    if !(2..=3).contains(&k) {
        return Err(RuleError::Pattern(format!(
            "only binary and ternary clauses are translated, got arity {k}"
        )));
    }
    let before = alloc.high_water();
    let unit = translate_clause(&int(1), clause, 0, &Strategy::Sequential, alloc)?;
    let fresh = (alloc.high_water() > before).then(|| Var::from_id(alloc.high_water()));
    Ok(ProofStep {
        rule: RuleId::Translate,
        weight: weight.clone(),
        premises: vec![Term::Clause(clause.clone())],
        conclusions: unit.into_iter().map(|x| (x.constraint, x.weight)).collect(),
        residues: Vec::new(),
        offset: weight * GadgetParams::for_arity(k).gap(),
        fresh,
    })
}
