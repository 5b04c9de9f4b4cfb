//! Constraint data model shared by every other module.
//!
//! A Max2XOR problem is a multiset of weighted parity constraints over at most
//! two variables each. [`X2XProblem`] keeps it in normal form: equal
//! constraints are merged, opposite parities over the same variable set are
//! cancelled into the `floor`, and the always-true constraint is dropped. The
//! floor is weight that every assignment leaves unsatisfied, so
//! `Ī(problem) = floor + Σ unsatisfied entry weights` for every assignment.

use std::collections::BTreeMap;
use std::fmt;

use arrayvec::ArrayVec;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("weight must be positive, got {0}")]
    InvalidWeight(String),
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(Var),
    #[error("clause contains both polarities of variable {0}")]
    Tautology(Var),
    #[error("parity constraint has {0} distinct variables, at most 2 are allowed")]
    TooManyVariables(usize),
    #[error("variable ids start at 1")]
    ZeroVariable,
}

/// A propositional variable. Ids are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Result<Var, ModelError> {
        if id == 0 {
            Err(ModelError::ZeroVariable)
        } else {
            Ok(Var(id))
        }
    }

    /// Panics on 0; for literals known to be valid.
    pub fn from_id(id: u32) -> Var {
        Var::new(id).expect("variable ids start at 1")
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: Var,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: Var) -> Literal {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: Var) -> Literal {
        Literal { var, negated: true }
    }

    /// Converts a nonzero DIMACS integer.
    pub fn from_dimacs(lit: i64) -> Option<Literal> {
        let id = u32::try_from(lit.unsigned_abs()).ok()?;
        let var = Var::new(id).ok()?;
        Some(Literal {
            var,
            negated: lit < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.id());
        if self.negated {
            -id
        } else {
            id
        }
    }

    pub fn holds(self, value: bool) -> bool {
        value != self.negated
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals over distinct variables, sorted by variable id.
/// The empty clause is always false.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrClause {
    literals: Vec<Literal>,
}

impl OrClause {
    /// Repeated literals collapse; both polarities of a variable are rejected.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<OrClause, ModelError> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(ModelError::Tautology(pair[0].var));
            }
        }
        Ok(OrClause { literals })
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<OrClause, ModelError> {
        let mut out = Vec::with_capacity(lits.len());
        for &l in lits {
            out.push(Literal::from_dimacs(l).ok_or(ModelError::ZeroVariable)?);
        }
        OrClause::new(out)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn arity(&self) -> usize {
        self.literals.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.literals.iter().map(|l| l.var)
    }
}

impl fmt::Display for OrClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.literals {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parity equation `v1 ⊕ … = parity` over zero, one or two distinct variables.
///
/// `(∅, 1)` is the empty clause □ and `(∅, 0)` the tautology. Ordering is
/// lexicographic on the sorted variable list, then parity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XorConstraint {
    vars: ArrayVec<Var, 2>,
    parity: bool,
}

impl XorConstraint {
    /// Repeated variables cancel pairwise (`x ⊕ x ⊕ C = C`).
    pub fn new(
        vars: impl IntoIterator<Item = Var>,
        parity: bool,
    ) -> Result<XorConstraint, ModelError> {
        let mut all: Vec<Var> = vars.into_iter().collect();
        all.sort();
        let mut kept: Vec<Var> = Vec::with_capacity(all.len());
        for v in all {
            if kept.last() == Some(&v) {
                kept.pop();
            } else {
                kept.push(v);
            }
        }
        if kept.len() > 2 {
            return Err(ModelError::TooManyVariables(kept.len()));
        }
        Ok(XorConstraint {
            vars: kept.into_iter().collect(),
            parity,
        })
    }

    pub fn empty(parity: bool) -> XorConstraint {
        XorConstraint {
            vars: ArrayVec::new(),
            parity,
        }
    }

    pub fn unit(var: Var, parity: bool) -> XorConstraint {
        let mut vars = ArrayVec::new();
        vars.push(var);
        XorConstraint { vars, parity }
    }

    pub fn binary(a: Var, b: Var, parity: bool) -> XorConstraint {
        XorConstraint::new([a, b], parity).expect("two variables never exceed the cap")
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn parity(&self) -> bool {
        self.parity
    }

    pub fn contains(&self, var: Var) -> bool {
        self.vars.contains(&var)
    }

    /// Same variables, opposite parity.
    pub fn negated(&self) -> XorConstraint {
        XorConstraint {
            vars: self.vars.clone(),
            parity: !self.parity,
        }
    }

    pub fn is_empty_clause(&self) -> bool {
        self.vars.is_empty() && self.parity
    }

    pub fn is_tautology(&self) -> bool {
        self.vars.is_empty() && !self.parity
    }

    pub fn holds(&self, value: impl Fn(Var) -> bool) -> bool {
        let x = self.vars.iter().fold(false, |acc, &v| acc ^ value(v));
        x == self.parity
    }
}

impl fmt::Display for XorConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vars {
            write!(f, "{v} ")?;
        }
        write!(f, "= {}", u8::from(self.parity))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedXor {
    pub weight: Rational,
    pub constraint: XorConstraint,
}

impl WeightedXor {
    pub fn new(weight: Rational, constraint: XorConstraint) -> WeightedXor {
        WeightedXor { weight, constraint }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedClause {
    pub weight: Rational,
    pub clause: OrClause,
}

impl WeightedClause {
    pub fn new(weight: Rational, clause: OrClause) -> WeightedClause {
        WeightedClause { weight, clause }
    }
}

/// Structural description of a constraint, enough to evaluate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    /// XOR of the (distinct) variables equals `parity`.
    Parity { vars: Vec<Var>, parity: bool },
    /// At least one literal holds.
    Disjunction { literals: Vec<Literal> },
}

/// Anything the evaluators and oracles can score.
pub trait Constraint {
    fn form(&self) -> Form;

    fn variables(&self) -> Vec<Var> {
        match self.form() {
            Form::Parity { vars, .. } => vars,
            Form::Disjunction { literals } => literals.iter().map(|l| l.var).collect(),
        }
    }

    fn holds_under(&self, value: &dyn Fn(Var) -> bool) -> bool {
        match self.form() {
            Form::Parity { vars, parity } => {
                vars.iter().fold(false, |acc, &v| acc ^ value(v)) == parity
            }
            Form::Disjunction { literals } => literals.iter().any(|l| l.holds(value(l.var))),
        }
    }
}

impl Constraint for XorConstraint {
    fn form(&self) -> Form {
        Form::Parity {
            vars: self.vars.to_vec(),
            parity: self.parity,
        }
    }
}

impl Constraint for OrClause {
    fn form(&self) -> Form {
        Form::Disjunction {
            literals: self.literals.clone(),
        }
    }
}

/// Either kind of constraint that can appear in a proof state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Xor(XorConstraint),
    Clause(OrClause),
}

impl Constraint for Term {
    fn form(&self) -> Form {
        match self {
            Term::Xor(x) => x.form(),
            Term::Clause(c) => c.form(),
        }
    }
}

/// Total assignment of bits to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// Decodes a binary counter over `vars`; `vars[0]` is the most significant
    /// bit so that counting order is lexicographic order.
    pub fn from_counter(vars: &[Var], counter: u64) -> Assignment {
        let n = vars.len();
        let values = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, (counter >> (n - 1 - i)) & 1 == 1))
            .collect();
        Assignment { values }
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Assignment {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, b) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if b {
                write!(f, "{v}")?;
            } else {
                write!(f, "-{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub satisfied_weight: Rational,
    /// Includes the floor.
    pub unsatisfied_weight: Rational,
}

/// Weighted Max2XOR problem in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct X2XProblem {
    entries: BTreeMap<XorConstraint, Rational>,
    floor: Rational,
    var_count: u32,
}

impl X2XProblem {
    pub fn new(var_count: u32) -> X2XProblem {
        X2XProblem {
            entries: BTreeMap::new(),
            floor: Rational::zero(),
            var_count,
        }
    }

    pub fn entries(&self) -> &BTreeMap<XorConstraint, Rational> {
        &self.entries
    }

    pub fn weighted(&self) -> impl Iterator<Item = WeightedXor> + '_ {
        self.entries
            .iter()
            .map(|(c, w)| WeightedXor::new(w.clone(), c.clone()))
    }

    pub fn floor(&self) -> &Rational {
        &self.floor
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    /// Raises the declared variable count; never lowers it.
    pub fn reserve_vars(&mut self, var_count: u32) {
        self.var_count = self.var_count.max(var_count);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_of(&self, constraint: &XorConstraint) -> Option<&Rational> {
        self.entries.get(constraint)
    }

    /// Weight of the stored entries, floor excluded.
    pub fn total_weight(&self) -> Rational {
        self.entries
            .values()
            .fold(Rational::zero(), |acc, w| acc + w)
    }

    /// Variables occurring in some entry, ascending.
    pub fn occurring_vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self
            .entries
            .keys()
            .flat_map(|c| c.vars().iter().copied())
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn add_floor(&mut self, weight: Rational) -> Result<(), ModelError> {
        if weight.is_negative() {
            return Err(ModelError::InvalidWeight(fmt_rational(&weight)));
        }
        self.floor += weight;
        Ok(())
    }

    /// Adds `⟨weight⟩ constraint`, keeping normal form.
    pub fn add(&mut self, weight: Rational, constraint: XorConstraint) -> Result<(), ModelError> {
        if !weight.is_positive() {
            return Err(ModelError::InvalidWeight(fmt_rational(&weight)));
        }
        if let Some(max) = constraint.vars().iter().map(|v| v.id()).max() {
            self.reserve_vars(max);
        }
        if constraint.is_tautology() {
            return Ok(());
        }
        if constraint.is_empty_clause() {
            self.floor += weight;
            return Ok(());
        }
        let opposite = constraint.negated();
        let mut weight = weight;
        if let Some(other) = self.entries.remove(&opposite) {
            // an opposite pair of weight w is Ī-equivalent to ⟨w⟩□
            if other > weight {
                self.floor += &weight;
                self.entries.insert(opposite, other - weight);
                return Ok(());
            }
            self.floor += &other;
            weight -= other;
            if weight.is_zero() {
                return Ok(());
            }
        }
        *self
            .entries
            .entry(constraint)
            .or_insert_with(Rational::zero) += weight;
        Ok(())
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<EvalResult, ModelError> {
        evaluate(self, assignment)
    }

    pub fn substitute_constant(&self, var: Var, value: bool) -> X2XProblem {
        substitute_constant(self, var, value)
    }

    pub fn flip_variable(&self, var: Var) -> X2XProblem {
        flip_variable(self, var)
    }
}

/// Satisfied and unsatisfied weight of `problem` under `assignment`.
pub fn evaluate(problem: &X2XProblem, assignment: &Assignment) -> Result<EvalResult, ModelError> {
    let mut satisfied = Rational::zero();
    let mut unsatisfied = problem.floor.clone();
    for (c, w) in &problem.entries {
        for &v in c.vars() {
            if assignment.get(v).is_none() {
                return Err(ModelError::IncompleteAssignment(v));
            }
        }
        if c.holds(|v| assignment.get(v).unwrap_or(false)) {
            satisfied += w;
        } else {
            unsatisfied += w;
        }
    }
    Ok(EvalResult {
        satisfied_weight: satisfied,
        unsatisfied_weight: unsatisfied,
    })
}

/// Merges a raw multiset into normal form. The variable count is the largest
/// id mentioned, cancelled constraints included.
pub fn normalize<I>(raw: I) -> Result<X2XProblem, ModelError>
where
    I: IntoIterator<Item = WeightedXor>,
{
    let mut problem = X2XProblem::new(0);
    for item in raw {
        problem.add(item.weight, item.constraint)?;
    }
    Ok(problem)
}

/// Fixes `var` to `value`: it leaves every constraint and the parity absorbs it.
pub fn substitute_constant(problem: &X2XProblem, var: Var, value: bool) -> X2XProblem {
    let mut out = X2XProblem::new(problem.var_count);
    out.floor = problem.floor.clone();
    for (c, w) in &problem.entries {
        let constraint = if c.contains(var) {
            let rest = c.vars().iter().copied().filter(|&v| v != var);
            XorConstraint::new(rest, c.parity() ^ value).expect("removing a variable keeps the cap")
        } else {
            c.clone()
        };
        out.add(w.clone(), constraint)
            .expect("stored weights are positive");
    }
    out
}

/// Replaces `var` by its negation, toggling the parity of every constraint on it.
pub fn flip_variable(problem: &X2XProblem, var: Var) -> X2XProblem {
    let mut out = X2XProblem::new(problem.var_count);
    out.floor = problem.floor.clone();
    for (c, w) in &problem.entries {
        let constraint = if c.contains(var) {
            c.negated()
        } else {
            c.clone()
        };
        out.add(w.clone(), constraint)
            .expect("stored weights are positive");
    }
    out
}
