//! Exhaustive ground truth: exact Opt/Cost by enumerating every assignment,
//! and gadget certification by enumerating every source assignment together
//! with every auxiliary extension.
//!
//! Variables are packed into a bit counter with the smallest id as the most
//! significant bit, so counting order is lexicographic order and the first
//! maximizer found is the lexicographically least one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::gadgets::GadgetParams;
use crate::model::{Assignment, Constraint, Form, OrClause, Var, X2XProblem};
use crate::rational::{int, Rational};

/// Hard ceiling on enumerated variables.
pub const MAX_ORACLE_VARS: usize = 26;

/// Environment variable that can lower (never raise) the ceiling.
pub const ORACLE_VARS_ENV: &str = "X2X_MAX_ORACLE_VARS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the enumeration limit of {max}")]
    TooManyVars { vars: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vars: usize,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits {
            max_vars: MAX_ORACLE_VARS,
        }
    }
}

impl OracleLimits {
    pub fn from_env() -> OracleLimits {
        let requested = std::env::var(ORACLE_VARS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok());
        OracleLimits {
            max_vars: requested.map_or(MAX_ORACLE_VARS, |r| r.min(MAX_ORACLE_VARS)),
        }
    }

    fn check(&self, vars: usize) -> Result<(), OracleError> {
        if vars > self.max_vars {
            Err(OracleError::TooManyVars {
                vars,
                max: self.max_vars,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedForm {
    pub weight: Rational,
    pub form: Form,
}

/// Any weighted mix of parities and clauses, plus a floor of weight that is
/// unsatisfied under every assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleProblem {
    pub terms: Vec<WeightedForm>,
    pub floor: Rational,
}

impl OracleProblem {
    pub fn new() -> OracleProblem {
        OracleProblem::default()
    }

    pub fn push(&mut self, weight: Rational, constraint: &impl Constraint) {
        self.terms.push(WeightedForm {
            weight,
            form: constraint.form(),
        });
    }

    pub fn from_x2x(problem: &X2XProblem) -> OracleProblem {
        let mut p = OracleProblem {
            terms: Vec::with_capacity(problem.len()),
            floor: problem.floor().clone(),
        };
        for (c, w) in problem.entries() {
            p.push(w.clone(), c);
        }
        p
    }

    pub fn add_clauses<'a>(
        &mut self,
        clauses: impl IntoIterator<Item = (&'a Rational, &'a OrClause)>,
    ) {
        for (w, c) in clauses {
            self.push(w.clone(), c);
        }
    }

    /// Occurring variables, ascending.
    pub fn vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = self
            .terms
            .iter()
            .flat_map(|t| match &t.form {
                Form::Parity { vars, .. } => vars.clone(),
                Form::Disjunction { literals } => literals.iter().map(|l| l.var).collect(),
            })
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    /// Weight of the terms, floor excluded.
    pub fn total_weight(&self) -> Rational {
        self.terms
            .iter()
            .fold(Rational::zero(), |acc, t| acc + &t.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Maximum satisfied weight.
    pub opt: Rational,
    /// Floor plus minimum unsatisfied weight.
    pub cost: Rational,
    pub opt_witness: Assignment,
    pub cost_witness: Assignment,
}

/// A term compiled against a fixed bit layout.
enum Packed {
    Parity { mask: u64, parity: u32 },
    Disjunction { pos: u64, neg: u64 },
}

impl Packed {
    fn holds(&self, bits: u64) -> bool {
        match *self {
            Packed::Parity { mask, parity } => (bits & mask).count_ones() & 1 == parity,
            Packed::Disjunction { pos, neg } => bits & pos != 0 || !bits & neg != 0,
        }
    }
}

/// Integer weights over a common denominator, with an i64 fast path.
enum Scaled {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

struct Evaluator {
    terms: Vec<Packed>,
    weights: Scaled,
    denom: BigInt,
}

impl Evaluator {
    /// `order[0]` is the most significant bit.
    fn new(problem: &OracleProblem, order: &[Var]) -> Evaluator {
        let n = order.len();
        let index: BTreeMap<Var, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let bit = |v: Var| -> u64 { 1u64 << (n - 1 - index[&v]) };
        let terms = problem
            .terms
            .iter()
            .map(|t| match &t.form {
                Form::Parity { vars, parity } => Packed::Parity {
                    mask: vars.iter().fold(0, |m, &v| m ^ bit(v)),
                    parity: u32::from(*parity),
                },
                Form::Disjunction { literals } => {
                    let (mut pos, mut neg) = (0, 0);
                    for l in literals {
                        if l.negated {
                            neg |= bit(l.var);
                        } else {
                            pos |= bit(l.var);
                        }
                    }
                    Packed::Disjunction { pos, neg }
                }
            })
            .collect();
        let denom = problem
            .terms
            .iter()
            .fold(BigInt::one(), |acc, t| acc.lcm(t.weight.denom()));
        let big: Vec<BigInt> = problem
            .terms
            .iter()
            .map(|t| t.weight.numer() * (&denom / t.weight.denom()))
            .collect();
        let total: BigInt = big.iter().sum();
        let weights = match (
            total.to_i64(),
            big.iter().map(|w| w.to_i64()).collect::<Option<Vec<_>>>(),
        ) {
            (Some(_), Some(small)) => Scaled::Small(small),
            _ => Scaled::Big(big),
        };
        Evaluator {
            terms,
            weights,
            denom,
        }
    }

    fn satisfied(&self, bits: u64) -> BigInt {
        match &self.weights {
            Scaled::Small(w) => BigInt::from(self.satisfied_small(w, bits)),
            Scaled::Big(w) => self
                .terms
                .iter()
                .zip(w)
                .filter(|(t, _)| t.holds(bits))
                .map(|(_, w)| w)
                .sum(),
        }
    }

    fn satisfied_small(&self, w: &[i64], bits: u64) -> i64 {
        self.terms
            .iter()
            .zip(w)
            .filter(|(t, _)| t.holds(bits))
            .map(|(_, w)| *w)
            .sum()
    }

    /// Best satisfied weight over the counters in `range`, first maximizer.
    fn best(&self, range: std::ops::Range<u64>) -> (BigInt, u64) {
        match &self.weights {
            Scaled::Small(w) => {
                let (mut best, mut arg) = (i64::MIN, range.start);
                for bits in range {
                    let s = self.satisfied_small(w, bits);
                    if s > best {
                        best = s;
                        arg = bits;
                    }
                }
                (BigInt::from(best), arg)
            }
            Scaled::Big(_) => {
                let mut best: Option<BigInt> = None;
                let mut arg = range.start;
                for bits in range {
                    let s = self.satisfied(bits);
                    if best.as_ref().is_none_or(|b| s > *b) {
                        best = Some(s);
                        arg = bits;
                    }
                }
                (best.unwrap_or_default(), arg)
            }
        }
    }

    fn unscale(&self, v: BigInt) -> Rational {
        Rational::new(v, self.denom.clone())
    }
}

/// Exact optimum of a mixed problem by full enumeration.
pub fn brute_opt_cost(
    problem: &OracleProblem,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let vars = problem.vars();
    limits.check(vars.len())?;
    let eval = Evaluator::new(problem, &vars);
    let (best, arg) = eval.best(0..1u64 << vars.len());
    let opt = eval.unscale(best);
    let cost = &problem.floor + problem.total_weight() - &opt;
    let witness = Assignment::from_counter(&vars, arg);
    Ok(OracleResult {
        opt,
        cost,
        opt_witness: witness.clone(),
        cost_witness: witness,
    })
}

pub fn brute_x2x(problem: &X2XProblem, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    brute_opt_cost(&OracleProblem::from_x2x(problem), limits)
}

/// Satisfied weight of `problem` under a total assignment of its variables.
pub fn value_under(problem: &OracleProblem, assignment: &Assignment) -> Rational {
    problem
        .terms
        .iter()
        .filter(|t| {
            let value = |v: Var| assignment.get(v).expect("assignment covers the problem");
            match &t.form {
                Form::Parity { vars, parity } => {
                    vars.iter().fold(false, |acc, &v| acc ^ value(v)) == *parity
                }
                Form::Disjunction { literals } => literals.iter().any(|l| l.holds(value(l.var))),
            }
        })
        .fold(Rational::zero(), |acc, t| acc + &t.weight)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetVerdict {
    pub certified: bool,
    pub alpha: Rational,
    pub beta: Rational,
    /// First source assignment whose best extension misses its target, with
    /// the value that extension reaches.
    pub counterexample: Option<(Assignment, Rational)>,
    pub reason: Option<String>,
}

/// Checks that `translation` is an (α, β)-gadget for `source`: total weight β
/// and, for every source assignment, best extension value α when the source
/// holds and α − 1 when it does not.
pub fn verify_gadget(
    source: &dyn Constraint,
    translation: &OracleProblem,
    claimed: &GadgetParams,
    limits: &OracleLimits,
) -> Result<GadgetVerdict, OracleError> {
    let mut verdict = GadgetVerdict {
        certified: false,
        alpha: claimed.alpha.clone(),
        beta: claimed.beta.clone(),
        counterexample: None,
        reason: None,
    };
    let total = translation.total_weight();
    if total != claimed.beta {
        verdict.reason = Some(format!(
            "claimed beta {} but the translation weighs {}",
            crate::rational::fmt_rational(&claimed.beta),
            crate::rational::fmt_rational(&total)
        ));
        return Ok(verdict);
    }

    let mut source_vars = source.variables();
    source_vars.sort();
    source_vars.dedup();
    let aux: Vec<Var> = translation
        .vars()
        .into_iter()
        .filter(|v| source_vars.binary_search(v).is_err())
        .collect();
    limits.check(source_vars.len() + aux.len())?;

    let mut order = source_vars.clone();
    order.extend(&aux);
    let eval = Evaluator::new(translation, &order);
    let width = aux.len();
    let target_sat = &claimed.alpha;
    let target_unsat = &claimed.alpha - int(1);
    for s in 0..1u64 << source_vars.len() {
        let src = Assignment::from_counter(&source_vars, s);
        let holds = source.holds_under(&|v| src.get(v).expect("source variable"));
        let (best, _) = eval.best(s << width..(s + 1) << width);
        let best = eval.unscale(best);
        let target = if holds { target_sat } else { &target_unsat };
        if best != *target {
            verdict.reason = Some(format!(
                "source assignment [{src}] ({}) reaches {} instead of {}",
                if holds { "satisfying" } else { "falsifying" },
                crate::rational::fmt_rational(&best),
                crate::rational::fmt_rational(target)
            ));
            verdict.counterexample = Some((src, best));
            return Ok(verdict);
        }
    }
    verdict.certified = true;
    Ok(verdict)
}
