//! Max2XOR resolution: rule instances, the saturation engine that applies
//! them along odd parity cycles, and an independent proof checker.
//!
//! A proof is a sequence of weighted rule applications. Each one removes its
//! premises at the applied weight and adds conclusions (parities) and residues
//! (SAT clauses) at fixed multiples of that weight. Rules preserve the
//! unsatisfied weight of every assignment exactly, except the compact and
//! translation steps whose conclusions over-count it by a recorded offset.

pub mod checker;
pub mod engine;
pub mod rules;

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::model::{
    normalize, OrClause, Term, Var, WeightedClause, WeightedXor, X2XProblem, XorConstraint,
};
use crate::rational::Rational;
use crate::textio::fingerprint;

pub use checker::{check_proof, CheckError, CheckReport};
pub use engine::{
    apply_compact_rule, apply_rule, bound_to_original, find_odd_cycle, saturate, BoundStatus,
    BoundVerdict, EngineError, OddCycle, ProofState, ResidueMode, RuleFamily, SaturateOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Chain00,
    Chain01,
    Chain11,
    Contra,
    Unit00,
    Unit01,
    Unit10,
    Unit11,
    Compact00,
    Compact01,
    Compact11,
    /// A residue clause replaced by its gadget translation.
    Translate,
}

impl RuleId {
    pub const ALL: [RuleId; 12] = [
        RuleId::Chain00,
        RuleId::Chain01,
        RuleId::Chain11,
        RuleId::Contra,
        RuleId::Unit00,
        RuleId::Unit01,
        RuleId::Unit10,
        RuleId::Unit11,
        RuleId::Compact00,
        RuleId::Compact01,
        RuleId::Compact11,
        RuleId::Translate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Chain00 => "chain00",
            RuleId::Chain01 => "chain01",
            RuleId::Chain11 => "chain11",
            RuleId::Contra => "contra",
            RuleId::Unit00 => "unit00",
            RuleId::Unit01 => "unit01",
            RuleId::Unit10 => "unit10",
            RuleId::Unit11 => "unit11",
            RuleId::Compact00 => "compact00",
            RuleId::Compact01 => "compact01",
            RuleId::Compact11 => "compact11",
            RuleId::Translate => "translate",
        }
    }

    /// Premise parities `(P, Q)` named by chain, unit and compact rules.
    pub fn parities(self) -> Option<(bool, bool)> {
        match self {
            RuleId::Chain00 | RuleId::Unit00 | RuleId::Compact00 => Some((false, false)),
            RuleId::Chain01 | RuleId::Unit01 | RuleId::Compact01 => Some((false, true)),
            RuleId::Unit10 => Some((true, false)),
            RuleId::Chain11 | RuleId::Unit11 | RuleId::Compact11 => Some((true, true)),
            RuleId::Contra | RuleId::Translate => None,
        }
    }

    pub fn chain(p: bool, q: bool) -> RuleId {
        match (p, q) {
            (false, false) => RuleId::Chain00,
            (true, true) => RuleId::Chain11,
            _ => RuleId::Chain01,
        }
    }

    pub fn unit(p: bool, q: bool) -> RuleId {
        match (p, q) {
            (false, false) => RuleId::Unit00,
            (false, true) => RuleId::Unit01,
            (true, false) => RuleId::Unit10,
            (true, true) => RuleId::Unit11,
        }
    }

    pub fn compact(p: bool, q: bool) -> RuleId {
        match (p, q) {
            (false, false) => RuleId::Compact00,
            (true, true) => RuleId::Compact11,
            _ => RuleId::Compact01,
        }
    }

    pub fn is_chain(self) -> bool {
        matches!(self, RuleId::Chain00 | RuleId::Chain01 | RuleId::Chain11)
    }

    pub fn is_unit(self) -> bool {
        matches!(
            self,
            RuleId::Unit00 | RuleId::Unit01 | RuleId::Unit10 | RuleId::Unit11
        )
    }

    pub fn is_compact(self) -> bool {
        matches!(
            self,
            RuleId::Compact00 | RuleId::Compact01 | RuleId::Compact11
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<RuleId, UnknownRule> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

/// One weighted rule application. Conclusion and residue weights are
/// `weight × multiplier`; `offset` is absolute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub rule: RuleId,
    pub weight: Rational,
    pub premises: Vec<Term>,
    pub conclusions: Vec<(XorConstraint, Rational)>,
    pub residues: Vec<(OrClause, Rational)>,
    pub offset: Rational,
    pub fresh: Option<Var>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Proof {
    pub steps: Vec<ProofStep>,
    /// Index of the first step of every round.
    pub round_starts: Vec<usize>,
    pub claimed_bound: Option<Rational>,
}

/// Steps taken in one saturation round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundStats {
    /// Entries present when the round's rule applications began.
    pub initial_entries: usize,
    /// Rule applications, translation steps excluded.
    pub rule_steps: usize,
    pub translate_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofSummary {
    /// Derived □ weight (floor included) minus accumulated offsets; the input
    /// cost is at least this much.
    pub bound_m: Rational,
    pub residual: X2XProblem,
    pub residue_clauses: Vec<WeightedClause>,
    pub offset: Rational,
    pub rounds: usize,
    pub steps: usize,
    pub round_stats: Vec<RoundStats>,
    pub source_fingerprint: u64,
}

/// Input of a proof: parity constraints that may still contain opposite
/// pairs, plus the floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofInput {
    pub entries: Vec<WeightedXor>,
    pub floor: Rational,
    pub var_count: u32,
}

impl ProofInput {
    /// Un-normalized input; equal constraints are merged when loaded.
    pub fn raw(entries: Vec<WeightedXor>) -> ProofInput {
        let var_count = entries
            .iter()
            .flat_map(|e| e.constraint.vars().iter().map(|v| v.id()))
            .max()
            .unwrap_or(0);
        ProofInput {
            entries,
            floor: Rational::zero(),
            var_count,
        }
    }

    /// Fingerprint of the normalized problem this input denotes.
    pub fn fingerprint(&self) -> u64 {
        let mut p = normalize(self.entries.iter().cloned()).unwrap_or_default();
        p.add_floor(self.floor.clone()).ok();
        p.reserve_vars(self.var_count);
        fingerprint(&p)
    }
}

impl From<&X2XProblem> for ProofInput {
    fn from(p: &X2XProblem) -> ProofInput {
        ProofInput {
            entries: p.weighted().collect(),
            floor: p.floor().clone(),
            var_count: p.var_count(),
        }
    }
}
