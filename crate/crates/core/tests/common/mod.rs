//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use max2xor::model::{
    normalize, Literal, OrClause, Var, WeightedClause, WeightedXor, X2XProblem, XorConstraint,
};
use max2xor::rational::{ratio, Rational};
use max2xor::textio::WcnfInstance;
use rand::seq::SliceRandom;
use rand::Rng;

/// k/4 for k in 1..=16.
pub fn dyadic_weight(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(1..=16), 4)
}

pub fn random_x2x(rng: &mut impl Rng, max_vars: u32, max_entries: usize) -> X2XProblem {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_entries);
    let mut raw = Vec::with_capacity(m);
    for _ in 0..m {
        let a = Var::from_id(rng.gen_range(1..=n));
        let vars = if n > 1 && rng.gen_bool(0.7) {
            let mut b = a;
            while b == a {
                b = Var::from_id(rng.gen_range(1..=n));
            }
            vec![a, b]
        } else {
            vec![a]
        };
        let c = XorConstraint::new(vars, rng.gen_bool(0.5)).unwrap();
        raw.push(WeightedXor::new(dyadic_weight(rng), c));
    }
    let mut p = normalize(raw).unwrap();
    p.reserve_vars(n);
    p
}

pub fn random_clause(rng: &mut impl Rng, n: u32, k: usize) -> OrClause {
    let mut ids: Vec<u32> = (1..=n).collect();
    ids.shuffle(rng);
    OrClause::new(ids[..k].iter().map(|&i| Literal {
        var: Var::from_id(i),
        negated: rng.gen_bool(0.5),
    }))
    .unwrap()
}

pub fn random_wcnf(
    rng: &mut impl Rng,
    max_vars: u32,
    max_clauses: usize,
    max_arity: usize,
) -> WcnfInstance {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_arity.min(n as usize));
            WeightedClause::new(dyadic_weight(rng), random_clause(rng, n, k))
        })
        .collect();
    WcnfInstance {
        var_count: n,
        clauses,
    }
}
