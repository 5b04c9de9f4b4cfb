//! Acceptance criteria, one line each. All checks are exact; wall-clock
//! budgets are enforced per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use max2xor::gadgets::{
    cancel_params, chain_to_3sat, compile_maxsat, compose_params, gadget_binary, t0_sequential,
    t_parallel, ternary_gadget, to_maxcut, trevisan_3to2, Anchor, CutVariant, GadgetParams,
    Strategy, TreeShape, VarAllocator,
};
use max2xor::model::{
    Assignment, Literal, OrClause, Term, Var, WeightedClause, WeightedXor, X2XProblem,
    XorConstraint,
};
use max2xor::oracle::{
    brute_opt_cost, brute_x2x, value_under, verify_gadget, OracleLimits, OracleProblem,
};
use max2xor::proofs::rules;
use max2xor::proofs::{
    bound_to_original, check_proof, saturate, BoundStatus, CheckError, Proof, ProofInput,
    ProofStep, ResidueMode, RuleId, SaturateOptions,
};
use max2xor::rational::{fmt_rational, half, int, ratio, Rational};
use max2xor::textio::{parse_cnf, CutGraph};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn v(i: u32) -> Var {
    Var::from_id(i)
}

fn cl(lits: &[i64]) -> OrClause {
    OrClause::from_dimacs(lits).unwrap()
}

fn all_positive(k: usize) -> OrClause {
    OrClause::new((1..=k as u32).map(|i| Literal::pos(v(i)))).unwrap()
}

fn xors(items: &[WeightedXor]) -> OracleProblem {
    let mut p = OracleProblem::new();
    for x in items {
        p.push(x.weight.clone(), &x.constraint);
    }
    p
}

fn clauses(items: &[WeightedClause]) -> OracleProblem {
    let mut p = OracleProblem::new();
    p.add_clauses(items.iter().map(|c| (&c.weight, &c.clause)));
    p
}

fn certify(
    source: &OrClause,
    translation: &OracleProblem,
    params: &GadgetParams,
) -> Result<(), String> {
    let verdict = verify_gadget(source, translation, params, &OracleLimits::default())
        .map_err(|e| e.to_string())?;
    if verdict.certified {
        Ok(())
    } else {
        Err(format!(
            "{source} not certified as ({}, {}): {:?} {:?}",
            fmt_rational(&params.alpha),
            fmt_rational(&params.beta),
            verdict.reason,
            verdict.counterexample
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn binary_gadget() -> Outcome {
    for lits in [[1, 2], [1, -2], [-1, 2], [-1, -2]] {
        let c = cl(&lits);
        let t = gadget_binary(&int(1), &c).map_err(|e| e.to_string())?;
        let p = xors(&t);
        ensure(p.vars().len() == 2, || {
            format!("{c}: auxiliary variables introduced")
        })?;
        certify(&c, &p, &GadgetParams::binary_gadget())?;
    }
    Ok("4 rows certified (1, 3/2), 0 aux".into())
}

fn sequential_translation() -> Outcome {
    for k in 2..=10 {
        let c = all_positive(k);
        let t = t0_sequential(&c, Anchor::One, &mut VarAllocator::after(k as u32))
            .map_err(|e| e.to_string())?;
        certify(&c, &xors(&t), &GadgetParams::parity_tree(k))?;
    }
    Ok("t0 certified (k-1, 3(k-1)/2) for k = 2..10".into())
}

fn tree_translation() -> Outcome {
    let mut shapes = 0;
    let mut check = |k: usize, s: &TreeShape| -> Result<(), String> {
        let c = all_positive(k);
        let t = t_parallel(&c, s, Anchor::One, &mut VarAllocator::after(k as u32))
            .map_err(|e| e.to_string())?;
        certify(&c, &xors(&t), &GadgetParams::parity_tree(k))
            .map_err(|e| format!("shape {s}: {e}"))?;
        shapes += 1;
        Ok(())
    };
    for k in 2..=6 {
        let all = TreeShape::all(k);
        let catalan = [1, 1, 2, 5, 14, 42][k - 1];
        if all.len() != catalan {
            return Err(format!(
                "{} shapes at k = {k}, expected {catalan}",
                all.len()
            ));
        }
        for s in &all {
            check(k, s)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e5e);
    for k in 7..=10 {
        for _ in 0..64 {
            check(k, &TreeShape::random(k, &mut rng))?;
        }
    }
    Ok(format!("{shapes} tree translations certified"))
}

fn ternary_gadget_criterion() -> Outcome {
    let c = all_positive(3);
    let inst = max2xor::textio::WcnfInstance {
        var_count: 3,
        clauses: vec![WeightedClause::new(int(1), c.clone())],
    };
    let report = compile_maxsat(&inst, &Strategy::Sequential).map_err(|e| e.to_string())?;
    let p = &report.problem;
    ensure(p.len() == 6, || format!("{} constraints", p.len()))?;
    ensure(p.entries().values().all(|w| *w == half()), || {
        "weights differ from 1/2".into()
    })?;
    ensure(p.total_weight() == int(3), || {
        "total weight differs from 3".into()
    })?;
    ensure(p.floor().is_zero(), || "unexpected floor".into())?;

    // the listed gadget, with b = 4
    let b = 4;
    let listed: Vec<XorConstraint> = [
        (&[1, 3][..], 1),
        (&[1, b][..], 0),
        (&[3, b][..], 0),
        (&[2, b][..], 1),
        (&[b][..], 1),
        (&[2][..], 1),
    ]
    .iter()
    .map(|(vs, p)| XorConstraint::new(vs.iter().map(|&i| v(i)), *p == 1).unwrap())
    .collect();
    // compiled x1 ∨ x2 ∨ x3 → listed: x2 ↔ x3, fresh variable 4 ↦ b
    let map = |x: Var| v([0, 1, 3, 2, b][x.id() as usize]);
    let mut mapped: Vec<XorConstraint> = p
        .entries()
        .keys()
        .map(|c| XorConstraint::new(c.vars().iter().map(|&x| map(x)), c.parity()).unwrap())
        .collect();
    mapped.sort();
    let mut want = listed;
    want.sort();
    ensure(mapped == want, || {
        format!("mapped {mapped:?} differs from {want:?}")
    })?;
    certify(
        &c,
        &OracleProblem::from_x2x(p),
        &GadgetParams::new(int(2), int(3), 1),
    )?;
    Ok("6 x 1/2, total 3, isomorphic via x2<->x3, b=x4; certified (2, 3)".into())
}

fn trevisan() -> Outcome {
    let c = all_positive(3);
    let t = trevisan_3to2(&c, &mut VarAllocator::after(3)).map_err(|e| e.to_string())?;
    certify(&c, &clauses(&t), &GadgetParams::trevisan())?;

    let composed = compose_params(&GadgetParams::trevisan(), &GadgetParams::binary_gadget());
    ensure(
        composed.alpha == ratio(7, 2) && composed.beta == int(6),
        || {
            format!(
                "composition arithmetic gives ({}, {})",
                fmt_rational(&composed.alpha),
                fmt_rational(&composed.beta)
            )
        },
    )?;
    let mut raw = OracleProblem::new();
    for wc in &t {
        for x in gadget_binary(&wc.weight, &wc.clause).map_err(|e| e.to_string())? {
            raw.push(x.weight, &x.constraint);
        }
    }
    certify(&c, &raw, &composed)?;

    let normalized = ternary_gadget(&c, &mut VarAllocator::after(3)).map_err(|e| e.to_string())?;
    let w = normalized.floor().clone();
    ensure(w == ratio(3, 2), || {
        format!("cancelled weight {}", fmt_rational(&w))
    })?;
    let cancelled = cancel_params(&composed, &w);
    ensure(
        cancelled.alpha == int(2) && cancelled.beta == int(3),
        || "cancellation arithmetic".into(),
    )?;
    let mut entries = OracleProblem::from_x2x(&normalized);
    entries.floor = Rational::zero();
    certify(&c, &entries, &cancelled)?;
    Ok("(7/2, 4); composed (7/2, 6); normalized (2, 3) with w = 3/2".into())
}

fn chain_composition() -> Outcome {
    for k in [4usize, 5] {
        let c = all_positive(k);
        let mut alloc = VarAllocator::after(k as u32);
        let mut translation = OracleProblem::new();
        for wc in chain_to_3sat(&c, &mut alloc).map_err(|e| e.to_string())? {
            let g = ternary_gadget(&wc.clause, &mut alloc).map_err(|e| e.to_string())?;
            for (x, w) in g.entries() {
                translation.push(w * &wc.weight, x);
            }
        }
        let want = GadgetParams::new(int(2 * (k as i64 - 2)), int(3 * (k as i64 - 2)), 0);
        let composed = compose_params(
            &GadgetParams::chain(k),
            &GadgetParams::new(int(2), int(3), 1),
        );
        ensure(
            composed.alpha == want.alpha && composed.beta == want.beta,
            || "composition arithmetic".into(),
        )?;
        certify(&c, &translation, &want)?;
    }
    Ok("chain + (2, 3) certified (2(k-2), 3(k-2)) for k = 4, 5".into())
}

fn example1() -> Outcome {
    let text = "p wcnf 3 9\n1 2 0\n2 1 2 0\n1 -1 -2 0\n1 1 -2 0\n2 2 -3 0\n3 -2 3 0\n1 1 3 0\n2 -1 -3 0\n3 -1 3 0\n";
    let inst = parse_cnf(text).map_err(|e| e.to_string())?;
    let report = compile_maxsat(&inst, &Strategy::Sequential).map_err(|e| e.to_string())?;
    let p = &report.problem;
    let (x, y, z) = (1, 2, 3);
    let mut want = X2XProblem::new(3);
    for (w, vs, par) in [
        (int(1), vec![x], false),
        (half(), vec![y], true),
        (ratio(3, 2), vec![z], true),
        (int(1), vec![x, y], true),
        (ratio(5, 2), vec![y, z], false),
    ] {
        want.add(w, XorConstraint::new(vs.into_iter().map(v), par).unwrap())
            .unwrap();
    }
    ensure(p.entries() == want.entries(), || {
        format!("entries {:?}", p.entries())
    })?;

    // independent floor: cost of the raw gadget output minus cost of the kept entries
    let mut raw = OracleProblem::new();
    for wc in &inst.clauses {
        for t in gadget_binary(&wc.weight, &wc.clause).map_err(|e| e.to_string())? {
            raw.push(t.weight, &t.constraint);
        }
    }
    let limits = OracleLimits::default();
    let raw_cost = brute_opt_cost(&raw, &limits)
        .map_err(|e| e.to_string())?
        .cost;
    let mut kept = OracleProblem::from_x2x(p);
    kept.floor = Rational::zero();
    let kept_cost = brute_opt_cost(&kept, &limits)
        .map_err(|e| e.to_string())?
        .cost;
    let oracle_floor = raw_cost - kept_cost;
    ensure(oracle_floor == ratio(17, 2), || {
        format!("oracle floor {}", fmt_rational(&oracle_floor))
    })?;
    ensure(*p.floor() == ratio(17, 2), || {
        format!("floor {}", fmt_rational(p.floor()))
    })?;
    Ok(format!(
        "entries exact, floor 17/2 (oracle agrees), shift {}",
        fmt_rational(&report.shift)
    ))
}

/// Ī(terms) under `a`, computed by the oracle's evaluator.
fn unsat_weight(terms: &OracleProblem, a: &Assignment) -> Rational {
    terms.total_weight() - value_under(terms, a)
}

/// Min over the fresh variable of Ī(after) − Ī(before), for every
/// assignment of the other variables, must equal `offset`.
fn rule_table(step: &ProofStep) -> Result<(), String> {
    let mut before = OracleProblem::new();
    for t in &step.premises {
        match t {
            Term::Xor(c) => before.push(step.weight.clone(), c),
            Term::Clause(c) => before.push(step.weight.clone(), c),
        }
    }
    let mut after = OracleProblem::new();
    for (c, m) in &step.conclusions {
        after.push(&step.weight * m, c);
    }
    for (c, m) in &step.residues {
        after.push(&step.weight * m, c);
    }
    let mut vars: Vec<Var> = before.vars().into_iter().chain(after.vars()).collect();
    vars.sort();
    vars.dedup();
    vars.retain(|x| Some(*x) != step.fresh);
    for bits in 0..1u64 << vars.len() {
        let base = Assignment::from_counter(&vars, bits);
        let values: Vec<bool> = if step.fresh.is_some() {
            vec![false, true]
        } else {
            vec![false]
        };
        let best = values
            .into_iter()
            .map(|y| {
                let mut a = base.clone();
                if let Some(f) = step.fresh {
                    a.set(f, y);
                }
                unsat_weight(&after, &a)
            })
            .min()
            .unwrap();
        let diff = best - unsat_weight(&before, &base);
        if diff != step.offset {
            return Err(format!(
                "{}: difference {} at {base}",
                step.rule,
                fmt_rational(&diff)
            ));
        }
    }
    Ok(())
}

fn rule_soundness() -> Outcome {
    let (x, a, b, y) = (v(1), v(2), v(3), v(4));
    let bin = |p, q, par| XorConstraint::binary(p, q, par);
    let w = int(1);
    let mut residue_rules = Vec::new();
    for (p, q) in [(false, false), (false, true), (true, true)] {
        residue_rules
            .push(rules::resolve(x, &bin(x, a, p), &bin(x, b, q), &w).map_err(|e| e.to_string())?);
    }
    for (p, q) in [(false, false), (false, true), (true, false), (true, true)] {
        residue_rules.push(
            rules::resolve(x, &XorConstraint::unit(x, p), &bin(x, a, q), &w)
                .map_err(|e| e.to_string())?,
        );
    }
    residue_rules
        .push(rules::contra(&bin(x, a, false), &bin(x, a, true), &w).map_err(|e| e.to_string())?);
    let names: std::collections::BTreeSet<RuleId> = residue_rules.iter().map(|s| s.rule).collect();
    ensure(names.len() == 8, || {
        format!("only {} distinct rules", names.len())
    })?;
    for s in &residue_rules {
        rule_table(s)?;
        ensure(s.offset.is_zero(), || format!("{} has an offset", s.rule))?;
    }
    let mut compact = 0;
    for wt in [int(1), half()] {
        for (p, q) in [(false, false), (false, true), (true, true)] {
            let s = rules::compact(x, &bin(x, a, p), &bin(x, b, q), &wt, y)
                .map_err(|e| e.to_string())?;
            ensure(s.offset == wt, || "compact offset differs from w".into())?;
            rule_table(&s)?;
            let s = rules::compact(x, &XorConstraint::unit(x, p), &bin(x, b, q), &wt, y)
                .map_err(|e| e.to_string())?;
            rule_table(&s)?;
            compact += 2;
        }
    }
    Ok(format!(
        "8 rules preserve cost exactly; {compact} compact instances offset +w"
    ))
}

fn tampers(step: &ProofStep) -> Vec<(&'static str, ProofStep)> {
    let mut out = Vec::new();
    let mut s = step.clone();
    s.weight = &s.weight * ratio(1, 2);
    out.push(("weight", s));
    let mut s = step.clone();
    if let Some(c) = s.conclusions.first_mut() {
        c.0 = c.0.negated();
        out.push(("conclusion parity", s));
    }
    let mut s = step.clone();
    if let Some(Term::Xor(c)) = s.premises.first().cloned() {
        s.premises[0] = Term::Xor(c.negated());
        out.push(("premise parity", s));
    }
    let mut s = step.clone();
    if let Some(r) = s.residues.first_mut() {
        r.1 = int(1);
        out.push(("residue weight", s));
    }
    out
}

fn saturation_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3);
    let limits = OracleLimits::default();
    let modes = [
        ResidueMode::Discard,
        ResidueMode::Retranslate { max_rounds: 3 },
        ResidueMode::Compact,
    ];
    let (mut proofs, mut tampered, mut max_m) = (0, 0, Rational::zero());
    for i in 0..500 {
        let p = common::random_x2x(&mut rng, 10, 20);
        let input = ProofInput::from(&p);
        let cost = brute_x2x(&p, &limits).map_err(|e| e.to_string())?.cost;
        for mode in modes {
            let options = SaturateOptions {
                mode,
                max_vars: Some(20),
                ..SaturateOptions::default()
            };
            let (s, proof) = saturate(&input, &options).map_err(|e| e.to_string())?;
            let mut rest = OracleProblem::from_x2x(&s.residual);
            rest.add_clauses(s.residue_clauses.iter().map(|c| (&c.weight, &c.clause)));
            let rest_cost = brute_opt_cost(&rest, &limits)
                .map_err(|e| e.to_string())?
                .cost;
            if &s.bound_m + &rest_cost != cost {
                return Err(format!(
                    "instance {i} ({mode}): m {} + rest {} != cost {}",
                    fmt_rational(&s.bound_m),
                    fmt_rational(&rest_cost),
                    fmt_rational(&cost)
                ));
            }
            for r in &s.round_stats {
                ensure(r.rule_steps <= r.initial_entries, || {
                    format!("instance {i} ({mode}): {r:?}")
                })?;
            }
            check_proof(&input, &proof, Some(&s))
                .map_err(|e| format!("instance {i} ({mode}): {e}"))?;
            proofs += 1;
            if s.bound_m > max_m {
                max_m = s.bound_m.clone();
            }
            if proof.steps.is_empty() {
                continue;
            }
            let at = rng.gen_range(0..proof.steps.len());
            for (what, bad) in tampers(&proof.steps[at]) {
                let mut forged: Proof = proof.clone();
                forged.steps[at] = bad;
                match check_proof(&input, &forged, None) {
                    Err(CheckError::Step { step, .. }) if step == at => tampered += 1,
                    other => {
                        return Err(format!(
                            "instance {i} ({mode}): {what} tamper at step {at} gave {other:?}"
                        ))
                    }
                }
            }
        }
    }
    Ok(format!(
        "{proofs} proofs: m + Cost(rest) = Cost exactly, all accepted; {tampered} tampers rejected; max m {}",
        fmt_rational(&max_m)
    ))
}

fn end_to_end() -> Outcome {
    let inst =
        parse_cnf("p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n").map_err(|e| e.to_string())?;
    let report = compile_maxsat(&inst, &Strategy::Sequential).map_err(|e| e.to_string())?;
    ensure(report.shift == int(2), || {
        format!("shift {}", fmt_rational(&report.shift))
    })?;
    let (s, proof) = saturate(
        &ProofInput::from(&report.problem),
        &SaturateOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(s.bound_m >= int(3), || {
        format!("m = {}", fmt_rational(&s.bound_m))
    })?;
    check_proof(&ProofInput::from(&report.problem), &proof, Some(&s)).map_err(|e| e.to_string())?;
    let verdict = bound_to_original(&s, &report).map_err(|e| e.to_string())?;
    ensure(verdict.status == BoundStatus::Unsat, || verdict.to_string())?;
    let cost = brute_x2x(&report.problem, &OracleLimits::default())
        .map_err(|e| e.to_string())?
        .cost;
    ensure(cost == int(3), || {
        format!("oracle Cost = {}", fmt_rational(&cost))
    })?;
    Ok(format!(
        "shift 2, m = {}, {verdict}, oracle Cost(P') = 3",
        fmt_rational(&s.bound_m)
    ))
}

fn maxcut() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc07);
    let limits = OracleLimits::default();
    for i in 0..100 {
        let p = common::random_x2x(&mut rng, 8, 12);
        let cost = brute_x2x(&p, &limits).map_err(|e| e.to_string())?.cost;

        let g = to_maxcut(&p, CutVariant::Single);
        let h0 = g.anchor_zero.ok_or("single export without anchor")?;
        let cut = g
            .to_problem()
            .map_err(|e| e.to_string())?
            .substitute_constant(h0, false);
        let cut_cost = brute_x2x(&cut, &limits).map_err(|e| e.to_string())?.cost;
        ensure(cut_cost == cost, || {
            format!(
                "instance {i}: cut cost {} vs {}",
                fmt_rational(&cut_cost),
                fmt_rational(&cost)
            )
        })?;

        let g: CutGraph = to_maxcut(&p, CutVariant::Double);
        let (h0, h1) = (
            g.anchor_zero.unwrap(),
            g.anchor_one.ok_or("double export without second anchor")?,
        );
        let sum = |par: bool| {
            p.entries()
                .iter()
                .filter(|(c, _)| c.vars().len() == 1 && c.parity() == par)
                .fold(Rational::zero(), |acc, (_, w)| acc + w)
        };
        let want = max2xor::rational::min(&sum(false), &sum(true));
        let got = g
            .edges
            .iter()
            .filter(|(a, b, _)| (*a, *b) == (h0, h1) || (*a, *b) == (h1, h0))
            .fold(Rational::zero(), |acc, (_, _, w)| acc + w);
        ensure(got == want, || {
            format!(
                "instance {i}: W = {} expected {}",
                fmt_rational(&got),
                fmt_rational(&want)
            )
        })?;
    }
    Ok("100 instances: single-anchor cost preserved, double-anchor W exact".into())
}

type Criterion = (u8, &'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "binary gadget", 1, binary_gadget),
        (2, "sequential translation", 30, sequential_translation),
        (3, "tree translation", 60, tree_translation),
        (4, "ternary (2,3) gadget", 1, ternary_gadget_criterion),
        (5, "trevisan composition", 1, trevisan),
        (6, "chain composition", 1, chain_composition),
        (7, "example 1 compile", 1, example1),
        (8, "rule soundness", 1, rule_soundness),
        (9, "saturation identity", 120, saturation_identity),
        (10, "end-to-end decision", 1, end_to_end),
        (11, "maxcut export", 60, maxcut),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > Duration::from_secs(budget) => {
                Err(format!("{detail}; took {took:.2?}, budget {budget}s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{took:.2?} / {budget}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{took:.2?} / {budget}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
