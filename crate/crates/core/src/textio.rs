//! Text formats: DIMACS cnf/wcnf input, `.x2x` problems, `.cut` graphs and
//! `.x2xproof` logs. Every emitter is deterministic and every parser accepts
//! exactly what the matching emitter writes.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{
    Literal, ModelError, OrClause, Term, Var, WeightedClause, X2XProblem, XorConstraint,
};
use crate::proofs::{Proof, ProofStep, RuleId};
use crate::rational::{parse_rational, Frac, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: clause contains both polarities of variable {var}")]
    Tautology { line: usize, var: Var },
    #[error("line {line}: unsupported feature: {msg}")]
    Unsupported { line: usize, msg: String },
    #[error("edge {0} -- {0} is a self-loop")]
    SelfLoop(Var),
}

fn parse_err(line: usize, msg: impl Into<String>) -> TextError {
    TextError::Parse {
        line,
        msg: msg.into(),
    }
}

/// A soft-weighted MaxSAT instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WcnfInstance {
    pub var_count: u32,
    pub clauses: Vec<WeightedClause>,
}

/// What kind of instance a text holds, judged by its `p` header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Cnf,
    X2x,
}

pub fn detect_kind(text: &str) -> Option<InputKind> {
    for line in text.lines() {
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next()) {
            (Some("p"), Some("cnf" | "wcnf")) => return Some(InputKind::Cnf),
            (Some("p"), Some("x2x")) => return Some(InputKind::X2x),
            (Some("p"), _) => return None,
            _ => {}
        }
    }
    None
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('c')
}

fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<(usize, Vec<&'a str>), TextError> {
    for (no, line) in lines.by_ref() {
        if is_skippable(line) {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.first() != Some(&"p") {
            return Err(parse_err(no, "expected a 'p' header line"));
        }
        return Ok((no, tokens));
    }
    Err(parse_err(0, "missing 'p' header line"))
}

fn parse_count(line: usize, token: Option<&&str>, what: &str) -> Result<u32, TextError> {
    token
        .ok_or_else(|| parse_err(line, format!("header is missing the {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("malformed {what}")))
}

/// Parses DIMACS `p cnf n m` (every clause weight 1) or `p wcnf n m` (leading
/// weight per clause). Clauses may span lines; each ends with `0`.
pub fn parse_cnf(text: &str) -> Result<WcnfInstance, TextError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = parse_header(&mut lines)?;
    let weighted = match header.get(1) {
        Some(&"cnf") => false,
        Some(&"wcnf") => true,
        _ => return Err(parse_err(hline, "expected 'p cnf' or 'p wcnf'")),
    };
    let var_count = parse_count(hline, header.get(2), "variable count")?;
    let clause_count = parse_count(hline, header.get(3), "clause count")? as usize;
    if header.len() > 4 {
        if weighted && header.len() == 5 {
            return Err(TextError::Unsupported {
                line: hline,
                msg: "hard clauses (top weight) are not supported; all clauses are soft".into(),
            });
        }
        return Err(parse_err(hline, "trailing tokens in header"));
    }

    let mut clauses = Vec::with_capacity(clause_count);
    let mut weight: Option<Rational> = None;
    let mut literals: Vec<Literal> = Vec::new();
    let mut start_line = 0;
    for (no, line) in lines {
        if is_skippable(line) {
            continue;
        }
        for token in line.split_whitespace() {
            if weighted && weight.is_none() {
                let w = parse_rational(token)
                    .ok_or_else(|| parse_err(no, format!("malformed weight '{token}'")))?;
                if !w.is_positive() {
                    return Err(parse_err(no, "clause weight must be positive"));
                }
                weight = Some(w);
                start_line = no;
                continue;
            }
            let lit: i64 = token
                .parse()
                .map_err(|_| parse_err(no, format!("malformed literal '{token}'")))?;
            if literals.is_empty() && !weighted {
                start_line = no;
            }
            if lit == 0 {
                if clauses.len() == clause_count {
                    return Err(parse_err(no, "more clauses than declared"));
                }
                let clause = OrClause::new(literals.drain(..)).map_err(|e| match e {
                    ModelError::Tautology(var) => TextError::Tautology {
                        line: start_line,
                        var,
                    },
                    other => parse_err(start_line, other.to_string()),
                })?;
                let w = weight
                    .take()
                    .unwrap_or_else(|| Rational::from_integer(1.into()));
                clauses.push(WeightedClause::new(w, clause));
                continue;
            }
            let l = Literal::from_dimacs(lit)
                .filter(|l| l.var.id() <= var_count)
                .ok_or_else(|| parse_err(no, format!("literal {lit} out of range")))?;
            literals.push(l);
        }
    }
    if !literals.is_empty() || weight.is_some() {
        return Err(parse_err(start_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != clause_count {
        return Err(parse_err(
            hline,
            format!(
                "header declares {clause_count} clauses, found {}",
                clauses.len()
            ),
        ));
    }
    Ok(WcnfInstance { var_count, clauses })
}

pub fn emit_wcnf(instance: &WcnfInstance) -> String {
    let mut out = format!("p wcnf {} {}\n", instance.var_count, instance.clauses.len());
    for wc in &instance.clauses {
        let w = &wc.weight;
        if w.is_integer() {
            write!(out, "{}", w.numer()).unwrap();
        } else {
            write!(out, "{}", Frac(w)).unwrap();
        }
        for l in wc.clause.literals() {
            write!(out, " {l}").unwrap();
        }
        out.push_str(" 0\n");
    }
    out
}

fn write_xor(out: &mut String, weight: &Rational, c: &XorConstraint) {
    write!(out, "{} {c}", Frac(weight)).unwrap();
}

fn write_clause(out: &mut String, weight: &Rational, c: &OrClause) {
    write!(out, "{}", Frac(weight)).unwrap();
    for l in c.literals() {
        write!(out, " {l}").unwrap();
    }
}

pub fn emit_x2x(problem: &X2XProblem) -> String {
    let mut out = format!("p x2x {}\n", problem.var_count());
    if !problem.floor().is_zero() {
        writeln!(out, "f {}", Frac(problem.floor())).unwrap();
    }
    for (c, w) in problem.entries() {
        write_xor(&mut out, w, c);
        out.push('\n');
    }
    out
}

/// Stable identity of a problem, used to link proofs and compile reports.
pub fn fingerprint(problem: &X2XProblem) -> u64 {
    let mut h = DefaultHasher::new();
    emit_x2x(problem).hash(&mut h);
    h.finish()
}

fn parse_var(line: usize, token: &str, var_count: u32) -> Result<Var, TextError> {
    let id: u32 = token
        .parse()
        .map_err(|_| parse_err(line, format!("malformed variable '{token}'")))?;
    if id == 0 || id > var_count {
        return Err(parse_err(line, format!("variable {id} out of range")));
    }
    Ok(Var::from_id(id))
}

fn parse_weight(line: usize, token: &str) -> Result<Rational, TextError> {
    let w = parse_rational(token)
        .ok_or_else(|| parse_err(line, format!("malformed weight '{token}'")))?;
    if !w.is_positive() {
        return Err(parse_err(line, "weight must be positive"));
    }
    Ok(w)
}

/// Parses `<weight> [v1 [v2]] = <parity>`.
fn parse_xor_item(
    line: usize,
    text: &str,
    var_count: u32,
) -> Result<(Rational, XorConstraint), TextError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let eq = tokens
        .iter()
        .position(|&t| t == "=")
        .ok_or_else(|| parse_err(line, "missing '='"))?;
    if eq == 0 || eq + 2 != tokens.len() {
        return Err(parse_err(line, "expected '<weight> <vars> = <parity>'"));
    }
    let weight = parse_weight(line, tokens[0])?;
    let vars = tokens[1..eq]
        .iter()
        .map(|t| parse_var(line, t, var_count))
        .collect::<Result<Vec<_>, _>>()?;
    if vars.len() > 2 {
        return Err(parse_err(line, "at most two variables per constraint"));
    }
    if vars.len() == 2 && vars[0] == vars[1] {
        return Err(parse_err(line, format!("repeated variable {}", vars[0])));
    }
    let parity = match tokens[eq + 1] {
        "0" => false,
        "1" => true,
        other => {
            return Err(parse_err(
                line,
                format!("parity must be 0 or 1, got '{other}'"),
            ))
        }
    };
    let c = XorConstraint::new(vars, parity).map_err(|e| parse_err(line, e.to_string()))?;
    Ok((weight, c))
}

/// Parses `<weight> <lit> ...` (no terminating 0).
fn parse_clause_item(
    line: usize,
    text: &str,
    var_count: u32,
) -> Result<(Rational, OrClause), TextError> {
    let mut tokens = text.split_whitespace();
    let weight = parse_weight(
        line,
        tokens.next().ok_or_else(|| parse_err(line, "empty item"))?,
    )?;
    let mut lits = Vec::new();
    for t in tokens {
        let lit: i64 = t
            .parse()
            .map_err(|_| parse_err(line, format!("malformed literal '{t}'")))?;
        let l = Literal::from_dimacs(lit)
            .filter(|l| l.var.id() <= var_count)
            .ok_or_else(|| parse_err(line, format!("literal {lit} out of range")))?;
        lits.push(l);
    }
    let clause = OrClause::new(lits).map_err(|e| match e {
        ModelError::Tautology(var) => TextError::Tautology { line, var },
        other => parse_err(line, other.to_string()),
    })?;
    Ok((weight, clause))
}

pub fn parse_x2x(text: &str) -> Result<X2XProblem, TextError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = parse_header(&mut lines)?;
    if header.get(1) != Some(&"x2x") || header.len() != 3 {
        return Err(parse_err(hline, "expected 'p x2x <var_count>'"));
    }
    let var_count = parse_count(hline, header.get(2), "variable count")?;
    let mut problem = X2XProblem::new(var_count);
    let mut seen_floor = false;
    for (no, line) in lines {
        if is_skippable(line) {
            continue;
        }
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("f ") {
            if seen_floor {
                return Err(parse_err(no, "duplicate floor line"));
            }
            seen_floor = true;
            let f = parse_rational(rest.trim())
                .filter(|f| !f.is_negative())
                .ok_or_else(|| parse_err(no, "floor must be a non-negative rational"))?;
            problem
                .add_floor(f)
                .map_err(|e| parse_err(no, e.to_string()))?;
            continue;
        }
        let (w, c) = parse_xor_item(no, t, var_count)?;
        problem
            .add(w, c)
            .map_err(|e| parse_err(no, e.to_string()))?;
    }
    Ok(problem)
}

/// Weighted graph whose edges are the constraints `u ⊕ v = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CutGraph {
    pub node_count: u32,
    pub anchor_zero: Option<Var>,
    pub anchor_one: Option<Var>,
    pub edges: Vec<(Var, Var, Rational)>,
    /// Unsatisfiable weight carried over from the source problem.
    pub floor: Rational,
}

impl CutGraph {
    /// Edges with `u < v`, parallel edges merged, sorted.
    pub fn merged_edges(&self) -> Result<BTreeMap<(Var, Var), Rational>, TextError> {
        let mut merged: BTreeMap<(Var, Var), Rational> = BTreeMap::new();
        for (u, v, w) in &self.edges {
            if u == v {
                return Err(TextError::SelfLoop(*u));
            }
            let key = if u < v { (*u, *v) } else { (*v, *u) };
            *merged.entry(key).or_insert_with(Rational::zero) += w;
        }
        Ok(merged)
    }

    /// The graph read back as a Max2XOR problem.
    pub fn to_problem(&self) -> Result<X2XProblem, TextError> {
        let mut p = X2XProblem::new(self.node_count);
        p.add_floor(self.floor.clone())
            .map_err(|e| parse_err(0, e.to_string()))?;
        for ((u, v), w) in self.merged_edges()? {
            p.add(w, XorConstraint::binary(u, v, true))
                .map_err(|e| parse_err(0, e.to_string()))?;
        }
        Ok(p)
    }
}

pub fn emit_maxcut(graph: &CutGraph) -> Result<String, TextError> {
    let edges = graph.merged_edges()?;
    let mut out = format!("p cut {} {}\n", graph.node_count, edges.len());
    if let Some(a) = graph.anchor_zero {
        writeln!(out, "c anchor0 {a}").unwrap();
    }
    if let Some(a) = graph.anchor_one {
        writeln!(out, "c anchor1 {a}").unwrap();
    }
    if !graph.floor.is_zero() {
        writeln!(out, "c floor {}", Frac(&graph.floor)).unwrap();
    }
    for ((u, v), w) in edges {
        writeln!(out, "e {u} {v} {}", Frac(&w)).unwrap();
    }
    Ok(out)
}

pub fn parse_maxcut(text: &str) -> Result<CutGraph, TextError> {
    let mut graph = CutGraph::default();
    let mut declared_edges = None;
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["p", "cut", n, m] => {
                graph.node_count = n
                    .parse()
                    .map_err(|_| parse_err(no, "malformed node count"))?;
                declared_edges = Some(
                    m.parse::<usize>()
                        .map_err(|_| parse_err(no, "malformed edge count"))?,
                );
            }
            ["c", "anchor0", a] => graph.anchor_zero = Some(parse_var(no, a, graph.node_count)?),
            ["c", "anchor1", a] => graph.anchor_one = Some(parse_var(no, a, graph.node_count)?),
            ["c", "floor", f] => {
                graph.floor = parse_rational(f)
                    .filter(|f| !f.is_negative())
                    .ok_or_else(|| parse_err(no, "malformed floor"))?;
            }
            ["c", ..] => {}
            ["e", u, v, w] => {
                let u = parse_var(no, u, graph.node_count)?;
                let v = parse_var(no, v, graph.node_count)?;
                graph.edges.push((u, v, parse_weight(no, w)?));
            }
            _ => return Err(parse_err(no, "unrecognized line")),
        }
    }
    match declared_edges {
        None => Err(parse_err(0, "missing 'p cut' header")),
        Some(m) if m != graph.edges.len() => Err(parse_err(
            0,
            format!("header declares {m} edges, found {}", graph.edges.len()),
        )),
        Some(_) => Ok(graph),
    }
}

fn write_term(out: &mut String, weight: &Rational, term: &Term) {
    match term {
        Term::Xor(c) => write_xor(out, weight, c),
        Term::Clause(c) => write_clause(out, weight, c),
    }
}

fn emit_step(step: &ProofStep) -> String {
    let mut line = format!("s {} w {}", step.rule, Frac(&step.weight));
    if !step.offset.is_zero() {
        write!(line, " o {}", Frac(&step.offset)).unwrap();
    }
    if let Some(y) = step.fresh {
        write!(line, " y {y}").unwrap();
    }
    line.push_str(" | ");
    for (i, p) in step.premises.iter().enumerate() {
        if i > 0 {
            line.push_str("; ");
        }
        write_term(&mut line, &step.weight, p);
    }
    line.push_str(" | ");
    for (i, (c, m)) in step.conclusions.iter().enumerate() {
        if i > 0 {
            line.push_str("; ");
        }
        write_xor(&mut line, &(&step.weight * m), c);
    }
    line.push_str(" | ");
    for (i, (c, m)) in step.residues.iter().enumerate() {
        if i > 0 {
            line.push_str("; ");
        }
        write_clause(&mut line, &(&step.weight * m), c);
    }
    line.truncate(line.trim_end().len());
    line
}

pub fn emit_proof(proof: &Proof) -> String {
    let mut out = String::new();
    let mut round = 0;
    for (i, step) in proof.steps.iter().enumerate() {
        while proof.round_starts.get(round) == Some(&i) {
            round += 1;
            writeln!(out, "c round {round}").unwrap();
        }
        out.push_str(&emit_step(step));
        out.push('\n');
    }
    while round < proof.round_starts.len() {
        round += 1;
        writeln!(out, "c round {round}").unwrap();
    }
    if let Some(m) = &proof.claimed_bound {
        writeln!(out, "m {}", Frac(m)).unwrap();
    }
    out
}

fn parse_step(no: usize, line: &str) -> Result<ProofStep, TextError> {
    let sections: Vec<&str> = line.split('|').collect();
    if sections.len() != 4 {
        return Err(parse_err(no, "a step has four '|'-separated sections"));
    }
    let head: Vec<&str> = sections[0].split_whitespace().collect();
    if head.len() < 4 || head[0] != "s" || head[2] != "w" {
        return Err(parse_err(no, "expected 's <rule> w <weight>'"));
    }
    let rule: RuleId = head[1]
        .parse()
        .map_err(|_| parse_err(no, format!("unknown rule '{}'", head[1])))?;
    let weight = parse_weight(no, head[3])?;
    let mut offset = Rational::zero();
    let mut fresh = None;
    let mut rest = head[4..].iter();
    while let Some(&key) = rest.next() {
        let value = rest
            .next()
            .ok_or_else(|| parse_err(no, format!("'{key}' needs a value")))?;
        match key {
            "o" => {
                offset = parse_rational(value).ok_or_else(|| parse_err(no, "malformed offset"))?;
            }
            "y" => fresh = Some(parse_var(no, value, u32::MAX)?),
            _ => return Err(parse_err(no, format!("unknown step field '{key}'"))),
        }
    }

    let items = |s: &str| -> Vec<String> {
        s.split(';')
            .map(|i| i.trim().to_string())
            .filter(|i| !i.is_empty())
            .collect()
    };
    let mut premises = Vec::new();
    for item in items(sections[1]) {
        let (w, term) = if item.contains('=') {
            let (w, c) = parse_xor_item(no, &item, u32::MAX)?;
            (w, Term::Xor(c))
        } else {
            let (w, c) = parse_clause_item(no, &item, u32::MAX)?;
            (w, Term::Clause(c))
        };
        if w != weight {
            return Err(parse_err(no, "premise weight differs from the step weight"));
        }
        premises.push(term);
    }
    let mut conclusions = Vec::new();
    for item in items(sections[2]) {
        let (w, c) = parse_xor_item(no, &item, u32::MAX)?;
        conclusions.push((c, w / &weight));
    }
    let mut residues = Vec::new();
    for item in items(sections[3]) {
        let (w, c) = parse_clause_item(no, &item, u32::MAX)?;
        residues.push((c, w / &weight));
    }
    Ok(ProofStep {
        rule,
        weight,
        premises,
        conclusions,
        residues,
        offset,
        fresh,
    })
}

pub fn parse_proof(text: &str) -> Result<Proof, TextError> {
    let mut proof = Proof::default();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('c') {
            if c.split_whitespace().next() == Some("round") {
                proof.round_starts.push(proof.steps.len());
            }
            continue;
        }
        if let Some(m) = t.strip_prefix("m ") {
            if proof.claimed_bound.is_some() {
                return Err(parse_err(no, "duplicate bound line"));
            }
            proof.claimed_bound =
                Some(parse_rational(m.trim()).ok_or_else(|| parse_err(no, "malformed bound"))?);
            continue;
        }
        if proof.claimed_bound.is_some() {
            return Err(parse_err(no, "steps after the bound line"));
        }
        proof.steps.push(parse_step(no, t)?);
    }
    Ok(proof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, WeightedXor};
    use crate::rational::{half, int, ratio};
    use proptest::prelude::*;

    fn v(i: u32) -> Var {
        Var::from_id(i)
    }

    #[test]
    fn parses_plain_cnf() {
        let inst = parse_cnf("p cnf 2 1\n1 2 0\n").unwrap();
        assert_eq!(inst.var_count, 2);
        assert_eq!(inst.clauses.len(), 1);
        assert_eq!(inst.clauses[0].weight, int(1));
        assert_eq!(
            inst.clauses[0].clause,
            OrClause::from_dimacs(&[1, 2]).unwrap()
        );
    }

    #[test]
    fn parses_wcnf_weights() {
        let inst = parse_cnf("c weighted\np wcnf 3 2\n2 1 2 0\n3 -2 3 0\n").unwrap();
        assert_eq!(inst.clauses[0].weight, int(2));
        assert_eq!(inst.clauses[1].weight, int(3));
        assert_eq!(
            inst.clauses[1].clause,
            OrClause::from_dimacs(&[-2, 3]).unwrap()
        );
    }

    #[test]
    fn rejects_tautology_with_line() {
        assert_eq!(
            parse_cnf("p cnf 1 1\n1 -1 0\n"),
            Err(TextError::Tautology { line: 2, var: v(1) })
        );
    }

    #[test]
    fn rejects_hard_clauses() {
        assert!(matches!(
            parse_cnf("p wcnf 2 1 10\n10 1 2 0\n"),
            Err(TextError::Unsupported { line: 1, .. })
        ));
    }

    #[test]
    fn cnf_errors_carry_line_numbers() {
        assert!(matches!(
            parse_cnf("p cnf 2 2\n1 2 0\n"),
            Err(TextError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_cnf("p cnf 2 1\n1 x 0\n"),
            Err(TextError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_cnf("p cnf 2 1\n1 3 0\n"),
            Err(TextError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_cnf("p cnf 2 1\n1 2\n"),
            Err(TextError::Parse { .. })
        ));
        assert!(matches!(
            parse_cnf("1 2 0\n"),
            Err(TextError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn clause_may_span_lines() {
        let inst = parse_cnf("p cnf 3 1\n1\n2 3\n0\n").unwrap();
        assert_eq!(inst.clauses[0].clause.arity(), 3);
    }

    #[test]
    fn emits_x2x_with_unit_denominators() {
        let p = normalize([WeightedXor::new(
            half(),
            XorConstraint::binary(v(1), v(2), true),
        )])
        .unwrap();
        assert_eq!(emit_x2x(&p), "p x2x 2\n1/2 1 2 = 1\n");
    }

    #[test]
    fn x2x_floor_line_roundtrips() {
        let mut p = X2XProblem::new(3);
        p.add(int(1), XorConstraint::unit(v(1), false)).unwrap();
        p.add_floor(ratio(17, 2)).unwrap();
        let text = emit_x2x(&p);
        assert_eq!(text, "p x2x 3\nf 17/2\n1/1 1 = 0\n");
        assert_eq!(parse_x2x(&text).unwrap(), p);
    }

    #[test]
    fn x2x_parse_errors() {
        assert!(parse_x2x("p x2x 2\n1/1 1 = 2\n").is_err());
        assert!(parse_x2x("p x2x 2\n0/1 1 = 1\n").is_err());
        assert!(parse_x2x("p x2x 2\n-1/1 1 = 1\n").is_err());
        assert!(parse_x2x("p x2x 2\n1/1 1 1 = 1\n").is_err());
        assert!(parse_x2x("p x2x 2\n1/1 3 = 1\n").is_err());
        assert!(parse_x2x("p x2x 3\n1/1 1 2 3 = 1\n").is_err());
    }

    #[test]
    fn maxcut_single_edge() {
        let g = CutGraph {
            node_count: 2,
            edges: vec![(v(1), v(2), int(1))],
            ..CutGraph::default()
        };
        assert_eq!(emit_maxcut(&g).unwrap(), "p cut 2 1\ne 1 2 1/1\n");
    }

    #[test]
    fn maxcut_merges_parallel_edges() {
        let g = CutGraph {
            node_count: 2,
            edges: vec![(v(1), v(2), half()), (v(2), v(1), half())],
            ..CutGraph::default()
        };
        assert_eq!(emit_maxcut(&g).unwrap(), "p cut 2 1\ne 1 2 1/1\n");
    }

    #[test]
    fn maxcut_rejects_self_loop() {
        let g = CutGraph {
            node_count: 2,
            edges: vec![(v(2), v(2), half())],
            ..CutGraph::default()
        };
        assert_eq!(emit_maxcut(&g), Err(TextError::SelfLoop(v(2))));
    }

    #[test]
    fn maxcut_roundtrip_with_anchors() {
        let g = CutGraph {
            node_count: 4,
            anchor_zero: Some(v(3)),
            anchor_one: Some(v(4)),
            edges: vec![(v(1), v(3), int(1)), (v(3), v(4), ratio(3, 2))],
            floor: half(),
        };
        let text = emit_maxcut(&g).unwrap();
        assert_eq!(
            text,
            "p cut 4 2\nc anchor0 3\nc anchor1 4\nc floor 1/2\ne 1 3 1/1\ne 3 4 3/2\n"
        );
        let back = parse_maxcut(&text).unwrap();
        assert_eq!(emit_maxcut(&back).unwrap(), text);
    }

    #[test]
    fn contra_step_text() {
        let step = ProofStep {
            rule: RuleId::Contra,
            weight: int(1),
            premises: vec![
                Term::Xor(XorConstraint::unit(v(1), false)),
                Term::Xor(XorConstraint::unit(v(1), true)),
            ],
            conclusions: vec![(XorConstraint::empty(true), int(1))],
            residues: vec![],
            offset: Rational::zero(),
            fresh: None,
        };
        let proof = Proof {
            steps: vec![step],
            round_starts: vec![],
            claimed_bound: None,
        };
        let text = emit_proof(&proof);
        assert_eq!(text, "s contra w 1/1 | 1/1 1 = 0; 1/1 1 = 1 | 1/1 = 1 |\n");
        assert_eq!(parse_proof(&text).unwrap(), proof);
    }

    #[test]
    fn proof_parse_errors() {
        assert!(parse_proof("s bogus w 1/1 | | |\n").is_err());
        assert!(parse_proof("s contra w 0/1 | | |\n").is_err());
        assert!(parse_proof("s contra w 1/1 | 1/2 1 = 0 | |\n").is_err());
        assert!(parse_proof("s contra w 1/1 | |\n").is_err());
    }

    fn arb_problem() -> impl Strategy<Value = X2XProblem> {
        (1u32..=8).prop_flat_map(|n| {
            let entry = (
                1..=n,
                1..=n,
                any::<bool>(),
                any::<bool>(),
                1i64..=16,
                0u32..=3,
            );
            (Just(n), prop::collection::vec(entry, 0..20), 0i64..=6).prop_map(
                |(n, entries, floor)| {
                    let mut p = X2XProblem::new(n);
                    for (a, b, unary, parity, num, e) in entries {
                        let c = if unary {
                            XorConstraint::unit(Var::from_id(a), parity)
                        } else {
                            XorConstraint::binary(Var::from_id(a), Var::from_id(b), parity)
                        };
                        p.add(ratio(num, 1 << e), c).unwrap();
                    }
                    p.add_floor(ratio(floor, 4)).unwrap();
                    p
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn x2x_roundtrip(p in arb_problem()) {
            let text = emit_x2x(&p);
            let back = parse_x2x(&text).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(emit_x2x(&back), text);
        }
    }
}
