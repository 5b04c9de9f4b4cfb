//! Constraint translations with their (α, β) parameters, the MaxSAT → Max2XOR
//! compiler and the Max2XOR → MaxCUT exporter.
//!
//! A translation of a source constraint is an (α, β)-gadget when its total
//! weight is β and, for every source assignment, the best extension to the
//! auxiliary variables satisfies weight α if the source holds and α − 1
//! otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::model::{
    Constraint, Form, Literal, ModelError, OrClause, Var, WeightedClause, WeightedXor, X2XProblem,
    XorConstraint,
};
use crate::rational::{half, int, ratio, Rational};
use crate::textio::{fingerprint, CutGraph, WcnfInstance};

/// Largest arity accepted by the exponential full parity expansion.
pub const MAX_EXPANSION_ARITY: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("{op} does not accept clauses of arity {k}")]
    Arity { op: &'static str, k: usize },
    #[error("full parity expansion is limited to arity {max}, got {k}")]
    SizeGuard { k: usize, max: usize },
    #[error("tree shape error: {0}")]
    Shape(String),
    #[error("strategy {strategy} cannot translate clause {clause} of arity {k}")]
    Strategy {
        strategy: &'static str,
        clause: usize,
        k: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetParams {
    pub alpha: Rational,
    pub beta: Rational,
    /// Fresh variables per source constraint; unknown after composing with a
    /// gadget that itself introduces variables.
    pub aux_vars: Option<usize>,
}

impl GadgetParams {
    pub fn new(alpha: Rational, beta: Rational, aux_vars: usize) -> GadgetParams {
        GadgetParams {
            alpha,
            beta,
            aux_vars: Some(aux_vars),
        }
    }

    /// β − α, the per-unit-weight cost shift of the translation.
    pub fn gap(&self) -> Rational {
        &self.beta - &self.alpha
    }

    /// The identity translation.
    pub fn identity() -> GadgetParams {
        GadgetParams::new(int(1), int(1), 0)
    }

    pub fn binary_gadget() -> GadgetParams {
        GadgetParams::new(int(1), ratio(3, 2), 0)
    }

    /// MaxEkSAT → Max2XOR through the sequential or tree translation.
    pub fn parity_tree(k: usize) -> GadgetParams {
        let k1 = int(k as i64 - 1);
        GadgetParams::new(k1.clone(), k1 * ratio(3, 2), k.saturating_sub(2))
    }

    pub fn chain(k: usize) -> GadgetParams {
        let k2 = int(k as i64 - 2);
        GadgetParams::new(k2.clone(), k2, k.saturating_sub(3))
    }

    pub fn trevisan() -> GadgetParams {
        GadgetParams::new(ratio(7, 2), int(4), 1)
    }

    /// Parameters of a clause translation as used by the compiler.
    pub fn for_arity(k: usize) -> GadgetParams {
        match k {
            0 | 1 => GadgetParams::identity(),
            2 => GadgetParams::binary_gadget(),
            _ => GadgetParams::parity_tree(k),
        }
    }
}

/// Parameters of applying `g2` to every constraint produced by `g1`.
pub fn compose_params(g1: &GadgetParams, g2: &GadgetParams) -> GadgetParams {
    let alpha = &g1.beta * (&g2.alpha - int(1)) + &g1.alpha;
    let beta = &g1.beta * &g2.beta;
    let aux_vars = match g2.aux_vars {
        Some(0) => g1.aux_vars,
        _ => None,
    };
    GadgetParams {
        alpha,
        beta,
        aux_vars,
    }
}

/// Effect of cancelling opposite pairs of total weight `w` inside a
/// translation: each pair always satisfies exactly `w`.
pub fn cancel_params(g: &GadgetParams, w: &Rational) -> GadgetParams {
    GadgetParams {
        alpha: &g.alpha - w,
        beta: &g.beta - w * int(2),
        aux_vars: g.aux_vars,
    }
}

/// Hands out fresh variable ids in strictly increasing order.
#[derive(Debug, Clone)]
pub struct VarAllocator {
    next: u32,
}

impl VarAllocator {
    /// The first id handed out is `after + 1`.
    pub fn after(after: u32) -> VarAllocator {
        VarAllocator { next: after + 1 }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::from_id(self.next);
        self.next += 1;
        v
    }

    /// Largest id handed out so far (or the starting bound).
    pub fn high_water(&self) -> u32 {
        self.next - 1
    }
}

/// The anchor `b` of the recursive translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Var(Var),
    /// The constant 1, substituted directly.
    One,
}

impl From<Var> for Anchor {
    fn from(v: Var) -> Anchor {
        Anchor::Var(v)
    }
}

/// Parity over any number of distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParityConstraint {
    pub vars: Vec<Var>,
    pub parity: bool,
}

impl Constraint for ParityConstraint {
    fn form(&self) -> Form {
        Form::Parity {
            vars: self.vars.clone(),
            parity: self.parity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedParity {
    pub weight: Rational,
    pub constraint: ParityConstraint,
}

/// `l1 ∨ … ∨ lk` as the 2^k − 1 parities `⊕_{i∈S} x_i = 1`, S nonempty, each
/// of weight 1/2^(k−1). A negated literal toggles every parity it enters.
pub fn expand_full_parity(clause: &OrClause) -> Result<Vec<WeightedParity>, GadgetError> {
    let k = clause.arity();
    if k == 0 {
        return Err(GadgetError::Arity {
            op: "expand_full_parity",
            k,
        });
    }
    if k > MAX_EXPANSION_ARITY {
        return Err(GadgetError::SizeGuard {
            k,
            max: MAX_EXPANSION_ARITY,
        });
    }
    let weight = ratio(1, 1i64 << (k - 1));
    let lits = clause.literals();
    let mut out = Vec::with_capacity((1 << k) - 1);
    for subset in 1u32..(1 << k) {
        let mut vars = Vec::new();
        let mut parity = true;
        for (i, l) in lits.iter().enumerate() {
            if subset & (1 << i) != 0 {
                vars.push(l.var);
                parity ^= l.negated;
            }
        }
        out.push(WeightedParity {
            weight: weight.clone(),
            constraint: ParityConstraint { vars, parity },
        });
    }
    Ok(out)
}

/// The binary clause translation: a unit clause becomes one unit parity, a
/// binary clause three parities of weight w/2.
pub fn gadget_binary(
    weight: &Rational,
    clause: &OrClause,
) -> Result<Vec<WeightedXor>, GadgetError> {
    match clause.literals() {
        [l] => Ok(vec![WeightedXor::new(
            weight.clone(),
            XorConstraint::unit(l.var, !l.negated),
        )]),
        [a, b] => {
            let w = weight * half();
            Ok(vec![
                WeightedXor::new(w.clone(), XorConstraint::unit(a.var, !a.negated)),
                WeightedXor::new(w.clone(), XorConstraint::unit(b.var, !b.negated)),
                WeightedXor::new(
                    w,
                    XorConstraint::binary(a.var, b.var, !(a.negated ^ b.negated)),
                ),
            ])
        }
        lits => Err(GadgetError::Arity {
            op: "gadget_binary",
            k: lits.len(),
        }),
    }
}

fn clause_of(lits: impl IntoIterator<Item = Literal>) -> OrClause {
    OrClause::new(lits).expect("gadget clauses mention each variable once")
}

/// `l1 ∨ … ∨ lk` (k ≥ 4) as k − 2 ternary clauses of weight 1 chained
/// through k − 3 fresh variables.
pub fn chain_to_3sat(
    clause: &OrClause,
    alloc: &mut VarAllocator,
) -> Result<Vec<WeightedClause>, GadgetError> {
    let lits = clause.literals();
    let k = lits.len();
    if k < 4 {
        return Err(GadgetError::Arity {
            op: "chain_to_3sat",
            k,
        });
    }
    let b: Vec<Var> = (0..k - 3).map(|_| alloc.fresh()).collect();
    let mut out = Vec::with_capacity(k - 2);
    out.push(clause_of([lits[0], lits[1], Literal::pos(b[0])]));
    for i in 0..k - 4 {
        out.push(clause_of([
            Literal::neg(b[i]),
            lits[i + 2],
            Literal::pos(b[i + 1]),
        ]));
    }
    out.push(clause_of([
        Literal::neg(b[k - 4]),
        lits[k - 2],
        lits[k - 1],
    ]));
    Ok(out
        .into_iter()
        .map(|c| WeightedClause::new(int(1), c))
        .collect())
}

/// The seven-clause translation of a ternary clause into binary clauses,
/// with one fresh variable.
pub fn trevisan_3to2(
    clause: &OrClause,
    alloc: &mut VarAllocator,
) -> Result<Vec<WeightedClause>, GadgetError> {
    let [l1, l2, l3] = clause.literals() else {
        return Err(GadgetError::Arity {
            op: "trevisan_3to2",
            k: clause.arity(),
        });
    };
    let (l1, l2, l3) = (*l1, *l2, *l3);
    let b = Literal::pos(alloc.fresh());
    let h = half();
    Ok(vec![
        WeightedClause::new(h.clone(), clause_of([l1, l3])),
        WeightedClause::new(h.clone(), clause_of([!l1, !l3])),
        WeightedClause::new(h.clone(), clause_of([l1, !b])),
        WeightedClause::new(h.clone(), clause_of([!l1, b])),
        WeightedClause::new(h.clone(), clause_of([l3, !b])),
        WeightedClause::new(h, clause_of([!l3, b])),
        WeightedClause::new(int(1), clause_of([l2, b])),
    ])
}

/// Binary tree over clause positions `1..=k`, leaves in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeShape {
    Leaf(usize),
    Node(Box<TreeShape>, Box<TreeShape>),
}

impl TreeShape {
    pub fn node(l: TreeShape, r: TreeShape) -> TreeShape {
        TreeShape::Node(Box::new(l), Box::new(r))
    }

    fn first_leaf(&self) -> usize {
        match self {
            TreeShape::Leaf(i) => *i,
            TreeShape::Node(l, _) => l.first_leaf(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeShape::Leaf(_) => 1,
            TreeShape::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            TreeShape::Leaf(i) => out.push(*i),
            TreeShape::Node(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }

    /// Checks that the leaves read `1..=k` left to right.
    pub fn validate(&self, k: usize) -> Result<(), GadgetError> {
        let mut leaves = Vec::new();
        self.leaves(&mut leaves);
        if leaves != (1..=k).collect::<Vec<_>>() {
            return Err(GadgetError::Shape(format!(
                "shape {self} does not have leaves 1..{k} in order"
            )));
        }
        Ok(())
    }

    fn span(lo: usize, hi: usize, split: &mut impl FnMut(usize, usize) -> usize) -> TreeShape {
        if lo == hi {
            return TreeShape::Leaf(lo);
        }
        let r = split(lo, hi);
        TreeShape::node(
            TreeShape::span(lo, r, split),
            TreeShape::span(r + 1, hi, split),
        )
    }

    /// `(((1 2) 3) … k)`, the sequential translation.
    pub fn left_comb(k: usize) -> TreeShape {
        TreeShape::span(1, k, &mut |_, hi| hi - 1)
    }

    pub fn balanced(k: usize) -> TreeShape {
        TreeShape::span(1, k, &mut |lo, hi| lo + (hi - lo) / 2)
    }

    /// Uniformly chosen split point at every node.
    pub fn random(k: usize, rng: &mut impl Rng) -> TreeShape {
        TreeShape::span(1, k, &mut |lo, hi| rng.gen_range(lo..hi))
    }

    /// Every binary tree with leaves `lo..=hi`.
    fn all_spans(lo: usize, hi: usize) -> Vec<TreeShape> {
        if lo == hi {
            return vec![TreeShape::Leaf(lo)];
        }
        let mut out = Vec::new();
        for r in lo..hi {
            for l in TreeShape::all_spans(lo, r) {
                for rt in TreeShape::all_spans(r + 1, hi) {
                    out.push(TreeShape::node(l.clone(), rt));
                }
            }
        }
        out
    }

    /// All Catalan(k − 1) shapes with k leaves.
    pub fn all(k: usize) -> Vec<TreeShape> {
        if k == 0 {
            return Vec::new();
        }
        TreeShape::all_spans(1, k)
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeShape::Leaf(i) => write!(f, "{i}"),
            TreeShape::Node(l, r) => write!(f, "({l} {r})"),
        }
    }
}

impl FromStr for TreeShape {
    type Err = GadgetError;

    /// Nested parentheses over leaf positions, e.g. `((1 2)(3 (4 5)))`.
    fn from_str(s: &str) -> Result<TreeShape, GadgetError> {
        let spaced = s.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let shape = parse_shape(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(GadgetError::Shape(format!("trailing input in '{s}'")));
        }
        Ok(shape)
    }
}

fn parse_shape(tokens: &[&str], pos: &mut usize) -> Result<TreeShape, GadgetError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| GadgetError::Shape("unexpected end of shape".into()))?;
    *pos += 1;
    if *tok == "(" {
        let mut children = Vec::new();
        while tokens.get(*pos) != Some(&")") {
            if *pos >= tokens.len() {
                return Err(GadgetError::Shape("unbalanced parentheses".into()));
            }
            children.push(parse_shape(tokens, pos)?);
        }
        *pos += 1;
        let [l, r]: [TreeShape; 2] = children.try_into().map_err(|c: Vec<TreeShape>| {
            GadgetError::Shape(format!("internal node with {} children", c.len()))
        })?;
        return Ok(TreeShape::node(l, r));
    }
    tok.parse::<usize>()
        .ok()
        .filter(|&i| i >= 1)
        .map(TreeShape::Leaf)
        .ok_or_else(|| GadgetError::Shape(format!("bad leaf '{tok}'")))
}

/// Endpoint of a triangle edge before literal polarity is applied.
#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf(usize),
    Var(Var),
    One,
}

type FlatNode = (Option<(usize, usize)>, usize, usize);

/// Arena copy of a shape: `(children, leaf position, height)` per node.
struct FlatTree {
    nodes: Vec<FlatNode>,
}

impl FlatTree {
    fn new(shape: &TreeShape) -> (FlatTree, usize) {
        let mut flat = FlatTree { nodes: Vec::new() };
        let root = flat.push(shape);
        (flat, root)
    }

    fn push(&mut self, t: &TreeShape) -> usize {
        let entry = match t {
            TreeShape::Leaf(i) => (None, *i, 0),
            TreeShape::Node(l, r) => {
                let (l, r) = (self.push(l), self.push(r));
                let height = 1 + self.nodes[l].2.max(self.nodes[r].2);
                (Some((l, r)), t.first_leaf(), height)
            }
        };
        self.nodes.push(entry);
        self.nodes.len() - 1
    }
}

fn build_triangles(shape: &TreeShape, anchor: Anchor, alloc: &mut VarAllocator) -> Vec<[Node; 2]> {
    let (flat, root) = FlatTree::new(shape);
    // internal non-root nodes get fresh ids ordered by height, then left to right
    let mut internal: Vec<usize> = (0..flat.nodes.len())
        .filter(|&i| i != root && flat.nodes[i].0.is_some())
        .collect();
    internal.sort_by_key(|&i| (flat.nodes[i].2, flat.nodes[i].1));
    let mut node = vec![Node::One; flat.nodes.len()];
    for (i, entry) in flat.nodes.iter().enumerate() {
        if entry.0.is_none() {
            node[i] = Node::Leaf(entry.1);
        }
    }
    for &i in &internal {
        node[i] = Node::Var(alloc.fresh());
    }
    node[root] = match anchor {
        Anchor::Var(v) => Node::Var(v),
        Anchor::One => Node::One,
    };

    // triangles follow the fresh-id order, root last
    internal.push(root);
    let mut edges = Vec::with_capacity(3 * internal.len());
    for i in internal {
        if let Some((l, r)) = flat.nodes[i].0 {
            let (l, r, b) = (node[l], node[r], node[i]);
            edges.push([l, r]);
            edges.push([l, b]);
            edges.push([r, b]);
        }
    }
    edges
}

/// Materializes triangles `{L⊕R=1, L⊕b=0, R⊕b=0}` over the clause literals.
fn triangles_to_xors(clause: &OrClause, edges: &[[Node; 2]]) -> Vec<WeightedXor> {
    let lits = clause.literals();
    edges
        .chunks(3)
        .flat_map(|tri| {
            tri.iter().enumerate().map(|(i, pair)| {
                let mut parity = i == 0;
                let mut vars = Vec::with_capacity(2);
                for n in pair {
                    match *n {
                        Node::Leaf(j) => {
                            let l = lits[j - 1];
                            parity ^= l.negated;
                            vars.push(l.var);
                        }
                        Node::Var(v) => vars.push(v),
                        Node::One => parity ^= true,
                    }
                }
                let c = XorConstraint::new(vars, parity).expect("at most two variables");
                WeightedXor::new(half(), c)
            })
        })
        .collect()
}

/// Tree translation of a clause (k ≥ 2) rooted at `anchor`: 3(k−1) parities
/// of weight ½ and k − 2 fresh variables.
pub fn t_parallel(
    clause: &OrClause,
    shape: &TreeShape,
    anchor: Anchor,
    alloc: &mut VarAllocator,
) -> Result<Vec<WeightedXor>, GadgetError> {
    let k = clause.arity();
    if k < 2 {
        return Err(GadgetError::Arity {
            op: "t_parallel",
            k,
        });
    }
    shape.validate(k)?;
    let edges = build_triangles(shape, anchor, alloc);
    Ok(triangles_to_xors(clause, &edges))
}

/// Sequential translation: the tree translation over the left comb, so the
/// fresh variable `b_i` anchors the prefix `x1 ∨ … ∨ x_{i+1}`.
pub fn t0_sequential(
    clause: &OrClause,
    anchor: Anchor,
    alloc: &mut VarAllocator,
) -> Result<Vec<WeightedXor>, GadgetError> {
    let k = clause.arity();
    if k < 2 {
        return Err(GadgetError::Arity {
            op: "t0_sequential",
            k,
        });
    }
    t_parallel(clause, &TreeShape::left_comb(k), anchor, alloc)
}

/// Trevisan's translation followed by the binary one, normalized per clause:
/// the (2, 3) ternary gadget.
pub fn ternary_gadget(
    clause: &OrClause,
    alloc: &mut VarAllocator,
) -> Result<X2XProblem, GadgetError> {
    let mut p = X2XProblem::new(0);
    for wc in trevisan_3to2(clause, alloc)? {
        for x in gadget_binary(&wc.weight, &wc.clause)? {
            p.add(x.weight, x.constraint)?;
        }
    }
    Ok(p)
}

/// Built-in tree used for a clause without an explicit shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuiltinShape {
    LeftComb,
    #[default]
    Balanced,
}

impl BuiltinShape {
    pub fn shape(self, k: usize) -> TreeShape {
        match self {
            BuiltinShape::LeftComb => TreeShape::left_comb(k),
            BuiltinShape::Balanced => TreeShape::balanced(k),
        }
    }
}

/// Tree shapes keyed by 1-based clause id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShapeSet {
    pub per_clause: BTreeMap<usize, ShapeChoice>,
    pub default: BuiltinShape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeChoice {
    Explicit(TreeShape),
    Builtin(BuiltinShape),
}

impl ShapeSet {
    /// Lines are `<clause-id> <shape>` or a bare `<shape>` (taking the next
    /// clause id). A shape is nested parentheses or `comb` / `balanced`.
    pub fn parse(text: &str) -> Result<ShapeSet, GadgetError> {
        let mut set = ShapeSet::default();
        let mut ordinal = 0;
        for line in text.lines() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') && !t.starts_with("comb") {
                continue;
            }
            ordinal += 1;
            let (id, rest) = match t.split_once(char::is_whitespace) {
                Some((id, rest)) if !id.starts_with('(') => match id.parse::<usize>() {
                    Ok(id) if id >= 1 => (id, rest.trim()),
                    _ => return Err(GadgetError::Shape(format!("bad clause id in '{t}'"))),
                },
                _ => (ordinal, t),
            };
            let choice = match rest {
                "comb" => ShapeChoice::Builtin(BuiltinShape::LeftComb),
                "balanced" => ShapeChoice::Builtin(BuiltinShape::Balanced),
                s => ShapeChoice::Explicit(s.parse()?),
            };
            set.per_clause.insert(id, choice);
            ordinal = id;
        }
        Ok(set)
    }

    fn shape_for(&self, clause_id: usize, k: usize) -> Result<TreeShape, GadgetError> {
        match self.per_clause.get(&clause_id) {
            Some(ShapeChoice::Explicit(s)) => {
                s.validate(k)?;
                Ok(s.clone())
            }
            Some(ShapeChoice::Builtin(b)) => Ok(b.shape(k)),
            None => Ok(self.default.shape(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Tree(ShapeSet),
    /// Only for instances whose clauses all have arity ≤ 2.
    FullExpansion2Sat,
}

impl Strategy {
    fn name(&self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            Strategy::Tree(_) => "tree",
            Strategy::FullExpansion2Sat => "full-expansion-2sat",
        }
    }
}

/// Translates one weighted clause of arity ≥ 1 into Max2XOR with the anchor
/// fixed to 1. `clause_id` is 1-based and only used to pick a tree shape.
pub fn translate_clause(
    weight: &Rational,
    clause: &OrClause,
    clause_id: usize,
    strategy: &Strategy,
    alloc: &mut VarAllocator,
) -> Result<Vec<WeightedXor>, GadgetError> {
    let k = clause.arity();
    let unit = match (strategy, k) {
        (_, 0) => {
            return Err(GadgetError::Arity {
                op: "translate_clause",
                k,
            })
        }
        (Strategy::FullExpansion2Sat, 1 | 2) => {
            let mut out = Vec::new();
            for p in expand_full_parity(clause)? {
                let c = XorConstraint::new(p.constraint.vars, p.constraint.parity)?;
                out.push(WeightedXor::new(p.weight, c));
            }
            out
        }
        (Strategy::FullExpansion2Sat, _) => {
            return Err(GadgetError::Strategy {
                strategy: strategy.name(),
                clause: clause_id,
                k,
            })
        }
        (_, 1 | 2) => gadget_binary(&int(1), clause)?,
        (Strategy::Sequential, _) => t0_sequential(clause, Anchor::One, alloc)?,
        (Strategy::Tree(shapes), _) => {
            let shape = shapes.shape_for(clause_id, k)?;
            t_parallel(clause, &shape, Anchor::One, alloc)?
        }
    };
    Ok(unit
        .into_iter()
        .map(|x| WeightedXor::new(x.weight * weight, x.constraint))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileReport {
    pub problem: X2XProblem,
    /// Σ over clauses of (β_k − α_k)·w.
    pub shift: Rational,
    /// Fresh variable → 1-based id of the clause that introduced it.
    pub aux_map: BTreeMap<Var, usize>,
    pub params_per_arity: BTreeMap<usize, GadgetParams>,
    pub fingerprint: u64,
}

impl CompileReport {
    /// Cost of the compiled problem at or above which the source is
    /// unsatisfiable (for unit-weight input).
    pub fn threshold(&self) -> Rational {
        &self.shift + int(1)
    }
}

pub fn compile_maxsat(
    instance: &WcnfInstance,
    strategy: &Strategy,
) -> Result<CompileReport, GadgetError> {
    let max_id = instance
        .clauses
        .iter()
        .flat_map(|wc| wc.clause.vars())
        .map(Var::id)
        .max()
        .unwrap_or(0);
    let base = instance.var_count.max(max_id);
    let mut alloc = VarAllocator::after(base);
    let mut problem = X2XProblem::new(base);
    let mut shift = Rational::zero();
    let mut aux_map = BTreeMap::new();
    let mut params_per_arity = BTreeMap::new();

    for (i, wc) in instance.clauses.iter().enumerate() {
        let id = i + 1;
        let k = wc.clause.arity();
        let params = GadgetParams::for_arity(k);
        if k == 0 {
            // the empty clause is falsified by every assignment
            problem.add_floor(wc.weight.clone())?;
            params_per_arity.entry(k).or_insert(params);
            continue;
        }
        let before = alloc.high_water();
        for x in translate_clause(&wc.weight, &wc.clause, id, strategy, &mut alloc)? {
            problem.add(x.weight, x.constraint)?;
        }
        for v in before + 1..=alloc.high_water() {
            aux_map.insert(Var::from_id(v), id);
        }
        shift += &wc.weight * params.gap();
        params_per_arity.entry(k).or_insert(params);
    }
    problem.reserve_vars(alloc.high_water());
    let fingerprint = fingerprint(&problem);
    Ok(CompileReport {
        problem,
        shift,
        aux_map,
        params_per_arity,
        fingerprint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutVariant {
    #[default]
    Single,
    Double,
}

/// Max2XOR → MaxCUT. Every constraint becomes one or two `u ⊕ v = 1` edges of
/// the same weight; unit constraints are tied to the anchor(s).
pub fn to_maxcut(problem: &X2XProblem, variant: CutVariant) -> CutGraph {
    let mut alloc = VarAllocator::after(problem.var_count());
    let h0 = alloc.fresh();
    let h1 = match variant {
        CutVariant::Single => None,
        CutVariant::Double => Some(alloc.fresh()),
    };
    let mut edges = Vec::new();
    let mut zero_weight = Rational::zero();
    let mut one_weight = Rational::zero();
    for (c, w) in problem.entries() {
        match (c.vars(), c.parity(), h1) {
            ([x], true, _) => {
                one_weight += w;
                edges.push((*x, h0, w.clone()));
            }
            ([x], false, None) => {
                zero_weight += w;
                let a = alloc.fresh();
                edges.push((*x, a, w.clone()));
                edges.push((a, h0, w.clone()));
            }
            ([x], false, Some(h1)) => {
                zero_weight += w;
                edges.push((*x, h1, w.clone()));
            }
            ([x, y], true, _) => edges.push((*x, *y, w.clone())),
            ([x, y], false, _) => {
                let b = alloc.fresh();
                edges.push((*x, b, w.clone()));
                edges.push((b, *y, w.clone()));
            }
            _ => unreachable!("normalized problems store only 1- and 2-variable entries"),
        }
    }
    if let Some(h1) = h1 {
        let w = crate::rational::min(&zero_weight, &one_weight);
        if !w.is_zero() {
            edges.push((h0, h1, w));
        }
    }
    CutGraph {
        node_count: alloc.high_water(),
        anchor_zero: Some(h0),
        anchor_one: h1,
        edges,
        floor: problem.floor().clone(),
    }
}
