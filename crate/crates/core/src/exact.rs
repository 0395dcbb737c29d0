//! Exact Shapley values.
//!
//! Every value is computed as `(1/n) Σ_m (E_with[m] − E_without[m])`, where
//! the expectations range over uniformly random size-`m` subsets of the
//! other facts. The block-tree programs keep integer subset counts per size
//! and divide by `C(N, m)` only at the end.
//!
//! Table semantics per vertex `v` with `n = |D[v]|`, for size `j`:
//! * drastic: number of size-`j` subsets that are consistent,
//! * cost: number of size-`j` subsets whose cardinality-repair cost is `t`,
//! * repairs: sum over size-`j` subsets of their number of repairs.
//!
//! The "with" variants count `E ∪ {f}` in place of `E`.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::block_tree::{build_tree, BlockTree, Node, NodeKind, Relation, ROOT};
use crate::combinatorics::{from_int, ratio, Binomials, Rational};
use crate::conflict::ConflictGraphs;
use crate::error::{Error, Result};
use crate::fd::{classify, TractabilityClass};
use crate::measures::MeasureKind;
use crate::relational::{Database, Fact, FactId, FdSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    WithoutFact,
    WithFact,
}

/// Per-size counts at one vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeTable {
    pub variant: Variant,
    pub counts: Vec<BigUint>,
}

/// Per-(size, cost) counts at one vertex; row `j` has entries `t = 0..=j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostTable {
    pub variant: Variant,
    pub counts: Vec<Vec<BigUint>>,
}

impl CostTable {
    /// Total number of size-`j` subsets over all costs.
    pub fn row_sum(&self, j: usize) -> BigUint {
        self.counts[j].iter().sum()
    }

    /// Sum of costs over all size-`j` subsets.
    pub fn cost_sum(&self, j: usize) -> BigUint {
        self.counts[j].iter().enumerate().map(|(t, c)| c * BigUint::from(t)).sum()
    }
}

fn conv(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn binomial_row(b: &Binomials, n: usize) -> Vec<BigUint> {
    (0..=n).map(|j| b.get(n, j)).collect()
}

fn bottom_up<T>(tree: &BlockTree, mut compute: impl FnMut(&Node, Vec<&T>) -> T) -> Vec<T> {
    let mut out: Vec<Option<T>> = (0..tree.nodes().len()).map(|_| None).collect();
    for id in tree.post_order() {
        let node = tree.node(id);
        let value = {
            let kids: Vec<&T> = node.children.iter().map(|&c| out[c].as_ref().expect("post-order")).collect();
            compute(node, kids)
        };
        out[id] = Some(value);
    }
    out.into_iter().map(|v| v.expect("every node visited")).collect()
}

/// Walks from the root along vertices matching `f`. `conflict` handles
/// vertices whose facts all conflict with `f`; `matched` combines the
/// children of an internal matching vertex given their without tables,
/// with tables and relations to `f`.
type MatchedMerge<'a, T> = dyn Fn(&Node, usize, &[&T], &[T], &[Relation]) -> T + 'a;

#[allow(clippy::too_many_arguments)]
fn top_down<T: Clone>(
    db: &Database,
    tree: &BlockTree,
    f: &Fact,
    without: &[T],
    id: usize,
    rel: Relation,
    conflict: &dyn Fn(&Node, &T) -> T,
    matched: &MatchedMerge<T>,
) -> T {
    let node = tree.node(id);
    match rel {
        Relation::Conflicts => conflict(node, &without[id]),
        Relation::Neither => without[id].clone(),
        Relation::Matches if node.is_leaf() => without[id].clone(),
        Relation::Matches => {
            let rels: Vec<Relation> = node.children.iter().map(|&c| tree.relate(db, f, c)).collect();
            let with: Vec<T> = node
                .children
                .iter()
                .zip(&rels)
                .map(|(&c, &r)| top_down(db, tree, f, without, c, r, conflict, matched))
                .collect();
            let kids: Vec<&T> = node.children.iter().map(|&c| &without[c]).collect();
            matched(node, id, &kids, &with, &rels)
        }
    }
}

// ---------------------------------------------------------------- drastic

fn consistent_merge(b: &Binomials, node: &Node, kids: &[&Vec<BigUint>]) -> Vec<BigUint> {
    let n = node.len();
    if kids.is_empty() {
        return binomial_row(b, n);
    }
    match node.kind {
        // Facts of different subblocks conflict, so a non-empty consistent
        // subset lies inside one subblock.
        NodeKind::Block => {
            let mut out = vec![BigUint::zero(); n + 1];
            out[0] = BigUint::one();
            for k in kids {
                for (j, c) in k.iter().enumerate().skip(1) {
                    out[j] += c;
                }
            }
            out
        }
        // Facts of different blocks never conflict.
        NodeKind::Root | NodeKind::Subblock => kids.iter().fold(vec![BigUint::one()], |acc, k| conv(&acc, k)),
    }
}

fn consistent_conflict(node: &Node) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); node.len() + 1];
    out[0] = BigUint::one();
    out
}

fn consistent_tables(b: &Binomials, tree: &BlockTree) -> Vec<Vec<BigUint>> {
    bottom_up(tree, |node, kids| consistent_merge(b, node, &kids))
}

fn consistent_with(b: &Binomials, db: &Database, tree: &BlockTree, f: &Fact, without: &[Vec<BigUint>]) -> Vec<BigUint> {
    top_down(
        db,
        tree,
        f,
        without,
        ROOT,
        Relation::Matches,
        &|node, _| consistent_conflict(node),
        &|node, _, _, with, _| consistent_merge(b, node, &with.iter().collect::<Vec<_>>()),
    )
}

fn to_violating(b: &Binomials, consistent: &[BigUint], variant: Variant) -> SizeTable {
    let n = consistent.len() - 1;
    let counts = consistent.iter().enumerate().map(|(j, c)| b.get(n, j) - c).collect();
    SizeTable { variant, counts }
}

/// Violating-subset counts at every vertex (without `f`).
pub fn drastic_vertex_tables(tree: &BlockTree) -> Vec<SizeTable> {
    let b = Binomials::new(tree.root().len());
    consistent_tables(&b, tree)
        .iter()
        .map(|c| to_violating(&b, c, Variant::WithoutFact))
        .collect()
}

/// Violating-subset counts at the root: entry `j` is the number of size-`j`
/// subsets `E` of the tree's facts with `E` (or `E ∪ {f}`) inconsistent.
pub fn drastic_tables(db: &Database, tree: &BlockTree, f: Option<&Fact>) -> SizeTable {
    let b = Binomials::new(tree.root().len());
    let without = consistent_tables(&b, tree);
    match f {
        None => to_violating(&b, &without[ROOT], Variant::WithoutFact),
        Some(f) => to_violating(&b, &consistent_with(&b, db, tree, f, &without), Variant::WithFact),
    }
}

// ------------------------------------------------------------------- cost

type Cost = Vec<Vec<BigUint>>;

fn empty_cost(n: usize) -> Cost {
    (0..=n).map(|j| vec![BigUint::zero(); j + 1]).collect()
}

fn cost_merge(b: &Binomials, node: &Node, kids: &[&Cost]) -> Cost {
    let n = node.len();
    if kids.is_empty() {
        let mut out = empty_cost(n);
        for (j, row) in out.iter_mut().enumerate() {
            row[0] = b.get(n, j);
        }
        return out;
    }
    let mut acc: Cost = vec![vec![BigUint::one()]];
    for kid in kids {
        let size = acc.len() - 1 + kid.len() - 1;
        let mut out = empty_cost(size);
        for (j1, row1) in kid.iter().enumerate() {
            for (w1, c1) in row1.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                for (j2, row2) in acc.iter().enumerate() {
                    for (w2, c2) in row2.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                        let t = match node.kind {
                            // Keep the better side; the other side is deleted.
                            NodeKind::Block => (j2 + w1).min(j1 + w2),
                            NodeKind::Root | NodeKind::Subblock => w1 + w2,
                        };
                        out[j1 + j2][t] += c1 * c2;
                    }
                }
            }
        }
        acc = out;
    }
    acc
}

fn cost_conflict(node: &Node, without: &Cost) -> Cost {
    let mut out = empty_cost(node.len());
    out[0][0] = BigUint::one();
    for j in 1..without.len() {
        for t in 0..j {
            out[j][t + 1] = without[j][t].clone();
        }
        debug_assert!(without[j][j].is_zero());
    }
    out
}

fn cost_tables(b: &Binomials, tree: &BlockTree) -> Vec<Cost> {
    bottom_up(tree, |node, kids| cost_merge(b, node, &kids))
}

fn cost_with(b: &Binomials, db: &Database, tree: &BlockTree, f: &Fact, without: &[Cost]) -> Cost {
    top_down(
        db,
        tree,
        f,
        without,
        ROOT,
        Relation::Matches,
        &cost_conflict,
        &|node, _, _, with, _| cost_merge(b, node, &with.iter().collect::<Vec<_>>()),
    )
}

/// Cost tables at every vertex (without `f`).
pub fn r_vertex_tables(tree: &BlockTree) -> Vec<CostTable> {
    let b = Binomials::new(tree.root().len());
    cost_tables(&b, tree)
        .into_iter()
        .map(|counts| CostTable { variant: Variant::WithoutFact, counts })
        .collect()
}

/// Cost table at the root: entry `[j][t]` counts size-`j` subsets `E` whose
/// cardinality repair (of `E`, or of `E ∪ {f}`) deletes `t` facts.
pub fn r_tables(db: &Database, tree: &BlockTree, f: Option<&Fact>) -> CostTable {
    let b = Binomials::new(tree.root().len());
    let mut without = cost_tables(&b, tree);
    match f {
        None => CostTable { variant: Variant::WithoutFact, counts: without.swap_remove(ROOT) },
        Some(f) => CostTable { variant: Variant::WithFact, counts: cost_with(&b, db, tree, f, &without) },
    }
}

// ---------------------------------------------------------------- repairs

// Repairs of a block: the conflict graph joins its subblocks completely,
// so a repair of a non-empty subset is a repair of one non-empty subblock
// part. Summed over size-j subsets this weighs each child's size-j1 sum by
// the C(n - n_c, j - j1) ways to pick the rest.
fn repair_block_term(b: &Binomials, n: usize, out: &mut [BigUint], child: &[BigUint], include_empty: bool) {
    let nc = child.len() - 1;
    let start = usize::from(!include_empty);
    for (j1, s) in child.iter().enumerate().skip(start) {
        if s.is_zero() {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate().take(n - nc + j1 + 1).skip(j1) {
            *slot += s * b.get(n - nc, j - j1);
        }
    }
}

fn repair_merge(b: &Binomials, node: &Node, kids: &[&Vec<BigUint>]) -> Vec<BigUint> {
    let n = node.len();
    if kids.is_empty() {
        return binomial_row(b, n);
    }
    match node.kind {
        NodeKind::Block => {
            let mut out = vec![BigUint::zero(); n + 1];
            out[0] = BigUint::one();
            for k in kids {
                repair_block_term(b, n, &mut out, k, false);
            }
            out
        }
        NodeKind::Root | NodeKind::Subblock => kids.iter().fold(vec![BigUint::one()], |acc, k| conv(&acc, k)),
    }
}

// With f adjacent to every fact, each non-empty subset gains the repair {f}.
fn repair_conflict(b: &Binomials, node: &Node, without: &[BigUint]) -> Vec<BigUint> {
    let n = node.len();
    let mut out = without.to_vec();
    for (j, s) in out.iter_mut().enumerate().skip(1) {
        *s += b.get(n, j);
    }
    out
}

fn repair_tables(b: &Binomials, tree: &BlockTree) -> Vec<Vec<BigUint>> {
    bottom_up(tree, |node, kids| repair_merge(b, node, &kids))
}

fn repair_with(b: &Binomials, db: &Database, tree: &BlockTree, f: &Fact, without: &[Vec<BigUint>]) -> Vec<BigUint> {
    top_down(
        db,
        tree,
        f,
        without,
        ROOT,
        Relation::Matches,
        &|node, s| repair_conflict(b, node, s),
        &|node, id, kids, with, rels| match node.kind {
            NodeKind::Block => match rels.iter().position(|&r| r == Relation::Matches) {
                // f joins the matching subblock, whose part is never empty.
                Some(k) => {
                    let n = node.len();
                    let mut out = vec![BigUint::zero(); n + 1];
                    repair_block_term(b, n, &mut out, &with[k], true);
                    for (c, kid) in kids.iter().enumerate() {
                        if c != k {
                            repair_block_term(b, n, &mut out, kid, false);
                        }
                    }
                    out
                }
                // f forms a subblock of its own.
                None => repair_conflict(b, node, &without[id]),
            },
            NodeKind::Root | NodeKind::Subblock => {
                with.iter().fold(vec![BigUint::one()], |acc, k| conv(&acc, k))
            }
        },
    )
}

/// Repair-sum tables at every vertex (without `f`).
pub fn mc_vertex_tables(tree: &BlockTree) -> Vec<SizeTable> {
    let b = Binomials::new(tree.root().len());
    repair_tables(&b, tree)
        .into_iter()
        .map(|counts| SizeTable { variant: Variant::WithoutFact, counts })
        .collect()
}

/// Repair sums at the root: entry `j` is the total number of repairs of
/// `E` (or `E ∪ {f}`) over size-`j` subsets `E`. Dividing by `C(n, j)`
/// gives the expected repair count.
pub fn mc_tables(db: &Database, tree: &BlockTree, f: Option<&Fact>) -> SizeTable {
    let b = Binomials::new(tree.root().len());
    let without = repair_tables(&b, tree);
    match f {
        None => SizeTable { variant: Variant::WithoutFact, counts: without[ROOT].clone() },
        Some(f) => SizeTable { variant: Variant::WithFact, counts: repair_with(&b, db, tree, f, &without) },
    }
}

// ------------------------------------------------------------ combination

/// `(1/n) Σ_m (with[m] − without[m])` for the per-size expectations of
/// `I(E ∪ {f})` and `I(E)`, `m = 0..n−1`.
pub fn shapley_eq1_combine(with: &[Rational], without: &[Rational], n: usize) -> Result<Rational> {
    if with.len() != n || without.len() != n {
        return Err(Error::ContractViolation(format!(
            "expected {n} expectations per list, got {} and {}",
            with.len(),
            without.len()
        )));
    }
    if n == 0 {
        return Ok(Rational::zero());
    }
    let total: Rational = with.iter().zip(without).map(|(a, b)| a - b).sum();
    Ok(total / from_int(n))
}

/// Per-size expectations with and without the fact.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectations {
    pub with: Vec<Rational>,
    pub without: Vec<Rational>,
}

impl Expectations {
    fn from_counts(b: &Binomials, pool: usize, with: &[BigUint], without: &[BigUint]) -> Self {
        let norm = |v: &[BigUint]| -> Vec<Rational> {
            (0..=pool).map(|m| ratio(v[m].clone(), b.get(pool, m))).collect()
        };
        Expectations { with: norm(with), without: norm(without) }
    }

    pub fn shapley(&self) -> Result<Rational> {
        shapley_eq1_combine(&self.with, &self.without, self.with.len())
    }
}

/// Combines per-relation size tables into tables over the whole database.
///
/// For the drastic measure the tables are consistent-subset counts (the
/// union is consistent iff each part is); for MC they are repair sums
/// (repair counts multiply across relations). Both combine by convolution.
/// MI, P and R are additive over relations and never need this.
pub fn multi_relation_combine(kind: MeasureKind, tables: &[Vec<BigUint>]) -> Result<Vec<BigUint>> {
    match kind {
        MeasureKind::Drastic | MeasureKind::Mc => {
            Ok(tables.iter().fold(vec![BigUint::one()], |acc, t| conv(&acc, t)))
        }
        other => Err(Error::ContractViolation(format!(
            "measure {other} is additive over relations; combine per relation instead"
        ))),
    }
}

// ----------------------------------------------------------------- engine

/// Exact Shapley computation over one database. Per-relation tables that
/// do not depend on the fact are computed once and shared.
pub struct ExactEngine<'a> {
    db: &'a Database,
    graphs: ConflictGraphs,
    classes: Vec<TractabilityClass>,
    binomials: Binomials,
    consistent_cache: Vec<OnceLock<Vec<BigUint>>>,
    repair_cache: Vec<OnceLock<Vec<BigUint>>>,
}

impl<'a> ExactEngine<'a> {
    pub fn new(db: &'a Database, fds: &FdSet) -> Self {
        let relations = db.schema().relations().len();
        ExactEngine {
            db,
            graphs: ConflictGraphs::build(db, fds),
            classes: classify(db.schema(), fds),
            binomials: Binomials::new(db.len()),
            consistent_cache: (0..relations).map(|_| OnceLock::new()).collect(),
            repair_cache: (0..relations).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn classes(&self) -> &[TractabilityClass] {
        &self.classes
    }

    pub fn graphs(&self) -> &ConflictGraphs {
        &self.graphs
    }

    fn intractable(&self, kind: MeasureKind, r: usize) -> Error {
        Error::IntractableExact {
            measure: kind.code().to_string(),
            relation: self.db.schema().relation(r).name.clone(),
            class: self.classes[r].name().to_string(),
        }
    }

    /// Fails unless the exact algorithm for `kind` applies to fact `f`.
    pub fn check_tractable(&self, kind: MeasureKind, f: usize) -> Result<()> {
        let rf = self.db.fact(f).relation;
        let needs_chain: Vec<usize> = match kind {
            MeasureKind::Mi | MeasureKind::P => Vec::new(),
            MeasureKind::R => vec![rf],
            MeasureKind::Drastic | MeasureKind::Mc => (0..self.classes.len()).collect(),
        };
        for r in needs_chain {
            if self.classes[r].chain().is_none() {
                return Err(self.intractable(kind, r));
            }
        }
        Ok(())
    }

    fn chain(&self, r: usize) -> &[crate::relational::Fd] {
        self.classes[r].chain().expect("checked tractable")
    }

    fn relation_tree(&self, r: usize, skip: Option<usize>) -> BlockTree {
        let facts: Vec<usize> = self.db.relation_range(r).filter(|&i| Some(i) != skip).collect();
        build_tree(self.db, &facts, self.chain(r)).expect("chain order from classification")
    }

    fn whole_relation_table(&self, kind: MeasureKind, r: usize) -> &Vec<BigUint> {
        let b = &self.binomials;
        match kind {
            MeasureKind::Drastic => self.consistent_cache[r]
                .get_or_init(|| consistent_tables(b, &self.relation_tree(r, None)).swap_remove(ROOT)),
            _ => self.repair_cache[r]
                .get_or_init(|| repair_tables(b, &self.relation_tree(r, None)).swap_remove(ROOT)),
        }
    }

    /// Per-size expectations of `I(E ∪ {f})` and `I(E)` for uniformly random
    /// size-`m` subsets `E` of the other facts. For MI, P and R the subsets
    /// range over the other facts of `f`'s relation only.
    pub fn expectations(&self, kind: MeasureKind, f: usize) -> Result<Expectations> {
        self.check_tractable(kind, f)?;
        let db = self.db;
        let b = &self.binomials;
        let fact = db.fact(f);
        let rf = fact.relation;
        match kind {
            MeasureKind::Drastic | MeasureKind::Mc => {
                let tree = self.relation_tree(rf, Some(f));
                let (own_without, own_with) = if kind == MeasureKind::Drastic {
                    let without = consistent_tables(b, &tree);
                    let with = consistent_with(b, db, &tree, fact, &without);
                    (without[ROOT].clone(), with)
                } else {
                    let without = repair_tables(b, &tree);
                    let with = repair_with(b, db, &tree, fact, &without);
                    (without[ROOT].clone(), with)
                };
                let mut without_parts = Vec::new();
                let mut with_parts = Vec::new();
                for r in 0..self.classes.len() {
                    if r == rf {
                        without_parts.push(own_without.clone());
                        with_parts.push(own_with.clone());
                    } else {
                        let t = self.whole_relation_table(kind, r);
                        without_parts.push(t.clone());
                        with_parts.push(t.clone());
                    }
                }
                let without = multi_relation_combine(kind, &without_parts)?;
                let with = multi_relation_combine(kind, &with_parts)?;
                let pool = db.len() - 1;
                let e = if kind == MeasureKind::Drastic {
                    // expectations of the 0/1 measure: violating / C(N, m)
                    let viol = |c: &[BigUint]| -> Vec<BigUint> {
                        c.iter().enumerate().map(|(m, x)| b.get(pool, m) - x).collect()
                    };
                    Expectations::from_counts(b, pool, &viol(&with), &viol(&without))
                } else {
                    Expectations::from_counts(b, pool, &with, &without)
                };
                Ok(e)
            }
            MeasureKind::R => {
                let tree = self.relation_tree(rf, Some(f));
                let without = cost_tables(b, &tree);
                let with = cost_with(b, db, &tree, fact, &without);
                let pool = tree.root().len();
                let sums = |t: &Cost| -> Vec<BigUint> {
                    let table = CostTable { variant: Variant::WithoutFact, counts: t.clone() };
                    (0..=pool).map(|j| table.cost_sum(j)).collect()
                };
                Ok(Expectations::from_counts(b, pool, &sums(&with), &sums(&without[ROOT])))
            }
            MeasureKind::P => Ok(self.p_expectations(f)),
            MeasureKind::Mi => Ok(self.mi_expectations(f)),
        }
    }

    fn local_degrees(&self, f: usize) -> (usize, Vec<usize>, Vec<bool>) {
        let rf = self.db.fact(f).relation;
        let g = self.graphs.relation(rf);
        let lf = g.local_index(f).expect("fact in its relation");
        let n = g.len();
        let mut adjacent = vec![false; n];
        for &u in g.neighbors(lf) {
            adjacent[u] = true;
        }
        let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
        (lf, degrees, adjacent)
    }

    // E[I_P(E)] = Σ_g P(g ∈ E and some neighbor of g ∈ E).
    fn p_expectations(&self, f: usize) -> Expectations {
        let b = &self.binomials;
        let (lf, degrees, adjacent) = self.local_degrees(f);
        let n = degrees.len();
        let pool = n - 1;
        let c = |top: i64, k: i64| -> BigUint {
            if top < 0 {
                BigUint::zero()
            } else {
                b.get_signed(top as usize, k)
            }
        };
        let n_f = degrees[lf] as i64;
        let mut with = vec![BigUint::zero(); n];
        let mut without = vec![BigUint::zero(); n];
        for m in 0..n as i64 {
            let p = pool as i64;
            let in_e = c(p - 1, m - 1);
            let mut w = BigUint::zero();
            let mut wo = BigUint::zero();
            for g in (0..n).filter(|&g| g != lf) {
                let n_g = degrees[g] as i64 - i64::from(adjacent[g]);
                let alone = c(p - 1 - n_g, m - 1);
                let problematic = &in_e - &alone;
                if adjacent[g] {
                    w += &in_e;
                } else {
                    w += &problematic;
                }
                wo += problematic;
            }
            w += c(p, m) - c(p - n_f, m);
            with[m as usize] = w;
            without[m as usize] = wo;
        }
        Expectations::from_counts(b, pool, &with, &without)
    }

    // E[I_MI(E)] counts edges with both ends in E; only edges at f differ.
    fn mi_expectations(&self, f: usize) -> Expectations {
        let b = &self.binomials;
        let rf = self.db.fact(f).relation;
        let g = self.graphs.relation(rf);
        let (lf, degrees, _) = self.local_degrees(f);
        let n = degrees.len();
        let pool = n - 1;
        let n_f = degrees[lf];
        let other_edges = g.edge_count() - n_f;
        let mut with = vec![BigUint::zero(); n];
        let mut without = vec![BigUint::zero(); n];
        for m in 0..n {
            let both = if m >= 2 { b.get(pool - 2, m - 2) } else { BigUint::zero() };
            let one = if m >= 1 { b.get(pool - 1, m - 1) } else { BigUint::zero() };
            without[m] = &both * BigUint::from(other_edges);
            with[m] = &without[m] + one * BigUint::from(n_f);
        }
        Expectations::from_counts(b, pool, &with, &without)
    }

    /// The closed formula for MI: a sum over the number `i` of neighbors of
    /// `f` that precede it, weighted by permutation counts.
    pub fn shapley_mi(&self, f: usize) -> Rational {
        let (lf, degrees, _) = self.local_degrees(f);
        let n = degrees.len();
        let n_f = degrees[lf];
        let b = &self.binomials;
        let mut fact = vec![BigUint::one()];
        for k in 1..=n {
            let next = &fact[k - 1] * BigUint::from(k);
            fact.push(next);
        }
        let mut total = BigUint::zero();
        for i in 1..=n_f {
            for m in i..n {
                total += b.get(n_f, i)
                    * b.get(n - n_f - 1, m - i)
                    * &fact[m]
                    * &fact[n - m - 1]
                    * BigUint::from(i);
            }
        }
        ratio(total, fact[n].clone())
    }

    pub fn shapley(&self, kind: MeasureKind, f: usize) -> Result<Rational> {
        if kind == MeasureKind::Mi {
            self.check_tractable(kind, f)?;
            return Ok(self.shapley_mi(f));
        }
        self.expectations(kind, f)?.shapley()
    }

    /// Shapley values of every fact, in global order.
    pub fn shapley_all(&self, kind: MeasureKind) -> Result<Vec<Rational>> {
        for f in 0..self.db.len() {
            self.check_tractable(kind, f)?;
        }
        (0..self.db.len()).into_par_iter().map(|f| self.shapley(kind, f)).collect()
    }
}

/// Exact Shapley value of one fact.
pub fn shapley_exact(db: &Database, fds: &FdSet, f: &FactId, kind: MeasureKind) -> Result<Rational> {
    let idx = db.require(f)?;
    ExactEngine::new(db, fds).shapley(kind, idx)
}

pub fn shapley_mi(db: &Database, fds: &FdSet, f: &FactId) -> Result<Rational> {
    shapley_exact(db, fds, f, MeasureKind::Mi)
}

pub fn shapley_p(db: &Database, fds: &FdSet, f: &FactId) -> Result<Rational> {
    shapley_exact(db, fds, f, MeasureKind::P)
}

pub fn shapley_r(db: &Database, fds: &FdSet, f: &FactId) -> Result<Rational> {
    shapley_exact(db, fds, f, MeasureKind::R)
}

pub fn shapley_mc(db: &Database, fds: &FdSet, f: &FactId) -> Result<Rational> {
    shapley_exact(db, fds, f, MeasureKind::Mc)
}

/// Σ values; helper for efficiency checks.
pub fn sum(values: &[Rational]) -> Rational {
    values.iter().cloned().sum()
}

/// `I(D) − I(∅)` as a rational.
pub fn efficiency_target(total: &BigUint, kind: MeasureKind) -> Rational {
    Rational::from_integer(BigInt::from(total.clone())) - from_int(kind.empty_value())
}
