//! FD-set analysis: attribute closure, minimal covers, lhs chains, the
//! removable-pair simplification and the resulting tractability classes.

use std::fmt;

use crate::error::Result;
use crate::relational::{AttrSet, Fd, FdSet, Schema};

/// Least superset of `attrs` closed under `fds`.
pub fn attribute_closure(attrs: AttrSet, fds: &[Fd]) -> AttrSet {
    let mut closure = attrs;
    loop {
        let next = fds
            .iter()
            .filter(|fd| fd.lhs.is_subset(closure))
            .fold(closure, |acc, fd| acc.union(fd.rhs));
        if next == closure {
            return closure;
        }
        closure = next;
    }
}

/// Closure of named attributes of `relation` under the FDs over it.
pub fn closure_of_names<S: AsRef<str>>(
    schema: &Schema,
    relation: usize,
    names: &[S],
    fds: &FdSet,
) -> Result<AttrSet> {
    let attrs = schema.attr_set(relation, names)?;
    Ok(attribute_closure(attrs, &fds.for_relation(relation)))
}

fn canonical_fd_cmp(a: &Fd, b: &Fd) -> std::cmp::Ordering {
    a.lhs
        .canonical_cmp(b.lhs)
        .then_with(|| a.rhs.canonical_cmp(b.rhs))
}

fn dedup_sorted(mut fds: Vec<Fd>) -> Vec<Fd> {
    fds.sort_by(canonical_fd_cmp);
    fds.dedup();
    fds
}

/// Merges FDs with equal lhs by unioning their rhs; output is sorted.
fn merge_equal_lhs(fds: &[Fd]) -> Vec<Fd> {
    let mut out: Vec<Fd> = Vec::new();
    for fd in fds {
        match out.iter_mut().find(|o| o.lhs == fd.lhs) {
            Some(o) => o.rhs = o.rhs.union(fd.rhs),
            None => out.push(*fd),
        }
    }
    dedup_sorted(out)
}

/// An equivalent FD set with no trivial attributes, no extraneous lhs
/// attributes and no redundant FDs. FDs sharing an lhs are merged, and the
/// output is sorted by lhs size, then lexicographically.
pub fn minimal_cover(fds: &[Fd]) -> Vec<Fd> {
    // Singleton right-hand sides without trivial attributes.
    let mut cover: Vec<Fd> = fds
        .iter()
        .flat_map(|fd| {
            fd.rhs
                .difference(fd.lhs)
                .iter()
                .map(move |a| Fd::new(fd.relation, fd.lhs, AttrSet::singleton(a)))
        })
        .collect();
    cover = dedup_sorted(cover);

    // Extraneous lhs attributes.
    for i in 0..cover.len() {
        for a in cover[i].lhs.iter() {
            let reduced = cover[i].lhs.difference(AttrSet::singleton(a));
            if cover[i].rhs.is_subset(attribute_closure(reduced, &cover)) {
                cover[i].lhs = reduced;
            }
        }
    }
    cover = dedup_sorted(cover);

    // Redundant FDs.
    let mut i = 0;
    while i < cover.len() {
        let fd = cover[i];
        let others: Vec<Fd> = cover
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| *f)
            .collect();
        if fd.rhs.is_subset(attribute_closure(fd.lhs, &others)) {
            cover.remove(i);
        } else {
            i += 1;
        }
    }
    merge_equal_lhs(&cover)
}

/// Orders the FDs by ascending lhs if every pair of left-hand sides is
/// comparable under inclusion. FDs with equal lhs are merged first.
pub fn lhs_chain_order(fds: &[Fd]) -> Option<Vec<Fd>> {
    let merged = merge_equal_lhs(fds);
    for pair in merged.windows(2) {
        if !pair[0].lhs.is_subset(pair[1].lhs) {
            return None;
        }
    }
    Some(merged)
}

/// All subsets of `set`, in canonical order.
fn subsets(set: AttrSet) -> Vec<AttrSet> {
    let attrs: Vec<usize> = set.iter().collect();
    let mut out: Vec<AttrSet> = (0u64..1 << attrs.len())
        .map(|mask| {
            AttrSet::from_attrs(
                attrs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &a)| a),
            )
        })
        .collect();
    out.sort_by(|a, b| a.canonical_cmp(*b));
    out
}

fn remove_trivial(fds: &[Fd]) -> Vec<Fd> {
    dedup_sorted(
        fds.iter()
            .map(|fd| Fd::new(fd.relation, fd.lhs, fd.rhs.difference(fd.lhs)))
            .filter(|fd| !fd.rhs.is_empty())
            .collect(),
    )
}

/// Finds the first removable pair `(X, Y)`: equal closures, `XY` non-empty,
/// and every lhs containing `X` or `Y`.
///
/// `X` ranges over subsets of left-hand sides in canonical order; for each
/// `X`, `Y` ranges over subsets of the intersection of the left-hand sides
/// that do not contain `X` (or over `closure(∅)` when all of them do and
/// `X` is empty).
pub fn find_removable_pair(fds: &[Fd]) -> Option<(AttrSet, AttrSet)> {
    if fds.is_empty() {
        return None;
    }
    let mut candidates: Vec<AttrSet> = fds.iter().flat_map(|fd| subsets(fd.lhs)).collect();
    candidates.sort_by(|a, b| a.canonical_cmp(*b));
    candidates.dedup();
    let mentioned = fds
        .iter()
        .fold(AttrSet::EMPTY, |acc, fd| acc.union(fd.lhs).union(fd.rhs));

    for x in candidates {
        let rest: Vec<&Fd> = fds.iter().filter(|fd| !x.is_subset(fd.lhs)).collect();
        let closure_x = attribute_closure(x, fds);
        if rest.is_empty() {
            if !x.is_empty() {
                return Some((x, x));
            }
            let y = attribute_closure(AttrSet::EMPTY, fds).intersection(mentioned);
            if !y.is_empty() {
                return Some((x, y));
            }
            continue;
        }
        let common = rest
            .iter()
            .fold(rest[0].lhs, |acc, fd| acc.intersection(fd.lhs));
        for y in subsets(common) {
            if !x.union(y).is_empty() && attribute_closure(y, fds) == closure_x {
                return Some((x, y));
            }
        }
    }
    None
}

/// One simplification step: remove the attributes of a removable pair from
/// every FD and drop the FDs that become trivial. `None` when no removable
/// pair exists.
pub fn simplify_step(fds: &[Fd]) -> Option<Vec<Fd>> {
    let fds = remove_trivial(fds);
    let (x, y) = find_removable_pair(&fds)?;
    let xy = x.union(y);
    Some(remove_trivial(
        &fds.iter()
            .map(|fd| Fd::new(fd.relation, fd.lhs.difference(xy), fd.rhs.difference(xy)))
            .collect::<Vec<_>>(),
    ))
}

/// True iff repeated simplification steps empty the FD set.
pub fn simplify_emptiable(fds: &[Fd]) -> bool {
    let mut current = remove_trivial(fds);
    while !current.is_empty() {
        match simplify_step(&current) {
            Some(next) => current = next,
            None => return false,
        }
    }
    true
}

/// Tractability class of the FDs over one relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TractabilityClass {
    /// Equivalent to an FD set with an lhs chain; holds the chain-ordered
    /// minimal cover.
    LhsChain(Vec<Fd>),
    /// No lhs chain, but a cardinality repair is computable in polynomial
    /// time.
    PTimeCRepairNoChain,
    HardCRepair,
}

impl TractabilityClass {
    pub fn name(&self) -> &'static str {
        match self {
            TractabilityClass::LhsChain(_) => "LhsChain",
            TractabilityClass::PTimeCRepairNoChain => "PTimeCRepairNoChain",
            TractabilityClass::HardCRepair => "HardCRepair",
        }
    }

    pub fn chain(&self) -> Option<&[Fd]> {
        match self {
            TractabilityClass::LhsChain(chain) => Some(chain),
            _ => None,
        }
    }
}

impl fmt::Display for TractabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies the FDs of a single relation.
pub fn classify_relation(fds: &[Fd]) -> TractabilityClass {
    let cover = minimal_cover(fds);
    if let Some(chain) = lhs_chain_order(&cover) {
        return TractabilityClass::LhsChain(chain);
    }
    if simplify_emptiable(&cover) {
        TractabilityClass::PTimeCRepairNoChain
    } else {
        TractabilityClass::HardCRepair
    }
}

/// Per-relation classes, in schema order.
pub fn classify(schema: &Schema, fds: &FdSet) -> Vec<TractabilityClass> {
    (0..schema.relations().len())
        .map(|r| classify_relation(&fds.for_relation(r)))
        .collect()
}
