//! The five inconsistency measures, evaluated on conflict graphs.

pub mod solver;

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::conflict::ConflictGraphs;
use crate::error::{Error, Result};
use crate::relational::{Database, FactId, FdSet};
use solver::{Budget, Exhausted};

/// Default search-node budget for one vertex-cover or repair-count call.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    /// 1 if the database is inconsistent, else 0.
    Drastic,
    /// Number of conflicting fact pairs.
    Mi,
    /// Number of facts involved in some conflict.
    P,
    /// Minimum number of deletions that restore consistency.
    R,
    /// Number of repairs.
    Mc,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] =
        [MeasureKind::Drastic, MeasureKind::Mi, MeasureKind::P, MeasureKind::R, MeasureKind::Mc];

    pub fn code(self) -> &'static str {
        match self {
            MeasureKind::Drastic => "d",
            MeasureKind::Mi => "mi",
            MeasureKind::P => "p",
            MeasureKind::R => "r",
            MeasureKind::Mc => "mc",
        }
    }

    /// Value on the empty database.
    pub fn empty_value(self) -> u32 {
        match self {
            MeasureKind::Mc => 1,
            _ => 0,
        }
    }

    /// Upper bound on a single marginal contribution in a database of `n`
    /// facts, or None when no bound is known.
    pub fn marginal_bound(self, n: usize) -> Option<u64> {
        match self {
            MeasureKind::Drastic | MeasureKind::R => Some(1),
            MeasureKind::Mi => Some(n.saturating_sub(1) as u64),
            MeasureKind::P => Some(n as u64),
            MeasureKind::Mc => None,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "drastic" => Ok(MeasureKind::Drastic),
            "mi" => Ok(MeasureKind::Mi),
            "p" => Ok(MeasureKind::P),
            "r" => Ok(MeasureKind::R),
            "mc" => Ok(MeasureKind::Mc),
            other => Err(Error::InvalidParams(format!(
                "unknown measure `{other}` (expected d, mi, p, r or mc)"
            ))),
        }
    }
}

pub fn measure(kind: MeasureKind, db: &Database, fds: &FdSet) -> Result<BigUint> {
    measure_with_budget(kind, db, fds, DEFAULT_BUDGET)
}

pub fn measure_with_budget(kind: MeasureKind, db: &Database, fds: &FdSet, budget: u64) -> Result<BigUint> {
    let graphs = ConflictGraphs::build(db, fds);
    let mut all = FixedBitSet::with_capacity(db.len());
    all.insert_range(..);
    measure_subset(kind, &graphs, &all, budget)
}

/// Measure of the sub-database given by `members` (global fact indices).
pub fn measure_subset(
    kind: MeasureKind,
    graphs: &ConflictGraphs,
    members: &FixedBitSet,
    budget: u64,
) -> Result<BigUint> {
    let adj = adjacency(graphs);
    let inner_degree = |v: usize| graphs.adjacency(v).intersection_count(members);
    let value = match kind {
        MeasureKind::Drastic => {
            let any = members.ones().any(|v| inner_degree(v) > 0);
            BigUint::from(u32::from(any))
        }
        MeasureKind::Mi => {
            let twice: usize = members.ones().map(inner_degree).sum();
            BigUint::from(twice / 2)
        }
        MeasureKind::P => BigUint::from(members.ones().filter(|&v| inner_degree(v) > 0).count()),
        MeasureKind::R => {
            let mut b = Budget::new(budget);
            let cover = solver::min_vertex_cover(members, adj, &mut b)
                .map_err(|Exhausted| exceeded(budget, members))?;
            BigUint::from(cover)
        }
        MeasureKind::Mc => {
            let mut b = Budget::new(budget);
            let mut product = BigUint::one();
            for comp in solver::components(members, adj) {
                if comp.count_ones(..) == 1 {
                    continue;
                }
                let count = solver::count_maximal_independent_sets(&comp, adj, &mut b)
                    .map_err(|Exhausted| exceeded(budget, members))?;
                product *= BigUint::from(count);
            }
            product
        }
    };
    Ok(value)
}

fn exceeded(budget: u64, members: &FixedBitSet) -> Error {
    Error::BudgetExceeded { budget, coalition_size: members.count_ones(..) }
}

fn adjacency(graphs: &ConflictGraphs) -> &[FixedBitSet] {
    graphs.adjacency_slice()
}

/// Repairs of a database in deterministic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairList {
    pub repairs: Vec<Vec<FactId>>,
    /// True when more repairs exist than were returned.
    pub truncated: bool,
}

/// Enumerates repairs (maximal consistent subsets), at most `cap` of them.
/// Each repair lists fact ids in global order; repairs are sorted
/// lexicographically by global index.
pub fn enumerate_repairs(db: &Database, fds: &FdSet, cap: usize) -> Result<RepairList> {
    let graphs = ConflictGraphs::build(db, fds);
    let adj = adjacency(&graphs);
    let mut truncated = false;
    let mut per_relation: Vec<Vec<Vec<usize>>> = Vec::new();
    for r in 0..db.schema().relations().len() {
        let mut members = FixedBitSet::with_capacity(db.len());
        for v in db.relation_range(r) {
            members.insert(v);
        }
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut b = Budget::new(DEFAULT_BUDGET);
        solver::enumerate_maximal_independent_sets(&members, adj, &mut b, &mut |s: &[usize]| {
            if found.len() >= cap {
                truncated = true;
                return false;
            }
            found.push(s.to_vec());
            true
        })
        .map_err(|Exhausted| exceeded(DEFAULT_BUDGET, &members))?;
        found.sort();
        per_relation.push(found);
    }

    let mut combined: Vec<Vec<usize>> = vec![Vec::new()];
    for options in &per_relation {
        let mut next = Vec::new();
        'outer: for prefix in &combined {
            for opt in options {
                if next.len() >= cap {
                    truncated = true;
                    break 'outer;
                }
                let mut joined = prefix.clone();
                joined.extend_from_slice(opt);
                next.push(joined);
            }
        }
        combined = next;
    }
    combined.sort();
    let repairs = combined
        .into_iter()
        .map(|set| set.into_iter().map(|i| db.fact(i).id.clone()).collect())
        .collect();
    Ok(RepairList { repairs, truncated })
}

/// The value of `kind` on the empty database.
pub fn empty_value(kind: MeasureKind) -> BigUint {
    if kind == MeasureKind::Mc {
        BigUint::one()
    } else {
        BigUint::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{trains_example, AttrSet, Fd, Schema};

    fn mini() -> (Database, FdSet) {
        let schema = Schema::new([("R", vec!["A", "B"])]).unwrap();
        let db = Database::from_rows(schema, [("R", vec![vec!["a", "1"], vec!["a", "2"], vec!["b", "1"]])])
            .unwrap();
        (db, FdSet::new(vec![Fd::new(0, AttrSet::singleton(0), AttrSet::singleton(1))]))
    }

    fn val(kind: MeasureKind, db: &Database, fds: &FdSet) -> u64 {
        measure(kind, db, fds).unwrap().try_into().unwrap()
    }

    #[test]
    fn trains_measures() {
        let (db, fds) = trains_example();
        assert_eq!(val(MeasureKind::Drastic, &db, &fds), 1);
        assert_eq!(val(MeasureKind::Mi, &db, &fds), 30);
        assert_eq!(val(MeasureKind::P, &db, &fds), 9);
        assert_eq!(val(MeasureKind::R, &db, &fds), 6);
        assert_eq!(val(MeasureKind::Mc, &db, &fds), 5);
    }

    #[test]
    fn empty_database() {
        let (db, fds) = trains_example();
        let empty = db.restrict(|_| false);
        for kind in MeasureKind::ALL {
            assert_eq!(measure(kind, &empty, &fds).unwrap(), empty_value(kind));
        }
    }

    #[test]
    fn trains_repairs() {
        let (db, fds) = trains_example();
        let list = enumerate_repairs(&db, &fds, 100).unwrap();
        assert!(!list.truncated);
        let idx: Vec<Vec<usize>> =
            list.repairs.iter().map(|r| r.iter().map(|id| id.index).collect()).collect();
        assert_eq!(idx, vec![vec![0, 1], vec![2, 3, 4], vec![5, 7], vec![6, 7], vec![8]]);
    }

    #[test]
    fn mini_repairs_and_truncation() {
        let (db, fds) = mini();
        let list = enumerate_repairs(&db, &fds, 10).unwrap();
        let idx: Vec<Vec<usize>> =
            list.repairs.iter().map(|r| r.iter().map(|id| id.index).collect()).collect();
        assert_eq!(idx, vec![vec![0, 2], vec![1, 2]]);
        let capped = enumerate_repairs(&db, &fds, 1).unwrap();
        assert!(capped.truncated);
        assert_eq!(capped.repairs.len(), 1);
    }

    #[test]
    fn consistent_database_is_its_own_repair() {
        let (db, fds) = trains_example();
        let sub = db.restrict(|i| (2..5).contains(&i));
        let list = enumerate_repairs(&sub, &fds, 10).unwrap();
        assert_eq!(list.repairs.len(), 1);
        assert_eq!(list.repairs[0].len(), 3);
    }

    #[test]
    fn measure_codes_round_trip() {
        for kind in MeasureKind::ALL {
            assert_eq!(kind.code().parse::<MeasureKind>().unwrap(), kind);
        }
        assert!("x".parse::<MeasureKind>().is_err());
    }
}
