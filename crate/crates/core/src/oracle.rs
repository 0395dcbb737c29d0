//! Brute-force Shapley values for small databases.

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::combinatorics::{factorial, Rational};
use crate::conflict::ConflictGraphs;
use crate::error::{Error, Result};
use crate::measures::{measure_subset, MeasureKind, DEFAULT_BUDGET};
use crate::relational::{Database, FactId, FdSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_facts_subsets: usize,
    pub max_facts_perms: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_facts_subsets: 18, max_facts_perms: 8 }
    }
}

const GRAY_BITS: usize = 12;

fn small_value(v: BigUint) -> i64 {
    v.to_i64().expect("measure of a small coalition fits in i64")
}

fn mask_set(mask: u64, n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for v in 0..n {
        if mask & (1 << v) != 0 {
            s.insert(v);
        }
    }
    s
}

// Running state for measures that change locally when one fact toggles.
struct Incremental<'a> {
    graphs: &'a ConflictGraphs,
    members: FixedBitSet,
    inner_degree: Vec<usize>,
    edges: usize,
    problematic: usize,
}

impl<'a> Incremental<'a> {
    fn new(graphs: &'a ConflictGraphs, mask: u64) -> Self {
        let n = graphs.len();
        let mut state = Incremental {
            graphs,
            members: FixedBitSet::with_capacity(n),
            inner_degree: vec![0; n],
            edges: 0,
            problematic: 0,
        };
        for v in 0..n {
            if mask & (1 << v) != 0 {
                state.toggle(v);
            }
        }
        state
    }

    // `inner_degree` counts neighbors inside the coalition for every fact,
    // members or not, so a joining fact's count is already current.
    fn toggle(&mut self, v: usize) {
        let adding = !self.members.contains(v);
        let busy = |d: usize| usize::from(d > 0);
        for &u in self.graphs.neighbors(v) {
            let old = self.inner_degree[u];
            let new = if adding { old + 1 } else { old - 1 };
            self.inner_degree[u] = new;
            if self.members.contains(u) {
                self.problematic = self.problematic + busy(new) - busy(old);
                if adding {
                    self.edges += 1;
                } else {
                    self.edges -= 1;
                }
            }
        }
        let own = self.inner_degree[v];
        if adding {
            self.members.insert(v);
            self.problematic += busy(own);
        } else {
            self.members.set(v, false);
            self.problematic -= busy(own);
        }
    }

    fn debug_check(&self) {
        debug_assert_eq!(
            self.problematic,
            self.members.ones().filter(|&v| self.inner_degree[v] > 0).count()
        );
    }

    fn value(&self, kind: MeasureKind) -> Result<i64> {
        Ok(match kind {
            MeasureKind::Drastic => i64::from(self.edges > 0),
            MeasureKind::Mi => self.edges as i64,
            MeasureKind::P => self.problematic as i64,
            MeasureKind::R | MeasureKind::Mc => {
                small_value(measure_subset(kind, self.graphs, &self.members, DEFAULT_BUDGET)?)
            }
        })
    }
}

/// Measure values of every coalition, indexed by bitmask over global fact
/// indices.
pub struct CoalitionTable {
    n: usize,
    values: Vec<i64>,
}

impl CoalitionTable {
    pub fn build(db: &Database, fds: &FdSet, kind: MeasureKind, limit: usize) -> Result<Self> {
        let n = db.len();
        if n > limit {
            return Err(Error::SizeLimit { what: "subset oracle", limit, actual: n });
        }
        let graphs = ConflictGraphs::build(db, fds);
        let low = n.min(GRAY_BITS);
        let chunks: Vec<Result<Vec<i64>>> = (0u64..1 << (n - low))
            .into_par_iter()
            .map(|high| {
                let base = high << low;
                let mut state = Incremental::new(&graphs, base);
                let mut out = vec![0i64; 1 << low];
                out[0] = state.value(kind)?;
                // Gray-code walk over the low bits: one fact toggles per step.
                for i in 1u64..1 << low {
                    state.toggle(i.trailing_zeros() as usize);
                    state.debug_check();
                    let gray = i ^ (i >> 1);
                    out[gray as usize] = state.value(kind)?;
                }
                Ok(out)
            })
            .collect();
        let mut values = Vec::with_capacity(1 << n);
        for chunk in chunks {
            values.extend(chunk?);
        }
        Ok(CoalitionTable { n, values })
    }

    pub fn value(&self, mask: u64) -> i64 {
        self.values[mask as usize]
    }

    /// Weighted sum over coalitions without `f` of the marginal of `f`.
    pub fn shapley(&self, f: usize) -> Rational {
        let n = self.n;
        let bit = 1u64 << f;
        let mut by_size = vec![0i128; n];
        for mask in 0u64..1 << n {
            if mask & bit == 0 {
                let diff = self.values[(mask | bit) as usize] - self.values[mask as usize];
                by_size[mask.count_ones() as usize] += i128::from(diff);
            }
        }
        let mut total = BigInt::zero();
        for (s, d) in by_size.iter().enumerate() {
            if *d != 0 {
                total += BigInt::from(*d) * BigInt::from(factorial(s) * factorial(n - s - 1));
            }
        }
        Rational::new(total, BigInt::from(factorial(n)))
    }

    pub fn shapley_all(&self) -> Vec<Rational> {
        (0..self.n).into_par_iter().map(|f| self.shapley(f)).collect()
    }
}

/// Shapley value from the subset form of the definition.
pub fn shapley_bruteforce_subsets(db: &Database, fds: &FdSet, f: &FactId, kind: MeasureKind) -> Result<Rational> {
    shapley_bruteforce_subsets_with(db, fds, f, kind, OracleLimits::default())
}

pub fn shapley_bruteforce_subsets_with(
    db: &Database,
    fds: &FdSet,
    f: &FactId,
    kind: MeasureKind,
    limits: OracleLimits,
) -> Result<Rational> {
    let idx = db.require(f)?;
    Ok(CoalitionTable::build(db, fds, kind, limits.max_facts_subsets)?.shapley(idx))
}

/// Subset-form values of every fact, in global order.
pub fn shapley_bruteforce_all(db: &Database, fds: &FdSet, kind: MeasureKind, limits: OracleLimits) -> Result<Vec<Rational>> {
    Ok(CoalitionTable::build(db, fds, kind, limits.max_facts_subsets)?.shapley_all())
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Shapley value as the average marginal over all orderings of the facts.
pub fn shapley_bruteforce_perms(db: &Database, fds: &FdSet, f: &FactId, kind: MeasureKind) -> Result<Rational> {
    shapley_bruteforce_perms_with(db, fds, f, kind, OracleLimits::default())
}

pub fn shapley_bruteforce_perms_with(
    db: &Database,
    fds: &FdSet,
    f: &FactId,
    kind: MeasureKind,
    limits: OracleLimits,
) -> Result<Rational> {
    let idx = db.require(f)?;
    let n = db.len();
    if n > limits.max_facts_perms {
        return Err(Error::SizeLimit { what: "permutation oracle", limit: limits.max_facts_perms, actual: n });
    }
    let graphs = ConflictGraphs::build(db, fds);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total: i64 = 0;
    loop {
        let pos = perm.iter().position(|&v| v == idx).expect("f in permutation");
        let mut before = FixedBitSet::with_capacity(n);
        for &v in &perm[..pos] {
            before.insert(v);
        }
        let without = small_value(measure_subset(kind, &graphs, &before, DEFAULT_BUDGET)?);
        before.insert(idx);
        let with = small_value(measure_subset(kind, &graphs, &before, DEFAULT_BUDGET)?);
        total += with - without;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(Rational::new(BigInt::from(total), BigInt::from(factorial(n))))
}

/// Measure of the coalition given by `mask`; exposed for tests.
pub fn coalition_measure(graphs: &ConflictGraphs, mask: u64, kind: MeasureKind) -> Result<BigUint> {
    measure_subset(kind, graphs, &mask_set(mask, graphs.len()), DEFAULT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{trains_example, AttrSet, Fd, Schema};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mini() -> (Database, FdSet) {
        let schema = Schema::new([("R", vec!["A", "B"])]).unwrap();
        let db = Database::from_rows(schema, [("R", vec![vec!["a", "1"], vec!["a", "2"], vec!["b", "1"]])])
            .unwrap();
        (db, FdSet::new(vec![Fd::new(0, AttrSet::singleton(0), AttrSet::singleton(1))]))
    }

    fn id(i: usize) -> FactId {
        FactId { relation: "R".into(), index: i }
    }

    #[test]
    fn mini_oracle_values() {
        let (db, fds) = mini();
        for kind in [MeasureKind::Mi, MeasureKind::Mc, MeasureKind::Drastic] {
            assert_eq!(shapley_bruteforce_subsets(&db, &fds, &id(0), kind).unwrap(), q(1, 2));
            assert_eq!(shapley_bruteforce_perms(&db, &fds, &id(0), kind).unwrap(), q(1, 2));
            assert_eq!(shapley_bruteforce_subsets(&db, &fds, &id(2), kind).unwrap(), q(0, 1));
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let (db, fds) = trains_example();
        let graphs = ConflictGraphs::build(&db, &fds);
        for kind in MeasureKind::ALL {
            let table = CoalitionTable::build(&db, &fds, kind, 18).unwrap();
            for mask in (0u64..1 << 9).step_by(7) {
                let direct = small_value(coalition_measure(&graphs, mask, kind).unwrap());
                assert_eq!(table.value(mask), direct, "{kind} {mask:b}");
            }
        }
    }

    #[test]
    fn single_fact_is_zero() {
        let (db, fds) = mini();
        let one = db.restrict(|i| i == 0);
        for kind in MeasureKind::ALL {
            assert_eq!(shapley_bruteforce_perms(&one, &fds, &id(0), kind).unwrap(), q(0, 1));
        }
    }

    #[test]
    fn size_limits_are_refusals() {
        let (db, fds) = trains_example();
        let f = db.fact(0).id.clone();
        let err = shapley_bruteforce_perms(&db, &fds, &f, MeasureKind::Mi).unwrap_err();
        assert!(err.is_refusal());
        let tight = OracleLimits { max_facts_subsets: 4, max_facts_perms: 4 };
        assert!(shapley_bruteforce_subsets_with(&db, &fds, &f, MeasureKind::Mi, tight).is_err());
    }

    #[test]
    fn permutation_order() {
        let mut p = vec![0, 1, 2];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
