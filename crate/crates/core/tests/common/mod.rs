//! Random small instances shared by the integration tests.
#![allow(dead_code)]

use incshap::fd::classify;
use incshap::relational::{AttrSet, Database, Fd, FdSet, Schema};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn schema3() -> Schema {
    Schema::new([("R", vec!["A", "B", "C"])]).unwrap()
}

pub fn schema_two() -> Schema {
    Schema::new([("R", vec!["A", "B", "C"]), ("S", vec!["A", "B", "C"])]).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, of: &[usize]) -> AttrSet {
    AttrSet::from_attrs(of.iter().copied().filter(|_| rng.random_bool(0.5)))
}

/// One to three FDs whose left-hand sides form a chain.
pub fn chain_fds(rng: &mut ChaCha8Rng, relation: usize) -> Vec<Fd> {
    let mut attrs = [0, 1, 2];
    attrs.shuffle(rng);
    let count = rng.random_range(1..=3);
    let mut sizes: Vec<usize> = (0..count).map(|_| rng.random_range(0..=2)).collect();
    sizes.sort_unstable();
    sizes
        .into_iter()
        .map(|s| {
            let lhs = AttrSet::from_attrs(attrs[..s].iter().copied());
            let rest: Vec<usize> = attrs[s..].to_vec();
            let mut rhs = random_subset(rng, &rest);
            if rhs.is_empty() {
                rhs = AttrSet::singleton(*rest.choose(rng).unwrap());
            }
            Fd::new(relation, lhs, rhs)
        })
        .collect()
}

/// One to three arbitrary FDs (trivial ones included).
pub fn arbitrary_fds(rng: &mut ChaCha8Rng, relation: usize) -> Vec<Fd> {
    let count = rng.random_range(1..=3);
    (0..count)
        .map(|_| {
            let lhs = random_subset(rng, &[0, 1, 2]);
            let mut rhs = random_subset(rng, &[0, 1, 2]);
            if rhs.is_empty() {
                rhs = AttrSet::singleton(rng.random_range(0..3));
            }
            Fd::new(relation, lhs, rhs)
        })
        .collect()
}

/// `n` distinct rows over a `domain`-valued alphabet.
pub fn rows(rng: &mut ChaCha8Rng, n: usize, domain: u32) -> Vec<Vec<String>> {
    assert!((domain as usize).pow(3) >= n);
    let mut out: Vec<Vec<String>> = Vec::new();
    while out.len() < n {
        let row: Vec<String> = (0..3).map(|_| rng.random_range(0..domain).to_string()).collect();
        if !out.contains(&row) {
            out.push(row);
        }
    }
    out
}

#[derive(Debug)]
pub struct Instance {
    pub db: Database,
    pub fds: FdSet,
}

pub fn single(rng: &mut ChaCha8Rng, n: usize, chain: bool) -> Instance {
    let domain = if rng.random_bool(0.5) { 2 } else { 3 };
    let data = rows(rng, n, domain);
    let db = Database::from_rows(schema3(), [("R", data)]).unwrap();
    let fds = if chain { chain_fds(rng, 0) } else { arbitrary_fds(rng, 0) };
    Instance { db, fds: FdSet::new(fds) }
}

pub fn two_relations(rng: &mut ChaCha8Rng, max_each: usize) -> Instance {
    let n1 = rng.random_range(1..=max_each);
    let n2 = rng.random_range(1..=max_each);
    let r = rows(rng, n1, 2);
    let s = rows(rng, n2, 2);
    let db = Database::from_rows(schema_two(), [("R", r), ("S", s)]).unwrap();
    let mut fds = chain_fds(rng, 0);
    fds.extend(chain_fds(rng, 1));
    Instance { db, fds: FdSet::new(fds) }
}

pub fn is_chain(inst: &Instance) -> bool {
    classify(inst.db.schema(), &inst.fds).iter().all(|c| c.chain().is_some())
}

pub mod strategies {
    use incshap::relational::{AttrSet, Database, Fd, FdSet};
    use proptest::prelude::*;

    use super::{schema3, schema_two, Instance};

    /// Up to `max` distinct rows over {0,1,2}^3, in generation order.
    pub fn rows(max: usize) -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec((0u8..3, 0u8..3, 0u8..3), 0..=max).prop_map(|raw| {
            let mut out: Vec<Vec<String>> = Vec::new();
            for (a, b, c) in raw {
                let row = vec![a.to_string(), b.to_string(), c.to_string()];
                if !out.contains(&row) {
                    out.push(row);
                }
            }
            out
        })
    }

    pub fn fds(relation: usize) -> impl Strategy<Value = Vec<Fd>> {
        prop::collection::vec((0u64..8, 1u64..8), 1..=3).prop_map(move |raw| {
            raw.into_iter()
                .map(|(l, r)| Fd::new(relation, AttrSet::from_bits(l), AttrSet::from_bits(r)))
                .collect()
        })
    }

    /// FDs whose left-hand sides are prefixes of one attribute order.
    pub fn chain_fds(relation: usize) -> impl Strategy<Value = Vec<Fd>> {
        let order = Just(vec![0usize, 1, 2]).prop_shuffle();
        (order, prop::collection::vec((0usize..=2, 1u64..8), 1..=3)).prop_map(move |(order, mut raw)| {
            raw.sort_by_key(|&(s, _)| s);
            raw.into_iter()
                .map(|(s, bits)| {
                    let lhs = AttrSet::from_attrs(order[..s].iter().copied());
                    let mut rhs = AttrSet::from_bits(bits).difference(lhs);
                    if rhs.is_empty() {
                        rhs = AttrSet::singleton(order[s]);
                    }
                    Fd::new(relation, lhs, rhs)
                })
                .collect()
        })
    }

    pub fn single(max: usize, chain: bool) -> impl Strategy<Value = Instance> {
        let fds = if chain { chain_fds(0).boxed() } else { fds(0).boxed() };
        (rows(max), fds).prop_map(|(rows, fds)| Instance {
            db: Database::from_rows(schema3(), [("R", rows)]).unwrap(),
            fds: FdSet::new(fds),
        })
    }

    pub fn two(max_each: usize, chain: bool) -> impl Strategy<Value = Instance> {
        let pick = move |r: usize| if chain { chain_fds(r).boxed() } else { fds(r).boxed() };
        (rows(max_each), rows(max_each), pick(0), pick(1)).prop_map(|(r, s, mut f, g)| {
            f.extend(g);
            Instance {
                db: Database::from_rows(schema_two(), [("R", r), ("S", s)]).unwrap(),
                fds: FdSet::new(f),
            }
        })
    }
}
