mod common;

use common::strategies;
use incshap::conflict::ConflictGraphs;
use incshap::exact::{efficiency_target, ExactEngine};
use incshap::measures::measure;
use incshap::oracle::{shapley_bruteforce_all, shapley_bruteforce_perms, OracleLimits};
use incshap::{MeasureKind, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn sum(values: &[Rational]) -> Rational {
    values.iter().cloned().sum()
}

fn oracle(inst: &common::Instance, kind: MeasureKind) -> Vec<Rational> {
    shapley_bruteforce_all(&inst.db, &inst.fds, kind, OracleLimits::default()).unwrap()
}

// Facts whose neighborhoods coincide once each other is removed.
fn interchangeable(graphs: &ConflictGraphs, a: usize, b: usize) -> bool {
    let strip = |v: usize, other: usize| -> Vec<usize> {
        graphs.neighbors(v).iter().copied().filter(|&u| u != other).collect()
    };
    strip(a, b) == strip(b, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact_values_are_efficient(inst in strategies::two(5, true)) {
        let engine = ExactEngine::new(&inst.db, &inst.fds);
        for kind in MeasureKind::ALL {
            let total = measure(kind, &inst.db, &inst.fds).unwrap();
            prop_assert_eq!(sum(&engine.shapley_all(kind).unwrap()), efficiency_target(&total, kind), "{}", kind);
        }
    }

    #[test]
    fn oracle_values_are_efficient(inst in strategies::single(8, false)) {
        for kind in MeasureKind::ALL {
            let total = measure(kind, &inst.db, &inst.fds).unwrap();
            prop_assert_eq!(sum(&oracle(&inst, kind)), efficiency_target(&total, kind), "{}", kind);
        }
    }

    #[test]
    fn isolated_facts_get_nothing(inst in strategies::single(8, true)) {
        let graphs = ConflictGraphs::build(&inst.db, &inst.fds);
        let engine = ExactEngine::new(&inst.db, &inst.fds);
        for kind in MeasureKind::ALL {
            let values = engine.shapley_all(kind).unwrap();
            for v in (0..inst.db.len()).filter(|&v| graphs.degree(v) == 0) {
                prop_assert!(values[v].is_zero(), "{} fact {}", kind, v);
            }
        }
    }

    #[test]
    fn interchangeable_facts_get_the_same(inst in strategies::single(8, false)) {
        let graphs = ConflictGraphs::build(&inst.db, &inst.fds);
        for kind in MeasureKind::ALL {
            let values = oracle(&inst, kind);
            for a in 0..inst.db.len() {
                for b in a + 1..inst.db.len() {
                    if interchangeable(&graphs, a, b) {
                        prop_assert_eq!(&values[a], &values[b], "{} facts {} {}", kind, a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn values_are_nonnegative(inst in strategies::single(8, false)) {
        for kind in MeasureKind::ALL {
            for (f, v) in oracle(&inst, kind).iter().enumerate() {
                prop_assert!(!v.is_negative(), "{} fact {} value {}", kind, f, v);
            }
        }
    }

    #[test]
    fn subset_and_permutation_forms_agree(inst in strategies::single(6, false)) {
        for kind in MeasureKind::ALL {
            let subsets = oracle(&inst, kind);
            for (i, expected) in subsets.iter().enumerate() {
                let id = inst.db.fact(i).id.clone();
                prop_assert_eq!(&shapley_bruteforce_perms(&inst.db, &inst.fds, &id, kind).unwrap(), expected);
            }
        }
    }
}
