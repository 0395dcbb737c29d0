mod common;

use common::strategies;
use incshap::conflict::is_consistent;
use incshap::measures::{enumerate_repairs, measure};
use incshap::MeasureKind;
use num_bigint::BigUint;
use proptest::prelude::*;

fn value(kind: MeasureKind, inst: &common::Instance) -> BigUint {
    measure(kind, &inst.db, &inst.fds).unwrap()
}

proptest! {
    #[test]
    fn zero_iff_consistent(inst in strategies::two(6, false)) {
        let consistent = is_consistent(&inst.db, &inst.fds);
        for kind in [MeasureKind::Drastic, MeasureKind::Mi, MeasureKind::P, MeasureKind::R] {
            prop_assert_eq!(value(kind, &inst) == BigUint::from(0u32), consistent, "{}", kind);
        }
        prop_assert_eq!(value(MeasureKind::Mc, &inst) == BigUint::from(1u32), consistent);
    }

    #[test]
    fn repairs_explain_r_and_mc(inst in strategies::two(5, false)) {
        let list = enumerate_repairs(&inst.db, &inst.fds, 10_000).unwrap();
        prop_assert!(!list.truncated);
        let largest = list.repairs.iter().map(Vec::len).max().unwrap();
        prop_assert_eq!(value(MeasureKind::R, &inst), BigUint::from(inst.db.len() - largest));
        prop_assert_eq!(value(MeasureKind::Mc, &inst), BigUint::from(list.repairs.len()));
    }

    #[test]
    fn measures_compose_over_relations(inst in strategies::two(6, false)) {
        let split: Vec<common::Instance> = (0..2)
            .map(|r| {
                let range = inst.db.relation_range(r);
                common::Instance { db: inst.db.restrict(|i| range.contains(&i)), fds: inst.fds.clone() }
            })
            .collect();
        for kind in [MeasureKind::Mi, MeasureKind::P, MeasureKind::R] {
            prop_assert_eq!(value(kind, &inst), value(kind, &split[0]) + value(kind, &split[1]));
        }
        prop_assert_eq!(value(MeasureKind::Mc, &inst), value(MeasureKind::Mc, &split[0]) * value(MeasureKind::Mc, &split[1]));
        prop_assert_eq!(value(MeasureKind::Drastic, &inst), value(MeasureKind::Drastic, &split[0]).max(value(MeasureKind::Drastic, &split[1])));
    }

    #[test]
    fn insertion_never_decreases(inst in strategies::single(8, false), mask in any::<u8>()) {
        let sub = common::Instance { db: inst.db.restrict(|i| mask & (1 << i) != 0), fds: inst.fds.clone() };
        for kind in [MeasureKind::Drastic, MeasureKind::Mi, MeasureKind::P, MeasureKind::R] {
            prop_assert!(value(kind, &sub) <= value(kind, &inst), "{}", kind);
        }
    }
}
