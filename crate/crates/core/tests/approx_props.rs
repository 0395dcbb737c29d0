mod common;

use common::strategies;
use incshap::approx::{estimate_shapley, ApproxParams, Guarantee, Mode};
use incshap::MeasureKind;
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimates_are_reproducible(inst in strategies::single(8, false), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!inst.db.is_empty());
        let f = inst.db.fact(pick.index(inst.db.len())).id.clone();
        let mut params = ApproxParams::new(0.3, 0.1, Mode::Additive, seed).unwrap();
        params.marginal_cap = Some(8);
        for kind in MeasureKind::ALL {
            let a = estimate_shapley(&inst.db, &inst.fds, &f, kind, &params).unwrap();
            let b = estimate_shapley(&inst.db, &inst.fds, &f, kind, &params).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn estimates_stay_inside_the_marginal_range(inst in strategies::single(8, false), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!inst.db.is_empty());
        let f = inst.db.fact(pick.index(inst.db.len())).id.clone();
        let params = ApproxParams::new(0.3, 0.1, Mode::Additive, seed).unwrap();
        for kind in [MeasureKind::Drastic, MeasureKind::Mi, MeasureKind::P, MeasureKind::R] {
            // Sampling fails loudly when a marginal leaves the declared range.
            let e = estimate_shapley(&inst.db, &inst.fds, &f, kind, &params).unwrap();
            prop_assert_eq!(e.guarantee, Guarantee::Additive);
            let bound = e.marginal_range.unwrap();
            prop_assert!(!e.mean.is_negative());
            prop_assert!(e.mean <= incshap::Rational::from_integer(BigInt::from(bound)));
        }
    }
}

#[test]
fn small_instance_coverage() {
    use incshap::oracle::shapley_bruteforce_subsets;
    use incshap::relational::{AttrSet, Database, Fd, FdSet, Schema};
    use num_traits::ToPrimitive;

    let schema = Schema::new([("R", vec!["A", "B"])]).unwrap();
    let db = Database::from_rows(schema, [("R", vec![vec!["a", "1"], vec!["a", "2"], vec!["b", "1"]])]).unwrap();
    let fds = FdSet::new(vec![Fd::new(0, AttrSet::singleton(0), AttrSet::singleton(1))]);
    let f = db.fact(0).id.clone();
    let exact = shapley_bruteforce_subsets(&db, &fds, &f, MeasureKind::Drastic).unwrap().to_f64().unwrap();
    assert_eq!(exact, 0.5);
    let hits = (0..200u64)
        .filter(|&seed| {
            let params = ApproxParams::new(0.05, 0.05, Mode::Additive, seed).unwrap();
            let e = estimate_shapley(&db, &fds, &f, MeasureKind::Drastic, &params).unwrap();
            (e.value - exact).abs() <= 0.05
        })
        .count();
    assert!(hits >= 190, "{hits}/200 within tolerance");
}
