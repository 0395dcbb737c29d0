//! Shapley reports. Field order of the serialized form is the declaration
//! order below and is part of the output contract.

use num_bigint::BigUint;
use serde::Serialize;

use crate::approx::{ApproxParams, Estimate, Guarantee, Mode, RNG_NAME};
use crate::combinatorics::{to_decimal, Rational};
use crate::exact::efficiency_target;
use crate::measures::MeasureKind;
use crate::relational::FactId;

pub const DECIMAL_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Approx,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Value {
    pub numerator: String,
    pub denominator: String,
    pub decimal: String,
}

impl From<&Rational> for Value {
    fn from(r: &Rational) -> Self {
        Value {
            numerator: r.numer().to_string(),
            denominator: r.denom().to_string(),
            decimal: to_decimal(r, DECIMAL_DIGITS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactEntry {
    pub fact: String,
    #[serde(flatten)]
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxMeta {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: Mode,
    pub seed: u64,
    pub rng: &'static str,
    pub samples: u64,
    pub marginal_range: Option<u64>,
    pub guarantee: Guarantee,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapleyReport {
    pub measure: &'static str,
    pub method: Method,
    pub facts: Vec<FactEntry>,
    /// The measure on the whole database.
    pub total: String,
    /// The measure on the empty database.
    pub empty_value: u32,
    /// Sum of the reported values.
    pub sum: Value,
    /// Whether the sum equals `total − empty_value`; absent when the
    /// report does not cover every fact or values are estimates.
    pub efficiency_check: Option<bool>,
    pub approx: Option<ApproxMeta>,
    #[serde(skip)]
    values: Vec<(FactId, Rational)>,
}

impl ShapleyReport {
    /// Report for exact or oracle values. `complete` marks a report that
    /// covers every fact of the database.
    pub fn new(kind: MeasureKind, method: Method, values: Vec<(FactId, Rational)>, total: &BigUint, complete: bool) -> Self {
        let sum: Rational = values.iter().map(|(_, v)| v.clone()).sum();
        let efficiency_check = (complete && method != Method::Approx).then(|| sum == efficiency_target(total, kind));
        ShapleyReport {
            measure: kind.code(),
            method,
            facts: values.iter().map(|(id, v)| FactEntry { fact: id.to_string(), value: v.into() }).collect(),
            total: total.to_string(),
            empty_value: kind.empty_value(),
            sum: (&sum).into(),
            efficiency_check,
            approx: None,
            values,
        }
    }

    /// Report for sampled estimates, which share one sampling plan.
    pub fn approx(kind: MeasureKind, estimates: Vec<(FactId, Estimate)>, total: &BigUint, params: &ApproxParams) -> Self {
        let meta = estimates.first().map(|(_, e)| ApproxMeta {
            epsilon: params.epsilon,
            delta: params.delta,
            mode: params.mode,
            seed: params.seed,
            rng: RNG_NAME,
            samples: e.samples_used,
            marginal_range: e.marginal_range,
            guarantee: e.guarantee,
            warnings: e.warnings.clone(),
        });
        let values = estimates.into_iter().map(|(id, e)| (id, e.mean)).collect();
        let mut report = ShapleyReport::new(kind, Method::Approx, values, total, false);
        report.approx = meta;
        report
    }

    pub fn values(&self) -> &[(FactId, Rational)] {
        &self.values
    }

    /// Entries by descending value, ties by fact id; at most `top`.
    pub fn ranked(&self, top: Option<usize>) -> Vec<(FactId, Rational)> {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        sorted.truncate(top.unwrap_or(sorted.len()));
        sorted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn id(i: usize) -> FactId {
        FactId { relation: "R".into(), index: i }
    }

    #[test]
    fn efficiency_flag() {
        let values = vec![(id(0), q(1, 2)), (id(1), q(1, 2)), (id(2), q(0, 1))];
        let r = ShapleyReport::new(MeasureKind::Mc, Method::Exact, values.clone(), &BigUint::from(2u32), true);
        assert_eq!(r.efficiency_check, Some(true));
        assert_eq!(r.sum.decimal, "1");
        let bad = ShapleyReport::new(MeasureKind::Mi, Method::Exact, values.clone(), &BigUint::from(2u32), true);
        assert_eq!(bad.efficiency_check, Some(false));
        let partial = ShapleyReport::new(MeasureKind::Mi, Method::Exact, values, &BigUint::from(1u32), false);
        assert_eq!(partial.efficiency_check, None);
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let values = vec![(id(2), q(1, 2)), (id(0), q(1, 3)), (id(1), q(1, 2))];
        let r = ShapleyReport::new(MeasureKind::Mi, Method::Exact, values, &BigUint::from(1u32), false);
        let order: Vec<usize> = r.ranked(None).iter().map(|(f, _)| f.index).collect();
        assert_eq!(order, vec![1, 2, 0]);
        assert_eq!(r.ranked(Some(1)).len(), 1);
    }
}
