//! Permutation-sampling Shapley estimates with Hoeffding sample counts.
//!
//! Sample `i` draws its permutation from ChaCha8 seeded with the run seed on
//! stream `i`, so estimates do not depend on thread scheduling.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::Rational;
use crate::conflict::ConflictGraphs;
use crate::error::{Error, Result};
use crate::fd::{classify, TractabilityClass};
use crate::measures::{measure_subset, MeasureKind, DEFAULT_BUDGET};
use crate::relational::{Database, FactId, FdSet};

pub const RNG_NAME: &str = "ChaCha8 (seed_from_u64, stream = sample index)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Additive,
    Multiplicative,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" | "add" => Ok(Mode::Additive),
            "multiplicative" | "mult" => Ok(Mode::Multiplicative),
            other => Err(Error::InvalidParams(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Guarantee {
    Additive,
    Multiplicative,
    NoGuarantee,
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guarantee::Additive => "Additive",
            Guarantee::Multiplicative => "Multiplicative",
            Guarantee::NoGuarantee => "NoGuarantee",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Fixed number of samples instead of the computed count.
    pub samples: Option<u64>,
    /// Declared bound on a single marginal, for measures without one.
    pub marginal_cap: Option<u64>,
}

impl ApproxParams {
    pub fn new(epsilon: f64, delta: f64, mode: Mode, seed: u64) -> Result<Self> {
        let p = ApproxParams { epsilon, delta, mode, seed, samples: None, marginal_cap: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(self.epsilon) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !open(self.delta) {
            return Err(Error::InvalidParams(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidParams("sample count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of samples, marginal range and guarantee for one estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePlan {
    pub samples: u64,
    pub marginal_range: Option<u64>,
    pub guarantee: Guarantee,
    pub warnings: Vec<String>,
}

fn hoeffding(range: f64, epsilon: f64, delta: f64) -> u64 {
    let n = (range * range * (2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil();
    (n as u64).max(1)
}

/// Two-sided Hoeffding count for the additive mode; the multiplicative
/// mode substitutes `ε / (n(n−1))`, the smallest non-zero drastic or
/// cardinality-repair Shapley value.
pub fn sample_count(params: &ApproxParams, n: usize, kind: MeasureKind) -> Result<u64> {
    Ok(plan(params, n, kind, None)?.samples)
}

/// Full sampling plan. `class` is the tractability class of the fact's
/// relation when known; it decides whether a multiplicative R estimate
/// keeps its guarantee.
pub fn plan(params: &ApproxParams, n: usize, kind: MeasureKind, class: Option<&TractabilityClass>) -> Result<SamplePlan> {
    params.validate()?;
    let mut warnings = Vec::new();
    let declared = kind.marginal_bound(n).or(params.marginal_cap);
    let (epsilon, mut guarantee) = match (params.mode, kind) {
        (Mode::Additive, MeasureKind::Mc) if params.marginal_cap.is_none() => {
            warnings.push("MC marginals have no known bound; the estimate carries no guarantee".into());
            (params.epsilon, Guarantee::NoGuarantee)
        }
        (Mode::Additive, MeasureKind::Mc) => {
            warnings.push("MC guarantee rests on the user-declared marginal cap".into());
            (params.epsilon, Guarantee::Additive)
        }
        (Mode::Additive, _) => (params.epsilon, Guarantee::Additive),
        (Mode::Multiplicative, MeasureKind::Mi | MeasureKind::P) => {
            return Err(Error::UnsupportedMode(format!(
                "multiplicative mode is not offered for {kind}; use the exact method"
            )));
        }
        (Mode::Multiplicative, MeasureKind::Mc) => {
            warnings.push("no multiplicative approximation is known for MC; the estimate carries no guarantee".into());
            (params.epsilon, Guarantee::NoGuarantee)
        }
        (Mode::Multiplicative, MeasureKind::Drastic | MeasureKind::R) => {
            let gap = if n >= 2 { (n * (n - 1)) as f64 } else { 1.0 };
            let g = if kind == MeasureKind::R && matches!(class, Some(TractabilityClass::HardCRepair)) {
                warnings.push("multiplicative R estimates have no guarantee on this FD class".into());
                Guarantee::NoGuarantee
            } else {
                Guarantee::Multiplicative
            };
            (params.epsilon / gap, g)
        }
    };
    let range = declared.unwrap_or(1).max(1) as f64;
    let required = hoeffding(range, epsilon, params.delta);
    let samples = match params.samples {
        Some(s) => {
            if s < required && guarantee != Guarantee::NoGuarantee {
                warnings.push(format!("{s} samples is below the {required} the bound requires"));
                guarantee = Guarantee::NoGuarantee;
            }
            s
        }
        None => required,
    };
    Ok(SamplePlan { samples, marginal_range: declared, guarantee, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// The sample mean as an exact rational.
    pub mean: Rational,
    pub samples_used: u64,
    pub marginal_range: Option<u64>,
    pub guarantee: Guarantee,
    pub warnings: Vec<String>,
}

/// Estimates the Shapley value of `f` as the mean marginal contribution
/// over sampled permutations.
pub fn estimate_shapley(db: &Database, fds: &FdSet, f: &FactId, kind: MeasureKind, params: &ApproxParams) -> Result<Estimate> {
    let idx = db.require(f)?;
    let graphs = ConflictGraphs::build(db, fds);
    let classes = classify(db.schema(), fds);
    estimate_with(db, &graphs, &classes, idx, kind, params)
}

/// As [`estimate_shapley`] with prebuilt conflict graphs and classes.
pub fn estimate_with(
    db: &Database,
    graphs: &ConflictGraphs,
    classes: &[TractabilityClass],
    f: usize,
    kind: MeasureKind,
    params: &ApproxParams,
) -> Result<Estimate> {
    let n = db.len();
    let rf = db.fact(f).relation;
    let plan = plan(params, n, kind, Some(&classes[rf]))?;
    // MI, P and R only see f's relation; the other facts cancel out.
    let local = matches!(kind, MeasureKind::Mi | MeasureKind::P | MeasureKind::R);
    let range = db.relation_range(rf);

    let marginals: Vec<i64> = (0..plan.samples)
        .into_par_iter()
        .map(|i| -> Result<i64> {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut before = FixedBitSet::with_capacity(n);
            for &v in order.iter().take_while(|&&v| v != f) {
                if !local || range.contains(&v) {
                    before.insert(v);
                }
            }
            let without = measure_subset(kind, graphs, &before, DEFAULT_BUDGET)?;
            before.insert(f);
            let with = measure_subset(kind, graphs, &before, DEFAULT_BUDGET)?;
            let m = BigInt::from(with) - BigInt::from(without);
            let m = m.to_i64().ok_or_else(|| Error::ContractViolation("marginal overflows i64".into()))?;
            if let Some(bound) = plan.marginal_range {
                if m < 0 || m as u64 > bound {
                    return Err(Error::ContractViolation(format!(
                        "marginal {m} outside the declared range [0, {bound}]"
                    )));
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let total: i128 = marginals.iter().map(|&m| i128::from(m)).sum();
    let mean = Rational::new(BigInt::from(total), BigInt::from(plan.samples));
    Ok(Estimate {
        value: mean.to_f64().unwrap_or(f64::NAN),
        mean,
        samples_used: plan.samples,
        marginal_range: plan.marginal_range,
        guarantee: plan.guarantee,
        warnings: plan.warnings,
    })
}
