//! Schemas, facts, databases and functional dependencies.
//!
//! Constants are opaque strings compared by exact equality. A database is a
//! set: each relation holds pairwise distinct value lists, and every fact is
//! identified by its relation name plus its zero-based load index.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Maximum number of attributes per relation (attribute sets are bitmasks).
pub const MAX_ATTRIBUTES: usize = 64;

/// A set of attribute positions of one relation.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrSet(u64);

impl AttrSet {
    pub const EMPTY: AttrSet = AttrSet(0);

    pub fn from_bits(bits: u64) -> Self {
        AttrSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(attr: usize) -> Self {
        debug_assert!(attr < MAX_ATTRIBUTES);
        AttrSet(1 << attr)
    }

    pub fn from_attrs<I: IntoIterator<Item = usize>>(attrs: I) -> Self {
        attrs.into_iter().fold(AttrSet::EMPTY, |acc, a| acc.with(a))
    }

    pub fn with(self, attr: usize) -> Self {
        AttrSet(self.0 | (1 << attr))
    }

    pub fn contains(self, attr: usize) -> bool {
        attr < MAX_ATTRIBUTES && self.0 & (1 << attr) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: AttrSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: AttrSet) -> AttrSet {
        AttrSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AttrSet) -> AttrSet {
        AttrSet(self.0 & other.0)
    }

    pub fn difference(self, other: AttrSet) -> AttrSet {
        AttrSet(self.0 & !other.0)
    }

    /// Attribute positions in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let a = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(a)
            }
        })
    }

    /// Canonical order: by size, then lexicographically on the sorted
    /// attribute positions.
    pub fn canonical_cmp(self, other: AttrSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSchema {
    pub name: String,
    pub attributes: Vec<String>,
}

impl RelationSchema {
    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn all_attributes(&self) -> AttrSet {
        AttrSet::from_attrs(0..self.arity())
    }

    /// Renders an attribute set as space-separated names (`_` when empty).
    pub fn format_attrs(&self, attrs: AttrSet) -> String {
        if attrs.is_empty() {
            return "_".to_string();
        }
        attrs
            .iter()
            .map(|a| self.attributes[a].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Ordered list of relation schemas; declaration order is significant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    relations: Vec<RelationSchema>,
}

impl Schema {
    pub fn new<N, A, I>(relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (N, Vec<A>)>,
        N: Into<String>,
        A: Into<String>,
    {
        let mut out: Vec<RelationSchema> = Vec::new();
        for (name, attrs) in relations {
            let name = name.into();
            let attributes: Vec<String> = attrs.into_iter().map(Into::into).collect();
            if out.iter().any(|r| r.name == name) {
                return Err(Error::InvalidSchema(format!("relation `{name}` declared twice")));
            }
            if attributes.is_empty() {
                return Err(Error::InvalidSchema(format!("relation `{name}` has no attributes")));
            }
            if attributes.len() > MAX_ATTRIBUTES {
                return Err(Error::InvalidSchema(format!(
                    "relation `{name}` has {} attributes (max {MAX_ATTRIBUTES})",
                    attributes.len()
                )));
            }
            for (i, a) in attributes.iter().enumerate() {
                if attributes[..i].contains(a) {
                    return Err(Error::InvalidSchema(format!(
                        "attribute `{a}` repeated in relation `{name}`"
                    )));
                }
            }
            out.push(RelationSchema { name, attributes });
        }
        Ok(Schema { relations: out })
    }

    pub fn relations(&self) -> &[RelationSchema] {
        &self.relations
    }

    pub fn relation(&self, idx: usize) -> &RelationSchema {
        &self.relations[idx]
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn require_relation(&self, name: &str) -> Result<usize> {
        self.relation_index(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    /// Resolves attribute names of a relation into an [`AttrSet`].
    pub fn attr_set<S: AsRef<str>>(&self, relation: usize, names: &[S]) -> Result<AttrSet> {
        let rel = &self.relations[relation];
        let mut set = AttrSet::EMPTY;
        for n in names {
            let n = n.as_ref();
            let idx = rel.attribute_index(n).ok_or_else(|| Error::UnknownAttribute {
                relation: rel.name.clone(),
                attribute: n.to_string(),
            })?;
            set = set.with(idx);
        }
        Ok(set)
    }
}

/// Stable fact identifier: relation name plus zero-based load index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactId {
    pub relation: String,
    pub index: usize,
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.relation, self.index)
    }
}

impl std::str::FromStr for FactId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (rel, idx) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidParams(format!("fact id `{s}` is not `Relation:index`")))?;
        let index = idx
            .parse()
            .map_err(|_| Error::InvalidParams(format!("fact id `{s}` has a non-numeric index")))?;
        Ok(FactId { relation: rel.to_string(), index })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    /// Position of the relation in the schema.
    pub relation: usize,
    pub id: FactId,
    pub values: Vec<String>,
}

impl Fact {
    pub fn agrees_on(&self, other: &Fact, attrs: AttrSet) -> bool {
        attrs.iter().all(|a| self.values[a] == other.values[a])
    }
}

/// A set of facts over a schema. Facts are stored grouped by relation in
/// schema order, and within a relation in load order; the position in this
/// flat order is the fact's *global index*.
#[derive(Clone, Debug)]
pub struct Database {
    schema: Schema,
    facts: Vec<Fact>,
    ranges: Vec<Range<usize>>,
}

impl Database {
    /// Builds a database from per-relation rows. Rows of a relation keep
    /// their order; duplicate rows are rejected.
    pub fn from_rows<N, R, V>(schema: Schema, rows: R) -> Result<Self>
    where
        R: IntoIterator<Item = (N, Vec<Vec<V>>)>,
        N: AsRef<str>,
        V: Into<String>,
    {
        let mut per_rel: Vec<Vec<Vec<String>>> = vec![Vec::new(); schema.relations().len()];
        for (name, rel_rows) in rows {
            let r = schema.require_relation(name.as_ref())?;
            per_rel[r].extend(
                rel_rows
                    .into_iter()
                    .map(|row| row.into_iter().map(Into::into).collect::<Vec<String>>()),
            );
        }
        let mut facts = Vec::new();
        let mut ranges = Vec::new();
        for (r, rel_rows) in per_rel.into_iter().enumerate() {
            let rel = schema.relation(r);
            let start = facts.len();
            let mut seen: HashMap<Vec<String>, usize> = HashMap::new();
            for (i, values) in rel_rows.into_iter().enumerate() {
                if values.len() != rel.arity() {
                    return Err(Error::ArityMismatch {
                        relation: rel.name.clone(),
                        expected: rel.arity(),
                        actual: values.len(),
                    });
                }
                if let Some(&first) = seen.get(&values) {
                    return Err(Error::DuplicateFact {
                        relation: rel.name.clone(),
                        first,
                        second: i,
                    });
                }
                seen.insert(values.clone(), i);
                facts.push(Fact {
                    relation: r,
                    id: FactId { relation: rel.name.clone(), index: i },
                    values,
                });
            }
            ranges.push(start..facts.len());
        }
        Ok(Database { schema, facts, ranges })
    }

    /// Keeps the facts whose global index satisfies `keep`. Fact ids are
    /// preserved, global indices are renumbered.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> Database {
        let mut facts = Vec::new();
        let mut ranges = Vec::new();
        for range in &self.ranges {
            let start = facts.len();
            facts.extend(range.clone().filter(|&i| keep(i)).map(|i| self.facts[i].clone()));
            ranges.push(start..facts.len());
        }
        Database { schema: self.schema.clone(), facts, ranges }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, idx: usize) -> &Fact {
        &self.facts[idx]
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Global index range of a relation's facts.
    pub fn relation_range(&self, relation: usize) -> Range<usize> {
        self.ranges[relation].clone()
    }

    pub fn relation_facts(&self, relation: usize) -> &[Fact] {
        &self.facts[self.ranges[relation].clone()]
    }

    pub fn position(&self, id: &FactId) -> Option<usize> {
        let r = self.schema.relation_index(&id.relation)?;
        self.relation_range(r).find(|&i| self.facts[i].id.index == id.index)
    }

    pub fn require(&self, id: &FactId) -> Result<usize> {
        self.position(id).ok_or_else(|| Error::FactNotFound(id.to_string()))
    }
}

/// A functional dependency `lhs -> rhs` over one relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fd {
    pub relation: usize,
    pub lhs: AttrSet,
    pub rhs: AttrSet,
}

impl Fd {
    pub fn new(relation: usize, lhs: AttrSet, rhs: AttrSet) -> Self {
        Fd { relation, lhs, rhs }
    }

    pub fn is_trivial(&self) -> bool {
        self.rhs.is_subset(self.lhs)
    }

    /// True iff the two value lists agree on the lhs and disagree on the rhs.
    pub fn violated_by(&self, f: &[String], g: &[String]) -> bool {
        self.lhs.iter().all(|a| f[a] == g[a]) && self.rhs.iter().any(|a| f[a] != g[a])
    }

    pub fn display<'a>(&'a self, schema: &'a Schema) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Fd, &'a Schema);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let rel = self.1.relation(self.0.relation);
                write!(
                    f,
                    "{}: {} -> {}",
                    rel.name,
                    rel.format_attrs(self.0.lhs),
                    rel.format_attrs(self.0.rhs)
                )
            }
        }
        D(self, schema)
    }
}

/// A set of FDs over a schema, with per-relation views.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FdSet {
    fds: Vec<Fd>,
}

impl FdSet {
    pub fn new(fds: Vec<Fd>) -> Self {
        let mut out: Vec<Fd> = Vec::with_capacity(fds.len());
        for fd in fds {
            if !out.contains(&fd) {
                out.push(fd);
            }
        }
        FdSet { fds: out }
    }

    pub fn fds(&self) -> &[Fd] {
        &self.fds
    }

    pub fn is_empty(&self) -> bool {
        self.fds.is_empty()
    }

    /// The restriction to FDs over one relation.
    pub fn for_relation(&self, relation: usize) -> Vec<Fd> {
        self.fds.iter().copied().filter(|fd| fd.relation == relation).collect()
    }

    /// Attributes of `relation` that occur in some FD over it.
    pub fn attributes_of(&self, relation: usize) -> AttrSet {
        self.fds
            .iter()
            .filter(|fd| fd.relation == relation)
            .fold(AttrSet::EMPTY, |acc, fd| acc.union(fd.lhs).union(fd.rhs))
    }
}

/// True iff `f` and `g` are distinct facts of one relation that jointly
/// violate some FD of `fds`.
pub fn violates(f: &Fact, g: &Fact, fds: &FdSet) -> Result<bool> {
    if f.relation != g.relation {
        return Ok(false);
    }
    if f.values.len() != g.values.len() {
        return Err(Error::ContractViolation(format!(
            "facts {} and {} have different arities",
            f.id, g.id
        )));
    }
    for fd in fds.fds().iter().filter(|fd| fd.relation == f.relation) {
        if fd.lhs.union(fd.rhs).iter().any(|a| a >= f.values.len()) {
            return Err(Error::ContractViolation(format!(
                "FD over relation {} does not fit facts of arity {}",
                f.id.relation,
                f.values.len()
            )));
        }
        if fd.violated_by(&f.values, &g.values) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Direct FD evaluation over a set of facts (pairwise, which suffices for FDs).
pub fn satisfies<'a, I>(facts: I, fds: &FdSet) -> bool
where
    I: IntoIterator<Item = &'a Fact>,
{
    let facts: Vec<&Fact> = facts.into_iter().collect();
    for (i, f) in facts.iter().enumerate() {
        for g in &facts[i + 1..] {
            if f.relation == g.relation
                && fds
                    .fds()
                    .iter()
                    .any(|fd| fd.relation == f.relation && fd.violated_by(&f.values, &g.values))
            {
                return false;
            }
        }
    }
    true
}

/// The train-schedule running example: nine facts over
/// `Trains(train, departs, arrives, time, duration)` and the FDs
/// `train time -> departs`, `train time duration -> arrives`.
pub fn trains_example() -> (Database, FdSet) {
    let schema = Schema::new([(
        "Trains",
        vec!["train", "departs", "arrives", "time", "duration"],
    )])
    .expect("valid schema");
    let rows = [
        ["16", "NYP", "BBY", "1030", "315"],
        ["16", "NYP", "PVD", "1030", "250"],
        ["16", "PHL", "WIL", "1030", "20"],
        ["16", "PHL", "BAL", "1030", "70"],
        ["16", "PHL", "WAS", "1030", "120"],
        ["16", "BBY", "PHL", "1030", "260"],
        ["16", "BBY", "NYP", "1030", "260"],
        ["16", "BBY", "WAS", "1030", "420"],
        ["16", "WAS", "PVD", "1030", "390"],
    ];
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    let db = Database::from_rows(schema, [("Trains", rows)]).expect("distinct rows");
    let s = db.schema();
    let fds = FdSet::new(vec![
        Fd::new(
            0,
            s.attr_set(0, &["train", "time"]).unwrap(),
            s.attr_set(0, &["departs"]).unwrap(),
        ),
        Fd::new(
            0,
            s.attr_set(0, &["train", "time", "duration"]).unwrap(),
            s.attr_set(0, &["arrives"]).unwrap(),
        ),
    ]);
    (db, fds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attr_set_basics() {
        let a = AttrSet::from_attrs([0, 2]);
        assert!(a.contains(0) && !a.contains(1) && a.contains(2));
        assert_eq!(a.len(), 2);
        assert!(AttrSet::singleton(2).is_subset(a));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(
            AttrSet::from_attrs([1]).canonical_cmp(AttrSet::from_attrs([0, 2])),
            std::cmp::Ordering::Less
        );
        assert_eq!(
            AttrSet::from_attrs([0, 2]).canonical_cmp(AttrSet::from_attrs([1, 2])),
            std::cmp::Ordering::Less
        );
    }

    #[test]
    fn schema_rejects_bad_declarations() {
        assert!(Schema::new([("R", vec!["A", "A"])]).is_err());
        assert!(Schema::new([("R", Vec::<&str>::new())]).is_err());
        assert!(Schema::new([("R", vec!["A"]), ("R", vec!["B"])]).is_err());
    }

    #[test]
    fn duplicate_rows_are_rejected() {
        let schema = Schema::new([("R", vec!["A", "B"])]).unwrap();
        let err = Database::from_rows(
            schema,
            [("R", vec![vec!["a", "1"], vec!["b", "1"], vec!["a", "1"]])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateFact { first: 0, second: 2, .. }));
    }

    #[test]
    fn trains_violations() {
        let (db, fds) = trains_example();
        let f = |i: usize| db.fact(i);
        // Trains:0 vs Trains:2: same train and time, different departure station.
        assert!(violates(f(0), f(2), &fds).unwrap());
        // Trains:0 vs Trains:1: same departure, durations differ.
        assert!(!violates(f(0), f(1), &fds).unwrap());
        assert!(!violates(f(0), f(0), &fds).unwrap());
        // Trains:5 vs Trains:6: same duration, different arrival.
        assert!(violates(f(5), f(6), &fds).unwrap());
    }

    #[test]
    fn fact_id_round_trip() {
        let id: FactId = "Trains:3".parse().unwrap();
        assert_eq!(id, FactId { relation: "Trains".into(), index: 3 });
        assert_eq!(id.to_string(), "Trains:3");
        assert!("Trains".parse::<FactId>().is_err());
    }

    #[test]
    fn satisfies_matches_example_repairs() {
        let (db, fds) = trains_example();
        assert!(!satisfies(db.facts(), &fds));
        assert!(satisfies([db.fact(2), db.fact(3), db.fact(4)], &fds));
        assert!(satisfies(std::iter::empty(), &fds));
    }
}
