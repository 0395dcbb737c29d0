//! Conflict graphs: one vertex per fact, one edge per violating pair.
//!
//! For FDs a set of facts is consistent iff it is pairwise consistent, so
//! every measure in this crate is a function of these graphs.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::relational::{Database, FdSet};

/// The conflict graph of one relation. Vertices are local positions
/// `0..len()` in load order; `vertices[i]` is the global fact index.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    pub relation: usize,
    vertices: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Edges as local pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, local: usize) -> &[usize] {
        &self.adjacency[local]
    }

    pub fn degree(&self, local: usize) -> usize {
        self.adjacency[local].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.vertices.binary_search(&global).ok()
    }
}

/// Builds the conflict graph of one relation.
pub fn build_relation_graph(db: &Database, fds: &FdSet, relation: usize) -> ConflictGraph {
    let range = db.relation_range(relation);
    let vertices: Vec<usize> = range.clone().collect();
    let facts = db.relation_facts(relation);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for fd in fds.for_relation(relation) {
        // Group by lhs projection, then split each group by rhs projection:
        // facts of the same lhs group but different rhs groups conflict.
        let mut groups: HashMap<Vec<&str>, Vec<usize>> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            let key = fd.lhs.iter().map(|a| f.values[a].as_str()).collect();
            groups.entry(key).or_default().push(i);
        }
        for members in groups.values() {
            if members.len() < 2 {
                continue;
            }
            let mut rhs_class: HashMap<Vec<&str>, usize> = HashMap::new();
            let classes: Vec<usize> = members
                .iter()
                .map(|&i| {
                    let key: Vec<&str> = fd.rhs.iter().map(|a| facts[i].values[a].as_str()).collect();
                    let next = rhs_class.len();
                    *rhs_class.entry(key).or_insert(next)
                })
                .collect();
            if rhs_class.len() < 2 {
                continue;
            }
            for x in 0..members.len() {
                for y in x + 1..members.len() {
                    if classes[x] != classes[y] {
                        let (a, b) = (members[x].min(members[y]), members[x].max(members[y]));
                        edges.insert((a, b));
                    }
                }
            }
        }
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    ConflictGraph { relation, vertices, adjacency, edges: edges.into_iter().collect() }
}

/// Conflict graphs of every relation plus a global adjacency view.
#[derive(Clone, Debug)]
pub struct ConflictGraphs {
    per_relation: Vec<ConflictGraph>,
    adjacency: Vec<FixedBitSet>,
    neighbors: Vec<Vec<usize>>,
}

impl ConflictGraphs {
    pub fn build(db: &Database, fds: &FdSet) -> Self {
        let per_relation: Vec<ConflictGraph> = (0..db.schema().relations().len())
            .map(|r| build_relation_graph(db, fds, r))
            .collect();
        let n = db.len();
        let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
        let mut neighbors = vec![Vec::new(); n];
        for g in &per_relation {
            for &(a, b) in g.edges() {
                let (ga, gb) = (g.vertices[a], g.vertices[b]);
                adjacency[ga].insert(gb);
                adjacency[gb].insert(ga);
                neighbors[ga].push(gb);
                neighbors[gb].push(ga);
            }
        }
        for ns in &mut neighbors {
            ns.sort_unstable();
        }
        ConflictGraphs { per_relation, adjacency, neighbors }
    }

    pub fn relation(&self, r: usize) -> &ConflictGraph {
        &self.per_relation[r]
    }

    pub fn relations(&self) -> &[ConflictGraph] {
        &self.per_relation
    }

    /// Number of facts (global vertices).
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.per_relation.iter().map(ConflictGraph::edge_count).sum()
    }

    /// Neighbors of a global fact index, as global indices.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn adjacency(&self, v: usize) -> &FixedBitSet {
        &self.adjacency[v]
    }

    /// Adjacency bitsets of all global vertices.
    pub fn adjacency_slice(&self) -> &[FixedBitSet] {
        &self.adjacency
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }
}

/// True iff the database satisfies the FDs.
pub fn is_consistent(db: &Database, fds: &FdSet) -> bool {
    (0..db.schema().relations().len()).all(|r| build_relation_graph(db, fds, r).edge_count() == 0)
}
