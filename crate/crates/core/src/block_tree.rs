//! The block tree of a relation under an lhs-chain FD order.
//!
//! Below the root, levels alternate: a level-`i` block groups facts that
//! agree on the lhs of the `i`-th FD, and its level-`i` subblocks split it
//! further by lhs plus rhs. Level-`n` subblocks are the leaves. The root
//! behaves like a level-0 subblock.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::relational::{AttrSet, Database, Fact, Fd};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Root,
    Block,
    Subblock,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    /// 0 for the root, else the 1-based index of the FD in the chain.
    pub level: usize,
    /// Global fact indices, ascending.
    pub facts: Vec<usize>,
    pub children: Vec<usize>,
}

impl Node {
    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// How an outside fact relates to the facts of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Conflicts,
    Matches,
    Neither,
}

#[derive(Clone, Debug)]
pub struct BlockTree {
    nodes: Vec<Node>,
    chain: Vec<Fd>,
}

pub const ROOT: usize = 0;

impl BlockTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[ROOT]
    }

    pub fn chain(&self) -> &[Fd] {
        &self.chain
    }

    /// Node ids in post-order (children before parents).
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(ROOT, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Attributes `f` must share with a vertex for it to match.
    fn match_attrs(&self, node: &Node) -> AttrSet {
        let mut attrs = AttrSet::EMPTY;
        for (j, fd) in self.chain.iter().enumerate().take(node.level) {
            attrs = attrs.union(fd.lhs);
            if j + 1 < node.level || node.kind == NodeKind::Subblock {
                attrs = attrs.union(fd.rhs);
            }
        }
        attrs
    }

    /// Relation between a fact outside the tree and vertex `id`, judged
    /// against the vertex's first fact.
    pub fn relate(&self, db: &Database, f: &Fact, id: usize) -> Relation {
        let node = &self.nodes[id];
        let Some(&rep) = node.facts.first() else {
            return Relation::Neither;
        };
        let g = db.fact(rep);
        let checked = match node.kind {
            NodeKind::Root => 0,
            NodeKind::Block => node.level - 1,
            NodeKind::Subblock => node.level,
        };
        let conflicts = self.chain[..checked]
            .iter()
            .any(|fd| f.agrees_on(g, fd.lhs) && !f.agrees_on(g, fd.rhs));
        if conflicts {
            Relation::Conflicts
        } else if f.agrees_on(g, self.match_attrs(node)) {
            Relation::Matches
        } else {
            Relation::Neither
        }
    }

    /// Indented text rendering, one vertex per line.
    pub fn dump(&self, db: &Database) -> String {
        let mut out = String::new();
        self.dump_node(db, ROOT, 0, &mut out);
        out
    }

    fn dump_node(&self, db: &Database, id: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[id];
        let label = match node.kind {
            NodeKind::Root => "root".to_string(),
            NodeKind::Block => format!("block L{}", node.level),
            NodeKind::Subblock => format!("subblock L{}", node.level),
        };
        let ids: Vec<String> = node.facts.iter().map(|&i| db.fact(i).id.to_string()).collect();
        let _ = writeln!(out, "{}{} [{}]", "  ".repeat(depth), label, ids.join(", "));
        for &c in &node.children {
            self.dump_node(db, c, depth + 1, out);
        }
    }
}

/// Groups facts by their projection on `attrs`, in order of first
/// appearance.
fn group_by(db: &Database, facts: &[usize], attrs: AttrSet) -> Vec<Vec<usize>> {
    let mut index: HashMap<Vec<&str>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in facts {
        let key: Vec<&str> = attrs.iter().map(|a| db.fact(i).values[a].as_str()).collect();
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(i);
    }
    groups
}

/// Builds the tree over `facts` (global indices of one relation).
pub fn build_tree(db: &Database, facts: &[usize], chain: &[Fd]) -> Result<BlockTree> {
    for pair in chain.windows(2) {
        if !pair[0].lhs.is_subset(pair[1].lhs) {
            return Err(Error::ContractViolation(
                "block tree requires FDs ordered by ascending lhs".into(),
            ));
        }
    }
    let mut facts = facts.to_vec();
    facts.sort_unstable();
    let mut tree = BlockTree {
        nodes: vec![Node { kind: NodeKind::Root, level: 0, facts, children: Vec::new() }],
        chain: chain.to_vec(),
    };
    let mut pending = vec![ROOT];
    while let Some(id) = pending.pop() {
        let (kind, level) = (tree.nodes[id].kind, tree.nodes[id].level);
        let (child_kind, child_level, key) = match kind {
            NodeKind::Root | NodeKind::Subblock => {
                if level == chain.len() {
                    continue;
                }
                (NodeKind::Block, level + 1, chain[level].lhs)
            }
            NodeKind::Block => {
                let fd = &chain[level - 1];
                (NodeKind::Subblock, level, fd.lhs.union(fd.rhs))
            }
        };
        for group in group_by(db, &tree.nodes[id].facts, key) {
            let child = tree.nodes.len();
            tree.nodes.push(Node { kind: child_kind, level: child_level, facts: group, children: Vec::new() });
            tree.nodes[id].children.push(child);
            pending.push(child);
        }
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::classify;
    use crate::relational::trains_example;

    fn trains_tree(skip_last: bool) -> (Database, BlockTree) {
        let (db, fds) = trains_example();
        let chain = classify(db.schema(), &fds)[0].chain().unwrap().to_vec();
        let facts: Vec<usize> = (0..db.len()).filter(|&i| !(skip_last && i == 8)).collect();
        let tree = build_tree(&db, &facts, &chain).unwrap();
        (db, tree)
    }

    fn child_facts(tree: &BlockTree, id: usize) -> Vec<Vec<usize>> {
        tree.node(id).children.iter().map(|&c| tree.node(c).facts.clone()).collect()
    }

    #[test]
    fn trains_tree_structure() {
        let (_, tree) = trains_tree(true);
        let root = tree.root();
        assert_eq!(root.facts.len(), 8);
        // all facts share train and time: a single level-1 block
        assert_eq!(root.children.len(), 1);
        let b1 = root.children[0];
        assert_eq!(child_facts(&tree, b1), vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]]);
        let bby = tree.node(b1).children[2];
        assert_eq!(tree.node(bby).kind, NodeKind::Subblock);
        let b2 = tree.node(bby).children.clone();
        let split: Vec<Vec<Vec<usize>>> = b2.iter().map(|&b| child_facts(&tree, b)).collect();
        assert_eq!(split, vec![vec![vec![5], vec![6]], vec![vec![7]]]);
        for id in tree.post_order() {
            let node = tree.node(id);
            if node.is_leaf() {
                assert!(node.kind == NodeKind::Subblock && node.level == 2);
            }
        }
    }

    #[test]
    fn relate_examples() {
        let (db, tree) = trains_tree(true);
        let from_was = db.fact(8);
        let b1 = tree.root().children[0];
        assert_eq!(tree.relate(&db, from_was, ROOT), Relation::Matches);
        assert_eq!(tree.relate(&db, from_was, b1), Relation::Matches);
        let nyp = tree.node(b1).children[0];
        assert_eq!(tree.relate(&db, from_was, nyp), Relation::Conflicts);

        let bby_phl = db.fact(5);
        let bby = tree.node(b1).children[2];
        assert_eq!(tree.relate(&db, bby_phl, bby), Relation::Matches);
        let leaf = tree.node(tree.node(bby).children[0]).children[0];
        assert_eq!(tree.relate(&db, bby_phl, leaf), Relation::Matches);
    }

    #[test]
    fn other_train_is_neither() {
        let (db, fds) = trains_example();
        let chain = classify(db.schema(), &fds)[0].chain().unwrap().to_vec();
        let schema = db.schema().clone();
        let other = Database::from_rows(schema, [("Trains", vec![vec!["17", "NYP", "BBY", "1030", "315"]])])
            .unwrap();
        let tree = build_tree(&db, &(0..9).collect::<Vec<_>>(), &chain).unwrap();
        let b1 = tree.root().children[0];
        assert_eq!(tree.relate(&db, other.fact(0), b1), Relation::Neither);
    }

    #[test]
    fn degenerate_trees() {
        let (db, fds) = trains_example();
        let chain = classify(db.schema(), &fds)[0].chain().unwrap().to_vec();
        let single = build_tree(&db, &[3], &chain).unwrap();
        assert_eq!(single.nodes().len(), 5);
        let flat = build_tree(&db, &[0, 1, 2], &[]).unwrap();
        assert_eq!(flat.nodes().len(), 1);
        assert!(flat.root().is_leaf());
        let mut reversed = chain.clone();
        reversed.reverse();
        assert!(build_tree(&db, &[0], &reversed).is_err());
    }

    #[test]
    fn dump_is_indented() {
        let (db, tree) = trains_tree(true);
        let text = tree.dump(&db);
        assert!(text.starts_with("root [Trains:0"));
        assert!(text.contains("\n  block L1 ["));
        assert!(text.contains("\n      block L2 [Trains:5, Trains:6]"));
    }
}
