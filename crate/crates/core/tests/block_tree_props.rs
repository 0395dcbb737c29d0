mod common;

use common::strategies;
use incshap::block_tree::{build_tree, BlockTree, NodeKind};
use incshap::combinatorics::binomial;
use incshap::conflict::ConflictGraphs;
use incshap::exact::r_vertex_tables;
use incshap::fd::classify;
use proptest::prelude::*;

fn tree_of(inst: &common::Instance) -> BlockTree {
    let class = &classify(inst.db.schema(), &inst.fds)[0];
    let chain = class.chain().expect("chain instance");
    let facts: Vec<usize> = (0..inst.db.len()).collect();
    build_tree(&inst.db, &facts, chain).unwrap()
}

proptest! {
    #[test]
    fn different_subblocks_of_a_block_conflict(inst in strategies::single(8, true)) {
        let tree = tree_of(&inst);
        for node in tree.nodes().iter().filter(|n| n.kind == NodeKind::Block) {
            let fd = &tree.chain()[node.level - 1];
            for (i, &a) in node.children.iter().enumerate() {
                for &b in &node.children[i + 1..] {
                    for &f in &tree.node(a).facts {
                        for &g in &tree.node(b).facts {
                            prop_assert!(fd.violated_by(&inst.db.fact(f).values, &inst.db.fact(g).values));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn every_conflict_sits_in_a_block_of_its_level(inst in strategies::single(8, true)) {
        let tree = tree_of(&inst);
        let graphs = ConflictGraphs::build(&inst.db, &inst.fds);
        for a in 0..inst.db.len() {
            for &b in graphs.neighbors(a) {
                let (fa, fb) = (&inst.db.fact(a).values, &inst.db.fact(b).values);
                let explained = tree.nodes().iter().any(|n| {
                    n.kind == NodeKind::Block
                        && n.facts.contains(&a)
                        && n.facts.contains(&b)
                        && tree.chain()[n.level - 1].violated_by(fa, fb)
                });
                prop_assert!(explained, "edge {} {}", a, b);
            }
        }
    }

    #[test]
    fn children_partition_their_parent(inst in strategies::single(8, true)) {
        let tree = tree_of(&inst);
        prop_assert_eq!(tree.root().facts.len(), inst.db.len());
        for node in tree.nodes() {
            prop_assert!(node.facts.windows(2).all(|w| w[0] < w[1]));
            if node.is_leaf() {
                prop_assert!(node.kind == NodeKind::Root || (node.kind == NodeKind::Subblock && node.level == tree.chain().len()));
                continue;
            }
            let mut union: Vec<usize> = node.children.iter().flat_map(|&c| tree.node(c).facts.clone()).collect();
            union.sort_unstable();
            prop_assert_eq!(&union, &node.facts);
        }
    }

    #[test]
    fn construction_is_deterministic(inst in strategies::single(8, true)) {
        let (a, b) = (tree_of(&inst), tree_of(&inst));
        prop_assert_eq!(a.dump(&inst.db), b.dump(&inst.db));
        let again = build_tree(&inst.db, &a.root().facts, a.chain()).unwrap();
        prop_assert_eq!(again.dump(&inst.db), a.dump(&inst.db));
    }

    #[test]
    fn cost_tables_count_every_subset(inst in strategies::single(8, true)) {
        let tree = tree_of(&inst);
        let tables = r_vertex_tables(&tree);
        for (node, table) in tree.nodes().iter().zip(&tables) {
            for j in 0..=node.len() {
                prop_assert_eq!(table.row_sum(j), binomial(node.len(), j));
            }
        }
    }
}
