//! Exact graph searches on induced subgraphs of a conflict graph: minimum
//! vertex cover (cardinality-repair cost) and maximal independent sets
//! (repairs).

use fixedbitset::FixedBitSet;

/// Node budget shared by one search.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn tick(&mut self) -> Result<(), Exhausted> {
        self.used += 1;
        if self.used > self.limit {
            Err(Exhausted)
        } else {
            Ok(())
        }
    }
}

fn first(set: &FixedBitSet) -> Option<usize> {
    set.ones().next()
}

fn neighbors_in(adj: &FixedBitSet, set: &FixedBitSet) -> FixedBitSet {
    let mut n = adj.clone();
    n.intersect_with(set);
    n
}

/// Connected components of the subgraph induced by `vertices`.
pub fn components(vertices: &FixedBitSet, adj: &[FixedBitSet]) -> Vec<FixedBitSet> {
    let mut remaining = vertices.clone();
    let mut out = Vec::new();
    while let Some(start) = first(&remaining) {
        let mut comp = FixedBitSet::with_capacity(vertices.len());
        let mut stack = vec![start];
        remaining.set(start, false);
        comp.insert(start);
        while let Some(v) = stack.pop() {
            let next = neighbors_in(&adj[v], &remaining);
            for u in next.ones() {
                remaining.set(u, false);
                comp.insert(u);
                stack.push(u);
            }
        }
        out.push(comp);
    }
    out
}

/// Size of a minimum vertex cover of the subgraph induced by `vertices`.
pub fn min_vertex_cover(
    vertices: &FixedBitSet,
    adj: &[FixedBitSet],
    budget: &mut Budget,
) -> Result<usize, Exhausted> {
    cover_rec(vertices.clone(), adj, budget)
}

fn cover_rec(mut s: FixedBitSet, adj: &[FixedBitSet], budget: &mut Budget) -> Result<usize, Exhausted> {
    budget.tick()?;
    let mut cover = 0;
    // Degree-0 vertices never join a cover; for a degree-1 vertex, taking
    // its neighbor is always optimal.
    loop {
        let mut changed = false;
        let current: Vec<usize> = s.ones().collect();
        for v in current {
            if !s.contains(v) {
                continue;
            }
            match adj[v].intersection_count(&s) {
                0 => {
                    s.set(v, false);
                    changed = true;
                }
                1 => {
                    let u = neighbors_in(&adj[v], &s).ones().next().expect("degree one");
                    s.set(u, false);
                    s.set(v, false);
                    cover += 1;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    if s.is_clear() {
        return Ok(cover);
    }
    let comps = components(&s, adj);
    if comps.len() > 1 {
        for comp in comps {
            cover += cover_rec(comp, adj, budget)?;
        }
        return Ok(cover);
    }
    let v = s
        .ones()
        .max_by_key(|&v| (adj[v].intersection_count(&s), std::cmp::Reverse(v)))
        .expect("non-empty");
    let nv = neighbors_in(&adj[v], &s);

    let mut take_v = s.clone();
    take_v.set(v, false);
    let a = 1 + cover_rec(take_v, adj, budget)?;

    let mut take_nv = s;
    take_nv.difference_with(&nv);
    take_nv.set(v, false);
    let b = nv.count_ones(..) + cover_rec(take_nv, adj, budget)?;

    Ok(cover + a.min(b))
}

/// Number of maximal independent sets of the subgraph induced by
/// `vertices` (which is connected or not; the empty graph has one).
pub fn count_maximal_independent_sets(
    vertices: &FixedBitSet,
    adj: &[FixedBitSet],
    budget: &mut Budget,
) -> Result<u64, Exhausted> {
    let mut sink = |_: &[usize]| true;
    mis_rec(
        vertices.clone(),
        FixedBitSet::with_capacity(vertices.len()),
        &mut Vec::new(),
        adj,
        budget,
        &mut sink,
        false,
    )
}

/// Enumerates maximal independent sets (vertices ascending within each
/// set). `visit` returns false to stop early; the return value is the
/// number of sets visited.
pub fn enumerate_maximal_independent_sets<F: FnMut(&[usize]) -> bool>(
    vertices: &FixedBitSet,
    adj: &[FixedBitSet],
    budget: &mut Budget,
    visit: &mut F,
) -> Result<u64, Exhausted> {
    mis_rec(
        vertices.clone(),
        FixedBitSet::with_capacity(vertices.len()),
        &mut Vec::new(),
        adj,
        budget,
        visit,
        true,
    )
}

// Bron–Kerbosch with pivoting, run on the complement graph: `chosen` is the
// current independent set, `p` the vertices still addable, `x` the addable
// vertices already explored in a sibling branch.
fn mis_rec<F: FnMut(&[usize]) -> bool>(
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    chosen: &mut Vec<usize>,
    adj: &[FixedBitSet],
    budget: &mut Budget,
    visit: &mut F,
    report: bool,
) -> Result<u64, Exhausted> {
    budget.tick()?;
    if p.is_clear() {
        if x.is_clear() {
            if report {
                let mut set = chosen.clone();
                set.sort_unstable();
                if !visit(&set) {
                    return Ok(u64::MAX);
                }
            }
            return Ok(1);
        }
        return Ok(0);
    }
    // Pivot minimizing the closed neighborhood inside p.
    let pivot = p
        .ones()
        .chain(x.ones())
        .min_by_key(|&u| (adj[u].intersection_count(&p) + usize::from(p.contains(u)), u))
        .expect("p non-empty");
    let mut branch = neighbors_in(&adj[pivot], &p);
    if p.contains(pivot) {
        branch.insert(pivot);
    }
    let mut total: u64 = 0;
    for v in branch.ones().collect::<Vec<_>>() {
        let mut np = p.clone();
        np.difference_with(&adj[v]);
        np.set(v, false);
        let mut nx = x.clone();
        nx.difference_with(&adj[v]);
        chosen.push(v);
        let got = mis_rec(np, nx, chosen, adj, budget, visit, report)?;
        chosen.pop();
        if got == u64::MAX {
            return Ok(u64::MAX);
        }
        total += got;
        p.set(v, false);
        x.insert(v);
    }
    Ok(total)
}
