//! Test-side oracles, written independently of the library's evaluators.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dnmtp::{Graph, NodeId, RootedTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// e=0 -> c=1 -> {x=2 -> r1=4, y=3 -> r2=5}
pub fn t1() -> RootedTree {
    RootedTree::from_arcs(0, &[(0, 1), (1, 2), (2, 4), (1, 3), (3, 5)], [4, 5])
}

/// A random tree with at most `max_nodes` nodes and 1..=`max_dests`
/// destinations, some of them internal. Node ids are shuffled so that id
/// order does not follow the tree shape.
pub fn random_tree(seed: u64, max_nodes: usize, max_dests: usize) -> RootedTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    // random recursive tree over positions 0..n
    let parent: Vec<usize> = (0..n)
        .map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) })
        .collect();
    let mut ids: Vec<NodeId> = (0..n).map(|i| i * 3 + 1).collect();
    ids.shuffle(&mut rng);
    let n_dest = rng.gen_range(1..=max_dests.min(n - 1));
    let mut others: Vec<usize> = (1..n).collect();
    others.shuffle(&mut rng);
    let dests: BTreeSet<usize> = others[..n_dest].iter().copied().collect();
    // keep only the union of root paths to the destinations
    let mut keep = BTreeSet::new();
    for &d in &dests {
        let mut u = d;
        while u != 0 && keep.insert(u) {
            u = parent[u];
        }
    }
    let arcs: Vec<(NodeId, NodeId)> = keep.iter().map(|&u| (ids[parent[u]], ids[u])).collect();
    RootedTree::from_arcs(ids[0], &arcs, dests.iter().map(|&d| ids[d]))
}

pub fn children_of(tree: &RootedTree) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut ch: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (&c, &p) in tree.parent_map() {
        ch.entry(p).or_default().push(c);
    }
    ch
}

pub fn non_root_nodes(tree: &RootedTree) -> Vec<NodeId> {
    tree.parent_map().keys().copied().collect()
}

/// Path number by direct recursion.
pub fn path_number(
    tree: &RootedTree,
    ch: &BTreeMap<NodeId, Vec<NodeId>>,
    d: &BTreeSet<NodeId>,
    u: NodeId,
) -> u64 {
    if d.contains(&u) {
        return 1;
    }
    let below: u64 = ch.get(&u).map_or(0, |cs| {
        cs.iter().map(|&c| path_number(tree, ch, d, c)).sum()
    });
    below + u64::from(tree.is_destination(u))
}

pub fn oracle_load(tree: &RootedTree, d: &BTreeSet<NodeId>) -> u64 {
    let ch = children_of(tree);
    non_root_nodes(tree)
        .iter()
        .map(|&u| path_number(tree, &ch, d, u))
        .sum()
}

/// Every subset of non-root nodes with at most `k` elements.
pub fn subsets(nodes: &[NodeId], k: usize) -> Vec<BTreeSet<NodeId>> {
    let mut out = vec![BTreeSet::new()];
    for &u in nodes {
        let grown: Vec<_> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut s = s.clone();
                s.insert(u);
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

pub fn oracle_optimum(tree: &RootedTree, k: usize) -> u64 {
    subsets(&non_root_nodes(tree), k)
        .iter()
        .map(|d| oracle_load(tree, d))
        .min()
        .expect("empty set")
}

/// (paths, diffusers, load) on the arc entering `u`, built bottom-up from
/// the one-child and many-children case equations.
pub fn case_window(
    tree: &RootedTree,
    ch: &BTreeMap<NodeId, Vec<NodeId>>,
    d: &BTreeSet<NodeId>,
    u: NodeId,
) -> (u64, usize, u64) {
    let kids: Vec<_> = ch.get(&u).map_or(Vec::new(), |cs| {
        cs.iter().map(|&c| case_window(tree, ch, d, c)).collect()
    });
    let (p, dd, l) = kids
        .iter()
        .fold((0, 0, 0), |a, w| (a.0 + w.0, a.1 + w.1, a.2 + w.2));
    if d.contains(&u) {
        (1, dd + 1, l + 1)
    } else {
        let here = p + u64::from(tree.is_destination(u));
        (here, dd, l + here)
    }
}

pub fn depth(tree: &RootedTree, mut u: NodeId) -> u64 {
    let mut h = 0;
    while let Some(p) = tree.parent(u) {
        h += 1;
        u = p;
    }
    h
}

/// Nodes with at least two children plus internal destinations.
pub fn saturating_set(tree: &RootedTree) -> BTreeSet<NodeId> {
    let ch = children_of(tree);
    ch.iter()
        .filter(|(&u, cs)| u != tree.root() && (cs.len() >= 2 || tree.is_destination(u)))
        .map(|(&u, _)| u)
        .collect()
}

pub fn random_subset(rng: &mut impl Rng, nodes: &[NodeId]) -> BTreeSet<NodeId> {
    nodes
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.3))
        .collect()
}

/// Size (in arcs) of a minimum Steiner tree spanning `terminals`, by
/// enumerating vertex supersets. Only for tiny graphs.
pub fn exact_steiner_arcs(graph: &Graph, terminals: &BTreeSet<NodeId>) -> usize {
    let n = graph.node_count();
    assert!(n <= 16, "exact Steiner oracle is exponential");
    let must: u32 = terminals.iter().map(|&t| 1u32 << t).sum();
    let mut best = usize::MAX;
    for s in 0u32..(1 << n) {
        if s & must != must || (s.count_ones() as usize).saturating_sub(1) >= best {
            continue;
        }
        if induced_connected(graph, s) {
            best = s.count_ones() as usize - 1;
        }
    }
    best
}

fn induced_connected(graph: &Graph, s: u32) -> bool {
    let start = s.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in graph.neighbors(u) {
            let bit = 1u32 << v;
            if s & bit != 0 && seen & bit == 0 {
                seen |= bit;
                stack.push(v);
            }
        }
    }
    seen == s
}

/// Plain BFS distances, for cross-checking the library's.
pub fn oracle_distances(graph: &Graph, source: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; graph.node_count()];
    dist[source] = Some(0);
    let mut frontier = vec![source];
    let mut h = 0;
    while !frontier.is_empty() {
        h += 1;
        let mut next = Vec::new();
        for u in frontier {
            for &v in graph.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(h);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    dist
}
