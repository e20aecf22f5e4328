//! Rooted multicast trees and the two heuristics that build them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, shortest_path_tree, Graph, MulticastRequest, NodeId};

/// An arborescence rooted at the multicast source.
///
/// Construction does not enforce the tree invariants so that malformed input
/// can be reported by [`validate_tree`]; operations that need a well-formed
/// tree go through [`RootedTree::dense`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: NodeId,
    parent: BTreeMap<NodeId, NodeId>,
    destinations: BTreeSet<NodeId>,
}

impl RootedTree {
    pub fn from_parts(
        root: NodeId,
        parent: BTreeMap<NodeId, NodeId>,
        destinations: BTreeSet<NodeId>,
    ) -> Self {
        Self {
            root,
            parent,
            destinations,
        }
    }

    /// Convenience constructor from `(parent, child)` arcs.
    pub fn from_arcs(
        root: NodeId,
        arcs: &[(NodeId, NodeId)],
        destinations: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        let parent = arcs.iter().map(|&(p, c)| (c, p)).collect();
        Self::from_parts(root, parent, destinations.into_iter().collect())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent_map(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.parent
    }

    pub fn parent(&self, u: NodeId) -> Option<NodeId> {
        self.parent.get(&u).copied()
    }

    pub fn destinations(&self) -> &BTreeSet<NodeId> {
        &self.destinations
    }

    pub fn is_destination(&self, u: NodeId) -> bool {
        self.destinations.contains(&u)
    }

    /// All nodes mentioned by the tree, sorted.
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        let mut nodes: BTreeSet<NodeId> = self.parent.keys().copied().collect();
        nodes.extend(self.parent.values().copied());
        nodes.insert(self.root);
        nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    /// Number of arcs, i.e. the tree weight when every arc is used once.
    pub fn arc_count(&self) -> usize {
        self.parent.len()
    }

    /// Children lists, each sorted by id.
    pub fn children(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (&c, &p) in &self.parent {
            children.entry(p).or_default().push(c);
        }
        children
    }

    /// Dense, index-based view used by the evaluators and the solver.
    pub fn dense(&self) -> Result<DenseTree> {
        let children = self.children();
        if self.parent.contains_key(&self.root) {
            return Err(Error::InvalidTree(format!(
                "root {} has a parent",
                self.root
            )));
        }
        let mut ids = vec![self.root];
        let mut index = BTreeMap::from([(self.root, 0usize)]);
        let mut parent = vec![None];
        let mut depth = vec![0u32];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for &c in children.get(&ids[i]).map(Vec::as_slice).unwrap_or_default() {
                if index.contains_key(&c) {
                    return Err(Error::InvalidTree(format!("node {c} is reached twice")));
                }
                let ci = ids.len();
                index.insert(c, ci);
                ids.push(c);
                parent.push(Some(i));
                depth.push(depth[i] + 1);
                queue.push_back(ci);
            }
        }
        if ids.len() != self.node_count() {
            return Err(Error::InvalidTree(
                "some nodes are not reachable from the root".into(),
            ));
        }
        let mut kids = vec![Vec::new(); ids.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                kids[p].push(i);
            }
        }
        let mut is_dest = vec![false; ids.len()];
        for d in &self.destinations {
            match index.get(d) {
                Some(&i) => is_dest[i] = true,
                None => {
                    return Err(Error::InvalidTree(format!(
                        "destination {d} is not in the tree"
                    )))
                }
            }
        }
        if is_dest[0] {
            return Err(Error::InvalidTree(
                "the root cannot be a destination".into(),
            ));
        }
        for (i, k) in kids.iter().enumerate() {
            if i != 0 && k.is_empty() && !is_dest[i] {
                return Err(Error::InvalidTree(format!(
                    "leaf {} is not a destination",
                    ids[i]
                )));
            }
        }
        Ok(DenseTree {
            ids,
            index,
            parent,
            children: kids,
            is_dest,
            depth,
        })
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            root: self.root,
            parent: self.parent.clone(),
            destinations: self.destinations.iter().copied().collect(),
        }
    }

    pub fn from_file(file: &TreeFile) -> Self {
        Self::from_parts(
            file.root,
            file.parent.clone(),
            file.destinations.iter().copied().collect(),
        )
    }
}

/// On-disk tree layout: `{"root": 0, "parent": {"3": 0, ...}, "destinations": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub root: NodeId,
    pub parent: BTreeMap<NodeId, NodeId>,
    pub destinations: Vec<NodeId>,
}

/// Index-based tree. Index 0 is the root and indices follow breadth-first
/// order with children visited by ascending id, so iterating indices in
/// reverse visits every node after all of its descendants.
#[derive(Clone, Debug)]
pub struct DenseTree {
    pub ids: Vec<NodeId>,
    pub index: BTreeMap<NodeId, usize>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub is_dest: Vec<bool>,
    pub depth: Vec<u32>,
}

impl DenseTree {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Destinations in each subtree.
    pub fn subtree_destinations(&self) -> Vec<usize> {
        let mut count: Vec<usize> = self.is_dest.iter().map(|&d| usize::from(d)).collect();
        for i in (1..self.len()).rev() {
            let p = self.parent[i].expect("non-root has a parent");
            count[p] += count[i];
        }
        count
    }
}

/// Tree made of the hop-shortest paths from the source to every destination.
///
/// All paths are read from a single shortest-path tree, so shared prefixes
/// merge instead of producing nodes with two parents.
pub fn build_shp_tree(graph: &Graph, req: &MulticastRequest) -> Result<RootedTree> {
    let spt = shortest_path_tree(graph, req.source());
    let mut parent = BTreeMap::new();
    for &r in req.destinations() {
        if spt.distance[r].is_none() {
            return Err(Error::Unreachable(r));
        }
        let mut cur = r;
        while let Some(p) = spt.parent[cur] {
            if parent.insert(cur, p).is_some() {
                break;
            }
            cur = p;
        }
    }
    Ok(RootedTree::from_parts(
        req.source(),
        parent,
        req.destinations().clone(),
    ))
}

/// Takahashi-Matsuyama Steiner heuristic rooted at the source.
///
/// Starting from the source alone, the destination closest to the current
/// tree is attached through a shortest connecting path until every
/// destination is covered. Ties go to the smallest destination id, then the
/// smallest attachment node, then the lexicographically smallest path.
pub fn build_stt_tree(graph: &Graph, req: &MulticastRequest) -> Result<RootedTree> {
    let n = graph.node_count();
    let mut in_tree = vec![false; n];
    in_tree[req.source()] = true;
    let mut tree_nodes = vec![req.source()];
    let mut parent = BTreeMap::new();
    let mut remaining: BTreeSet<NodeId> = req.destinations().clone();

    while !remaining.is_empty() {
        let dist = bfs_distances(graph, &tree_nodes);
        let mut best: Option<(u32, NodeId)> = None;
        for &r in &remaining {
            let d = dist[r].ok_or(Error::Unreachable(r))?;
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, r));
            }
        }
        let (_, target) = best.expect("remaining is not empty");

        let from_target = bfs_distances(graph, &[target]);
        let attach = tree_nodes
            .iter()
            .copied()
            .filter(|&u| from_target[u].is_some())
            .min_by_key(|&u| (from_target[u], u))
            .ok_or(Error::Unreachable(target))?;

        // Walk from the attachment point toward the target, always taking the
        // smallest-id neighbour one hop closer.
        let mut cur = attach;
        while cur != target {
            let dc = from_target[cur].expect("reachable");
            let next = graph
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&v| from_target[v] == Some(dc - 1))
                .expect("a shortest path exists");
            debug_assert!(!in_tree[next], "connecting path re-enters the tree");
            parent.insert(next, cur);
            in_tree[next] = true;
            tree_nodes.push(next);
            cur = next;
        }
        remaining.remove(&target);
        remaining.retain(|&r| !in_tree[r]);
    }

    let mut tree = RootedTree::from_parts(req.source(), parent, req.destinations().clone());
    prune_non_destination_leaves(&mut tree);
    Ok(tree)
}

/// Repeatedly removes leaves that are not destinations.
pub fn prune_non_destination_leaves(tree: &mut RootedTree) {
    loop {
        let internal: BTreeSet<NodeId> = tree.parent.values().copied().collect();
        let doomed: Vec<NodeId> = tree
            .parent
            .keys()
            .copied()
            .filter(|u| !internal.contains(u) && !tree.destinations.contains(u))
            .collect();
        if doomed.is_empty() {
            return;
        }
        for u in doomed {
            tree.parent.remove(&u);
        }
    }
}

/// A violated tree invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    RootMismatch,
    UnknownNode,
    RootHasParent,
    Cycle,
    Disconnected,
    ArcNotInGraph,
    DestinationMissing,
    DestinationMismatch,
    LeafNotDestination,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::RootMismatch => "root-mismatch",
            Self::UnknownNode => "unknown-node",
            Self::RootHasParent => "root-has-parent",
            Self::Cycle => "cycle",
            Self::Disconnected => "disconnected",
            Self::ArcNotInGraph => "arc-not-in-graph",
            Self::DestinationMissing => "destination-missing",
            Self::DestinationMismatch => "destination-mismatch",
            Self::LeafNotDestination => "leaf-not-destination",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.detail)
    }
}

impl std::error::Error for Violation {}

fn violation(kind: ViolationKind, detail: impl Into<String>) -> Violation {
    Violation {
        kind,
        detail: detail.into(),
    }
}

/// Checks every tree invariant against the request and graph and reports the
/// first one that fails.
pub fn validate_tree(
    tree: &RootedTree,
    req: &MulticastRequest,
    graph: &Graph,
) -> Result<(), Violation> {
    use ViolationKind::*;

    if tree.root != req.source() {
        return Err(violation(
            RootMismatch,
            format!("root {} but source {}", tree.root, req.source()),
        ));
    }
    let nodes = tree.nodes();
    if let Some(&u) = nodes.iter().find(|&&u| !graph.contains(u)) {
        return Err(violation(UnknownNode, format!("node {u}")));
    }
    if tree.parent.contains_key(&tree.root) {
        return Err(violation(RootHasParent, format!("root {}", tree.root)));
    }
    for &start in tree.parent.keys() {
        let mut cur = start;
        let mut steps = 0;
        while let Some(&p) = tree.parent.get(&cur) {
            cur = p;
            steps += 1;
            if steps > nodes.len() {
                return Err(violation(Cycle, format!("through node {start}")));
            }
        }
        if cur != tree.root {
            return Err(violation(
                Disconnected,
                format!("node {start} climbs to {cur} instead of the root"),
            ));
        }
    }
    for (&c, &p) in &tree.parent {
        if !graph.has_arc(p, c) {
            return Err(violation(ArcNotInGraph, format!("{p} -> {c}")));
        }
    }
    if let Some(&r) = req.destinations().iter().find(|r| !nodes.contains(r)) {
        return Err(violation(DestinationMissing, format!("destination {r}")));
    }
    if tree.destinations != *req.destinations() {
        return Err(violation(
            DestinationMismatch,
            "destination flags differ from the request".to_string(),
        ));
    }
    let internal: BTreeSet<NodeId> = tree.parent.values().copied().collect();
    if let Some(&leaf) = tree
        .parent
        .keys()
        .find(|u| !internal.contains(u) && !tree.destinations.contains(u))
    {
        return Err(violation(LeafNotDestination, format!("leaf {leaf}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
        Graph::from_edges((0..n).map(|i| (i as f64, 0.0)).collect(), edges).unwrap()
    }

    fn arcs(t: &RootedTree) -> Vec<(NodeId, NodeId)> {
        t.parent_map().iter().map(|(&c, &p)| (p, c)).collect()
    }

    #[test]
    fn shp_on_path() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let req = MulticastRequest::new(&g, 0, [2]).unwrap();
        let t = build_shp_tree(&g, &req).unwrap();
        assert_eq!(arcs(&t), vec![(0, 1), (1, 2)]);
        assert_eq!(t.arc_count(), 2);
    }

    #[test]
    fn shp_on_star() {
        let g = graph(3, &[(0, 1), (0, 2)]);
        let req = MulticastRequest::new(&g, 0, [1, 2]).unwrap();
        let t = build_shp_tree(&g, &req).unwrap();
        assert_eq!(t.arc_count(), 2);
        assert!(validate_tree(&t, &req, &g).is_ok());
    }

    #[test]
    fn shp_on_cycle_keeps_separate_branches() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let req = MulticastRequest::new(&g, 0, [1, 3]).unwrap();
        let t = build_shp_tree(&g, &req).unwrap();
        assert_eq!(arcs(&t), vec![(0, 1), (0, 3)]);
    }

    #[test]
    fn stt_single_destination_is_a_shortest_path() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let req = MulticastRequest::new(&g, 0, [2]).unwrap();
        let t = build_stt_tree(&g, &req).unwrap();
        assert_eq!(arcs(&t), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn stt_on_star_is_the_star() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let req = MulticastRequest::new(&g, 0, [1, 2, 3]).unwrap();
        let t = build_stt_tree(&g, &req).unwrap();
        assert_eq!(arcs(&t), vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn stt_nearest_destination_steps() {
        // e=0, a=1, b=2, r1=3, r2=4: path e-a-b, edges a-r1, b-r2.
        let g = graph(5, &[(0, 1), (1, 2), (1, 3), (2, 4)]);
        let req = MulticastRequest::new(&g, 0, [3, 4]).unwrap();
        let t = build_stt_tree(&g, &req).unwrap();
        assert_eq!(arcs(&t), vec![(0, 1), (1, 2), (1, 3), (2, 4)]);
        assert_eq!(t.arc_count(), 4);
    }

    #[test]
    fn validate_reports_first_violation() {
        let g = graph(4, &[(0, 1), (1, 2), (0, 3)]);
        let req = MulticastRequest::new(&g, 0, [2]).unwrap();
        let good = build_shp_tree(&g, &req).unwrap();
        assert!(validate_tree(&good, &req, &g).is_ok());

        let extra_leaf = RootedTree::from_arcs(0, &[(0, 1), (1, 2), (0, 3)], [2]);
        assert_eq!(
            validate_tree(&extra_leaf, &req, &g)
                .unwrap_err()
                .kind
                .name(),
            "leaf-not-destination"
        );

        let bad_arc = RootedTree::from_arcs(0, &[(0, 2)], [2]);
        assert_eq!(
            validate_tree(&bad_arc, &req, &g).unwrap_err().kind.name(),
            "arc-not-in-graph"
        );

        let cyclic = RootedTree::from_arcs(0, &[(2, 1), (1, 2)], [2]);
        assert_eq!(
            validate_tree(&cyclic, &req, &g).unwrap_err().kind,
            ViolationKind::Cycle
        );

        let wrong_root = RootedTree::from_arcs(1, &[(1, 2)], [2]);
        assert_eq!(
            validate_tree(&wrong_root, &req, &g).unwrap_err().kind,
            ViolationKind::RootMismatch
        );
    }

    #[test]
    fn dense_rejects_malformed_trees() {
        assert!(RootedTree::from_arcs(0, &[(0, 1)], [] as [NodeId; 0])
            .dense()
            .is_err());
        assert!(RootedTree::from_arcs(0, &[(0, 1)], [1, 5]).dense().is_err());
        assert!(RootedTree::from_arcs(0, &[(1, 2), (2, 1)], [1])
            .dense()
            .is_err());
        let ok = RootedTree::from_arcs(0, &[(0, 1), (1, 2)], [1, 2])
            .dense()
            .unwrap();
        assert_eq!(ok.ids, vec![0, 1, 2]);
        assert_eq!(ok.depth, vec![0, 1, 2]);
        assert_eq!(ok.subtree_destinations(), vec![2, 2, 1]);
    }

    #[test]
    fn tree_file_round_trip() {
        let t = RootedTree::from_arcs(0, &[(0, 1), (1, 2), (1, 3)], [2, 3]);
        let json = serde_json::to_string(&t.to_file()).unwrap();
        assert_eq!(
            json,
            r#"{"root":0,"parent":{"1":0,"2":1,"3":1},"destinations":[2,3]}"#
        );
        let back: TreeFile = serde_json::from_str(&json).unwrap();
        assert_eq!(RootedTree::from_file(&back), t);
    }
}
