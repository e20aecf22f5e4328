//! Symmetric topology graphs, Waxman generation and hop-count searches.

use std::collections::{BTreeSet, VecDeque};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Side of the square plane nodes are placed in.
pub const PLANE_SIDE: f64 = 1000.0;

const MAX_CONNECT_RETRIES: u64 = 100;

/// Parameters of the incremental Waxman model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaxmanParams {
    pub nodes: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Links added by every new node.
    pub m: usize,
}

impl Default for WaxmanParams {
    fn default() -> Self {
        Self {
            nodes: 200,
            alpha: 0.15,
            beta: 0.2,
            m: 2,
        }
    }
}

/// A connected symmetric graph with unit arc weights.
///
/// Every undirected edge `{u, v}` stands for the two arcs `u -> v` and `v -> u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    coords: Vec<(f64, f64)>,
    adj: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from undirected edges, checking every structural invariant.
    pub fn from_edges(coords: Vec<(f64, f64)>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = coords.len();
        let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::UnknownNode(u));
            }
            if v >= n {
                return Err(Error::UnknownNode(v));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on node {u}")));
            }
            if !adj[u].insert(v) || !adj[v].insert(u) {
                return Err(Error::InvalidParameter(format!("parallel edge {u}-{v}")));
            }
        }
        let graph = Self {
            coords,
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        };
        if !graph.is_connected() {
            return Err(Error::InvalidParameter("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of undirected edges (symmetric arc pairs).
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// Neighbours of `u` in ascending id order.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u < self.adj.len()
    }

    /// Each edge once, as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        bfs_distances(self, &[0]).iter().all(Option::is_some)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.node_count(),
            coords: self.coords.iter().map(|&(x, y)| [x, y]).collect(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        if file.coords.len() != file.n {
            return Err(Error::InvalidParameter(format!(
                "\"n\" is {} but {} coordinates are listed",
                file.n,
                file.coords.len()
            )));
        }
        let coords = file.coords.iter().map(|&[x, y]| (x, y)).collect();
        let edges: Vec<_> = file.edges.iter().map(|&[u, v]| (u, v)).collect();
        Self::from_edges(coords, &edges)
    }
}

/// On-disk graph layout. Each symmetric edge is listed once with `u < v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub coords: Vec<[f64; 2]>,
    pub edges: Vec<[NodeId; 2]>,
}

/// A multicast request: one source and a non-empty destination set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MulticastRequest {
    source: NodeId,
    destinations: BTreeSet<NodeId>,
}

impl MulticastRequest {
    pub fn new(
        graph: &Graph,
        source: NodeId,
        destinations: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self> {
        if !graph.contains(source) {
            return Err(Error::UnknownNode(source));
        }
        let destinations: BTreeSet<NodeId> = destinations.into_iter().collect();
        if destinations.is_empty() {
            return Err(Error::InvalidRequest("destination set is empty".into()));
        }
        if let Some(&bad) = destinations.iter().find(|&&d| !graph.contains(d)) {
            return Err(Error::UnknownNode(bad));
        }
        if destinations.contains(&source) {
            return Err(Error::InvalidRequest(format!(
                "source {source} is also a destination"
            )));
        }
        Ok(Self {
            source,
            destinations,
        })
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destinations(&self) -> &BTreeSet<NodeId> {
        &self.destinations
    }
}

/// Generates a graph with the incremental Waxman model.
///
/// Nodes are placed uniformly in a `1000 x 1000` square. Node `i` attaches to
/// `min(m, i)` distinct earlier nodes, each drawn with probability proportional
/// to `alpha * exp(-d / (beta * L))` where `L` is the plane diagonal.
pub fn generate_waxman(params: &WaxmanParams, seed: u64) -> Result<Graph> {
    let WaxmanParams {
        nodes,
        alpha,
        beta,
        m,
    } = *params;
    if nodes < 1 {
        return Err(Error::InvalidParameter("need at least one node".into()));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if nodes > 1 && m >= nodes {
        return Err(Error::InvalidParameter(format!(
            "m = {m} links cannot be attached in a graph of {nodes} nodes"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha and beta must lie in (0, 1], got alpha = {alpha}, beta = {beta}"
        )));
    }
    for attempt in 0..=MAX_CONNECT_RETRIES {
        let graph = waxman_attempt(params, seed.wrapping_add(attempt))?;
        if graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(Error::Disconnected(MAX_CONNECT_RETRIES as u32 + 1))
}

fn waxman_attempt(params: &WaxmanParams, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..params.nodes)
        .map(|_| {
            (
                rng.gen_range(0.0..PLANE_SIDE),
                rng.gen_range(0.0..PLANE_SIDE),
            )
        })
        .collect();
    let diagonal = PLANE_SIDE * std::f64::consts::SQRT_2;
    let mut edges = Vec::with_capacity(params.nodes * params.m);
    for new in 1..params.nodes {
        let (x, y) = coords[new];
        let mut candidates: Vec<NodeId> = (0..new).collect();
        let mut weights: Vec<f64> = candidates
            .iter()
            .map(|&old| {
                let (ox, oy) = coords[old];
                let d = ((x - ox).powi(2) + (y - oy).powi(2)).sqrt();
                params.alpha * (-d / (params.beta * diagonal)).exp()
            })
            .collect();
        for _ in 0..params.m.min(new) {
            let dist = WeightedIndex::new(&weights)
                .map_err(|e| Error::InvalidParameter(format!("Waxman weights: {e}")))?;
            let pick = dist.sample(&mut rng);
            edges.push((candidates[pick], new));
            candidates.swap_remove(pick);
            weights.swap_remove(pick);
        }
    }
    let n = coords.len();
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    Ok(Graph { coords, adj })
}

/// Hop distances from a set of sources; `None` for unreachable nodes.
pub fn bfs_distances(graph: &Graph, sources: &[NodeId]) -> Vec<Option<u32>> {
    let mut dist = vec![None; graph.node_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have a distance");
        for &v in graph.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Breadth-first shortest-path tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestPathTree {
    pub source: NodeId,
    pub distance: Vec<Option<u32>>,
    pub parent: Vec<Option<NodeId>>,
}

impl ShortestPathTree {
    /// Nodes from the source to `target`, both included.
    pub fn path_to(&self, target: NodeId) -> Option<Vec<NodeId>> {
        self.distance[target]?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

/// Hop-count shortest paths from `source`. Among the equally distant
/// predecessors of a node, the smallest id becomes its parent.
pub fn shortest_path_tree(graph: &Graph, source: NodeId) -> ShortestPathTree {
    let distance = bfs_distances(graph, &[source]);
    let parent = (0..graph.node_count())
        .map(|v| {
            let dv = distance[v]?;
            if dv == 0 {
                return None;
            }
            graph
                .neighbors(v)
                .iter()
                .copied()
                .find(|&u| distance[u] == Some(dv - 1))
        })
        .collect();
    ShortestPathTree {
        source,
        distance,
        parent,
    }
}

/// `2 * |edges| / |nodes|`.
pub fn average_degree(graph: &Graph) -> f64 {
    if graph.node_count() == 0 {
        return 0.0;
    }
    2.0 * graph.edge_count() as f64 / graph.node_count() as f64
}
