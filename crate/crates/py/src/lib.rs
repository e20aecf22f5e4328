//! Python bindings.
//!
//! ```python
//! import dnmtp_py as d
//! g = d.Graph.waxman(200, seed=42)
//! t = g.build_tree(0, [5, 17, 33], method="stt")
//! p = d.solve(t, 4)
//! print(p.load, p.diffusers)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dnmtp::experiment::{estimate_mean_load, Builder, ExperimentConfig};
use dnmtp::graph::{average_degree, shortest_path_tree};
use dnmtp::load::{self, materialize_paths, path_numbers};
use dnmtp::{DiffuserSet, MulticastRequest, NodeId, WaxmanParams};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A connected symmetric topology.
#[pyclass(frozen, module = "dnmtp_py")]
pub struct Graph {
    inner: dnmtp::Graph,
}

#[pymethods]
impl Graph {
    /// Generates an incremental Waxman graph.
    #[staticmethod]
    #[pyo3(signature = (nodes=200, alpha=0.15, beta=0.2, m=2, seed=42))]
    fn waxman(nodes: usize, alpha: f64, beta: f64, m: usize, seed: u64) -> PyResult<Self> {
        let params = WaxmanParams {
            nodes,
            alpha,
            beta,
            m,
        };
        Ok(Self {
            inner: dnmtp::generate_waxman(&params, seed).map_err(err)?,
        })
    }

    /// Builds a graph from coordinates and undirected edges.
    #[staticmethod]
    fn from_edges(coords: Vec<(f64, f64)>, edges: Vec<(NodeId, NodeId)>) -> PyResult<Self> {
        Ok(Self {
            inner: dnmtp::Graph::from_edges(coords, &edges).map_err(err)?,
        })
    }

    /// Parses the JSON graph format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = dnmtp::io::parse_json(text, "<string>").map_err(err)?;
        Ok(Self {
            inner: dnmtp::Graph::from_file(&file).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        to_json(&self.inner.to_file())
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.inner.edges()
    }

    fn average_degree(&self) -> f64 {
        average_degree(&self.inner)
    }

    /// Hop distances from `source` (None when unreachable).
    fn distances(&self, source: NodeId) -> PyResult<Vec<Option<u32>>> {
        if !self.inner.contains(source) {
            return Err(err(format!("node {source} is not in the graph")));
        }
        Ok(shortest_path_tree(&self.inner, source).distance)
    }

    /// Builds a multicast tree with `method` in {"shp", "stt"}.
    #[pyo3(signature = (source, destinations, method="shp"))]
    fn build_tree(
        &self,
        source: NodeId,
        destinations: Vec<NodeId>,
        method: &str,
    ) -> PyResult<Tree> {
        let builder: Builder = method.parse().map_err(err)?;
        let req = MulticastRequest::new(&self.inner, source, destinations).map_err(err)?;
        let tree = builder.build(&self.inner, &req).map_err(err)?;
        Ok(Tree { inner: tree })
    }

    /// Mean load over random requests, estimated to the given precision.
    #[pyo3(signature = (method, n_dest, k, precision=0.05, seed=42))]
    fn estimate_mean_load(
        &self,
        method: &str,
        n_dest: usize,
        k: usize,
        precision: f64,
        seed: u64,
    ) -> PyResult<(f64, f64, usize)> {
        let builder: Builder = method.parse().map_err(err)?;
        let cfg = ExperimentConfig {
            precision,
            seed,
            ..Default::default()
        };
        let row = estimate_mean_load(&self.inner, builder, n_dest, k, &cfg).map_err(err)?;
        Ok((row.mean_load, row.ci_half_width, row.n_samples))
    }
}

/// A multicast tree rooted at its source.
#[pyclass(frozen, module = "dnmtp_py")]
pub struct Tree {
    inner: dnmtp::RootedTree,
}

#[pymethods]
impl Tree {
    /// Builds a tree from `(parent, child)` arcs.
    #[new]
    fn new(root: NodeId, arcs: Vec<(NodeId, NodeId)>, destinations: Vec<NodeId>) -> PyResult<Self> {
        let tree = dnmtp::RootedTree::from_arcs(root, &arcs, destinations);
        tree.dense().map_err(err)?;
        Ok(Self { inner: tree })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = dnmtp::io::parse_json(text, "<string>").map_err(err)?;
        let tree = dnmtp::RootedTree::from_file(&file);
        tree.dense().map_err(err)?;
        Ok(Self { inner: tree })
    }

    fn to_json(&self) -> String {
        to_json(&self.inner.to_file())
    }

    #[getter]
    fn root(&self) -> NodeId {
        self.inner.root()
    }

    #[getter]
    fn destinations(&self) -> Vec<NodeId> {
        self.inner.destinations().iter().copied().collect()
    }

    /// `(parent, child)` arcs.
    #[getter]
    fn arcs(&self) -> Vec<(NodeId, NodeId)> {
        self.inner
            .parent_map()
            .iter()
            .map(|(&c, &p)| (p, c))
            .collect()
    }

    #[getter]
    fn arc_count(&self) -> usize {
        self.inner.arc_count()
    }

    fn path_numbers(&self, diffusers: Vec<NodeId>) -> PyResult<Vec<(NodeId, u64)>> {
        let set: DiffuserSet = diffusers.into_iter().collect();
        Ok(path_numbers(&self.inner, &set)
            .map_err(err)?
            .into_iter()
            .collect())
    }

    fn load(&self, diffusers: Vec<NodeId>) -> PyResult<u64> {
        let set: DiffuserSet = diffusers.into_iter().collect();
        load::load(&self.inner, &set).map_err(err)
    }

    fn paths(&self, diffusers: Vec<NodeId>) -> PyResult<Vec<Vec<NodeId>>> {
        let set: DiffuserSet = diffusers.into_iter().collect();
        Ok(materialize_paths(&self.inner, &set).map_err(err)?.paths)
    }

    fn __repr__(&self) -> String {
        format!(
            "Tree(root={}, arcs={}, destinations={})",
            self.inner.root(),
            self.inner.arc_count(),
            self.inner.destinations().len()
        )
    }
}

/// An optimal diffuser placement.
#[pyclass(frozen, get_all, module = "dnmtp_py")]
pub struct Placement {
    k: usize,
    load: u64,
    diffusers: Vec<NodeId>,
}

#[pymethods]
impl Placement {
    fn to_json(&self) -> String {
        to_json(&serde_json::json!({"k": self.k, "load": self.load, "diffusers": self.diffusers}))
    }

    fn __repr__(&self) -> String {
        format!(
            "Placement(k={}, load={}, diffusers={:?})",
            self.k, self.load, self.diffusers
        )
    }
}

/// Places at most `k` diffusers optimally.
#[pyfunction]
fn solve(tree: &Tree, k: usize) -> PyResult<Placement> {
    let p = dnmtp::solve_dnmtp(&tree.inner, k).map_err(err)?;
    Ok(Placement {
        k,
        load: p.load,
        diffusers: p.diffusers.to_vec(),
    })
}

/// Optimal loads for every budget `0..=k` from a single solve.
#[pyfunction]
fn solve_all_budgets(tree: &Tree, k: usize) -> PyResult<Vec<u64>> {
    Ok(dnmtp::Solver::new(k)
        .solve(&tree.inner)
        .map_err(err)?
        .loads())
}

/// Exhaustive search, for small trees only.
#[pyfunction]
fn brute_force_optimal(tree: &Tree, k: usize) -> PyResult<(Vec<NodeId>, u64)> {
    let (set, load) = dnmtp::brute_force_optimal(&tree.inner, k).map_err(err)?;
    Ok((set.to_vec(), load))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

#[pymodule]
fn dnmtp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Tree>()?;
    m.add_class::<Placement>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_all_budgets, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_optimal, m)?)?;
    Ok(())
}
