//! Multicast trees over optical topologies and optimal placement of a bounded
//! number of diffusing (light-splitting) nodes in them.

pub mod cli;
pub mod dp;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod load;
pub mod tree;

pub use dp::{solve_dnmtp, Placement, Solution, Solver};
pub use error::{Error, Result};
pub use graph::{generate_waxman, Graph, MulticastRequest, NodeId, WaxmanParams};
pub use load::{brute_force_optimal, load, DiffuserSet};
pub use tree::{build_shp_tree, build_stt_tree, validate_tree, RootedTree};
