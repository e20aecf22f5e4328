//! Ground-truth load semantics of a diffuser placement.
//!
//! A placement `D` induces a set of paths over the tree: paths start at the
//! source or at a diffuser, end at destinations or diffusers, and never cross
//! a diffuser. The load is the total length of those paths, which equals the
//! sum of the path numbers of all non-root nodes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::tree::{DenseTree, RootedTree};

/// Largest tree [`brute_force_optimal`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Diffusing nodes of a placement. Never contains the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffuserSet(BTreeSet<NodeId>);

impl DiffuserSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.0.contains(&u)
    }

    pub fn insert(&mut self, u: NodeId) -> bool {
        self.0.insert(u)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.0.iter().copied().collect()
    }

    /// Flags indexed like `tree`; fails on the root or on foreign nodes.
    pub fn flags(&self, tree: &DenseTree) -> Result<Vec<bool>> {
        let mut flags = vec![false; tree.len()];
        for u in self.iter() {
            match tree.index.get(&u) {
                Some(0) => {
                    return Err(Error::InvalidParameter(format!(
                        "the root {u} cannot be a diffuser"
                    )))
                }
                Some(&i) => flags[i] = true,
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "diffuser {u} is not a tree node"
                    )))
                }
            }
        }
        Ok(flags)
    }
}

impl FromIterator<NodeId> for DiffuserSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// What a sub-solution looks like from the arc entering a subtree: how many
/// paths cross the arc, how many diffusers sit in the subtree, and the load
/// inside the subtree including that arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub paths: u64,
    pub diffusers: usize,
    pub load: u64,
}

impl Window {
    /// Component-wise `<=`.
    pub fn dominated_by(&self, other: &Window) -> bool {
        self.paths <= other.paths && self.diffusers <= other.diffusers && self.load <= other.load
    }
}

/// Path numbers over a dense tree. Entry 0 (the root) is unused and left at 0.
pub fn path_numbers_dense(tree: &DenseTree, diffusing: &[bool]) -> Vec<u64> {
    let mut pn = vec![0u64; tree.len()];
    for i in (1..tree.len()).rev() {
        pn[i] = if diffusing[i] {
            1
        } else {
            tree.children[i].iter().map(|&c| pn[c]).sum::<u64>() + u64::from(tree.is_dest[i])
        };
    }
    pn
}

pub fn load_dense(tree: &DenseTree, diffusing: &[bool]) -> u64 {
    path_numbers_dense(tree, diffusing).iter().sum()
}

/// Path number of every non-root node.
pub fn path_numbers(tree: &RootedTree, diffusers: &DiffuserSet) -> Result<BTreeMap<NodeId, u64>> {
    let dense = tree.dense()?;
    let flags = diffusers.flags(&dense)?;
    let pn = path_numbers_dense(&dense, &flags);
    Ok((1..dense.len()).map(|i| (dense.ids[i], pn[i])).collect())
}

/// Total arc-uses of the solution induced by `diffusers`.
pub fn load(tree: &RootedTree, diffusers: &DiffuserSet) -> Result<u64> {
    let dense = tree.dense()?;
    let flags = diffusers.flags(&dense)?;
    Ok(load_dense(&dense, &flags))
}

/// Window on the arc entering every non-root node.
pub fn windows(tree: &RootedTree, diffusers: &DiffuserSet) -> Result<BTreeMap<NodeId, Window>> {
    let dense = tree.dense()?;
    let flags = diffusers.flags(&dense)?;
    Ok(windows_dense(&dense, &flags)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(i, w)| (dense.ids[i], w))
        .collect())
}

pub fn windows_dense(tree: &DenseTree, diffusing: &[bool]) -> Vec<Window> {
    let pn = path_numbers_dense(tree, diffusing);
    let mut win: Vec<Window> = (0..tree.len())
        .map(|i| Window {
            paths: pn[i],
            diffusers: usize::from(diffusing[i]),
            load: pn[i],
        })
        .collect();
    for i in (1..tree.len()).rev() {
        let p = tree.parent[i].expect("non-root has a parent");
        let (d, l) = (win[i].diffusers, win[i].load);
        win[p].diffusers += d;
        win[p].load += l;
    }
    win
}

/// An explicit set of paths along tree arcs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathSolution {
    pub paths: Vec<Vec<NodeId>>,
}

impl PathSolution {
    /// Sum of path lengths in arcs.
    pub fn total_length(&self) -> u64 {
        self.paths
            .iter()
            .map(|p| p.len().saturating_sub(1) as u64)
            .sum()
    }
}

/// Builds a minimum-length path solution: every origin (the source and each
/// diffuser) sends one path to each demand point of the diffuser-free region
/// below it, i.e. its destinations and the next diffusers down.
pub fn materialize_paths(tree: &RootedTree, diffusers: &DiffuserSet) -> Result<PathSolution> {
    let dense = tree.dense()?;
    let flags = diffusers.flags(&dense)?;
    let mut paths = Vec::new();
    for origin in (0..dense.len()).filter(|&i| i == 0 || flags[i]) {
        let mut stack: Vec<(usize, Vec<NodeId>)> = dense.children[origin]
            .iter()
            .rev()
            .map(|&c| (c, vec![dense.ids[origin], dense.ids[c]]))
            .collect();
        while let Some((node, prefix)) = stack.pop() {
            if flags[node] {
                paths.push(prefix);
                continue;
            }
            if dense.is_dest[node] {
                paths.push(prefix.clone());
            }
            for &c in dense.children[node].iter().rev() {
                let mut next = prefix.clone();
                next.push(dense.ids[c]);
                stack.push((c, next));
            }
        }
    }
    Ok(PathSolution { paths })
}

/// Audits a path solution against the four satisfaction conditions and the
/// tree structure. Returns a description of the first failure.
pub fn check_path_solution(
    tree: &RootedTree,
    diffusers: &DiffuserSet,
    solution: &PathSolution,
) -> Result<(), String> {
    let mut ends: BTreeMap<NodeId, usize> = BTreeMap::new();
    for path in &solution.paths {
        if path.len() < 2 {
            return Err(format!("path {path:?} has no arc"));
        }
        for w in path.windows(2) {
            if tree.parent(w[1]) != Some(w[0]) {
                return Err(format!(
                    "path {path:?} uses {} -> {} which is not a tree arc",
                    w[0], w[1]
                ));
            }
        }
        *ends.entry(*path.last().unwrap()).or_default() += 1;
    }
    for &r in tree.destinations() {
        if ends.get(&r).copied().unwrap_or(0) != 1 {
            return Err(format!(
                "destination {r} ends {} paths",
                ends.get(&r).copied().unwrap_or(0)
            ));
        }
    }
    for d in diffusers.iter() {
        if ends.get(&d).copied().unwrap_or(0) > 1 {
            return Err(format!("diffuser {d} ends more than one path"));
        }
    }
    for path in &solution.paths {
        let origin = path[0];
        if origin != tree.root() {
            if !diffusers.contains(origin) {
                return Err(format!("path {path:?} starts at a non-diffuser"));
            }
            if !ends.contains_key(&origin) {
                return Err(format!(
                    "diffuser {origin} originates paths but is never reached"
                ));
            }
        }
        if let Some(&inner) = path[1..path.len() - 1]
            .iter()
            .find(|&&u| diffusers.contains(u))
        {
            return Err(format!("diffuser {inner} is inside path {path:?}"));
        }
    }
    Ok(())
}

/// Exhaustive search over every diffuser set of size at most `k`.
///
/// Ties are resolved toward the lexicographically smallest sorted id list.
pub fn brute_force_optimal(tree: &RootedTree, k: usize) -> Result<(DiffuserSet, u64)> {
    let dense = tree.dense()?;
    if dense.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            nodes: dense.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    // Candidates sorted by id so that enumeration order is lexicographic.
    let mut candidates: Vec<(NodeId, usize)> =
        (1..dense.len()).map(|i| (dense.ids[i], i)).collect();
    candidates.sort_unstable();

    let mut flags = vec![false; dense.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut best = (load_dense(&dense, &flags), Vec::new());
    enumerate(
        &dense,
        &candidates,
        0,
        k,
        &mut flags,
        &mut chosen,
        &mut best,
    );
    let set = best.1.iter().map(|&c| candidates[c].0).collect();
    Ok((set, best.0))
}

fn enumerate(
    tree: &DenseTree,
    candidates: &[(NodeId, usize)],
    start: usize,
    budget: usize,
    flags: &mut [bool],
    chosen: &mut Vec<usize>,
    best: &mut (u64, Vec<usize>),
) {
    if budget == 0 {
        return;
    }
    for c in start..candidates.len() {
        flags[candidates[c].1] = true;
        chosen.push(c);
        let value = load_dense(tree, flags);
        // Pre-order visiting is lexicographic, so a strict improvement is the
        // only reason to replace the incumbent.
        if value < best.0 {
            *best = (value, chosen.clone());
        }
        enumerate(tree, candidates, c + 1, budget - 1, flags, chosen, best);
        chosen.pop();
        flags[candidates[c].1] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// e=0 -> c=1; c -> x=2 -> r1=4; c -> y=3 -> r2=5.
    fn t1() -> RootedTree {
        RootedTree::from_arcs(0, &[(0, 1), (1, 2), (2, 4), (1, 3), (3, 5)], [4, 5])
    }

    /// e=0 -> m=1 -> r2=2 with m a destination.
    fn t4() -> RootedTree {
        RootedTree::from_arcs(0, &[(0, 1), (1, 2)], [1, 2])
    }

    fn star() -> RootedTree {
        RootedTree::from_arcs(0, &[(0, 1), (0, 2)], [1, 2])
    }

    fn set(ids: &[NodeId]) -> DiffuserSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn path_numbers_on_t1() {
        let pn = path_numbers(&t1(), &DiffuserSet::new()).unwrap();
        assert_eq!(pn[&1], 2);
        assert!(pn.iter().filter(|(&u, _)| u != 1).all(|(_, &v)| v == 1));
        let pn = path_numbers(&t1(), &set(&[1])).unwrap();
        assert_eq!(pn[&1], 1);
    }

    #[test]
    fn loads_of_reference_instances() {
        let chain = RootedTree::from_arcs(0, &[(0, 1), (1, 2)], [2]);
        for d in [vec![], vec![1], vec![2], vec![1, 2]] {
            assert_eq!(load(&chain, &set(&d)).unwrap(), 2);
        }
        assert_eq!(load(&t1(), &DiffuserSet::new()).unwrap(), 6);
        assert_eq!(load(&t1(), &set(&[1])).unwrap(), 5);
        assert_eq!(load(&t4(), &DiffuserSet::new()).unwrap(), 3);
        assert_eq!(load(&t4(), &set(&[1])).unwrap(), 2);
    }

    #[test]
    fn root_and_foreign_diffusers_are_rejected() {
        assert!(load(&t1(), &set(&[0])).is_err());
        assert!(load(&t1(), &set(&[42])).is_err());
    }

    #[test]
    fn materialized_paths() {
        let unicast = materialize_paths(&star(), &DiffuserSet::new()).unwrap();
        assert_eq!(unicast.paths, vec![vec![0, 1], vec![0, 2]]);

        let sol = materialize_paths(&t1(), &set(&[1])).unwrap();
        assert_eq!(sol.paths, vec![vec![0, 1], vec![1, 2, 4], vec![1, 3, 5]]);
        assert_eq!(sol.total_length(), 5);
        assert!(check_path_solution(&t1(), &set(&[1]), &sol).is_ok());

        let sol = materialize_paths(&t4(), &set(&[1])).unwrap();
        assert_eq!(sol.paths, vec![vec![0, 1], vec![1, 2]]);
        assert!(check_path_solution(&t4(), &set(&[1]), &sol).is_ok());
    }

    #[test]
    fn path_audit_catches_each_condition() {
        let t = t1();
        let d = set(&[1]);
        let bad = [
            // r2 served twice
            vec![vec![0, 1], vec![1, 2, 4], vec![1, 3, 5], vec![0, 1, 3, 5]],
            // r2 not served
            vec![vec![0, 1], vec![1, 2, 4]],
            // origin at a plain node
            vec![vec![0, 1], vec![1, 2, 4], vec![3, 5]],
            // diffuser crossed
            vec![vec![0, 1], vec![0, 1, 2, 4], vec![1, 3, 5]],
            // unreached diffuser originates
            vec![vec![1, 2, 4], vec![1, 3, 5]],
        ];
        for paths in bad {
            let sol = PathSolution {
                paths: paths.clone(),
            };
            assert!(check_path_solution(&t, &d, &sol).is_err(), "{paths:?}");
        }
    }

    #[test]
    fn brute_force_reference_values() {
        let (d, l) = brute_force_optimal(&t1(), 0).unwrap();
        assert!(d.is_empty());
        assert_eq!(l, 6);
        let (d, l) = brute_force_optimal(&t1(), 1).unwrap();
        assert_eq!(d, set(&[1]));
        assert_eq!(l, 5);
        let (d, l) = brute_force_optimal(&star(), 2).unwrap();
        assert!(d.is_empty());
        assert_eq!(l, 2);
    }

    #[test]
    fn brute_force_refuses_large_trees() {
        let arcs: Vec<_> = (0..30).map(|i| (i, i + 1)).collect();
        let t = RootedTree::from_arcs(0, &arcs, [30]);
        assert!(matches!(
            brute_force_optimal(&t, 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn windows_on_t1() {
        let w = windows(&t1(), &set(&[1])).unwrap();
        assert_eq!(
            w[&1],
            Window {
                paths: 1,
                diffusers: 1,
                load: 5
            }
        );
        assert_eq!(
            w[&2],
            Window {
                paths: 1,
                diffusers: 0,
                load: 2
            }
        );
    }
}
