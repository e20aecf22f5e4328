//! Optimal diffuser placement by dynamic programming over the tree.
//!
//! Every non-root node `u` carries two tables describing the best
//! sub-solutions of its subtree `A^u`, measured on the arc `a^u` entering it:
//!
//! * `M[b][d]`: `u` is not a diffuser, `b` paths cross `a^u`, the subtree holds
//!   exactly `d` diffusers; value is the minimum load in `A^u` including `a^u`.
//! * `L[d]`: `u` is a diffuser (so one path crosses `a^u`) and the subtree
//!   holds exactly `d >= 1` diffusers, `u` included.
//!
//! Tables are filled bottom-up. The first child of a node is folded in by
//! [`extend_single_child`], every further child by [`merge_child`], a
//! knapsack over diffuser budgets and path numbers. The root is free: it
//! originates any number of paths, has no incoming arc and never consumes
//! budget, so [`finalize_root`] only distributes the budget among its
//! children.

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::load::DiffuserSet;
use crate::tree::{DenseTree, RootedTree};

/// A load value or the "no such sub-solution" sentinel.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(u64);

impl Cost {
    pub const INFEASIBLE: Cost = Cost(u64::MAX);

    pub fn finite(value: u64) -> Self {
        debug_assert!(value != u64::MAX);
        Cost(value)
    }

    pub fn is_finite(self) -> bool {
        self != Self::INFEASIBLE
    }

    pub fn value(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }

    /// Sum that stays infeasible when either side is.
    pub fn plus(self, other: Cost) -> Cost {
        if self.is_finite() && other.is_finite() {
            Cost(self.0 + other.0)
        } else {
            Self::INFEASIBLE
        }
    }

    pub fn plus_u64(self, extra: u64) -> Cost {
        self.plus(Cost(extra))
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Minimum of the feasible arguments; infeasible only if both are.
pub fn min_plus(a: Cost, b: Cost) -> Cost {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a.min(b),
        (true, false) => a,
        (false, true) => b,
        (false, false) => Cost::INFEASIBLE,
    }
}

/// The `M` matrix and `L` vector of one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tables {
    budget: usize,
    rows: usize,
    m: Vec<Cost>,
    l: Vec<Cost>,
}

impl Tables {
    fn infeasible(budget: usize, rows: usize) -> Self {
        Self {
            budget,
            rows,
            m: vec![Cost::INFEASIBLE; rows * (budget + 1)],
            l: vec![Cost::INFEASIBLE; budget + 1],
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Largest path number represented.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `M[paths][diffusers]`; out-of-range indices read as infeasible.
    pub fn m(&self, paths: usize, diffusers: usize) -> Cost {
        if paths == 0 || paths > self.rows || diffusers > self.budget {
            return Cost::INFEASIBLE;
        }
        self.m[(paths - 1) * (self.budget + 1) + diffusers]
    }

    /// `L[diffusers]`; infeasible for `diffusers == 0` or out of range.
    pub fn l(&self, diffusers: usize) -> Cost {
        if diffusers == 0 || diffusers > self.budget {
            return Cost::INFEASIBLE;
        }
        self.l[diffusers]
    }

    fn set_m(&mut self, paths: usize, diffusers: usize, value: Cost) {
        let idx = (paths - 1) * (self.budget + 1) + diffusers;
        self.m[idx] = value;
    }

    /// Best sub-solution with exactly `diffusers` in the subtree, whatever
    /// the path number, and how it is reached.
    pub fn best(&self, diffusers: usize) -> (Cost, Option<ChildUse>) {
        let mut best = (self.l(diffusers), Some(ChildUse::Diffusing));
        for b in 1..=self.rows {
            let v = self.m(b, diffusers);
            if v < best.0 {
                best = (v, Some(ChildUse::Plain { paths: b }));
            }
        }
        if best.0.is_finite() {
            best
        } else {
            (Cost::INFEASIBLE, None)
        }
    }
}

/// How a child's subtree is used by its parent's entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChildUse {
    /// Child is not a diffuser and pushes `paths` paths up its arc.
    Plain { paths: usize },
    /// Child is a diffuser.
    Diffusing,
}

/// Back-pointer for one finite table entry after folding in one child.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    /// Entry of the accumulated tables this one was built from: path number
    /// (ignored for `L` entries) and budget. `None` for the first child.
    pub acc: Option<(usize, usize)>,
    pub child: ChildUse,
    pub child_budget: usize,
}

/// Decisions recorded when folding one child into its parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageDecisions {
    m: Vec<Option<Step>>,
    l: Vec<Option<Step>>,
    budget: usize,
}

impl StageDecisions {
    fn new(budget: usize, rows: usize) -> Self {
        Self {
            m: vec![None; rows * (budget + 1)],
            l: vec![None; budget + 1],
            budget,
        }
    }

    pub fn m(&self, paths: usize, diffusers: usize) -> Option<Step> {
        if paths == 0 || diffusers > self.budget {
            return None;
        }
        self.m
            .get((paths - 1) * (self.budget + 1) + diffusers)
            .copied()
            .flatten()
    }

    pub fn l(&self, diffusers: usize) -> Option<Step> {
        self.l.get(diffusers).copied().flatten()
    }
}

/// Tables of a leaf destination: one path and no diffuser costs 1, the leaf
/// diffusing costs 1, everything else is infeasible.
pub fn leaf_tables(budget: usize, rows: usize) -> Tables {
    let mut t = Tables::infeasible(budget, rows.max(1));
    t.set_m(1, 0, Cost::finite(1));
    if budget >= 1 {
        t.l[1] = Cost::finite(1);
    }
    t
}

/// [`leaf_tables`] for a node of `tree`, refusing nodes that have children.
pub fn leaf_tables_for(tree: &DenseTree, node: usize, budget: usize) -> Result<Tables> {
    if !tree.children[node].is_empty() {
        return Err(Error::InvalidParameter(format!(
            "node {} is not a leaf",
            tree.ids[node]
        )));
    }
    Ok(leaf_tables(budget, 1))
}

/// Tables of `u` seen through its first child only, including arc `a^u`.
///
/// `rows` is the path-number cap for `u`, at least the child's cap plus one
/// when `u` is a destination.
pub fn extend_single_child(
    u_is_dest: bool,
    child: &Tables,
    budget: usize,
    rows: usize,
) -> (Tables, StageDecisions) {
    let mut out = Tables::infeasible(budget, rows);
    let mut dec = StageDecisions::new(budget, rows);
    let own = usize::from(u_is_dest);

    for d in 1..=budget {
        let (best, how) = child.best(d - 1);
        if let Some(how) = how {
            out.l[d] = best.plus_u64(1);
            dec.l[d] = Some(Step {
                acc: None,
                child: how,
                child_budget: d - 1,
            });
        }
    }
    for d in 0..=budget {
        for j in 1..=rows {
            if j <= own {
                continue;
            }
            let jc = j - own;
            let mut pick = (child.m(jc, d), ChildUse::Plain { paths: jc });
            if jc == 1 && child.l(d) < pick.0 {
                pick = (child.l(d), ChildUse::Diffusing);
            }
            if pick.0.is_finite() {
                out.set_m(j, d, pick.0.plus_u64(j as u64));
                dec.m[(j - 1) * (budget + 1) + d] = Some(Step {
                    acc: None,
                    child: pick.1,
                    child_budget: d,
                });
            }
        }
    }
    (out, dec)
}

/// Folds one more child into tables that already account for `a^u`.
///
/// A plain child with `b` paths adds `b` crossings of `a^u`, a diffusing
/// child adds one. The resulting path-number cap is the sum of both caps.
pub fn merge_child(acc: &Tables, child: &Tables, budget: usize) -> (Tables, StageDecisions) {
    let rows = acc.rows + child.rows;
    let mut out = Tables::infeasible(budget, rows);
    let mut dec = StageDecisions::new(budget, rows);

    let child_best: Vec<(Cost, Option<ChildUse>)> = (0..=budget).map(|d| child.best(d)).collect();

    for d in 1..=budget {
        let mut best: (Cost, Option<Step>) = (Cost::INFEASIBLE, None);
        for da in 1..=d {
            let dc = d - da;
            let (cv, how) = child_best[dc];
            let v = acc.l(da).plus(cv);
            if v < best.0 {
                let step = Step {
                    acc: Some((1, da)),
                    child: how.expect("finite"),
                    child_budget: dc,
                };
                best = (v, Some(step));
            }
        }
        out.l[d] = best.0;
        dec.l[d] = best.1;
    }

    for d in 0..=budget {
        for da in 0..=d {
            let dc = d - da;
            for ja in 1..=acc.rows {
                let av = acc.m(ja, da);
                if !av.is_finite() {
                    continue;
                }
                for jc in 1..=child.rows {
                    let v = av.plus(child.m(jc, dc)).plus_u64(jc as u64);
                    relax(
                        &mut out,
                        &mut dec,
                        ja + jc,
                        d,
                        v,
                        Step {
                            acc: Some((ja, da)),
                            child: ChildUse::Plain { paths: jc },
                            child_budget: dc,
                        },
                    );
                }
                let v = av.plus(child.l(dc)).plus_u64(1);
                relax(
                    &mut out,
                    &mut dec,
                    ja + 1,
                    d,
                    v,
                    Step {
                        acc: Some((ja, da)),
                        child: ChildUse::Diffusing,
                        child_budget: dc,
                    },
                );
            }
        }
    }
    (out, dec)
}

fn relax(out: &mut Tables, dec: &mut StageDecisions, j: usize, d: usize, v: Cost, step: Step) {
    if v < out.m(j, d) {
        out.set_m(j, d, v);
        dec.m[(j - 1) * (out.budget + 1) + d] = Some(step);
    }
}

/// Budget split at the root, one stage per child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDecisions {
    /// `best[d]`: minimum load using exactly `d` diffusers.
    exact: Vec<Cost>,
    /// `stages[s][d]`: budget left to children before `s`, plus the use of child `s`.
    stages: Vec<Vec<Option<(usize, ChildUse, usize)>>>,
}

impl RootDecisions {
    /// Minimum load with at most `budget` diffusers and the exact count achieving it.
    pub fn optimum(&self, budget: usize) -> (Cost, usize) {
        let mut best = (Cost::INFEASIBLE, 0);
        for (d, &v) in self.exact.iter().enumerate().take(budget + 1) {
            if v < best.0 {
                best = (v, d);
            }
        }
        best
    }
}

/// Distributes the budget among the root's children. The root itself adds
/// no load and uses no budget.
pub fn finalize_root(children: &[&Tables], budget: usize) -> (Cost, RootDecisions) {
    let mut exact = vec![Cost::INFEASIBLE; budget + 1];
    exact[0] = Cost::finite(0);
    let mut stages = Vec::with_capacity(children.len());
    for child in children {
        let child_best: Vec<_> = (0..=budget).map(|d| child.best(d)).collect();
        let mut next = vec![Cost::INFEASIBLE; budget + 1];
        let mut stage = vec![None; budget + 1];
        for d in 0..=budget {
            for dc in 0..=d {
                let (cv, how) = child_best[dc];
                let v = exact[d - dc].plus(cv);
                if v < next[d] {
                    next[d] = v;
                    stage[d] = Some((d - dc, how.expect("finite"), dc));
                }
            }
        }
        exact = next;
        stages.push(stage);
    }
    let decisions = RootDecisions { exact, stages };
    (decisions.optimum(budget).0, decisions)
}

#[derive(Clone, Debug)]
struct NodeDp {
    tables: Tables,
    stages: Vec<StageDecisions>,
}

/// Options for [`Solver`].
#[derive(Clone, Debug, Default)]
pub struct Solver {
    budget: usize,
    shuffle_seed: Option<u64>,
}

impl Solver {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            shuffle_seed: None,
        }
    }

    /// Merge children in a seeded random order instead of ascending id.
    pub fn shuffle_children(mut self, seed: u64) -> Self {
        self.shuffle_seed = Some(seed);
        self
    }

    pub fn solve(&self, tree: &RootedTree) -> Result<Solution> {
        let mut dense = tree.dense()?;
        if let Some(seed) = self.shuffle_seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for kids in &mut dense.children {
                kids.shuffle(&mut rng);
            }
        }
        Ok(solve_dense(dense, self.budget))
    }
}

/// Complete solver state, kept for reconstruction and auditing.
#[derive(Clone, Debug)]
pub struct Solution {
    tree: DenseTree,
    budget: usize,
    nodes: Vec<NodeDp>,
    root: RootDecisions,
}

fn solve_dense(tree: DenseTree, budget: usize) -> Solution {
    let caps = tree.subtree_destinations();
    let mut nodes: Vec<Option<NodeDp>> = vec![None; tree.len()];
    // Reverse breadth-first order visits nodes by non-increasing height.
    for u in (0..tree.len()).rev() {
        let kids = &tree.children[u];
        let dp = if kids.is_empty() {
            NodeDp {
                tables: leaf_tables(budget, 1),
                stages: Vec::new(),
            }
        } else {
            // The root gets tables too, with a virtual incoming arc; they only
            // feed the compatibility value reported by `charged_root_load`.
            let rows = caps[u].max(1);
            let first = &nodes[kids[0]].as_ref().expect("children first").tables;
            let own_rows = first.rows + usize::from(tree.is_dest[u]);
            let (mut tables, dec) = extend_single_child(tree.is_dest[u], first, budget, own_rows);
            let mut stages = vec![dec];
            for &c in &kids[1..] {
                let child = &nodes[c].as_ref().expect("children first").tables;
                let (t, dec) = merge_child(&tables, child, budget);
                tables = t;
                stages.push(dec);
            }
            debug_assert_eq!(tables.rows, rows);
            NodeDp { tables, stages }
        };
        nodes[u] = Some(dp);
    }
    let nodes: Vec<NodeDp> = nodes.into_iter().map(|n| n.expect("all filled")).collect();
    let child_tables: Vec<&Tables> = tree.children[0].iter().map(|&c| &nodes[c].tables).collect();
    let (_, root) = finalize_root(&child_tables, budget);
    Solution {
        tree,
        budget,
        nodes,
        root,
    }
}

impl Solution {
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Optimal load with at most `budget` diffusers, for any `budget` up to
    /// the one solved for.
    pub fn load(&self, budget: usize) -> u64 {
        self.root
            .optimum(budget.min(self.budget))
            .0
            .value()
            .expect("the empty placement is always feasible")
    }

    /// Optimal loads for every budget `0..=k`.
    pub fn loads(&self) -> Vec<u64> {
        (0..=self.budget).map(|k| self.load(k)).collect()
    }

    /// Tables of a tree node, by node id.
    pub fn tables(&self, node: NodeId) -> Option<&Tables> {
        self.tree.index.get(&node).map(|&i| &self.nodes[i].tables)
    }

    /// `min_{1 <= i <= k} L_i(root)` with the root charged as a diffuser behind
    /// a virtual incoming arc. Exceeds the optimum by exactly one whenever the
    /// optimum leaves a budget unit unused.
    pub fn charged_root_load(&self) -> Option<u64> {
        let root = &self.nodes[0].tables;
        (1..=self.budget)
            .map(|i| root.l(i))
            .min()
            .and_then(Cost::value)
    }

    /// Diffusers of an optimal placement with at most `budget` diffusers.
    pub fn extract_placement(&self, budget: usize) -> Result<DiffuserSet> {
        let budget = budget.min(self.budget);
        let (_, mut remaining) = self.root.optimum(budget);
        let mut out = Vec::new();
        let root_id = self.tree.ids[0];
        for s in (0..self.root.stages.len()).rev() {
            let (prev, how, dc) =
                self.root.stages[s][remaining].ok_or_else(|| Error::CorruptDecision {
                    node: root_id,
                    reason: format!("no split for budget {remaining}"),
                })?;
            self.collect(self.tree.children[0][s], how, dc, &mut out)?;
            remaining = prev;
        }
        if remaining != 0 {
            return Err(Error::CorruptDecision {
                node: root_id,
                reason: format!("{remaining} budget units left unassigned"),
            });
        }
        Ok(out.into_iter().map(|i| self.tree.ids[i]).collect())
    }

    fn collect(
        &self,
        node: usize,
        how: ChildUse,
        budget: usize,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        let id = self.tree.ids[node];
        let corrupt = |reason: String| Error::CorruptDecision { node: id, reason };
        let stages = &self.nodes[node].stages;
        if let ChildUse::Diffusing = how {
            out.push(node);
        }
        if stages.is_empty() {
            return match (how, budget) {
                (ChildUse::Plain { paths: 1 }, 0) | (ChildUse::Diffusing, 1) => Ok(()),
                _ => Err(corrupt(format!("leaf entry {how:?} with budget {budget}"))),
            };
        }
        let mut cur = (how, budget);
        for s in (0..stages.len()).rev() {
            let step = match cur.0 {
                ChildUse::Plain { paths } => stages[s].m(paths, cur.1),
                ChildUse::Diffusing => stages[s].l(cur.1),
            }
            .ok_or_else(|| corrupt(format!("missing record for {:?} at stage {s}", cur)))?;
            self.collect(
                self.tree.children[node][s],
                step.child,
                step.child_budget,
                out,
            )?;
            match (s, step.acc) {
                (0, None) => {}
                (0, Some(_)) | (_, None) => {
                    return Err(corrupt(format!("malformed record at stage {s}")))
                }
                (_, Some((paths, b))) => {
                    cur.0 = match cur.0 {
                        ChildUse::Plain { .. } => ChildUse::Plain { paths },
                        ChildUse::Diffusing => ChildUse::Diffusing,
                    };
                    cur.1 = b;
                }
            }
        }
        Ok(())
    }

    /// Writes every table entry as `node,kind,row,col,value`.
    pub fn write_tables_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "node,kind,row,col,value")?;
        for (i, dp) in self.nodes.iter().enumerate().skip(1) {
            let id = self.tree.ids[i];
            let t = &dp.tables;
            for b in 1..=t.rows {
                for d in 0..=t.budget {
                    writeln!(w, "{id},M,{b},{d},{}", t.m(b, d))?;
                }
            }
            for d in 1..=t.budget {
                writeln!(w, "{id},L,1,{d},{}", t.l(d))?;
            }
        }
        Ok(())
    }
}

/// Result of [`solve_dnmtp`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub budget: usize,
    pub load: u64,
    pub diffusers: DiffuserSet,
}

impl Placement {
    pub fn to_file(&self) -> PlacementFile {
        PlacementFile {
            k: self.budget,
            load: self.load,
            diffusers: self.diffusers.to_vec(),
        }
    }
}

/// On-disk placement layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementFile {
    pub k: usize,
    pub load: u64,
    pub diffusers: Vec<NodeId>,
}

/// Places at most `budget` diffusers in `tree` so that the load is minimal.
pub fn solve_dnmtp(tree: &RootedTree, budget: usize) -> Result<Placement> {
    let solution = Solver::new(budget).solve(tree)?;
    let diffusers = solution.extract_placement(budget)?;
    Ok(Placement {
        budget,
        load: solution.load(budget),
        diffusers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::{brute_force_optimal, load};

    fn t1() -> RootedTree {
        RootedTree::from_arcs(0, &[(0, 1), (1, 2), (2, 4), (1, 3), (3, 5)], [4, 5])
    }

    fn t4() -> RootedTree {
        RootedTree::from_arcs(0, &[(0, 1), (1, 2)], [1, 2])
    }

    fn inf() -> Cost {
        Cost::INFEASIBLE
    }

    #[test]
    fn min_plus_cases() {
        assert_eq!(min_plus(Cost::finite(3), Cost::finite(5)), Cost::finite(3));
        assert_eq!(min_plus(inf(), Cost::finite(7)), Cost::finite(7));
        assert_eq!(min_plus(inf(), inf()), inf());
    }

    #[test]
    fn leaf_tables_are_unitary() {
        let t = leaf_tables(2, 1);
        assert_eq!(
            (t.m(1, 0), t.m(1, 1), t.m(1, 2)),
            (Cost::finite(1), inf(), inf())
        );
        assert_eq!((t.l(1), t.l(2)), (Cost::finite(1), inf()));
        let t0 = leaf_tables(0, 1);
        assert_eq!(t0.m(1, 0), Cost::finite(1));
        assert_eq!(t0.l(1), inf());
        assert_eq!(leaf_tables(3, 1), leaf_tables(3, 1));
    }

    #[test]
    fn leaf_tables_for_rejects_internal_nodes() {
        let dense = t1().dense().unwrap();
        assert!(leaf_tables_for(&dense, 1, 2).is_err());
        let leaf = dense.index[&4];
        assert!(leaf_tables_for(&dense, leaf, 2).is_ok());
    }

    #[test]
    fn single_child_extension() {
        let leaf = leaf_tables(1, 1);
        let (plain, _) = extend_single_child(false, &leaf, 1, 1);
        assert_eq!(plain.m(1, 0), Cost::finite(2));
        assert_eq!(plain.m(1, 1), Cost::finite(2));
        let (dest, _) = extend_single_child(true, &leaf, 1, 2);
        assert_eq!(dest.m(2, 0), Cost::finite(3));
        assert_eq!(dest.l(1), Cost::finite(2));
        assert_eq!(dest.m(1, 0), inf());
    }

    #[test]
    fn merge_on_t1_centre() {
        let leaf = leaf_tables(1, 1);
        let (chain, _) = extend_single_child(false, &leaf, 1, 1);
        let (first, _) = extend_single_child(false, &chain, 1, 1);
        let (c, _) = merge_child(&first, &chain, 1);
        assert_eq!(c.m(2, 0), Cost::finite(6));
        assert_eq!(c.l(1), Cost::finite(5));
    }

    #[test]
    fn merge_with_infeasible_child_l() {
        let leaf = leaf_tables(1, 1);
        let (acc, _) = extend_single_child(false, &leaf, 1, 1);
        let mut child = leaf_tables(1, 1);
        child.l = vec![inf(); 2];
        child.set_m(1, 1, inf());
        let (out, _) = merge_child(&acc, &child, 1);
        // L_1 can only come from acc.L_1 + child at budget 0.
        assert_eq!(out.l(1), acc.l(1).plus(Cost::finite(1)));
        // No split pairs acc.M with a diffusing child.
        assert_eq!(out.m(2, 1), acc.m(1, 1).plus_u64(2));
    }

    #[test]
    fn star_two_leaves() {
        let leaf = leaf_tables(2, 1);
        let (acc, _) = extend_single_child(false, &leaf, 2, 1);
        let (m, _) = merge_child(&acc, &leaf, 2);
        // two paths over the virtual arc plus one arc to each leaf
        assert_eq!(m.m(2, 0), Cost::finite(4));
        let (root, _) = finalize_root(&[&leaf, &leaf], 2);
        assert_eq!(root, Cost::finite(2));
    }

    #[test]
    fn finalize_on_chain_and_t1() {
        let chain = RootedTree::from_arcs(0, &[(0, 1), (1, 2)], [2]);
        for k in 0..3 {
            assert_eq!(solve_dnmtp(&chain, k).unwrap().load, 2);
        }
        assert_eq!(solve_dnmtp(&t1(), 1).unwrap().load, 5);
    }

    #[test]
    fn solve_reference_instances() {
        let p = solve_dnmtp(&t1(), 1).unwrap();
        assert_eq!((p.load, p.diffusers.to_vec()), (5, vec![1]));
        let p = solve_dnmtp(&t4(), 1).unwrap();
        assert_eq!((p.load, p.diffusers.to_vec()), (2, vec![1]));
        let p = solve_dnmtp(&t1(), 0).unwrap();
        assert_eq!((p.load, p.diffusers.len()), (6, 0));
        let p = solve_dnmtp(&t1(), 5).unwrap();
        assert_eq!(p.load, 5);
        assert_eq!(load(&t1(), &p.diffusers).unwrap(), 5);
        assert!(p.diffusers.len() <= 5);
    }

    #[test]
    fn loads_match_brute_force_for_every_budget() {
        let t = RootedTree::from_arcs(
            0,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (2, 4),
                (1, 5),
                (5, 6),
                (5, 7),
                (0, 8),
                (8, 9),
            ],
            [3, 4, 6, 7, 9, 5],
        );
        let sol = Solver::new(4).solve(&t).unwrap();
        for k in 0..=4 {
            assert_eq!(
                sol.load(k),
                brute_force_optimal(&t, k).unwrap().1,
                "k = {k}"
            );
            let d = sol.extract_placement(k).unwrap();
            assert_eq!(load(&t, &d).unwrap(), sol.load(k));
        }
    }

    #[test]
    fn charged_root_value() {
        let sol = Solver::new(1).solve(&t1()).unwrap();
        // root diffusing: one unit on the virtual arc, no budget left below it
        assert_eq!(sol.charged_root_load(), Some(7));
        let sol = Solver::new(2).solve(&t1()).unwrap();
        assert_eq!(sol.charged_root_load(), Some(6));
        assert_eq!(
            Solver::new(0).solve(&t1()).unwrap().charged_root_load(),
            None
        );
    }

    #[test]
    fn tables_csv_dump() {
        let sol = Solver::new(1).solve(&t4()).unwrap();
        let mut buf = Vec::new();
        sol.write_tables_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,kind,row,col,value\n"));
        assert!(text.contains("1,M,2,0,3\n"));
        assert!(text.contains("1,M,1,0,inf\n"));
        assert!(text.contains("1,L,1,1,2\n"));
    }
}
