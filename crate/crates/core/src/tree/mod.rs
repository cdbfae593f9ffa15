//! Policy trees: fitting, pruning, inference and serialization.
//!
//! A [`PolicyTree`] routes a feature row to a leaf (left iff the split
//! feature is strictly below the threshold) and prescribes the leaf's action.
//! [`fit`] optimizes the whole tree by coordinate descent over its nodes,
//! restarted from greedy and random initial trees; [`exhaustive_fit`] is a
//! brute-force reference for small instances.

mod exhaustive;
mod grid;
mod io;
mod problem;
mod prune;
mod search;

use std::cmp::Ordering;

pub use exhaustive::exhaustive_fit;
pub(crate) use io::LeafKey;
pub(crate) use problem::candidate_thresholds;
pub use grid::{cross_validate, grid_search, GridResult, GridSpec};
pub use prune::{prune_path, select_by_validation, subtree_for_lambda, PrunePoint};
pub use search::{fit, fit_with_trace, FitTrace};

use crate::error::{Error, Result};
use crate::rewards::{RewardMatrix, Sense};

/// Complexity penalty per split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    /// Chosen by 3-fold cross-validation over the pruning path.
    Auto,
}

/// How split thresholds are proposed for each feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thresholds {
    /// Midpoints between consecutive distinct values.
    AllMidpoints,
    /// At most `q` of those midpoints, evenly spaced by rank.
    Quantiles(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: Lambda,
    pub restarts: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_depth: 3,
            min_leaf: 1,
            lambda: Lambda::Fixed(0.0),
            restarts: 10,
            seed: 0,
            thresholds: Thresholds::AllMidpoints,
        }
    }
}

impl FitConfig {
    pub fn depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }

    pub fn min_leaf(mut self, c: usize) -> Self {
        self.min_leaf = c;
        self
    }

    pub fn lambda(mut self, l: f64) -> Self {
        self.lambda = Lambda::Fixed(l);
        self
    }

    pub fn restarts(mut self, r: usize) -> Self {
        self.restarts = r;
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = s;
        self
    }

    pub fn thresholds(mut self, t: Thresholds) -> Self {
        self.thresholds = t;
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::config("min_leaf must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts must be at least 1"));
        }
        if let Lambda::Fixed(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::config(format!("lambda {l} must be finite and >= 0")));
            }
        }
        if self.thresholds == Thresholds::Quantiles(0) {
            return Err(Error::config("quantile count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        action: usize,
    },
}

/// Binary tree of axis-aligned splits with an action index at every leaf.
///
/// Nodes are stored in preorder with the root at index 0 once built by this
/// crate; trees read from JSON are renumbered the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTree {
    nodes: Vec<TreeNode>,
    root: usize,
    action_names: Vec<String>,
    feature_names: Vec<String>,
}

impl PolicyTree {
    /// Single-leaf tree.
    pub fn leaf(action: usize, action_names: Vec<String>, feature_names: Vec<String>) -> Self {
        PolicyTree {
            nodes: vec![TreeNode::Leaf { action }],
            root: 0,
            action_names,
            feature_names,
        }
    }

    /// Builds a tree after checking it is a proper binary tree whose leaf
    /// actions and split features are in range.
    pub fn from_nodes(
        nodes: Vec<TreeNode>,
        root: usize,
        action_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = nodes.len();
        if root >= n {
            return Err(Error::parse("root", format!("node {root} does not exist")));
        }
        let mut parents = vec![0usize; n];
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= feature_names.len() {
                        return Err(Error::parse(
                            format!("node {id}"),
                            format!("feature {feature} out of range"),
                        ));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::parse(format!("node {id}"), "threshold is not finite"));
                    }
                    for child in [left, right] {
                        if child >= n {
                            return Err(Error::parse(
                                format!("node {id}"),
                                format!("child {child} does not exist"),
                            ));
                        }
                        parents[child] += 1;
                    }
                }
                TreeNode::Leaf { action } => {
                    if action >= action_names.len() {
                        return Err(Error::parse(
                            format!("node {id}"),
                            format!("action {action} out of range"),
                        ));
                    }
                }
            }
        }
        if parents[root] != 0 {
            return Err(Error::parse("root", "root has a parent"));
        }
        if let Some(id) = (0..n).find(|&i| i != root && parents[i] != 1) {
            return Err(Error::parse(
                format!("node {id}"),
                format!("referenced {} times, expected once", parents[id]),
            ));
        }
        // With one parent per non-root node, reachability rules out cycles.
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::parse(format!("node {id}"), "cycle"));
            }
            if let TreeNode::Split { left, right, .. } = nodes[id] {
                stack.push(left);
                stack.push(right);
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(Error::parse(format!("node {id}"), "unreachable from root"));
        }
        let tree = PolicyTree {
            nodes,
            root,
            action_names,
            feature_names,
        };
        Ok(tree.renumbered())
    }

    /// Same tree with nodes in preorder, root at 0.
    fn renumbered(&self) -> PolicyTree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        fn walk(src: &[TreeNode], id: usize, out: &mut Vec<TreeNode>) -> usize {
            let slot = out.len();
            out.push(TreeNode::Leaf { action: 0 });
            out[slot] = match src[id] {
                TreeNode::Leaf { action } => TreeNode::Leaf { action },
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let l = walk(src, left, out);
                    let r = walk(src, right, out);
                    TreeNode::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    }
                }
            };
            slot
        }
        walk(&self.nodes, self.root, &mut nodes);
        PolicyTree {
            nodes,
            root: 0,
            action_names: self.action_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                what: "feature names".into(),
                expected: self.feature_names.len(),
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Split { .. }))
            .count()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.len() - self.n_splits()
    }

    /// Depth of the deepest leaf; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, self.root)
    }

    /// Leaf node id reached by `row`.
    pub fn leaf_of(&self, row: &[f64]) -> usize {
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                TreeNode::Leaf { .. } => return id,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] < threshold { left } else { right },
            }
        }
    }

    /// Action index prescribed for `row`.
    pub fn prescribe(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                what: "feature row".into(),
                expected: self.feature_names.len(),
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("feature {j}"),
            });
        }
        Ok(self.prescribe_unchecked(row))
    }

    pub(crate) fn prescribe_unchecked(&self, row: &[f64]) -> usize {
        match self.nodes[self.leaf_of(row)] {
            TreeNode::Leaf { action } => action,
            TreeNode::Split { .. } => unreachable!("leaf_of returns a leaf"),
        }
    }

    pub fn prescribe_all(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.prescribe(r)).collect()
    }

    /// Thresholds of every split on `feature`, ascending.
    pub fn thresholds_on(&self, feature: usize) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .nodes
            .iter()
            .filter_map(|n| match *n {
                TreeNode::Split {
                    feature: f,
                    threshold,
                    ..
                } if f == feature => Some(threshold),
                _ => None,
            })
            .collect();
        t.sort_by(f64::total_cmp);
        t
    }

    /// Penalized objective in the rewards' own sense: summed reward of the
    /// prescribed actions, minus (maximize) or plus (minimize) `lambda` per
    /// split.
    pub fn objective(&self, rewards: &RewardMatrix, features: &[Vec<f64>], lambda: f64) -> f64 {
        let total: f64 = features
            .iter()
            .enumerate()
            .map(|(i, row)| rewards.get(i, self.prescribe_unchecked(row)))
            .sum();
        let penalty = lambda * self.n_splits() as f64;
        match rewards.sense() {
            Sense::Maximize => total - penalty,
            Sense::Minimize => total + penalty,
        }
    }

    /// Compares trees by the structural tie-break: preorder node sequence,
    /// leaves before splits, splits by (feature, threshold), leaves by action.
    pub fn cmp_structure(&self, other: &PolicyTree) -> Ordering {
        fn walk(t: &PolicyTree, id: usize, out: &mut Vec<(u8, usize, f64)>) {
            match t.nodes[id] {
                TreeNode::Leaf { action } => out.push((0, action, 0.0)),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push((1, feature, threshold));
                    walk(t, left, out);
                    walk(t, right, out);
                }
            }
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        walk(self, self.root, &mut a);
        walk(other, other.root, &mut b);
        for (x, y) in a.iter().zip(&b) {
            let o = x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.total_cmp(&y.2));
            if o != Ordering::Equal {
                return o;
            }
        }
        a.len().cmp(&b.len())
    }

    /// Collapses every node at `depth` into a leaf holding the best action
    /// over the `features` rows reaching it.
    pub fn truncate(&self, depth: usize, rewards: &RewardMatrix, features: &[Vec<f64>]) -> PolicyTree {
        let rows: Vec<usize> = (0..features.len()).collect();
        let mut nodes = Vec::new();
        fn walk(
            t: &PolicyTree,
            id: usize,
            depth: usize,
            rows: Vec<usize>,
            rewards: &RewardMatrix,
            features: &[Vec<f64>],
            out: &mut Vec<TreeNode>,
        ) -> usize {
            let slot = out.len();
            out.push(TreeNode::Leaf { action: 0 });
            out[slot] = match t.nodes[id] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } if depth > 0 => {
                    let (lr, rr): (Vec<usize>, Vec<usize>) =
                        rows.into_iter().partition(|&i| features[i][feature] < threshold);
                    let l = walk(t, left, depth - 1, lr, rewards, features, out);
                    let r = walk(t, right, depth - 1, rr, rewards, features, out);
                    TreeNode::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    }
                }
                TreeNode::Split { .. } if !rows.is_empty() => TreeNode::Leaf {
                    action: rewards.best_action(rows),
                },
                TreeNode::Split { .. } => TreeNode::Leaf {
                    action: first_leaf_action(t, id),
                },
                TreeNode::Leaf { action } => TreeNode::Leaf { action },
            };
            slot
        }
        fn first_leaf_action(t: &PolicyTree, mut id: usize) -> usize {
            loop {
                match t.nodes[id] {
                    TreeNode::Leaf { action } => return action,
                    TreeNode::Split { left, .. } => id = left,
                }
            }
        }
        walk(self, self.root, depth, rows, rewards, features, &mut nodes);
        PolicyTree {
            nodes,
            root: 0,
            action_names: self.action_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        io::to_json(self, io::LeafKey::Action)
    }

    pub fn from_json(text: &str) -> Result<PolicyTree> {
        io::from_json(text, io::LeafKey::Action)
    }

    pub fn to_dot(&self) -> String {
        io::to_dot(self)
    }
}

/// Routing summary of a tree over a reward matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalSummary {
    pub total_reward: f64,
    pub mean_reward: f64,
    pub per_action_counts: Vec<usize>,
    pub reject_fraction: f64,
}

/// Routes every row and totals the rewards of the prescribed actions.
pub fn evaluate(tree: &PolicyTree, rewards: &RewardMatrix, features: &[Vec<f64>]) -> Result<EvalSummary> {
    if rewards.n_rows() != features.len() {
        return Err(Error::DimensionMismatch {
            what: "feature rows".into(),
            expected: rewards.n_rows(),
            found: features.len(),
        });
    }
    if tree.action_names.len() != rewards.n_actions() {
        return Err(Error::DimensionMismatch {
            what: "tree actions".into(),
            expected: rewards.n_actions(),
            found: tree.action_names.len(),
        });
    }
    let mut counts = vec![0usize; rewards.n_actions()];
    let mut total = 0.0;
    for (i, row) in features.iter().enumerate() {
        let a = tree.prescribe(row)?;
        counts[a] += 1;
        total += rewards.get(i, a);
    }
    let n = features.len();
    let rejected: usize = counts
        .iter()
        .enumerate()
        .filter(|(a, _)| rewards.action_set().is_rejection(*a))
        .map(|(_, c)| c)
        .sum();
    Ok(EvalSummary {
        total_reward: total,
        mean_reward: if n == 0 { 0.0 } else { total / n as f64 },
        per_action_counts: counts,
        reject_fraction: if n == 0 { 0.0 } else { rejected as f64 / n as f64 },
    })
}

pub(crate) fn check_inputs(rewards: &RewardMatrix, features: &[Vec<f64>]) -> Result<usize> {
    if rewards.n_rows() != features.len() {
        return Err(Error::DimensionMismatch {
            what: "feature rows".into(),
            expected: rewards.n_rows(),
            found: features.len(),
        });
    }
    let d = features.first().map(Vec::len).unwrap_or(0);
    for (i, row) in features.iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                what: format!("feature row {i}"),
                expected: d,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("feature row {i}, column {j}"),
            });
        }
    }
    Ok(d)
}

pub(crate) fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}
