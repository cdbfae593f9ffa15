//! Weakest-link pruning and penalty selection on held-out rewards.

use super::problem::{tolerance, SNode};
use super::{check_inputs, PolicyTree};
use crate::error::{Error, Result};
use crate::rewards::RewardMatrix;

/// One subtree of a pruning path. `lambda` is the smallest penalty at which
/// this subtree is optimal among the path's members.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunePoint {
    pub lambda: f64,
    pub tree: PolicyTree,
    /// Summed validation reward of the subtree's prescriptions (no penalty).
    pub val_objective: f64,
}

impl PrunePoint {
    pub fn n_splits(&self) -> usize {
        self.tree.n_splits()
    }
}

/// Nested subtrees obtained by repeatedly collapsing the internal node that
/// loses the least training objective per removed split. Starts at the full
/// tree (leaves refit on the training rows) with `lambda = 0` and ends at a
/// single leaf; breakpoints are nondecreasing and split counts strictly
/// decrease.
pub fn prune_path(
    tree: &PolicyTree,
    train: &RewardMatrix,
    train_features: &[Vec<f64>],
    val: &RewardMatrix,
    val_features: &[Vec<f64>],
) -> Result<Vec<PrunePoint>> {
    check_inputs(train, train_features)?;
    check_inputs(val, val_features)?;
    for (what, r) in [("training rewards", train), ("validation rewards", val)] {
        if r.n_actions() != tree.action_names().len() {
            return Err(Error::DimensionMismatch {
                what: what.into(),
                expected: tree.action_names().len(),
                found: r.n_actions(),
            });
        }
    }
    let d = tree.feature_names().len();
    for rows in [train_features, val_features] {
        if let Some(row) = rows.first() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "feature columns".into(),
                    expected: d,
                    found: row.len(),
                });
            }
        }
    }

    let ctx = Ctx {
        rewards: train,
        features: train_features,
    };
    let all: Vec<usize> = (0..train.n_rows()).collect();
    let mut current = SNode::from_policy(tree);
    ctx.refit(&mut current, &all);

    let mut path = Vec::new();
    let mut lambda = 0.0f64;
    loop {
        let policy = current
            .clone()
            .into_policy(tree.action_names().to_vec(), tree.feature_names().to_vec());
        let val_objective = policy.objective(val, val_features, 0.0);
        path.push(PrunePoint {
            lambda,
            tree: policy,
            val_objective,
        });
        if current.splits() == 0 {
            break;
        }
        let mut links = Vec::new();
        ctx.links(&current, &all, &mut Vec::new(), &mut links);
        let g_min = links.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        let tol = tolerance(g_min);
        let mut collapsed: Vec<Vec<bool>> = Vec::new();
        for (p, g) in links {
            if g <= g_min + tol && !collapsed.iter().any(|c| p.starts_with(c)) {
                let rows = ctx.rows_at(&current, &p);
                let node = current.at_path_mut(&p).expect("path exists");
                let action = if rows.is_empty() {
                    first_leaf(node)
                } else {
                    ctx.rewards.best_action(rows)
                };
                *node = SNode::Leaf(action);
                collapsed.push(p);
            }
        }
        lambda = lambda.max(g_min);
    }
    Ok(path)
}

/// Entry with the best validation objective; ties go to fewer splits.
pub fn select_by_validation<'a>(path: &'a [PrunePoint], val: &RewardMatrix) -> &'a PrunePoint {
    let sense = val.sense();
    let mut best = &path[0];
    for p in &path[1..] {
        let tol = tolerance(best.val_objective);
        let gain = sense.gain(p.val_objective) - sense.gain(best.val_objective);
        if gain > tol || (gain >= -tol && p.n_splits() < best.n_splits()) {
            best = p;
        }
    }
    best
}

/// Subtree optimal at penalty `lambda`: the last entry whose breakpoint is
/// at most `lambda`.
pub fn subtree_for_lambda(path: &[PrunePoint], lambda: f64) -> &PrunePoint {
    path.iter()
        .take_while(|p| p.lambda <= lambda)
        .last()
        .unwrap_or(&path[0])
}

fn first_leaf(mut node: &SNode) -> usize {
    loop {
        match node {
            SNode::Leaf(a) => return *a,
            SNode::Split { left, .. } => node = left,
        }
    }
}

struct Ctx<'a> {
    rewards: &'a RewardMatrix,
    features: &'a [Vec<f64>],
}

impl Ctx<'_> {
    fn gain_of(&self, rows: &[usize], action: usize) -> f64 {
        let sense = self.rewards.sense();
        rows.iter().map(|&i| sense.gain(self.rewards.get(i, action))).sum()
    }

    fn split_rows(&self, rows: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
        rows.iter().partition(|&&i| self.features[i][feature] < threshold)
    }

    fn refit(&self, node: &mut SNode, rows: &[usize]) {
        match node {
            SNode::Leaf(a) => {
                if !rows.is_empty() {
                    *a = self.rewards.best_action(rows.iter().copied());
                }
            }
            SNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let (l, r) = self.split_rows(rows, *feature, *threshold);
                self.refit(left, &l);
                self.refit(right, &r);
            }
        }
    }

    fn rows_at(&self, root: &SNode, path: &[bool]) -> Vec<usize> {
        let mut rows: Vec<usize> = (0..self.features.len()).collect();
        let mut node = root;
        for &go_right in path {
            if let SNode::Split {
                feature,
                threshold,
                left,
                right,
            } = node
            {
                let (l, r) = self.split_rows(&rows, *feature, *threshold);
                (rows, node) = if go_right { (r, &**right) } else { (l, &**left) };
            }
        }
        rows
    }

    /// Collects `(path, g)` for every internal node in preorder, where `g`
    /// is the training gain lost per split if the node became a leaf.
    /// Returns the subtree's summed gain.
    fn links(&self, node: &SNode, rows: &[usize], path: &mut Vec<bool>, out: &mut Vec<(Vec<bool>, f64)>) -> f64 {
        match node {
            SNode::Leaf(a) => self.gain_of(rows, *a),
            SNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let slot = out.len();
                out.push((path.clone(), 0.0));
                let (l, r) = self.split_rows(rows, *feature, *threshold);
                path.push(false);
                let gl = self.links(left, &l, path, out);
                path.pop();
                path.push(true);
                let gr = self.links(right, &r, path, out);
                path.pop();
                let sub = gl + gr;
                let leaf = if rows.is_empty() {
                    sub
                } else {
                    self.gain_of(rows, self.rewards.best_action(rows.iter().copied()))
                };
                out[slot].1 = (sub - leaf).max(0.0) / node.splits() as f64;
                sub
            }
        }
    }
}
