//! Greedy and random initialization followed by coordinate descent over
//! tree nodes, repeated over seeded restarts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::problem::{improves, ranks_before, tolerance, Problem, SNode, Score};
use super::{check_inputs, default_feature_names, FitConfig, Lambda, PolicyTree};
use crate::error::{Error, Result};
use crate::rewards::RewardMatrix;

const MAX_SWEEPS: usize = 100;
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Objective (gain units: larger is better, penalty subtracted) after the
/// initial tree and after every sweep, one list per restart.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    pub restarts: Vec<Vec<f64>>,
}

/// Fits a policy tree maximizing total reward (or minimizing, per the
/// reward sense) minus the split penalty, under the depth and leaf-size
/// limits of `config`.
///
/// Restart 0 starts from the greedy tree. A later restart replaces the
/// incumbent only with a better objective or, at equal objective, fewer
/// splits.
pub fn fit(rewards: &RewardMatrix, features: &[Vec<f64>], config: &FitConfig) -> Result<PolicyTree> {
    fit_with_trace(rewards, features, config).map(|(t, _)| t)
}

pub fn fit_with_trace(
    rewards: &RewardMatrix,
    features: &[Vec<f64>],
    config: &FitConfig,
) -> Result<(PolicyTree, FitTrace)> {
    config.check()?;
    let d = check_inputs(rewards, features)?;
    let n = rewards.n_rows();
    if n < config.min_leaf || n == 0 {
        return Err(Error::TooFewSamples {
            n,
            min_leaf: config.min_leaf,
        });
    }
    let lambda = match config.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto => {
            let grid = super::GridSpec::from_config(config);
            let chosen = super::cross_validate(rewards, features, 3, &grid)?;
            return Ok((chosen.tree, FitTrace::default()));
        }
    };
    let problem = Problem::new(rewards, features, config, lambda);
    let runs: Vec<(SNode, Score, Vec<f64>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = config.seed.wrapping_add((r as u64).wrapping_mul(SEED_STRIDE));
            run_restart(&problem, r, seed)
        })
        .collect();
    let mut trace = FitTrace::default();
    let mut best: Option<(SNode, Score)> = None;
    for (tree, score, t) in runs {
        trace.restarts.push(t);
        let replace = match &best {
            None => true,
            Some((_, bs)) => improves(score, *bs),
        };
        if replace {
            best = Some((tree, score));
        }
    }
    let (tree, _) = best.expect("at least one restart");
    let tree = tree.collapse_uniform();
    debug_assert!(tree.depth() <= config.max_depth);
    let policy = tree.into_policy(
        rewards.action_set().names().to_vec(),
        default_feature_names(d),
    );
    Ok((policy, trace))
}

fn run_restart(p: &Problem, restart: usize, seed: u64) -> (SNode, Score, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<u32> = (0..p.n as u32).collect();
    let mut tree = if restart == 0 || rng.gen_bool(0.5) {
        greedy(p, &all, 0)
    } else {
        random_tree(p, &all, 0, &mut rng)
    };
    let mut score = p.fit_leaves(&mut tree, &all).expect("initial trees are feasible");
    let mut trace = vec![score.obj];
    for _ in 0..MAX_SWEEPS {
        let mut paths = tree.paths();
        paths.shuffle(&mut rng);
        let mut improved = false;
        for path in paths {
            let Some(node) = tree.at_path(&path) else {
                continue;
            };
            let rows = p.rows_at(&tree, &path);
            if let Some(replacement) = best_move(p, node, &rows, path.len()) {
                let mut candidate = tree.clone();
                *candidate.at_path_mut(&path).expect("path exists") = replacement;
                if let Some(s) = p.fit_leaves(&mut candidate, &all) {
                    if improves(s, score) {
                        tree = candidate;
                        score = s;
                        improved = true;
                    }
                }
            }
        }
        trace.push(score.obj);
        if !improved {
            break;
        }
    }
    (tree, score, trace)
}

/// Best replacement for `node` among: collapse to a leaf, promote either
/// child, re-split on any feature and threshold keeping the child
/// structures, a fresh stump, and the optimal depth-two subtree when two
/// levels remain. Returns `None` unless it beats the
/// current subtree.
fn best_move(p: &Problem, node: &SNode, rows: &[u32], depth: usize) -> Option<SNode> {
    let mut current = node.clone();
    let cur = p.fit_leaves(&mut current, rows)?;
    let mut best: Option<(SNode, Score)> = None;
    let offer = |mut cand: SNode, best: &mut Option<(SNode, Score)>| {
        if let Some(s) = p.fit_leaves(&mut cand, rows) {
            let better = match best {
                None => true,
                Some((bt, bs)) => ranks_before((&cand, s), (bt, *bs)),
            };
            if better {
                *best = Some((cand, s));
            }
        }
    };
    offer(SNode::Leaf(0), &mut best);
    let mask = p.membership(rows);
    let remaining = p.max_depth.saturating_sub(depth);
    if let SNode::Split { left, right, .. } = node {
        offer((**left).clone(), &mut best);
        offer((**right).clone(), &mut best);
        for f in 0..p.d {
            if let Some((t, _)) = p.sweep(f, &mask, left, right) {
                offer(split(f, t, (**left).clone(), (**right).clone()), &mut best);
            }
        }
    }
    if remaining >= 2 {
        offer(p.best_depth2(rows), &mut best);
    }
    if remaining >= 1 {
        let leaf = SNode::Leaf(0);
        for f in 0..p.d {
            if let Some((t, _)) = p.sweep(f, &mask, &leaf, &leaf) {
                offer(split(f, t, leaf.clone(), leaf.clone()), &mut best);
            }
        }
    }
    let (cand, s) = best?;
    improves(s, cur).then_some(cand)
}

fn split(feature: usize, threshold: f64, left: SNode, right: SNode) -> SNode {
    SNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Top-down tree taking, at every node, the stump with the largest
/// immediate gain over a leaf.
pub(crate) fn greedy(p: &Problem, rows: &[u32], depth: usize) -> SNode {
    let (action, leaf_gain) = p.best_leaf(rows);
    if depth >= p.max_depth {
        return SNode::Leaf(action);
    }
    let mask = p.membership(rows);
    let leaf = SNode::Leaf(0);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..p.d {
        if let Some((t, obj)) = p.sweep(f, &mask, &leaf, &leaf) {
            if best.map_or(true, |(_, _, b)| obj > b + tolerance(b)) {
                best = Some((f, t, obj));
            }
        }
    }
    match best {
        Some((f, t, obj)) if obj > leaf_gain + tolerance(leaf_gain) => {
            let (l, r) = p.partition(rows, f, t);
            split(f, t, greedy(p, &l, depth + 1), greedy(p, &r, depth + 1))
        }
        _ => SNode::Leaf(action),
    }
}

/// Random feasible tree: each node splits with probability 1/2 on a random
/// feature and a random threshold leaving `min_leaf` rows on both sides.
fn random_tree(p: &Problem, rows: &[u32], depth: usize, rng: &mut ChaCha8Rng) -> SNode {
    if depth >= p.max_depth || rows.len() < 2 * p.min_leaf || !rng.gen_bool(0.5) {
        return SNode::Leaf(0);
    }
    let mut options: Vec<(usize, f64)> = Vec::new();
    for f in 0..p.d {
        let mut vals: Vec<f64> = rows.iter().map(|&i| p.cols[f][i as usize]).collect();
        vals.sort_by(f64::total_cmp);
        for &t in &p.thresholds[f] {
            let left = vals.partition_point(|&v| v < t);
            if left >= p.min_leaf && rows.len() - left >= p.min_leaf {
                options.push((f, t));
            }
        }
    }
    if options.is_empty() {
        return SNode::Leaf(0);
    }
    let (f, t) = options[rng.gen_range(0..options.len())];
    let (l, r) = p.partition(rows, f, t);
    split(f, t, random_tree(p, &l, depth + 1, rng), random_tree(p, &r, depth + 1, rng))
}
