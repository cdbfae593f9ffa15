//! Brute-force optimal trees for small instances.

use super::problem::{Problem, SNode};
use super::{check_inputs, default_feature_names, FitConfig, Lambda, PolicyTree};
use crate::error::{Error, Result};
use crate::rewards::RewardMatrix;

const MAX_ROWS: usize = 64;
const MAX_FEATURES: usize = 3;
const MAX_DEPTH: usize = 2;
const MAX_THRESHOLDS: usize = 16;

/// Globally optimal tree over every structure up to the configured depth
/// and every candidate threshold. Ties go to fewer splits, then the
/// structural order (lower feature, lower threshold, lower action).
///
/// Subtrees are optimized independently below each split, which is exact
/// because the objective is additive over the two sides.
pub fn exhaustive_fit(rewards: &RewardMatrix, features: &[Vec<f64>], config: &FitConfig) -> Result<PolicyTree> {
    config.check()?;
    let d = check_inputs(rewards, features)?;
    let n = rewards.n_rows();
    let lambda = match config.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto => return Err(Error::config("exhaustive_fit needs a fixed lambda")),
    };
    if n > MAX_ROWS || d > MAX_FEATURES || config.max_depth > MAX_DEPTH {
        return Err(Error::InstanceTooLarge(format!(
            "n={n}, d={d}, depth={} exceeds n<={MAX_ROWS}, d<={MAX_FEATURES}, depth<={MAX_DEPTH}",
            config.max_depth
        )));
    }
    if n < config.min_leaf || n == 0 {
        return Err(Error::TooFewSamples {
            n,
            min_leaf: config.min_leaf,
        });
    }
    let p = Problem::new(rewards, features, config, lambda);
    if let Some(f) = p.thresholds.iter().position(|t| t.len() > MAX_THRESHOLDS) {
        return Err(Error::InstanceTooLarge(format!(
            "feature {f} has {} candidate thresholds (max {MAX_THRESHOLDS})",
            p.thresholds[f].len()
        )));
    }
    let rows: Vec<u32> = (0..n as u32).collect();
    let (tree, _, _) = optimal(&p, &rows, config.max_depth);
    Ok(tree.into_policy(rewards.action_set().names().to_vec(), default_feature_names(d)))
}

fn optimal(p: &Problem, rows: &[u32], depth: usize) -> (SNode, f64, usize) {
    let (action, gain) = p.best_leaf(rows);
    let mut best = (SNode::Leaf(action), gain, 0usize);
    if depth == 0 {
        return best;
    }
    for f in 0..p.d {
        for &t in &p.thresholds[f] {
            let (l, r) = p.partition(rows, f, t);
            if l.len() < p.min_leaf || r.len() < p.min_leaf {
                continue;
            }
            let (lt, lo, ls) = optimal(p, &l, depth - 1);
            let (rt, ro, rs) = optimal(p, &r, depth - 1);
            let obj = lo + ro - p.lambda;
            let splits = ls + rs + 1;
            let cand = SNode::Split {
                feature: f,
                threshold: t,
                left: Box::new(lt),
                right: Box::new(rt),
            };
            let better = obj > best.1
                || (obj == best.1
                    && (splits < best.2
                        || (splits == best.2 && cand.cmp_structure(&best.0).is_lt())));
            if better {
                best = (cand, obj, splits);
            }
        }
    }
    best
}
