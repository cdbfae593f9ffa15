#![allow(dead_code)]

pub mod props;

use op2t::baseline::{fit_meta_tree, meta_labels_from_rewards};
use op2t::reject_intervals::ErrorCaps;
use op2t::rewards::{ActionSet, RewardMatrix, Sense};
use op2t::synth::{gaussian_rewards, GaussianRewardSpec};
use op2t::tree::{fit, FitConfig, PolicyTree};

pub fn action_names(a: usize) -> Vec<String> {
    (0..a).map(|j| format!("a{j}")).collect()
}

pub fn matrix(rows: Vec<Vec<f64>>, sense: Sense) -> RewardMatrix {
    let a = rows[0].len();
    RewardMatrix::new(rows, sense, ActionSet::singles(&action_names(a))).unwrap()
}

pub fn gain(sense: Sense, v: f64) -> f64 {
    match sense {
        Sense::Maximize => v,
        Sense::Minimize => -v,
    }
}

/// Action changes along a one-feature tree on `[lo, hi]`: the boundaries
/// where the prescription switches and the action name on each segment.
pub fn segments(tree: &PolicyTree, lo: f64, hi: f64) -> (Vec<f64>, Vec<String>) {
    let mut cuts: Vec<f64> = tree.thresholds_on(0).into_iter().filter(|t| *t > lo && *t < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![lo];
    edges.extend(&cuts);
    edges.push(hi);
    let mut bounds = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (i, w) in edges.windows(2).enumerate() {
        let name = tree.action_names()[tree.prescribe(&[w[0] + (w[1] - w[0]) / 2.0]).unwrap()].clone();
        if names.last() != Some(&name) {
            if i > 0 {
                bounds.push(w[0]);
            }
            names.push(name);
        }
    }
    (bounds, names)
}

/// Strips a `@alpha` suffix so several rejection columns read as one.
pub fn base_name(name: &str) -> &str {
    name.split('@').next().unwrap()
}

fn midpoints(vals: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = vals.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
}

/// Best penalized objective (gain units) over every tree of depth at most
/// `depth` whose leaves hold at least `min_leaf` rows, by enumeration.
pub fn brute_force_objective(
    rewards: &RewardMatrix,
    features: &[Vec<f64>],
    depth: usize,
    min_leaf: usize,
    lambda: f64,
) -> f64 {
    let d = features[0].len();
    let thresholds: Vec<Vec<f64>> = (0..d).map(|f| midpoints(features.iter().map(|r| r[f]))).collect();
    let rows: Vec<usize> = (0..rewards.n_rows()).collect();
    best_subtree(rewards, features, &thresholds, &rows, depth, min_leaf.max(1), lambda)
}

fn best_subtree(
    r: &RewardMatrix,
    x: &[Vec<f64>],
    thresholds: &[Vec<f64>],
    rows: &[usize],
    depth: usize,
    min_leaf: usize,
    lambda: f64,
) -> f64 {
    let sense = r.sense();
    let mut best = (0..r.n_actions())
        .map(|a| gain(sense, rows.iter().map(|&i| r.get(i, a)).sum()))
        .fold(f64::NEG_INFINITY, f64::max);
    if depth == 0 {
        return best;
    }
    for (f, ts) in thresholds.iter().enumerate() {
        for &t in ts {
            let (l, rr): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] < t);
            if l.len() < min_leaf || rr.len() < min_leaf {
                continue;
            }
            let v = best_subtree(r, x, thresholds, &l, depth - 1, min_leaf, lambda)
                + best_subtree(r, x, thresholds, &rr, depth - 1, min_leaf, lambda)
                - lambda;
            best = best.max(v);
        }
    }
    best
}

/// Counts recomputed from scratch for the interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStats {
    pub coverage: usize,
    pub correct: usize,
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl IntervalStats {
    pub fn of(scores: &[f64], labels: &[usize], a: f64, b: f64) -> Self {
        let mut s = IntervalStats {
            coverage: 0,
            correct: 0,
            tp: 0,
            fn_: 0,
            tn: 0,
            fp: 0,
        };
        for (&x, &y) in scores.iter().zip(labels) {
            if x >= a && x <= b {
                continue;
            }
            s.coverage += 1;
            let pred = usize::from(x > b);
            match (y, pred) {
                (1, 1) => s.tp += 1,
                (1, _) => s.fn_ += 1,
                (_, 0) => s.tn += 1,
                _ => s.fp += 1,
            }
        }
        s.correct = s.tp + s.tn;
        s
    }

    /// Checks accuracy and the caps with integer cross-multiplication where
    /// the bound allows, so no rounding decides feasibility.
    pub fn feasible(&self, alpha: f64, caps: ErrorCaps) -> bool {
        let acc_ok = self.coverage == 0 || self.correct as f64 >= alpha * self.coverage as f64;
        let fnr_ok = match caps.fnr_max {
            Some(m) if self.tp + self.fn_ > 0 => self.fn_ as f64 <= m * (self.tp + self.fn_) as f64,
            _ => true,
        };
        let fpr_ok = match caps.fpr_max {
            Some(m) if self.tn + self.fp > 0 => self.fp as f64 <= m * (self.tn + self.fp) as f64,
            _ => true,
        };
        acc_ok && fnr_ok && fpr_ok
    }
}

/// Largest feasible coverage over every endpoint pair drawn from 0, 1, the
/// scores and their midpoints.
pub fn brute_force_coverage(scores: &[f64], labels: &[usize], alpha: f64, caps: ErrorCaps) -> Option<usize> {
    let mut cands = vec![0.0, 1.0];
    cands.extend(scores);
    cands.extend(midpoints(scores.iter().copied()));
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best = None;
    for (i, &a) in cands.iter().enumerate() {
        for &b in &cands[i..] {
            let s = IntervalStats::of(scores, labels, a, b);
            if s.feasible(alpha, caps) && best.map_or(true, |c| s.coverage > c) {
                best = Some(s.coverage);
            }
        }
    }
    best
}

/// Total of the rewards each row receives under `actions`.
pub fn routed_total(rewards: &RewardMatrix, actions: &[usize]) -> f64 {
    actions.iter().enumerate().map(|(i, &a)| rewards.get(i, a)).sum()
}

/// Depth-1 policy tree and depth-1 Meta-Tree totals on the tail example,
/// scaled to integrals over the sampling range.
pub fn tail_totals(seed: u64) -> (f64, f64) {
    let spec = GaussianRewardSpec::tail(seed);
    let (x, r) = gaussian_rewards(&spec).unwrap();
    let scale = (spec.hi - spec.lo) / spec.n as f64;
    let tree = fit(&r, &x, &FitConfig::default().depth(1).restarts(10).seed(seed)).unwrap();
    let policy = routed_total(&r, &tree.prescribe_all(&x).unwrap());
    let meta = fit_meta_tree(&x, &meta_labels_from_rewards(&r), &FitConfig::default().depth(1)).unwrap();
    let routed = routed_total(&r, &meta.predict_all(&x).unwrap());
    (policy * scale, routed * scale)
}

/// One-feature instance for the routing gap: on `x < 0` action 0 wins by 1;
/// on `x >= 10` rows come in groups of four sharing a feature value, where
/// three rows favour action 0 by `eps` and one favours action 1 by `margin`.
pub fn gap_instance(groups: usize, margin: f64, eps: f64) -> (RewardMatrix, Vec<Vec<f64>>) {
    let mut rows = Vec::new();
    let mut x = Vec::new();
    for g in 0..groups {
        rows.push(vec![1.0, 0.0]);
        x.push(vec![-1.0 - g as f64]);
    }
    for g in 0..groups {
        let v = 10.0 + g as f64;
        for k in 0..4 {
            rows.push(if k == 3 { vec![0.0, margin] } else { vec![eps, 0.0] });
            x.push(vec![v]);
        }
    }
    (matrix(rows, Sense::Maximize), x)
}

/// Policy-tree minus Meta-Tree routed totals at depth 2, plus the bound on
/// the mean per-row gap, `(m-1)/m * R_max`, recomputed from the instance.
pub fn routing_gap(rewards: &RewardMatrix, x: &[Vec<f64>]) -> (f64, f64, f64) {
    let cfg = FitConfig::default().depth(2).restarts(10);
    let tree = fit(rewards, x, &cfg).unwrap();
    let policy = routed_total(rewards, &tree.prescribe_all(x).unwrap());
    let meta = fit_meta_tree(x, &meta_labels_from_rewards(rewards), &cfg).unwrap();
    let routed = routed_total(rewards, &meta.predict_all(x).unwrap());
    let m = rewards.n_actions() as f64;
    let r_max = rewards.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gap = policy - routed;
    (gap, gap / x.len() as f64, (m - 1.0) / m * r_max)
}
