//! Rejection intervals for one binary scorer, and class-prescribing
//! policies with a reject option built on policy trees.

use crate::error::{Error, Result};
use crate::rewards::{ActionSet, RewardMatrix, Sense};
use crate::tree::{fit, FitConfig, PolicyTree};

/// Scores in `[a, b]` are rejected; above `b` predict 1, below `a` predict 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RejectionInterval {
    pub a: f64,
    pub b: f64,
    /// Samples outside the interval.
    pub coverage: usize,
    /// Accuracy over covered samples; 1 when nothing is covered.
    pub achieved_accuracy: f64,
    /// Share of covered positives predicted 0, when any positive is covered.
    pub achieved_fnr: Option<f64>,
    /// Share of covered negatives predicted 1, when any negative is covered.
    pub achieved_fpr: Option<f64>,
}

impl RejectionInterval {
    pub fn predict(&self, score: f64) -> Option<usize> {
        if score > self.b {
            Some(1)
        } else if score < self.a {
            Some(0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorCaps {
    pub fnr_max: Option<f64>,
    pub fpr_max: Option<f64>,
}

fn check_binary(scores: &[f64], labels: &[usize], alpha: f64) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            what: "labels".into(),
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::config("need at least one score"));
    }
    if let Some(i) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::config(format!("score {} at row {i} is outside [0, 1]", scores[i])));
    }
    if let Some(i) = labels.iter().position(|&y| y > 1) {
        return Err(Error::config(format!("label {} at row {i} is not binary", labels[i])));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config(format!("accuracy floor {alpha} is outside [0, 1]")));
    }
    Ok(())
}

/// Interval maximizing coverage subject to accuracy ≥ `alpha` over covered
/// samples and the optional error-rate caps. Endpoints range over 0, 1,
/// every distinct score and every midpoint between consecutive distinct
/// scores. Ties: higher accuracy, then narrower, then smaller `a`.
pub fn solve_single_interval(
    scores: &[f64],
    labels: &[usize],
    alpha: f64,
    caps: ErrorCaps,
) -> Result<RejectionInterval> {
    check_binary(scores, labels, alpha)?;
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut cands = vec![0.0, 1.0];
    cands.extend(&distinct);
    cands.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    solve_over(scores, labels, alpha, caps, cands)
}

/// Coarse variant with endpoints on the grid `{0, 1/g, …, 1}`.
pub fn solve_single_interval_grid(
    scores: &[f64],
    labels: &[usize],
    alpha: f64,
    caps: ErrorCaps,
    g: usize,
) -> Result<RejectionInterval> {
    check_binary(scores, labels, alpha)?;
    if g == 0 {
        return Err(Error::config("grid size must be positive"));
    }
    let cands = (0..=g).map(|k| k as f64 / g as f64).collect();
    solve_over(scores, labels, alpha, caps, cands)
}

fn solve_over(
    scores: &[f64],
    labels: &[usize],
    alpha: f64,
    caps: ErrorCaps,
    mut cands: Vec<f64>,
) -> Result<RejectionInterval> {
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut neg: Vec<f64> = Vec::new();
    let mut pos: Vec<f64> = Vec::new();
    for (&s, &y) in scores.iter().zip(labels) {
        if y == 1 { pos.push(s) } else { neg.push(s) }
    }
    neg.sort_by(f64::total_cmp);
    pos.sort_by(f64::total_cmp);
    let below = |v: &[f64], t: f64| v.partition_point(|&s| s < t);
    let above = |v: &[f64], t: f64| v.len() - v.partition_point(|&s| s <= t);
    let neg_below: Vec<usize> = cands.iter().map(|&t| below(&neg, t)).collect();
    let pos_below: Vec<usize> = cands.iter().map(|&t| below(&pos, t)).collect();
    let neg_above: Vec<usize> = cands.iter().map(|&t| above(&neg, t)).collect();
    let pos_above: Vec<usize> = cands.iter().map(|&t| above(&pos, t)).collect();

    let mut best: Option<RejectionInterval> = None;
    for i in 0..cands.len() {
        for j in i..cands.len() {
            let (tn, fn_) = (neg_below[i], pos_below[i]);
            let (fp, tp) = (neg_above[j], pos_above[j]);
            let Some(cand) = assess(cands[i], cands[j], tn, fn_, fp, tp, alpha, caps) else {
                continue;
            };
            if best.as_ref().map_or(true, |b| preferred(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    Ok(best.expect("a = 0, b = 1 covers nothing and is always feasible"))
}

#[allow(clippy::too_many_arguments)]
fn assess(
    a: f64,
    b: f64,
    tn: usize,
    fn_: usize,
    fp: usize,
    tp: usize,
    alpha: f64,
    caps: ErrorCaps,
) -> Option<RejectionInterval> {
    let coverage = tn + fn_ + fp + tp;
    let accuracy = if coverage == 0 {
        1.0
    } else {
        (tn + tp) as f64 / coverage as f64
    };
    let fnr = (tp + fn_ > 0).then(|| fn_ as f64 / (tp + fn_) as f64);
    let fpr = (tn + fp > 0).then(|| fp as f64 / (tn + fp) as f64);
    if accuracy < alpha {
        return None;
    }
    if let (Some(cap), Some(r)) = (caps.fnr_max, fnr) {
        if r > cap {
            return None;
        }
    }
    if let (Some(cap), Some(r)) = (caps.fpr_max, fpr) {
        if r > cap {
            return None;
        }
    }
    Some(RejectionInterval {
        a,
        b,
        coverage,
        achieved_accuracy: accuracy,
        achieved_fnr: fnr,
        achieved_fpr: fpr,
    })
}

fn preferred(x: &RejectionInterval, y: &RejectionInterval) -> bool {
    x.coverage
        .cmp(&y.coverage)
        .then(x.achieved_accuracy.total_cmp(&y.achieved_accuracy))
        .then((y.b - y.a).total_cmp(&(x.b - x.a)))
        .then(y.a.total_cmp(&x.a))
        .is_gt()
}

/// Rewards and tree settings for class-prescribing policies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPolicyConfig {
    /// Reward of rejecting.
    pub alpha: f64,
    /// Reward of a correct prediction per true class; all ones when `None`.
    pub beta: Option<Vec<f64>>,
    pub n_classes: usize,
    pub tree: FitConfig,
}

impl ClassPolicyConfig {
    pub fn new(alpha: f64, n_classes: usize, tree: FitConfig) -> Self {
        ClassPolicyConfig {
            alpha,
            beta: None,
            n_classes,
            tree,
        }
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Self {
        self.beta = Some(beta);
        self
    }
}

/// Reward matrix over actions `class 0 … class K-1, reject`: `beta_y` for
/// predicting the true class, 0 for any other class, `alpha` for rejecting.
pub fn class_policy_rewards(labels: &[usize], config: &ClassPolicyConfig) -> Result<RewardMatrix> {
    let k = config.n_classes;
    if k == 0 {
        return Err(Error::config("need at least one class"));
    }
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(Error::config(format!("alpha {} must be positive", config.alpha)));
    }
    let beta = match &config.beta {
        None => vec![1.0; k],
        Some(b) if b.len() != k => {
            return Err(Error::DimensionMismatch {
                what: "beta".into(),
                expected: k,
                found: b.len(),
            })
        }
        Some(b) if b.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
            return Err(Error::config("beta entries must be positive"))
        }
        Some(b) => b.clone(),
    };
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y >= k {
                return Err(Error::config(format!("label {y} at row {i} out of range for {k} classes")));
            }
            let mut row = vec![0.0; k + 1];
            row[y] = beta[y];
            row[k] = config.alpha;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    RewardMatrix::new(rows, Sense::Maximize, ActionSet::classes(k).with_rejection())
}

/// Policy tree over model scores (`n × m`) prescribing a class or
/// rejection.
pub fn fit_class_policy(scores: &[Vec<f64>], labels: &[usize], config: &ClassPolicyConfig) -> Result<PolicyTree> {
    if let Some((i, j)) = scores
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.iter().position(|s| !(0.0..=1.0).contains(s)).map(|j| (i, j)))
    {
        return Err(Error::config(format!("score at row {i}, column {j} is outside [0, 1]")));
    }
    let rewards = class_policy_rewards(labels, config)?;
    let tree = fit(&rewards, scores, &config.tree)?;
    let names = (0..scores.first().map_or(0, Vec::len)).map(|j| format!("score{j}")).collect();
    tree.with_feature_names(names)
}

/// Action of one class-prescription tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prescription {
    Class(usize),
    Reject,
}

impl Prescription {
    /// Reads an action index of a class-policy tree with `k` classes.
    pub fn from_action(action: usize, k: usize) -> Self {
        if action < k {
            Prescription::Class(action)
        } else {
            Prescription::Reject
        }
    }
}

/// Joint decision of two binary class-prescription trees: positive when
/// the first says 1 and the second does not say 0, negative when the
/// second says 0 and the first does not say 1, otherwise reject.
pub fn combine_prescriptions(actions: &[Prescription]) -> Result<Prescription> {
    let [t1, t2] = actions else {
        return Err(Error::UnsupportedArity(actions.len()));
    };
    for p in [t1, t2] {
        if let Prescription::Class(c) = p {
            if *c > 1 {
                return Err(Error::config(format!("class {c} is not binary")));
            }
        }
    }
    use Prescription::*;
    Ok(match (*t1, *t2) {
        (Class(1), Class(1) | Reject) => Class(1),
        (Class(0) | Reject, Class(0)) => Class(0),
        _ => Reject,
    })
}
