//! Predictive baselines: per-sample best-action labels, a CART classifier
//! over them (the Meta-Tree), and evaluation metrics.

use crate::data::{Targets, ValidatedBundle};
use crate::error::{Error, Result};
use crate::rewards::{blend_probs, blend_value, predicted_class, ActionSet, RejectionSpec, RewardMatrix, PROB_CLAMP};
use crate::tree::LeafKey;
use crate::tree::{FitConfig, PolicyTree, TreeNode};

/// Index of the best action for each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaLabels {
    pub labels: Vec<usize>,
    /// Names of the label values (action names).
    pub names: Vec<String>,
}

impl MetaLabels {
    pub fn n_classes(&self) -> usize {
        self.names.len()
    }
}

/// Best predictive action per sample: the smallest absolute error for
/// regression, or for classification the correct argmax first and the
/// larger true-class probability second. Ties go to the smallest index and
/// rejection actions are never chosen.
pub fn meta_labels(bundle: &ValidatedBundle, actions: &ActionSet) -> Result<MetaLabels> {
    labels_impl(bundle, actions, None)
}

/// As [`meta_labels`], but a sample is labelled with the first rejection
/// action when its best action does worse than rejecting: squared error
/// above `alpha` (regression) or true-class log-probability below
/// `log(1 - alpha_y)` (classification).
pub fn meta_labels_with_rejection(
    bundle: &ValidatedBundle,
    actions: &ActionSet,
    rejection: &RejectionSpec,
) -> Result<MetaLabels> {
    if !actions.has_rejection() {
        return Err(Error::config("rejection labels need a rejection action"));
    }
    labels_impl(bundle, actions, Some(rejection))
}

fn labels_impl(
    bundle: &ValidatedBundle,
    actions: &ActionSet,
    rejection: Option<&RejectionSpec>,
) -> Result<MetaLabels> {
    let ensembles = actions.ensembles()?;
    if ensembles.is_empty() {
        return Err(Error::config("no predictive actions to label with"));
    }
    if actions.n_models() != bundle.preds().n_models() {
        return Err(Error::DimensionMismatch {
            what: "ensemble weight length".into(),
            expected: bundle.preds().n_models(),
            found: actions.n_models(),
        });
    }
    let reject_index = ensembles.len();
    let labels = match bundle.dataset().targets() {
        Targets::Real(y) => {
            let alpha = match rejection {
                None => None,
                Some(RejectionSpec::Regression { alpha }) => Some(*alpha),
                Some(_) => return Err(Error::KindMismatch { expected: "regression" }),
            };
            y.iter()
                .enumerate()
                .map(|(i, &t)| {
                    let mut best = (0, f64::INFINITY);
                    for (a, w) in ensembles.iter().enumerate() {
                        let err = (t - blend_value(bundle, i, w)).abs();
                        if err < best.1 {
                            best = (a, err);
                        }
                    }
                    match alpha {
                        Some(alpha) if best.1 * best.1 > alpha => reject_index,
                        _ => best.0,
                    }
                })
                .collect()
        }
        Targets::Classes { labels, n_classes } => {
            let alpha = match rejection {
                None => None,
                Some(RejectionSpec::Classification { alpha, .. }) if alpha.len() == *n_classes => Some(alpha),
                Some(RejectionSpec::Classification { alpha, .. }) => {
                    return Err(Error::DimensionMismatch {
                        what: "rejection alpha".into(),
                        expected: *n_classes,
                        found: alpha.len(),
                    })
                }
                Some(_) => return Err(Error::KindMismatch { expected: "classification" }),
            };
            let mut blended = vec![0.0; *n_classes];
            labels
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let mut best = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
                    for (a, w) in ensembles.iter().enumerate() {
                        blend_probs(bundle, i, w, &mut blended);
                        let correct = f64::from(u8::from(predicted_class(&blended, None) == y));
                        let ce = blended[y].max(PROB_CLAMP).ln();
                        if correct > best.1 || (correct == best.1 && ce > best.2) {
                            best = (a, correct, ce);
                        }
                    }
                    match alpha {
                        Some(alpha) if best.2 < (1.0 - alpha[y]).ln() => reject_index,
                        _ => best.0,
                    }
                })
                .collect()
        }
    };
    let n_names = if rejection.is_some() {
        reject_index + 1
    } else {
        reject_index
    };
    Ok(MetaLabels {
        labels,
        names: actions.names()[..n_names].to_vec(),
    })
}

/// Best non-rejection action of each reward row (ties to the smallest
/// index), for reward matrices built without model outputs.
pub fn meta_labels_from_rewards(rewards: &RewardMatrix) -> MetaLabels {
    let m = rewards.action_set().n_predictive();
    let sense = rewards.sense();
    let labels = (0..rewards.n_rows())
        .map(|i| {
            let row = rewards.row(i);
            (1..m).fold(0, |b, a| if sense.better(row[a], row[b]) { a } else { b })
        })
        .collect();
    MetaLabels {
        labels,
        names: rewards.action_set().names()[..m].to_vec(),
    }
}

/// Greedy Gini classification tree; leaves hold the majority label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTree {
    tree: PolicyTree,
}

impl ClassTree {
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        self.tree.prescribe(row)
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        self.tree.prescribe_all(rows)
    }

    /// The same tree read as a policy: each class is the action of the
    /// same index.
    pub fn as_policy(&self) -> &PolicyTree {
        &self.tree
    }

    pub fn into_policy(self) -> PolicyTree {
        self.tree
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn n_splits(&self) -> usize {
        self.tree.n_splits()
    }

    pub fn to_json(&self) -> String {
        self.tree.to_json_keyed(LeafKey::Class)
    }

    pub fn from_json(text: &str) -> Result<ClassTree> {
        PolicyTree::from_json_keyed(text, LeafKey::Class).map(|tree| ClassTree { tree })
    }

    pub fn with_feature_names(self, names: Vec<String>) -> Result<Self> {
        Ok(ClassTree {
            tree: self.tree.with_feature_names(names)?,
        })
    }
}

/// CART on `labels`: at every node the split with the lowest weighted Gini
/// impurity (ties: lower feature, lower threshold), taken only if it
/// strictly lowers impurity and keeps `min_leaf` rows per side.
pub fn fit_meta_tree(features: &[Vec<f64>], labels: &MetaLabels, config: &FitConfig) -> Result<ClassTree> {
    let n = labels.labels.len();
    if features.len() != n {
        return Err(Error::DimensionMismatch {
            what: "feature rows".into(),
            expected: n,
            found: features.len(),
        });
    }
    if config.min_leaf == 0 {
        return Err(Error::config("min_leaf must be at least 1"));
    }
    if n < config.min_leaf || n == 0 {
        return Err(Error::TooFewSamples {
            n,
            min_leaf: config.min_leaf,
        });
    }
    let k = labels.n_classes();
    if let Some(&bad) = labels.labels.iter().find(|&&l| l >= k) {
        return Err(Error::config(format!("label {bad} out of range for {k} classes")));
    }
    let d = features[0].len();
    if let Some((i, _)) = features.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::DimensionMismatch {
            what: format!("feature row {i}"),
            expected: d,
            found: features[i].len(),
        });
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|j| features.iter().map(|r| r[j]).collect()).collect();
    let thresholds: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| crate::tree::candidate_thresholds(c, config.thresholds))
        .collect();
    let cart = Cart {
        cols: &cols,
        thresholds: &thresholds,
        labels: &labels.labels,
        k,
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
    };
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..n).collect();
    cart.grow(&rows, 0, &mut nodes);
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let tree = PolicyTree::from_nodes(nodes, 0, labels.names.clone(), names)?;
    Ok(ClassTree { tree })
}

struct Cart<'a> {
    cols: &'a [Vec<f64>],
    thresholds: &'a [Vec<f64>],
    labels: &'a [usize],
    k: usize,
    max_depth: usize,
    min_leaf: usize,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

impl Cart<'_> {
    fn grow(&self, rows: &[usize], depth: usize, out: &mut Vec<TreeNode>) -> usize {
        let slot = out.len();
        let mut counts = vec![0usize; self.k];
        for &i in rows {
            counts[self.labels[i]] += 1;
        }
        let majority = (1..self.k).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
        out.push(TreeNode::Leaf { action: majority });
        if depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return slot;
        }
        let parent = gini(&counts, rows.len());
        let mut best: Option<(usize, f64, f64)> = None;
        for (f, col) in self.cols.iter().enumerate() {
            let mut sorted = rows.to_vec();
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut left = vec![0usize; self.k];
            let mut right = counts.clone();
            let mut pos = 0;
            for &t in &self.thresholds[f] {
                let start = pos;
                while pos < sorted.len() && col[sorted[pos]] < t {
                    left[self.labels[sorted[pos]]] += 1;
                    right[self.labels[sorted[pos]]] -= 1;
                    pos += 1;
                }
                if pos == sorted.len() {
                    break;
                }
                if pos == start || pos < self.min_leaf || sorted.len() - pos < self.min_leaf {
                    continue;
                }
                let nl = pos;
                let nr = sorted.len() - pos;
                let imp = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / rows.len() as f64;
                if best.map_or(true, |(_, _, b)| imp < b - 1e-12) {
                    best = Some((f, t, imp));
                }
            }
        }
        match best {
            Some((f, t, imp)) if imp < parent - 1e-12 => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.cols[f][i] < t);
                let li = self.grow(&l, depth + 1, out);
                let ri = self.grow(&r, depth + 1, out);
                out[slot] = TreeNode::Split {
                    feature: f,
                    threshold: t,
                    left: li,
                    right: ri,
                };
            }
            _ => {}
        }
        slot
    }
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            what: "predictions".into(),
            expected: a,
            found: b,
        });
    }
    if a == 0 {
        return Err(Error::config("metrics need at least one sample"));
    }
    Ok(())
}

pub fn metric_mse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    same_len(y.len(), y_hat.len())?;
    Ok(y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

pub fn metric_accuracy(y: &[usize], y_hat: &[usize]) -> Result<f64> {
    same_len(y.len(), y_hat.len())?;
    Ok(y.iter().zip(y_hat).filter(|(a, b)| a == b).count() as f64 / y.len() as f64)
}

/// Area under the ROC curve as the Mann–Whitney statistic; tied scores
/// count one half.
pub fn metric_auc(y: &[usize], scores: &[f64]) -> Result<f64> {
    same_len(y.len(), scores.len())?;
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::config(format!("AUC labels must be 0 or 1, found {bad}")));
    }
    let n1 = y.iter().filter(|&&v| v == 1).count();
    let n0 = y.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::DegenerateAuc);
    }
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += avg * idx[i..=j].iter().filter(|&&k| y[k] == 1).count() as f64;
        i = j + 1;
    }
    let (n0, n1) = (n0 as f64, n1 as f64);
    Ok((rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1))
}
