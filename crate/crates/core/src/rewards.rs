//! Reward matrices over an action set of models, fixed ensembles and
//! rejection, plus ensemble-weight helpers.

use crate::data::{TaskKind, Targets, ValidatedBundle};
use crate::error::{Error, Result};

/// Probabilities below `PROB_CLAMP` are raised to it before `log`.
pub const PROB_CLAMP: f64 = 1e-12;

/// Tolerance for ensemble weights on the unit simplex (classification).
pub const WEIGHT_SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Converts a reward into a quantity to maximize.
    pub fn gain(self, reward: f64) -> f64 {
        match self {
            Sense::Maximize => reward,
            Sense::Minimize => -reward,
        }
    }

    /// `true` if `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.gain(a) > self.gain(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Blend of constituent-model outputs; unit vectors are single models.
    Ensemble(Vec<f64>),
    /// Predict a class directly (class-prescribing rejection policies).
    Class(usize),
    /// Decline to predict.
    Reject,
}

/// Ordered actions a policy may prescribe.
///
/// Rejection actions, when present, always occupy the trailing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<Action>,
    names: Vec<String>,
}

impl ActionSet {
    /// One action per constituent model, `e_1 .. e_m`.
    pub fn singles(model_names: &[String]) -> Self {
        let m = model_names.len();
        let actions = (0..m)
            .map(|i| {
                let mut w = vec![0.0; m];
                w[i] = 1.0;
                Action::Ensemble(w)
            })
            .collect();
        ActionSet {
            actions,
            names: model_names.to_vec(),
        }
    }

    /// Unit vectors for every model followed by the given ensembles.
    pub fn with_ensembles(model_names: &[String], ensembles: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut set = Self::singles(model_names);
        for (name, w) in ensembles {
            set = set.push_ensemble(name, w)?;
        }
        Ok(set)
    }

    /// Builds a set from an explicit weight list, checking that every unit
    /// vector is present.
    pub fn from_weights(names: Vec<String>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "action names".into(),
                expected: weights.len(),
                found: names.len(),
            });
        }
        let m = weights.first().map(Vec::len).unwrap_or(0);
        if m == 0 {
            return Err(Error::config("action set needs at least one weight vector"));
        }
        if let Some(w) = weights.iter().find(|w| w.len() != m) {
            return Err(Error::DimensionMismatch {
                what: "weight vector length".into(),
                expected: m,
                found: w.len(),
            });
        }
        for i in 0..m {
            let present = weights
                .iter()
                .any(|w| w.iter().enumerate().all(|(j, &v)| v == if i == j { 1.0 } else { 0.0 }));
            if !present {
                return Err(Error::config(format!("unit vector e_{} missing from action set", i + 1)));
            }
        }
        Ok(ActionSet {
            actions: weights.into_iter().map(Action::Ensemble).collect(),
            names,
        })
    }

    /// Actions `class 0 .. class k-1`.
    pub fn classes(k: usize) -> Self {
        ActionSet {
            actions: (0..k).map(Action::Class).collect(),
            names: (0..k).map(|c| format!("class {c}")).collect(),
        }
    }

    pub fn push_ensemble(mut self, name: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        if self.has_rejection() {
            return Err(Error::config("ensembles must precede rejection actions"));
        }
        if weights.len() != self.n_models() {
            return Err(Error::DimensionMismatch {
                what: "ensemble weights".into(),
                expected: self.n_models(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                location: "ensemble weights".into(),
            });
        }
        self.actions.push(Action::Ensemble(weights));
        self.names.push(name.into());
        Ok(self)
    }

    /// Appends a rejection action named `reject`.
    pub fn with_rejection(self) -> Self {
        self.with_named_rejection("reject")
    }

    pub fn with_named_rejection(mut self, name: impl Into<String>) -> Self {
        self.actions.push(Action::Reject);
        self.names.push(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Length of the ensemble weight vectors (0 for class action sets).
    pub fn n_models(&self) -> usize {
        self.actions
            .iter()
            .find_map(|a| match a {
                Action::Ensemble(w) => Some(w.len()),
                _ => None,
            })
            .unwrap_or(0)
    }

    pub fn has_rejection(&self) -> bool {
        self.actions.iter().any(|a| matches!(a, Action::Reject))
    }

    pub fn is_rejection(&self, index: usize) -> bool {
        matches!(self.actions.get(index), Some(Action::Reject))
    }

    /// Number of non-rejection actions.
    pub fn n_predictive(&self) -> usize {
        self.actions.iter().filter(|a| !matches!(a, Action::Reject)).count()
    }

    pub(crate) fn ensembles(&self) -> Result<Vec<&[f64]>> {
        self.actions
            .iter()
            .filter_map(|a| match a {
                Action::Ensemble(w) => Some(Ok(w.as_slice())),
                Action::Class(_) => Some(Err(Error::config(
                    "class actions cannot be scored against model outputs",
                ))),
                Action::Reject => None,
            })
            .collect()
    }
}

/// Parameters of the rejection action's reward.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectionSpec {
    /// Per-class `alpha_k` in `[0, 1)`; the rejection model puts probability
    /// `1 - alpha_y` on the true class. `beta` is only read by class-policy
    /// trees.
    Classification { alpha: Vec<f64>, beta: Option<Vec<f64>> },
    /// Constant squared-error loss of rejecting.
    Regression { alpha: f64 },
}

impl RejectionSpec {
    pub fn classification(alpha: Vec<f64>) -> Result<Self> {
        if let Some(a) = alpha.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::config(format!("rejection alpha {a} is not in [0, 1)")));
        }
        Ok(RejectionSpec::Classification { alpha, beta: None })
    }

    /// The same `alpha` for each of `k` classes.
    pub fn constant(alpha: f64, k: usize) -> Result<Self> {
        Self::classification(vec![alpha; k])
    }

    pub fn regression(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!("regression rejection alpha {alpha} must be >= 0")));
        }
        Ok(RejectionSpec::Regression { alpha })
    }

    pub fn with_beta(self, beta: Vec<f64>) -> Result<Self> {
        match self {
            RejectionSpec::Classification { alpha, .. } => {
                if beta.iter().any(|b| !(*b > 0.0)) {
                    return Err(Error::config("beta entries must be positive"));
                }
                if beta.len() != alpha.len() {
                    return Err(Error::DimensionMismatch {
                        what: "beta".into(),
                        expected: alpha.len(),
                        found: beta.len(),
                    });
                }
                Ok(RejectionSpec::Classification {
                    alpha,
                    beta: Some(beta),
                })
            }
            RejectionSpec::Regression { .. } => Err(Error::KindMismatch {
                expected: "classification",
            }),
        }
    }
}

/// `n × |actions|` rewards with their optimization sense.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix {
    values: Vec<f64>,
    n: usize,
    sense: Sense,
    action_set: ActionSet,
}

impl RewardMatrix {
    /// `rows[i][a]` is the reward of action `a` on sample `i`.
    pub fn new(rows: Vec<Vec<f64>>, sense: Sense, action_set: ActionSet) -> Result<Self> {
        let width = action_set.len();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    what: format!("reward row {i}"),
                    expected: width,
                    found: row.len(),
                });
            }
            if let Some(a) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("reward row {i}, action {a}"),
                });
            }
            values.extend(row);
        }
        Ok(RewardMatrix {
            values,
            n,
            sense,
            action_set,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_actions(&self) -> usize {
        self.action_set.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn action_set(&self) -> &ActionSet {
        &self.action_set
    }

    pub fn get(&self, i: usize, a: usize) -> f64 {
        self.values[i * self.n_actions() + a]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_actions();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn subset(&self, indices: &[usize]) -> RewardMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_actions());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        RewardMatrix {
            values,
            n: indices.len(),
            sense: self.sense,
            action_set: self.action_set.clone(),
        }
    }

    /// Summed reward of each action over `rows`.
    pub fn column_totals(&self, rows: impl IntoIterator<Item = usize>) -> Vec<f64> {
        let mut totals = vec![0.0; self.n_actions()];
        for i in rows {
            for (t, v) in totals.iter_mut().zip(self.row(i)) {
                *t += v;
            }
        }
        totals
    }

    /// Best action by summed reward over `rows`; ties go to the lowest index.
    pub fn best_action(&self, rows: impl IntoIterator<Item = usize>) -> usize {
        let totals = self.column_totals(rows);
        let mut best = 0;
        for a in 1..totals.len() {
            if self.sense.better(totals[a], totals[best]) {
                best = a;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationReward {
    /// Log-probability of the true class.
    CrossEntropy,
    /// 1 if the blended argmax is the true class, else 0.
    Misclassification,
}

/// Blended class distribution `wᵀh(x_i)` written into `out`.
pub fn blend_probs(bundle: &ValidatedBundle, i: usize, weights: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let preds = bundle.preds();
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, p) in out.iter_mut().zip(preds.probs(i, j)) {
            *o += w * p;
        }
    }
}

/// Blended regression prediction `wᵀh(x_i)`.
pub fn blend_value(bundle: &ValidatedBundle, i: usize, weights: &[f64]) -> f64 {
    bundle
        .preds()
        .row_values(i)
        .iter()
        .zip(weights)
        .map(|(h, w)| h * w)
        .sum()
}

/// Class predicted from a blended distribution: argmax with ties to the
/// lowest index, or for two classes, class 1 iff `p_1 > threshold`.
pub fn predicted_class(probs: &[f64], threshold: Option<f64>) -> usize {
    if let (2, Some(t)) = (probs.len(), threshold) {
        return usize::from(probs[1] > t);
    }
    let mut best = 0;
    for k in 1..probs.len() {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    best
}

fn clamped_log(p: f64) -> f64 {
    p.max(PROB_CLAMP).ln()
}

fn classification_alpha(
    actions: &ActionSet,
    rejection: Option<&RejectionSpec>,
    k: usize,
) -> Result<Option<Vec<f64>>> {
    match (actions.has_rejection(), rejection) {
        (false, None) => Ok(None),
        (true, None) => Err(Error::MissingRejectionSpec),
        (false, Some(_)) => Err(Error::config(
            "a rejection spec was given but the action set has no rejection action",
        )),
        (true, Some(RejectionSpec::Classification { alpha, .. })) => {
            if alpha.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "rejection alpha".into(),
                    expected: k,
                    found: alpha.len(),
                });
            }
            Ok(Some(alpha.clone()))
        }
        (true, Some(RejectionSpec::Regression { .. })) => Err(Error::KindMismatch {
            expected: "classification",
        }),
    }
}

/// Cross-entropy or 0/1 rewards of every action on every sample; sense is
/// maximize. Binary misclassification uses the argmax (threshold 0.5).
pub fn build_classification_rewards(
    bundle: &ValidatedBundle,
    actions: &ActionSet,
    kind: ClassificationReward,
    rejection: Option<&RejectionSpec>,
) -> Result<RewardMatrix> {
    build_classification_rewards_with_threshold(bundle, actions, kind, rejection, None)
}

/// As [`build_classification_rewards`], with an explicit binary decision
/// threshold on the blended positive-class probability.
pub fn build_classification_rewards_with_threshold(
    bundle: &ValidatedBundle,
    actions: &ActionSet,
    kind: ClassificationReward,
    rejection: Option<&RejectionSpec>,
    threshold: Option<f64>,
) -> Result<RewardMatrix> {
    let Targets::Classes { labels, n_classes } = bundle.dataset().targets() else {
        return Err(Error::KindMismatch {
            expected: "classification",
        });
    };
    if bundle.kind() != TaskKind::Classification {
        return Err(Error::KindMismatch {
            expected: "classification",
        });
    }
    let k = *n_classes;
    let alpha = classification_alpha(actions, rejection, k)?;
    let ensembles = actions.ensembles()?;
    if actions.n_models() != bundle.preds().n_models() {
        return Err(Error::DimensionMismatch {
            what: "ensemble weight length".into(),
            expected: bundle.preds().n_models(),
            found: actions.n_models(),
        });
    }
    for (name, w) in actions.names().iter().zip(&ensembles) {
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SIMPLEX_TOL || w.iter().any(|&v| v < -WEIGHT_SIMPLEX_TOL) {
            return Err(Error::config(format!("ensemble {name} is not on the unit simplex")));
        }
    }

    let mut blended = vec![0.0; k];
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let mut row = Vec::with_capacity(actions.len());
            for w in &ensembles {
                blend_probs(bundle, i, w, &mut blended);
                row.push(match kind {
                    ClassificationReward::CrossEntropy => clamped_log(blended[y]),
                    ClassificationReward::Misclassification => {
                        f64::from(u8::from(predicted_class(&blended, threshold) == y))
                    }
                });
            }
            if let Some(alpha) = &alpha {
                let r = match kind {
                    ClassificationReward::CrossEntropy => (1.0 - alpha[y]).ln(),
                    ClassificationReward::Misclassification => 1.0 - alpha[y],
                };
                row.extend(std::iter::repeat(r).take(actions.len() - ensembles.len()));
            }
            row
        })
        .collect();
    RewardMatrix::new(rows, Sense::Maximize, actions.clone())
}

/// Squared-error rewards; sense is minimize and rejection costs a constant.
pub fn build_regression_rewards(
    bundle: &ValidatedBundle,
    actions: &ActionSet,
    rejection: Option<&RejectionSpec>,
) -> Result<RewardMatrix> {
    let Targets::Real(y) = bundle.dataset().targets() else {
        return Err(Error::KindMismatch {
            expected: "regression",
        });
    };
    let alpha = match (actions.has_rejection(), rejection) {
        (false, None) => None,
        (true, None) => return Err(Error::MissingRejectionSpec),
        (false, Some(_)) => {
            return Err(Error::config(
                "a rejection spec was given but the action set has no rejection action",
            ))
        }
        (true, Some(RejectionSpec::Regression { alpha })) => Some(*alpha),
        (true, Some(RejectionSpec::Classification { .. })) => {
            return Err(Error::KindMismatch {
                expected: "regression",
            })
        }
    };
    let ensembles = actions.ensembles()?;
    if actions.n_models() != bundle.preds().n_models() {
        return Err(Error::DimensionMismatch {
            what: "ensemble weight length".into(),
            expected: bundle.preds().n_models(),
            found: actions.n_models(),
        });
    }
    let rows = y
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let mut row: Vec<f64> = ensembles
                .iter()
                .map(|w| {
                    let e = blend_value(bundle, i, w) - target;
                    e * e
                })
                .collect();
            if let Some(a) = alpha {
                row.extend(std::iter::repeat(a).take(actions.len() - ensembles.len()));
            }
            row
        })
        .collect();
    RewardMatrix::new(rows, Sense::Minimize, actions.clone())
}

/// Ridge-regression ensemble weights `(HᵀH + λI)⁻¹ Hᵀy`.
///
/// `preds` is `n × m` (one column per constituent model). By the
/// push-through identity this equals `Hᵀ(HHᵀ + λI)⁻¹y`; the `m × m` system is
/// the one solved.
pub fn ridge_weights(preds: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            what: "ridge rows".into(),
            expected: targets.len(),
            found: preds.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::config("ridge lambda must be positive"));
    }
    let m = preds[0].len();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for (row, &y) in preds.iter().zip(targets) {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                what: "ridge columns".into(),
                expected: m,
                found: row.len(),
            });
        }
        for a in 0..m {
            rhs[a] += row[a] * y;
            for b in 0..=a {
                gram[a * m + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        gram[a * m + a] += lambda;
    }
    Ok(cholesky_solve(gram, rhs, m))
}

/// Solves `A x = b` for symmetric positive-definite `A` given by its lower
/// triangle (row-major, `m × m`).
fn cholesky_solve(mut a: Vec<f64>, mut b: Vec<f64>, m: usize) -> Vec<f64> {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * m + k] * b[k];
        }
        b[i] = s / a[i * m + i];
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        for k in i + 1..m {
            s -= a[k * m + i] * b[k];
        }
        b[i] = s / a[i * m + i];
    }
    b
}

/// `(1/m, …, 1/m)`.
pub fn mean_ensemble(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

/// Largest constant `alpha` at which rejection still ties the best model's
/// summed cross-entropy on a leaf: `1 - max_j exp(mean_i log p_ij)`.
///
/// `true_class_probs[j]` holds model `j`'s probability of the true class on
/// each sample of the leaf. Below the returned value the leaf rejects.
pub fn critical_rejection_threshold(true_class_probs: &[Vec<f64>]) -> Result<f64> {
    let n = true_class_probs.first().map(Vec::len).unwrap_or(0);
    if n == 0 {
        return Err(Error::EmptyLeaf);
    }
    let mut best = f64::NEG_INFINITY;
    for probs in true_class_probs {
        if probs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "leaf samples per model".into(),
                expected: n,
                found: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::config(format!("probability {p} is not in (0, 1]")));
        }
        let mean_log = probs.iter().map(|p| p.ln()).sum::<f64>() / n as f64;
        best = best.max(mean_log.exp());
    }
    Ok(1.0 - best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{validate, Dataset, PredictionTensor};

    fn names(m: usize) -> Vec<String> {
        (0..m).map(|j| format!("m{j}")).collect()
    }

    fn class_bundle(labels: Vec<usize>, probs: Vec<Vec<Vec<f64>>>) -> ValidatedBundle {
        let n = labels.len();
        let m = probs[0].len();
        let k = probs[0][0].len();
        let ds = Dataset::new(
            vec![vec![0.0]; n],
            Targets::Classes { labels, n_classes: k },
            vec!["x".into()],
        )
        .unwrap();
        validate(ds, PredictionTensor::classification(probs, names(m)).unwrap()).unwrap()
    }

    fn reg_bundle(y: Vec<f64>, preds: Vec<Vec<f64>>) -> ValidatedBundle {
        let n = y.len();
        let m = preds[0].len();
        let ds = Dataset::new(vec![vec![0.0]; n], Targets::Real(y), vec!["x".into()]).unwrap();
        validate(ds, PredictionTensor::regression(preds, names(m)).unwrap()).unwrap()
    }

    #[test]
    fn cross_entropy_single_model() {
        let b = class_bundle(vec![1], vec![vec![vec![0.3, 0.7]]]);
        let r = build_classification_rewards(
            &b,
            &ActionSet::singles(&names(1)),
            ClassificationReward::CrossEntropy,
            None,
        )
        .unwrap();
        assert!((r.get(0, 0) - (-0.356675)).abs() < 1e-6);
        assert_eq!(r.sense(), Sense::Maximize);
    }

    #[test]
    fn rejection_rewards_use_true_class_alpha() {
        let b = class_bundle(vec![1], vec![vec![vec![0.3, 0.7]]]);
        let actions = ActionSet::singles(&names(1)).with_rejection();
        let spec = RejectionSpec::classification(vec![0.3, 0.2]).unwrap();
        let mis = build_classification_rewards(&b, &actions, ClassificationReward::Misclassification, Some(&spec)).unwrap();
        assert!((mis.get(0, 1) - 0.8).abs() < 1e-15);
        let ce = build_classification_rewards(&b, &actions, ClassificationReward::CrossEntropy, Some(&spec)).unwrap();
        assert!((ce.get(0, 1) - 0.8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mean_ensemble_misclassification() {
        let b = class_bundle(vec![0], vec![vec![vec![0.2, 0.8], vec![0.6, 0.4]]]);
        let actions = ActionSet::with_ensembles(&names(2), vec![("mean".into(), mean_ensemble(2))]).unwrap();
        let r = build_classification_rewards(&b, &actions, ClassificationReward::Misclassification, None).unwrap();
        assert_eq!(r.row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn misclassification_threshold_override() {
        let b = class_bundle(vec![1], vec![vec![vec![0.6, 0.4]]]);
        let actions = ActionSet::singles(&names(1));
        let r = build_classification_rewards_with_threshold(
            &b,
            &actions,
            ClassificationReward::Misclassification,
            None,
            Some(0.3),
        )
        .unwrap();
        assert_eq!(r.get(0, 0), 1.0);
    }

    #[test]
    fn argmax_ties_pick_lowest_class() {
        assert_eq!(predicted_class(&[0.5, 0.5], None), 0);
        assert_eq!(predicted_class(&[0.2, 0.4, 0.4], None), 1);
    }

    #[test]
    fn missing_spec_and_kind_mismatch() {
        let b = class_bundle(vec![1], vec![vec![vec![0.3, 0.7]]]);
        let actions = ActionSet::singles(&names(1)).with_rejection();
        assert!(matches!(
            build_classification_rewards(&b, &actions, ClassificationReward::CrossEntropy, None),
            Err(Error::MissingRejectionSpec)
        ));
        assert!(matches!(
            build_regression_rewards(&b, &ActionSet::singles(&names(1)), None),
            Err(Error::KindMismatch { .. })
        ));
        let r = reg_bundle(vec![1.0], vec![vec![1.0]]);
        assert!(matches!(
            build_classification_rewards(&r, &ActionSet::singles(&names(1)), ClassificationReward::CrossEntropy, None),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn off_simplex_ensemble_rejected_for_classification() {
        let b = class_bundle(vec![0], vec![vec![vec![0.2, 0.8], vec![0.6, 0.4]]]);
        let actions = ActionSet::with_ensembles(&names(2), vec![("bad".into(), vec![0.7, 0.7])]).unwrap();
        assert!(build_classification_rewards(&b, &actions, ClassificationReward::CrossEntropy, None).is_err());
    }

    #[test]
    fn regression_rewards() {
        let b = reg_bundle(vec![3.0], vec![vec![2.0, 5.0]]);
        let actions = ActionSet::with_ensembles(&names(2), vec![("mean".into(), mean_ensemble(2))])
            .unwrap()
            .with_rejection();
        let spec = RejectionSpec::regression(40.0).unwrap();
        let r = build_regression_rewards(&b, &actions, Some(&spec)).unwrap();
        assert_eq!(r.row(0), &[1.0, 4.0, 0.25, 40.0]);
        assert_eq!(r.sense(), Sense::Minimize);
    }

    #[test]
    fn ridge_hand_solution() {
        let w = ridge_weights(&[vec![1.0], vec![1.0]], &[1.0, 1.0], 1.0).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ridge_identity_limit() {
        // columns orthonormal, the second equals y
        let h = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let w = ridge_weights(&h, &[0.0, 1.0], 1e-8).unwrap();
        assert!(w[0].abs() < 1e-6 && (w[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mean_ensemble_entries() {
        assert_eq!(mean_ensemble(1), vec![1.0]);
        assert_eq!(mean_ensemble(4), vec![0.25; 4]);
        let w = mean_ensemble(5);
        assert!(w.iter().all(|&v| v == 0.2));
        assert_eq!(w.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn critical_threshold_examples() {
        let a = critical_rejection_threshold(&[vec![0.9, 0.8]]).unwrap();
        assert!((a - (1.0 - 0.72f64.sqrt())).abs() < 1e-12);
        assert!((a - 0.151472).abs() < 1e-6);
        assert_eq!(critical_rejection_threshold(&[vec![1.0, 1.0]]).unwrap(), 0.0);
        let a = critical_rejection_threshold(&[vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        assert!(matches!(critical_rejection_threshold(&[vec![]]), Err(Error::EmptyLeaf)));
    }

    #[test]
    fn unit_vectors_required() {
        assert!(ActionSet::from_weights(vec!["a".into()], vec![vec![0.5, 0.5]]).is_err());
        let ok = ActionSet::from_weights(
            vec!["b".into(), "a".into(), "c".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]],
        );
        assert!(ok.is_ok());
    }
}
