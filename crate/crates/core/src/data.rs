//! Datasets, constituent-model outputs and deterministic splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on probability rows of classification prediction tensors.
pub const SIMPLEX_TOL: f64 = 1e-6;

/// Supervision targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Dense class indices in `0..n_classes`.
    Classes { labels: Vec<usize>, n_classes: usize },
    Real(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Real(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major `n × d` feature matrix plus targets.
///
/// The features are the space the policy tree splits on; they need not be
/// the inputs the constituent models were trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    d: usize,
    targets: Targets,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        targets: Targets,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::config("dataset must contain at least one row"));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::config("dataset must contain at least one feature"));
        }
        if feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                what: "feature names".into(),
                expected: d,
                found: feature_names.len(),
            });
        }
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                what: "targets".into(),
                expected: n,
                found: targets.len(),
            });
        }
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    what: format!("feature row {i}"),
                    expected: d,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        location: format!("feature row {i}, column {j}"),
                    });
                }
            }
            features.extend_from_slice(row);
        }
        match &targets {
            Targets::Classes { labels, n_classes } => {
                if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= *n_classes) {
                    return Err(Error::config(format!(
                        "target {y} at row {i} is outside 0..{n_classes}"
                    )));
                }
            }
            Targets::Real(y) => {
                if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        location: format!("target row {i}"),
                    });
                }
            }
        }
        Ok(Dataset {
            features,
            n,
            d,
            targets,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    /// Owned copy of the feature rows.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Restricts the dataset to `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let targets = match &self.targets {
            Targets::Classes { labels, n_classes } => Targets::Classes {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
            Targets::Real(y) => Targets::Real(indices.iter().map(|&i| y[i]).collect()),
        };
        Dataset {
            features,
            n: indices.len(),
            d: self.d,
            targets,
            feature_names: self.feature_names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Classification,
    Regression,
}

/// Outputs of `m` constituent models on `n` samples.
///
/// Classification values are `n × m × K` class probabilities, regression
/// values are `n × m` reals. Both are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTensor {
    kind: TaskKind,
    values: Vec<f64>,
    n: usize,
    m: usize,
    k: usize,
    model_names: Vec<String>,
}

impl PredictionTensor {
    /// `probs[i][j]` is model `j`'s class distribution for sample `i`.
    pub fn classification(probs: Vec<Vec<Vec<f64>>>, model_names: Vec<String>) -> Result<Self> {
        let n = probs.len();
        let m = model_names.len();
        let k = probs
            .first()
            .and_then(|r| r.first())
            .map(Vec::len)
            .unwrap_or(0);
        if m == 0 || k == 0 {
            return Err(Error::config("prediction tensor needs at least one model and class"));
        }
        let mut values = Vec::with_capacity(n * m * k);
        for (i, row) in probs.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    what: format!("models in prediction row {i}"),
                    expected: m,
                    found: row.len(),
                });
            }
            for (j, p) in row.into_iter().enumerate() {
                if p.len() != k {
                    return Err(Error::DimensionMismatch {
                        what: format!("classes for sample {i}, model {j}"),
                        expected: k,
                        found: p.len(),
                    });
                }
                values.extend(p);
            }
        }
        Ok(PredictionTensor {
            kind: TaskKind::Classification,
            values,
            n,
            m,
            k,
            model_names,
        })
    }

    /// `preds[i][j]` is model `j`'s prediction for sample `i`.
    pub fn regression(preds: Vec<Vec<f64>>, model_names: Vec<String>) -> Result<Self> {
        let n = preds.len();
        let m = model_names.len();
        if m == 0 {
            return Err(Error::config("prediction tensor needs at least one model"));
        }
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in preds.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    what: format!("models in prediction row {i}"),
                    expected: m,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(PredictionTensor {
            kind: TaskKind::Regression,
            values,
            n,
            m,
            k: 1,
            model_names,
        })
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_models(&self) -> usize {
        self.m
    }

    /// Number of classes; `None` for regression.
    pub fn n_classes(&self) -> Option<usize> {
        (self.kind == TaskKind::Classification).then_some(self.k)
    }

    pub fn model_names(&self) -> &[String] {
        &self.model_names
    }

    /// Class probabilities of model `j` on sample `i`.
    pub fn probs(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.m + j) * self.k;
        &self.values[start..start + self.k]
    }

    /// Regression prediction of model `j` on sample `i`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.kind, TaskKind::Regression);
        self.values[i * self.m + j]
    }

    /// All `m` regression predictions for sample `i`.
    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn subset(&self, indices: &[usize]) -> PredictionTensor {
        let stride = self.m * self.k;
        let mut values = Vec::with_capacity(indices.len() * stride);
        for &i in indices {
            values.extend_from_slice(&self.values[i * stride..(i + 1) * stride]);
        }
        PredictionTensor {
            values,
            n: indices.len(),
            ..self.clone()
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(pos) = self.values.iter().position(|v| !v.is_finite()) {
            let stride = self.m * self.k;
            return Err(Error::NonFinite {
                location: format!("prediction sample {}, model {}", pos / stride, (pos % stride) / self.k),
            });
        }
        if self.kind == TaskKind::Regression {
            return Ok(());
        }
        // Report the worst offending slice, not the first one.
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..self.n {
            for j in 0..self.m {
                let p = self.probs(i, j);
                let sum: f64 = p.iter().sum();
                let mut dev = (sum - 1.0).abs();
                for &v in p {
                    dev = dev.max(-v).max(v - 1.0);
                }
                if dev > SIMPLEX_TOL && worst.map_or(true, |w| dev > w.2) {
                    worst = Some((i, j, dev));
                }
            }
        }
        match worst {
            Some((row, model, deviation)) => Err(Error::SimplexViolation {
                row,
                model,
                deviation,
            }),
            None => Ok(()),
        }
    }
}

/// A dataset and prediction tensor known to agree with each other.
#[derive(Debug, Clone)]
pub struct ValidatedBundle {
    dataset: Dataset,
    preds: PredictionTensor,
}

impl ValidatedBundle {
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn preds(&self) -> &PredictionTensor {
        &self.preds
    }

    pub fn kind(&self) -> TaskKind {
        self.preds.kind
    }

    pub fn n_rows(&self) -> usize {
        self.dataset.n
    }

    pub fn subset(&self, indices: &[usize]) -> ValidatedBundle {
        ValidatedBundle {
            dataset: self.dataset.subset(indices),
            preds: self.preds.subset(indices),
        }
    }

    pub fn into_parts(self) -> (Dataset, PredictionTensor) {
        (self.dataset, self.preds)
    }
}

/// Pairs a dataset with constituent-model outputs after checking that row
/// counts, target kinds and probability simplices all agree.
pub fn validate(dataset: Dataset, preds: PredictionTensor) -> Result<ValidatedBundle> {
    if dataset.n != preds.n {
        return Err(Error::DimensionMismatch {
            what: "prediction rows".into(),
            expected: dataset.n,
            found: preds.n,
        });
    }
    preds.check()?;
    match (&dataset.targets, preds.kind) {
        (Targets::Classes { n_classes, .. }, TaskKind::Classification) => {
            if *n_classes != preds.k {
                return Err(Error::DimensionMismatch {
                    what: "classes in prediction tensor".into(),
                    expected: *n_classes,
                    found: preds.k,
                });
            }
        }
        (Targets::Real(_), TaskKind::Regression) => {}
        (Targets::Classes { .. }, TaskKind::Regression) => {
            return Err(Error::KindMismatch {
                expected: "classification",
            })
        }
        (Targets::Real(_), TaskKind::Classification) => {
            return Err(Error::KindMismatch {
                expected: "regression",
            })
        }
    }
    Ok(ValidatedBundle { dataset, preds })
}

/// Train/validation/test proportions and an optional fold count.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub k_folds: Option<usize>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train,
            validation,
            test,
            k_folds: None,
            seed,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_folds(mut self, k: usize) -> Result<Self> {
        self.k_folds = Some(k);
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("validation", self.validation), ("test", self.test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config(format!("{name} fraction {f} is not in (0, 1)")));
            }
        }
        let total = self.train + self.validation + self.test;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("fractions sum to {total}, not 1")));
        }
        if matches!(self.k_folds, Some(k) if k < 2) {
            return Err(Error::config("k_folds must be at least 2"));
        }
        Ok(())
    }
}

/// Disjoint, sorted index sets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle, then floor-sized validation and test sets; the rounding
/// remainder stays in training.
pub fn split(n: usize, spec: &SplitSpec) -> Result<Partition> {
    spec.check()?;
    let n_val = (spec.validation * n as f64).floor() as usize;
    let n_test = (spec.test * n as f64).floor() as usize;
    let n_train = n.saturating_sub(n_val + n_test);
    for (name, size) in [("train", n_train), ("validation", n_val), ("test", n_test)] {
        if size == 0 {
            return Err(Error::EmptyPartition { partition: name });
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut train = idx[..n_train].to_vec();
    let mut validation = idx[n_train..n_train + n_val].to_vec();
    let mut test = idx[n_train + n_val..].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(Partition {
        train,
        validation,
        test,
    })
}

/// Seeded k-fold assignment of `indices`: returns `k` held-out folds whose
/// sizes differ by at most one.
pub fn k_folds(indices: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::config("k_folds must be at least 2"));
    }
    if indices.len() < k {
        return Err(Error::EmptyPartition { partition: "fold" });
    }
    let mut idx = indices.to_vec();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}
