//! Hyperparameter search over depth and leaf size, with the penalty chosen
//! along each fitted tree's pruning path.

use rayon::prelude::*;

use super::problem::tolerance;
use super::{fit, prune_path, select_by_validation, subtree_for_lambda, FitConfig, Lambda, PolicyTree, Thresholds};
use crate::data::k_folds;
use crate::error::{Error, Result};
use crate::rewards::{RewardMatrix, Sense};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub depths: Vec<usize>,
    pub min_leaves: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl GridSpec {
    /// Depths `2..=max_depth` (just `max_depth` when it is below 2).
    pub fn new(max_depth: usize, min_leaves: Vec<usize>) -> Self {
        let depths = if max_depth < 2 {
            vec![max_depth]
        } else {
            (2..=max_depth).collect()
        };
        GridSpec {
            depths,
            min_leaves,
            restarts: 10,
            seed: 0,
            thresholds: Thresholds::AllMidpoints,
        }
    }

    /// Single cell matching `config`.
    pub fn from_config(config: &FitConfig) -> Self {
        GridSpec {
            depths: vec![config.max_depth],
            min_leaves: vec![config.min_leaf],
            restarts: config.restarts,
            seed: config.seed,
            thresholds: config.thresholds,
        }
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

    fn cells(&self) -> Result<Vec<FitConfig>> {
        if self.depths.is_empty() || self.min_leaves.is_empty() {
            return Err(Error::config("grid has no cells"));
        }
        Ok(self
            .depths
            .iter()
            .flat_map(|&d| {
                self.min_leaves.iter().map(move |&c| FitConfig {
                    max_depth: d,
                    min_leaf: c,
                    lambda: Lambda::Fixed(0.0),
                    restarts: self.restarts,
                    seed: self.seed,
                    thresholds: self.thresholds,
                })
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
    pub tree: PolicyTree,
    /// Validation objective of the selection (averaged over folds for
    /// cross-validation).
    pub val_objective: f64,
}

fn beats(sense: Sense, a: (f64, usize), b: (f64, usize)) -> bool {
    let diff = sense.gain(a.0) - sense.gain(b.0);
    let tol = tolerance(b.0);
    diff > tol || (diff >= -tol && a.1 < b.1)
}

/// Fits every (depth, min_leaf) cell on the training rows with no penalty,
/// prunes it against the validation rows, and keeps the best validation
/// objective (ties: fewer splits, then grid order).
pub fn grid_search(
    train: &RewardMatrix,
    train_features: &[Vec<f64>],
    val: &RewardMatrix,
    val_features: &[Vec<f64>],
    grid: &GridSpec,
) -> Result<GridResult> {
    let cells = grid.cells()?;
    let results: Vec<Result<GridResult>> = cells
        .par_iter()
        .map(|cfg| {
            let tree = fit(train, train_features, cfg)?;
            let path = prune_path(&tree, train, train_features, val, val_features)?;
            let chosen = select_by_validation(&path, val);
            Ok(GridResult {
                max_depth: cfg.max_depth,
                min_leaf: cfg.min_leaf,
                lambda: chosen.lambda,
                tree: chosen.tree.clone(),
                val_objective: chosen.val_objective,
            })
        })
        .collect();
    let mut best: Option<GridResult> = None;
    for r in results {
        let r = r?;
        let replace = match &best {
            None => true,
            Some(b) => beats(
                val.sense(),
                (r.val_objective, r.tree.n_splits()),
                (b.val_objective, b.tree.n_splits()),
            ),
        };
        if replace {
            best = Some(r);
        }
    }
    Ok(best.expect("grid has cells"))
}

/// k-fold variant: each cell's pruning paths are scored on their held-out
/// folds at every breakpoint of any fold; the penalty with the best mean
/// held-out objective wins, and the cell is refit on all rows and pruned at
/// that penalty.
pub fn cross_validate(
    rewards: &RewardMatrix,
    features: &[Vec<f64>],
    k: usize,
    grid: &GridSpec,
) -> Result<GridResult> {
    let cells = grid.cells()?;
    let all: Vec<usize> = (0..rewards.n_rows()).collect();
    let folds = k_folds(&all, k, grid.seed)?;
    let pick = |rows: &[usize]| -> Vec<Vec<f64>> { rows.iter().map(|&i| features[i].clone()).collect() };

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..k).map(move |f| (c, f)))
        .collect();
    let paths: Vec<Result<Vec<(f64, f64)>>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let held = &folds[f];
            let train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let (tr, tx) = (rewards.subset(&train_rows), pick(&train_rows));
            let (vr, vx) = (rewards.subset(held), pick(held));
            let tree = fit(&tr, &tx, &cells[c])?;
            let path = prune_path(&tree, &tr, &tx, &vr, &vx)?;
            Ok(path.iter().map(|p| (p.lambda, p.val_objective)).collect())
        })
        .collect();
    let paths: Vec<Vec<(f64, f64)>> = paths.into_iter().collect::<Result<_>>()?;

    let sense = rewards.sense();
    let mut best: Option<(usize, f64, f64)> = None;
    for c in 0..cells.len() {
        let cell_paths = &paths[c * k..(c + 1) * k];
        let mut lambdas: Vec<f64> = cell_paths.iter().flatten().map(|p| p.0).collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        for &lambda in &lambdas {
            let mean = cell_paths
                .iter()
                .map(|p| p.iter().take_while(|e| e.0 <= lambda).last().unwrap_or(&p[0]).1)
                .sum::<f64>()
                / k as f64;
            let replace = match best {
                None => true,
                // Within a cell, equal scores move on to the larger penalty.
                Some((bc, _, b)) => {
                    let diff = sense.gain(mean) - sense.gain(b);
                    let tol = tolerance(b);
                    diff > tol || (diff >= -tol && bc == c)
                }
            };
            if replace {
                best = Some((c, lambda, mean));
            }
        }
    }
    let (c, lambda, score) = best.expect("grid has cells");
    let cfg = &cells[c];
    let tree = fit(rewards, features, cfg)?;
    let path = prune_path(&tree, rewards, features, rewards, features)?;
    let chosen = subtree_for_lambda(&path, lambda);
    Ok(GridResult {
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        lambda,
        tree: chosen.tree.clone(),
        val_objective: score,
    })
}
