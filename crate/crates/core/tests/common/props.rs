//! Property suites shared by the `properties` and `acceptance` targets.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use op2t::baseline::{fit_meta_tree, MetaLabels};
use op2t::cli;
use op2t::data::{split, validate, Dataset, PredictionTensor, SplitSpec, Targets, ValidatedBundle};
use op2t::reject_intervals::{fit_class_policy, solve_single_interval, ClassPolicyConfig, ErrorCaps};
use op2t::rewards::{
    blend_probs, build_classification_rewards, build_regression_rewards, critical_rejection_threshold, ridge_weights,
    ActionSet, ClassificationReward, RejectionSpec, RewardMatrix, Sense,
};
use op2t::synth::{
    gaussian_rewards, ground_truth_range, physics_drag_limit, physics_no_drag, GaussianRewardSpec, KnnRegressor,
    ProjectileParams,
};
use op2t::tree::{evaluate, exhaustive_fit, fit, fit_with_trace, prune_path, FitConfig, PolicyTree, TreeNode};

use super::*;

pub struct Suite {
    pub module: &'static str,
    pub name: &'static str,
    pub cases: u32,
    pub run: fn(&mut TestRunner) -> Result<(), String>,
}

impl Suite {
    /// Runs with a fresh random seed, or a fixed one when `deterministic`.
    pub fn check(&self, deterministic: bool) -> Result<(), String> {
        let config = Config {
            cases: self.cases,
            failure_persistence: None,
            ..Config::default()
        };
        let mut runner = if deterministic {
            TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
        } else {
            TestRunner::new(config)
        };
        (self.run)(&mut runner)
    }
}

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn suites() -> Vec<Suite> {
    vec![
        Suite { module: "data", name: "split_is_partition", cases: 200, run: split_is_partition },
        Suite { module: "data", name: "validate_simplex_tolerance", cases: 300, run: validate_simplex_tolerance },
        Suite { module: "rewards", name: "critical_threshold_equivalence", cases: 300, run: critical_threshold_equivalence },
        Suite { module: "rewards", name: "rejection_reward_monotone", cases: 200, run: rejection_reward_monotone },
        Suite { module: "rewards", name: "mis_entries_binary", cases: 200, run: mis_entries_binary },
        Suite { module: "rewards", name: "blend_on_simplex", cases: 300, run: blend_on_simplex },
        Suite { module: "rewards", name: "cross_entropy_nonpositive", cases: 200, run: cross_entropy_nonpositive },
        Suite { module: "rewards", name: "ridge_matches_dense_solve", cases: 200, run: ridge_matches_dense_solve },
        Suite { module: "tree", name: "oracle_equivalence", cases: 200, run: oracle_equivalence },
        Suite { module: "tree", name: "sweeps_never_worsen", cases: 100, run: sweeps_never_worsen },
        Suite { module: "tree", name: "leaf_actions_optimal", cases: 150, run: leaf_actions_optimal },
        Suite { module: "tree", name: "depth_and_leaf_size", cases: 150, run: depth_and_leaf_size },
        Suite { module: "tree", name: "prune_path_monotone", cases: 150, run: prune_path_monotone },
        Suite { module: "tree", name: "reject_fraction_grows", cases: 100, run: reject_fraction_grows },
        Suite { module: "baseline", name: "routing_gap_linear", cases: 100, run: routing_gap_linear },
        Suite { module: "baseline", name: "tail_policy_beats_meta_tree", cases: 100, run: tail_policy_beats_meta_tree },
        Suite { module: "baseline", name: "meta_tree_separable", cases: 200, run: meta_tree_separable },
        Suite { module: "reject_intervals", name: "interval_matches_brute_force", cases: 300, run: interval_matches_brute_force },
        Suite { module: "reject_intervals", name: "coverage_antimonotone", cases: 200, run: coverage_antimonotone },
        Suite { module: "reject_intervals", name: "class_policy_leaf_accuracy", cases: 150, run: class_policy_leaf_accuracy },
        Suite { module: "synth", name: "gaussian_boundaries", cases: 100, run: gaussian_boundaries },
        Suite { module: "synth", name: "drag_limit_dominates", cases: 1000, run: drag_limit_dominates },
        Suite { module: "synth", name: "vanishing_drag_matches_vacuum", cases: 100, run: vanishing_drag_matches_vacuum },
        Suite { module: "synth", name: "knn_exact_on_training_rows", cases: 100, run: knn_exact_on_training_rows },
        Suite { module: "cli", name: "train_predict_round_trip", cases: 100, run: train_predict_round_trip },
        Suite { module: "cli", name: "identical_invocations", cases: 100, run: identical_invocations },
    ]
}

// ---------------------------------------------------------------- helpers

/// A point on the `k`-simplex, from positive weights.
fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

/// Classification bundle: `n` samples, `m` models, `k` classes.
fn class_instance(
    n: std::ops::RangeInclusive<usize>,
    m: std::ops::RangeInclusive<usize>,
    k: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (Vec<usize>, Vec<Vec<Vec<f64>>>)> {
    (n, m, k).prop_flat_map(|(n, m, k)| {
        (
            prop::collection::vec(0..k, n),
            prop::collection::vec(prop::collection::vec(simplex(k), m), n),
        )
    })
}

fn class_bundle(labels: &[usize], probs: &[Vec<Vec<f64>>]) -> ValidatedBundle {
    let n = labels.len();
    let m = probs[0].len();
    let k = probs[0][0].len();
    let ds = Dataset::new(
        vec![vec![0.0]; n],
        Targets::Classes {
            labels: labels.to_vec(),
            n_classes: k,
        },
        vec!["x".into()],
    )
    .unwrap();
    validate(ds, PredictionTensor::classification(probs.to_vec(), action_names(m)).unwrap()).unwrap()
}

/// Small reward instance: features on an integer grid, dyadic rewards so
/// every sum is exact.
#[derive(Debug, Clone)]
struct Instance {
    x: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    maximize: bool,
}

impl Instance {
    fn rewards(&self) -> RewardMatrix {
        matrix(self.r.clone(), if self.maximize { Sense::Maximize } else { Sense::Minimize })
    }
}

fn instance(max_n: usize, max_d: usize, a: usize, grid: u32) -> impl Strategy<Value = Instance> {
    (4..=max_n, 1..=max_d).prop_flat_map(move |(n, d)| {
        (
            prop::collection::vec(prop::collection::vec((0..=grid).prop_map(f64::from), d), n),
            prop::collection::vec(prop::collection::vec((-16i32..=16).prop_map(|k| f64::from(k) / 8.0), a), n),
            any::<bool>(),
        )
            .prop_map(|(x, r, maximize)| Instance { x, r, maximize })
    })
}

fn leaf_rows(tree: &PolicyTree, x: &[Vec<f64>]) -> Vec<(usize, Vec<usize>)> {
    let mut out: Vec<(usize, Vec<usize>)> = tree
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(id, n)| match n {
            TreeNode::Leaf { action } => Some((id, *action)),
            TreeNode::Split { .. } => None,
        })
        .map(|(id, a)| (a, (0..x.len()).filter(|&i| tree.leaf_of(&x[i]) == id).collect()))
        .collect();
    out.sort();
    out
}

fn tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

// ------------------------------------------------------------------- data

fn split_is_partition(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (4usize..400, 1u32..18, 1u32..18, any::<u64>()).prop_filter("fractions", |(_, v, t, _)| v + t < 20);
    finish(runner.run(&strat, |(n, v, t, seed)| {
        let spec = SplitSpec::new(
            f64::from(20 - v - t) / 20.0,
            f64::from(v) / 20.0,
            f64::from(t) / 20.0,
            seed,
        )
        .unwrap();
        match split(n, &spec) {
            Ok(p) => {
                let mut all: Vec<usize> = p.train.iter().chain(&p.validation).chain(&p.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert!(!p.train.is_empty() && !p.validation.is_empty() && !p.test.is_empty());
            }
            Err(op2t::Error::EmptyPartition { .. }) => {
                let nv = (spec.validation * n as f64).floor() as usize;
                let nt = (spec.test * n as f64).floor() as usize;
                prop_assert!(nv == 0 || nt == 0 || nv + nt >= n);
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        Ok(())
    }))
}

fn validate_simplex_tolerance(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (0.05f64..0.95, -3e-6f64..3e-6).prop_filter("off the boundary", |(_, e)| (e.abs() - 1e-6).abs() > 1e-8);
    finish(runner.run(&strat, |(q, eps)| {
        let ds = Dataset::new(
            vec![vec![0.0]],
            Targets::Classes {
                labels: vec![0],
                n_classes: 2,
            },
            vec!["x".into()],
        )
        .unwrap();
        let t = PredictionTensor::classification(vec![vec![vec![q, 1.0 - q + eps]]], action_names(1)).unwrap();
        let accepted = validate(ds, t).is_ok();
        prop_assert_eq!(accepted, eps.abs() <= 1e-6);
        Ok(())
    }))
}

// ---------------------------------------------------------------- rewards

fn critical_threshold_equivalence(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (class_instance(1..=10, 1..=3, 2..=3), 0.0f64..0.99);
    finish(runner.run(&strat, |((labels, probs), alpha)| {
        let b = class_bundle(&labels, &probs);
        let m = probs[0].len();
        let k = probs[0][0].len();
        let true_probs: Vec<Vec<f64>> = (0..m).map(|j| labels.iter().enumerate().map(|(i, &y)| probs[i][j][y]).collect()).collect();
        let star = critical_rejection_threshold(&true_probs).unwrap();
        prop_assume!((alpha - star).abs() > 1e-9);
        let actions = ActionSet::singles(&action_names(m)).with_rejection();
        let spec = RejectionSpec::constant(alpha, k).unwrap();
        let r = build_classification_rewards(&b, &actions, ClassificationReward::CrossEntropy, Some(&spec)).unwrap();
        let totals = r.column_totals(0..labels.len());
        let best_model = totals[..m].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(totals[m] > best_model, alpha < star);
        Ok(())
    }))
}

fn rejection_reward_monotone(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (class_instance(1..=8, 1..=3, 2..=3), 0.0f64..0.9, 0.0f64..0.09, 0usize..3, 0.0f64..5.0, 0.0f64..5.0);
    finish(runner.run(&strat, |((labels, probs), a, bump, which, ra, rb)| {
        let b = class_bundle(&labels, &probs);
        let m = probs[0].len();
        let k = probs[0][0].len();
        let actions = ActionSet::singles(&action_names(m)).with_rejection();
        let lo = vec![a; k];
        let mut hi = lo.clone();
        hi[which % k] += bump;
        for kind in [ClassificationReward::CrossEntropy, ClassificationReward::Misclassification] {
            let r_lo = build_classification_rewards(&b, &actions, kind, Some(&RejectionSpec::classification(lo.clone()).unwrap())).unwrap();
            let r_hi = build_classification_rewards(&b, &actions, kind, Some(&RejectionSpec::classification(hi.clone()).unwrap())).unwrap();
            for i in 0..labels.len() {
                prop_assert!(r_hi.get(i, m) <= r_lo.get(i, m));
            }
        }
        let (small, large) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        let ds = Dataset::new(vec![vec![0.0]; 3], Targets::Real(vec![1.0, 2.0, 3.0]), vec!["x".into()]).unwrap();
        let rb_ = validate(ds, PredictionTensor::regression(vec![vec![0.5]; 3], action_names(1)).unwrap()).unwrap();
        let acts = ActionSet::singles(&action_names(1)).with_rejection();
        let r1 = build_regression_rewards(&rb_, &acts, Some(&RejectionSpec::regression(small).unwrap())).unwrap();
        let r2 = build_regression_rewards(&rb_, &acts, Some(&RejectionSpec::regression(large).unwrap())).unwrap();
        for i in 0..3 {
            prop_assert!(r2.get(i, 1) >= r1.get(i, 1));
        }
        Ok(())
    }))
}

fn mis_entries_binary(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (class_instance(1..=10, 1..=3, 2..=4), 0.0f64..1.0);
    finish(runner.run(&strat, |((labels, probs), alpha)| {
        let b = class_bundle(&labels, &probs);
        let m = probs[0].len();
        let k = probs[0][0].len();
        let actions = ActionSet::singles(&action_names(m)).with_rejection();
        let spec = RejectionSpec::constant(alpha, k).unwrap();
        let r = build_classification_rewards(&b, &actions, ClassificationReward::Misclassification, Some(&spec)).unwrap();
        for i in 0..labels.len() {
            for j in 0..m {
                prop_assert!(r.get(i, j) == 0.0 || r.get(i, j) == 1.0);
            }
            prop_assert!(r.get(i, m) > 0.0 && r.get(i, m) <= 1.0);
        }
        Ok(())
    }))
}

fn blend_on_simplex(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (1usize..=4, 2usize..=5).prop_flat_map(|(m, k)| {
        (
            prop::collection::vec(simplex(k), m),
            simplex(m),
            prop::collection::vec(0.0f64..1.0, m),
        )
    });
    finish(runner.run(&strat, |(probs, w, raw)| {
        let k = probs[0].len();
        let b = class_bundle(&[0], &[probs.clone()]);
        // Weights with exact zeros and a vertex, as well as interior points.
        let s: f64 = raw.iter().sum();
        let mut vertex = vec![0.0; w.len()];
        vertex[0] = 1.0;
        let mut weights = vec![w, vertex];
        if s > 0.0 {
            weights.push(raw.iter().map(|v| v / s).collect());
        }
        let mut out = vec![0.0; k];
        for w in weights {
            blend_probs(&b, 0, &w, &mut out);
            let sum: f64 = out.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {}", sum);
            prop_assert!(out.iter().all(|&p| p >= -1e-12));
        }
        Ok(())
    }))
}

fn cross_entropy_nonpositive(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (class_instance(1..=10, 1..=3, 2..=3), prop::collection::vec(any::<bool>(), 10));
    finish(runner.run(&strat, |((labels, mut probs), certain)| {
        // Some samples get a model that is exactly right.
        let k = probs[0][0].len();
        for (i, row) in probs.iter_mut().enumerate() {
            if certain[i] {
                row[0] = (0..k).map(|c| f64::from(u8::from(c == labels[i]))).collect();
            }
        }
        let b = class_bundle(&labels, &probs);
        let m = probs[0].len();
        let r = build_classification_rewards(&b, &ActionSet::singles(&action_names(m)), ClassificationReward::CrossEntropy, None).unwrap();
        for (i, &y) in labels.iter().enumerate() {
            for j in 0..m {
                let v = r.get(i, j);
                prop_assert!(v <= 0.0);
                prop_assert_eq!(v == 0.0, probs[i][j][y] == 1.0);
            }
        }
        Ok(())
    }))
}

fn ridge_matches_dense_solve(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (1usize..=5, 2usize..=30).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, m), n),
            prop::collection::vec(-10.0f64..10.0, n),
            0.01f64..10.0,
        )
    });
    finish(runner.run(&strat, |(h, y, lambda)| {
        let n = h.len();
        let m = h[0].len();
        let w = ridge_weights(&h, &y, lambda).unwrap();
        let hm = DMatrix::from_fn(n, m, |i, j| h[i][j]);
        let a = hm.transpose() * &hm + DMatrix::identity(m, m) * lambda;
        let rhs = hm.transpose() * DVector::from_vec(y.clone());
        let expect = a.cholesky().expect("positive definite").solve(&rhs);
        for j in 0..m {
            prop_assert!((w[j] - expect[j]).abs() <= 1e-7 * expect[j].abs().max(1.0), "{} vs {}", w[j], expect[j]);
        }
        Ok(())
    }))
}

// ------------------------------------------------------------------- tree

fn oracle_equivalence(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(30, 2, 3, 16), 1usize..=2, 1usize..=3, 0u32..=2, any::<u64>());
    finish(runner.run(&strat, |(inst, depth, min_leaf, lam, seed)| {
        let r = inst.rewards();
        let lambda = f64::from(lam) / 2.0;
        let cfg = FitConfig::default().depth(depth).min_leaf(min_leaf).lambda(lambda).restarts(20).seed(seed);
        let exact = exhaustive_fit(&r, &inst.x, &cfg).unwrap();
        let local = fit(&r, &inst.x, &cfg).unwrap();
        let brute = brute_force_objective(&r, &inst.x, depth, min_leaf, lambda);
        let e = gain(r.sense(), exact.objective(&r, &inst.x, lambda));
        let l = gain(r.sense(), local.objective(&r, &inst.x, lambda));
        prop_assert_eq!(e, brute);
        prop_assert_eq!(l, e);
        Ok(())
    }))
}

fn sweeps_never_worsen(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(60, 3, 4, 40), 1usize..=3, any::<u64>());
    finish(runner.run(&strat, |(inst, depth, seed)| {
        let r = inst.rewards();
        let cfg = FitConfig::default().depth(depth).lambda(0.25).restarts(6).seed(seed);
        let (_, trace) = fit_with_trace(&r, &inst.x, &cfg).unwrap();
        prop_assert_eq!(trace.restarts.len(), 6);
        for t in &trace.restarts {
            prop_assert!(t.windows(2).all(|w| w[1] >= w[0]), "{:?}", t);
        }
        Ok(())
    }))
}

fn leaf_actions_optimal(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(60, 3, 4, 1000), 1usize..=3, 1usize..=4, any::<u64>());
    finish(runner.run(&strat, |(inst, depth, min_leaf, seed)| {
        let r = inst.rewards();
        prop_assume!(r.n_rows() >= min_leaf);
        let tree = fit(&r, &inst.x, &FitConfig::default().depth(depth).min_leaf(min_leaf).restarts(4).seed(seed)).unwrap();
        for (action, rows) in leaf_rows(&tree, &inst.x) {
            let totals = r.column_totals(rows.iter().copied());
            let mine = gain(r.sense(), totals[action]);
            for t in totals {
                prop_assert!(mine >= gain(r.sense(), t));
            }
        }
        Ok(())
    }))
}

fn depth_and_leaf_size(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(60, 3, 3, 1000), 0usize..=4, 1usize..=8, any::<u64>());
    finish(runner.run(&strat, |(inst, depth, min_leaf, seed)| {
        let r = inst.rewards();
        prop_assume!(r.n_rows() >= min_leaf);
        let tree = fit(&r, &inst.x, &FitConfig::default().depth(depth).min_leaf(min_leaf).restarts(4).seed(seed)).unwrap();
        prop_assert!(tree.depth() <= depth);
        for (_, rows) in leaf_rows(&tree, &inst.x) {
            prop_assert!(rows.len() >= min_leaf);
        }
        Ok(())
    }))
}

fn prune_path_monotone(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(60, 2, 3, 1000), instance(40, 2, 3, 1000), 1usize..=4, any::<u64>());
    finish(runner.run(&strat, |(train, val, depth, seed)| {
        let d = train.x[0].len();
        let val_x: Vec<Vec<f64>> = val.x.iter().map(|r| (0..d).map(|f| r[f % r.len()]).collect()).collect();
        let r = train.rewards();
        let vr = matrix(val.r.clone(), r.sense());
        let tree = fit(&r, &train.x, &FitConfig::default().depth(depth).restarts(3).seed(seed)).unwrap();
        let path = prune_path(&tree, &r, &train.x, &vr, &val_x).unwrap();
        prop_assert_eq!(path[0].lambda, 0.0);
        prop_assert_eq!(path[0].n_splits(), tree.n_splits());
        prop_assert_eq!(path.last().unwrap().n_splits(), 0);
        for w in path.windows(2) {
            prop_assert!(w[1].lambda >= w[0].lambda);
            prop_assert!(w[1].n_splits() < w[0].n_splits());
        }
        for p in &path {
            let v = evaluate(&p.tree, &vr, &val_x).unwrap().total_reward;
            prop_assert!((v - p.val_objective).abs() <= tol(v));
        }
        Ok(())
    }))
}

/// Rejection levels of the growing-reward sweep on the Gaussian harness.
pub const REJECT_LEVELS: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0];

/// Reject fraction of a depth-3 tree on `n` points at each level of
/// [`REJECT_LEVELS`].
pub fn reject_fractions(seed: u64, n: usize, restarts: usize) -> Vec<f64> {
    REJECT_LEVELS
        .iter()
        .map(|&a| {
            let spec = GaussianRewardSpec { n, ..GaussianRewardSpec::standard(seed) }.with_rejection(a);
            let (x, r) = gaussian_rewards(&spec).unwrap();
            let tree = fit(&r, &x, &FitConfig::default().depth(3).restarts(restarts).seed(seed)).unwrap();
            evaluate(&tree, &r, &x).unwrap().reject_fraction
        })
        .collect()
}

fn reject_fraction_grows(runner: &mut TestRunner) -> Result<(), String> {
    finish(runner.run(&any::<u64>(), |seed| {
        let f = reject_fractions(seed, 200, 4);
        prop_assert!(f.windows(2).all(|w| w[1] >= w[0]), "{:?}", f);
        prop_assert_eq!(*f.last().unwrap(), 1.0);
        Ok(())
    }))
}

// --------------------------------------------------------------- baseline

fn routing_gap_linear(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (2usize..=12, 1.0f64..5.0, 0.001f64..0.05);
    finish(runner.run(&strat, |(groups, margin, eps)| {
        let (r1, x1) = gap_instance(groups, margin, eps);
        let (r10, x10) = gap_instance(groups, 10.0 * margin, eps);
        let (g1, mean1, bound1) = routing_gap(&r1, &x1);
        let (g10, mean10, bound10) = routing_gap(&r10, &x10);
        prop_assert!(g1 > 0.0);
        let ratio = g10 / g1;
        prop_assert!((8.0..=12.0).contains(&ratio), "ratio {}", ratio);
        prop_assert!(mean1 <= bound1 && mean10 <= bound10);
        Ok(())
    }))
}

fn tail_policy_beats_meta_tree(runner: &mut TestRunner) -> Result<(), String> {
    finish(runner.run(&any::<u64>(), |seed| {
        let (policy, meta) = tail_totals(seed);
        prop_assert!(policy > meta, "{} vs {}", policy, meta);
        Ok(())
    }))
}

fn meta_tree_separable(runner: &mut TestRunner) -> Result<(), String> {
    // Labels piecewise constant in one feature with at most depth + 1
    // segments; the other features are constant. Random noise columns can
    // win a greedy split by chance and break separability at this depth.
    let strat = (10usize..80, 1usize..=3, 1usize..=3, any::<u64>()).prop_flat_map(|(n, d, depth, seed)| {
        (
            Just(n),
            Just(d),
            Just(depth),
            0..d,
            prop::collection::vec(0usize..3, depth + 1),
            prop::collection::vec(1usize..n, depth),
            Just(seed),
        )
    });
    finish(runner.run(&strat, |(n, d, depth, f, seg_labels, cuts, seed)| {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..d).map(|j| if j == f { order[i] as f64 } else { 0.5 }).collect())
            .collect();
        let labels: Vec<usize> = (0..n)
            .map(|i| seg_labels[cuts.iter().filter(|&&c| order[i] >= c).count()])
            .collect();
        let meta = MetaLabels {
            labels: labels.clone(),
            names: action_names(3),
        };
        let tree = fit_meta_tree(&x, &meta, &FitConfig::default().depth(depth)).unwrap();
        prop_assert_eq!(tree.predict_all(&x).unwrap(), labels);
        Ok(())
    }))
}

// ------------------------------------------------------- reject intervals

/// Binary scores, sometimes on a coarse grid so ties occur; bounds on a
/// grid no accuracy ratio with at most 25 samples can hit except 0 and 1.
fn interval_instance() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, f64, ErrorCaps)> {
    (1usize..=25, any::<bool>()).prop_flat_map(|(n, coarse)| {
        let score = if coarse {
            (0u32..=10).prop_map(|k| f64::from(k) / 10.0).boxed()
        } else {
            (0.0f64..=1.0).boxed()
        };
        let bound = (0u32..=997).prop_map(|k| f64::from(k) / 997.0);
        (
            prop::collection::vec(score, n),
            prop::collection::vec(0usize..2, n),
            bound.clone(),
            prop::option::weighted(0.3, bound.clone()),
            prop::option::weighted(0.3, bound),
        )
            .prop_map(|(s, y, a, fnr, fpr)| (s, y, a, ErrorCaps { fnr_max: fnr, fpr_max: fpr }))
    })
}

fn interval_matches_brute_force(runner: &mut TestRunner) -> Result<(), String> {
    finish(runner.run(&interval_instance(), |(scores, labels, alpha, caps)| {
        let r = solve_single_interval(&scores, &labels, alpha, caps).unwrap();
        let stats = IntervalStats::of(&scores, &labels, r.a, r.b);
        prop_assert_eq!(stats.coverage, r.coverage);
        prop_assert!(stats.feasible(alpha, caps));
        prop_assert_eq!(Some(r.coverage), brute_force_coverage(&scores, &labels, alpha, caps));
        Ok(())
    }))
}

fn coverage_antimonotone(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (interval_instance(), 0u32..=997);
    finish(runner.run(&strat, |((scores, labels, a1, caps), k)| {
        let a2 = f64::from(k) / 997.0;
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let c_lo = solve_single_interval(&scores, &labels, lo, caps).unwrap().coverage;
        let c_hi = solve_single_interval(&scores, &labels, hi, caps).unwrap().coverage;
        prop_assert!(c_hi <= c_lo);
        Ok(())
    }))
}

fn class_policy_leaf_accuracy(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (5usize..60, 1usize..=3, 2usize..=3, 0.0f64..1.0, 1usize..=3, any::<u64>()).prop_flat_map(
        |(n, m, k, alpha, depth, seed)| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, m), n),
                prop::collection::vec(0..k, n),
                Just(k),
                Just(alpha),
                Just(depth),
                Just(seed),
            )
        },
    );
    finish(runner.run(&strat, |(scores, labels, k, alpha, depth, seed)| {
        let cfg = ClassPolicyConfig::new(alpha, k, FitConfig::default().depth(depth).restarts(3).seed(seed));
        let tree = fit_class_policy(&scores, &labels, &cfg).unwrap();
        for (action, rows) in leaf_rows(&tree, &scores) {
            if action < k {
                let hits = rows.iter().filter(|&&i| labels[i] == action).count();
                prop_assert!(hits as f64 >= alpha * rows.len() as f64 - 1e-9);
            }
        }
        Ok(())
    }))
}

// ------------------------------------------------------------------ synth

pub const GAUSSIAN_ANALYTIC: [(f64, &[f64], &[&str]); 3] = [
    (f64::NAN, &[6.0], &["M1", "M2"]),
    (0.1, &[1.854, 6.0, 10.146], &["reject", "M1", "M2", "reject"]),
    (0.3, &[2.448, 5.552, 6.448, 9.552], &["reject", "M1", "reject", "M2", "reject"]),
];

/// Effective boundaries and segment actions of a depth-3 tree on each
/// Gaussian configuration, paired with the analytic answer.
pub fn gaussian_fits(seed: u64, restarts: usize) -> Vec<((Vec<f64>, Vec<String>), (&'static [f64], &'static [&'static str]))> {
    GAUSSIAN_ANALYTIC
        .iter()
        .map(|&(alpha, bounds, pattern)| {
            let mut spec = GaussianRewardSpec::standard(seed);
            if !alpha.is_nan() {
                spec = spec.with_rejection(alpha);
            }
            let (x, r) = gaussian_rewards(&spec).unwrap();
            let tree = fit(&r, &x, &FitConfig::default().depth(3).restarts(restarts).seed(seed)).unwrap();
            let (b, names) = segments(&tree, spec.lo, spec.hi);
            ((b, names.iter().map(|s| base_name(s).to_string()).collect()), (bounds, pattern))
        })
        .collect()
}

pub fn gaussian_matches(fitted: &(Vec<f64>, Vec<String>), expect: (&[f64], &[&str]), within: f64) -> bool {
    fitted.0.len() == expect.0.len()
        && fitted.0.iter().zip(expect.0).all(|(a, b)| (a - b).abs() <= within)
        && fitted.1.iter().map(String::as_str).eq(expect.1.iter().copied())
}

fn gaussian_boundaries(runner: &mut TestRunner) -> Result<(), String> {
    finish(runner.run(&any::<u64>(), |seed| {
        for (fitted, expect) in gaussian_fits(seed, 4) {
            prop_assert!(gaussian_matches(&fitted, expect, 0.15), "seed {}: {:?} vs {:?}", seed, fitted, expect);
        }
        Ok(())
    }))
}

fn launch() -> impl Strategy<Value = ProjectileParams> {
    (0.0f64..=100.0, 0.0f64..=FRAC_PI_2, 1e-6f64..=1.0).prop_map(|(v, t, c)| ProjectileParams::new(v, t, c))
}

fn drag_limit_dominates(runner: &mut TestRunner) -> Result<(), String> {
    finish(runner.run(&launch(), |p| {
        let truth = ground_truth_range(&p);
        let limit = physics_drag_limit(&p).unwrap();
        prop_assert!(limit >= truth, "{} < {} at {:?}", limit, truth, p);
        Ok(())
    }))
}

fn vanishing_drag_matches_vacuum(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (0.0f64..=100.0, 0.0f64..=FRAC_PI_2);
    finish(runner.run(&strat, |(v, t)| {
        let p = ProjectileParams::new(v, t, 1e-8);
        let gap = (ground_truth_range(&p) - physics_no_drag(&p)).abs();
        prop_assert!(gap <= 1e-3, "gap {} at {:?}", gap, p);
        Ok(())
    }))
}

fn knn_exact_on_training_rows(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (25usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), n),
            prop::collection::vec(-100.0f64..100.0, n),
            0..n,
        )
    });
    finish(runner.run(&strat, |(x, y, i)| {
        let model = KnnRegressor::fit(&x, &y, KnnRegressor::DEFAULT_K).unwrap();
        // Rows are continuous draws, so the queried row is its own unique
        // nearest neighbour.
        prop_assert_eq!(model.predict(&x[i]), y[i]);
        let flat = KnnRegressor::fit(&x, &vec![3.5; x.len()], KnnRegressor::DEFAULT_K).unwrap();
        prop_assert!((flat.predict(&[0.0, 0.0, 0.0]) - 3.5).abs() <= 1e-12);
        Ok(())
    }))
}

// -------------------------------------------------------------------- cli

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("op2t").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
}

fn reward_csv(inst: &Instance) -> String {
    let d = inst.x[0].len();
    let a = inst.r[0].len();
    let mut s = format!("#sense={}\n", if inst.maximize { "max" } else { "min" });
    let mut header: Vec<String> = (0..d).map(|f| format!("f{f}")).collect();
    header.extend((0..a).map(|j| format!("reward:a{j}")));
    s.push_str(&header.join(","));
    s.push('\n');
    for (x, r) in inst.x.iter().zip(&inst.r) {
        let cells: Vec<String> = x.iter().chain(r).map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn train_predict_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(40, 3, 3, 50), 1usize..=3, any::<u64>());
    finish(runner.run(&strat, |(inst, depth, seed)| {
        let dir = tempfile::tempdir().unwrap();
        let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
        std::fs::write(p("r.csv"), reward_csv(&inst)).unwrap();
        let (code, msg) = run_cli(&["train", "--data", &p("r.csv"), "--depth", &depth.to_string(), "--seed", &seed.to_string(), "--out", &p("t.json")]);
        prop_assert_eq!(code, 0, "{}", msg);
        let (code, msg) = run_cli(&["predict", "--tree", &p("t.json"), "--data", &p("r.csv"), "--out", &p("p.csv")]);
        prop_assert_eq!(code, 0, "{}", msg);
        let tree = fit(&inst.rewards(), &inst.x, &FitConfig::default().depth(depth).seed(seed)).unwrap();
        let expect = tree.prescribe_all(&inst.x).unwrap();
        let got: Vec<usize> = std::fs::read_to_string(p("p.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        prop_assert_eq!(got, expect);
        Ok(())
    }))
}

fn identical_invocations(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (instance(40, 2, 3, 50), 1usize..=3, any::<u64>(), 20usize..120);
    finish(runner.run(&strat, |(inst, depth, seed, n)| {
        let dir = tempfile::tempdir().unwrap();
        let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
        std::fs::write(p("r.csv"), reward_csv(&inst)).unwrap();
        let (depth, seed, n) = (depth.to_string(), seed.to_string(), n.to_string());
        for out in ["a", "b"] {
            let t = p(&format!("{out}.json"));
            let g = p(&format!("{out}.csv"));
            prop_assert_eq!(run_cli(&["train", "--data", &p("r.csv"), "--depth", &depth, "--seed", &seed, "--out", &t]).0, 0);
            prop_assert_eq!(run_cli(&["synth", "gaussian", "--n", &n, "--alpha", "0.2", "--seed", &seed, "--out", &g]).0, 0);
        }
        for (a, b) in [("a.json", "b.json"), ("a.csv", "b.csv")] {
            prop_assert_eq!(std::fs::read(p(a)).unwrap(), std::fs::read(p(b)).unwrap());
        }
        Ok(())
    }))
}
