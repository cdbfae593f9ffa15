//! The `op2t` command line: one subcommand per pipeline step.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

pub mod csvio;

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baseline::{fit_meta_tree, meta_labels, meta_labels_from_rewards, meta_labels_with_rejection, metric_accuracy};
use crate::data::{validate, TaskKind};
use crate::error::{Error, Result};
use crate::reject_intervals::{fit_class_policy, solve_single_interval, solve_single_interval_grid, ClassPolicyConfig, ErrorCaps};
use crate::rewards::{
    build_classification_rewards, build_regression_rewards, mean_ensemble, ridge_weights, ActionSet, ClassificationReward,
    RejectionSpec, RewardMatrix, Sense,
};
use crate::synth::{gaussian_rewards, gen_projectile_dataset, GaussianRewardSpec, ProjectileData};
use crate::tree::{
    cross_validate, evaluate, fit, grid_search, prune_path, select_by_validation, subtree_for_lambda, FitConfig, GridSpec,
    Lambda, PolicyTree, Thresholds,
};
use csvio::{features_by_name, read_dataset, read_predictions, read_rewards, render, write_rewards, write_text, Table};

#[derive(Parser, Debug)]
#[command(name = "op2t", version, about = "Optimal predictive-policy trees over constituent model outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a reward matrix from data and model predictions.
    Rewards(RewardsArgs),
    /// Fit a policy tree on a reward matrix.
    Train(TrainArgs),
    /// Prescribe an action for every row of a data file.
    Predict(PredictArgs),
    /// Summarize a tree's prescriptions on a reward matrix.
    Eval(EvalArgs),
    /// Print the pruning path of a tree and keep one subtree.
    Prune(PruneArgs),
    /// Generate synthetic experiments.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Predictive baselines.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Best rejection interval for one binary scorer.
    RejectInterval(RejectIntervalArgs),
    /// Fit a class-or-reject policy over model scores.
    ClassPolicy(ClassPolicyArgs),
    /// Write a tree as Graphviz DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// Two Gaussian reward bumps on a line.
    Gaussian(GaussianArgs),
    /// Projectile ranges with three constituent range models.
    Projectile(ProjectileArgs),
}

#[derive(Subcommand, Debug)]
enum BaselineCommand {
    /// CART classifier on per-sample best-action labels.
    MetaTree(MetaTreeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Task {
    Max,
    Min,
}

impl From<Task> for Sense {
    fn from(t: Task) -> Sense {
        match t {
            Task::Max => Sense::Maximize,
            Task::Min => Sense::Minimize,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RewardKind {
    Ce,
    Mis,
    Se,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Args, Debug)]
struct TreeOpts {
    /// Maximum tree depth.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Minimum training rows per leaf.
    #[arg(long = "min-leaf", default_value_t = 1)]
    min_leaf: usize,
    /// Penalty per split, or `auto` to choose it by validation.
    #[arg(long, default_value = "0")]
    lambda: String,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use at most this many candidate thresholds per feature.
    #[arg(long)]
    quantiles: Option<usize>,
}

impl TreeOpts {
    fn lambda(&self) -> std::result::Result<Lambda, String> {
        if self.lambda == "auto" {
            return Ok(Lambda::Auto);
        }
        match self.lambda.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(Lambda::Fixed(v)),
            _ => Err(format!("--lambda expects a number >= 0 or 'auto', got '{}'", self.lambda)),
        }
    }

    fn config(&self, lambda: Lambda) -> FitConfig {
        FitConfig {
            max_depth: self.depth,
            min_leaf: self.min_leaf,
            lambda,
            restarts: self.restarts,
            seed: self.seed,
            thresholds: self.quantiles.map_or(Thresholds::AllMidpoints, Thresholds::Quantiles),
        }
    }
}

#[derive(Args, Debug)]
struct RewardsArgs {
    #[arg(long)]
    data: String,
    #[arg(long)]
    preds: String,
    #[arg(long = "target-col", default_value = "target")]
    target_col: String,
    #[arg(long, value_enum)]
    reward: RewardKind,
    /// JSON list of extra ensemble weight vectors.
    #[arg(long)]
    ensembles: Option<String>,
    /// Add the equal-weight ensemble.
    #[arg(long)]
    mean: bool,
    /// Add the ridge-stacked ensemble with this regularization (regression).
    #[arg(long)]
    ridge: Option<f64>,
    /// Rejection reward parameter: one value, or one per class.
    #[arg(long = "reject-alpha")]
    reject_alpha: Option<String>,
    /// Only use rows whose `split` column has this value.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Reward CSV.
    #[arg(long)]
    data: String,
    /// Override the sense stored in the reward file.
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Validation reward CSV for choosing the penalty (with `--lambda auto`).
    #[arg(long)]
    val: Option<String>,
    /// Folds for choosing the penalty when no validation file is given.
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Search depths 2..=depth and these leaf sizes (comma list) instead of
    /// a single fit; needs `--lambda auto`.
    #[arg(long = "grid-min-leaf")]
    grid_min_leaf: Option<String>,
    #[command(flatten)]
    tree: TreeOpts,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    tree: String,
    #[arg(long)]
    data: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    tree: String,
    /// Reward CSV.
    #[arg(long)]
    data: String,
    #[arg(long, value_enum)]
    task: Option<Task>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct PruneArgs {
    #[arg(long)]
    tree: String,
    /// Training reward CSV.
    #[arg(long)]
    data: String,
    /// Validation reward CSV (defaults to the training file).
    #[arg(long)]
    val: Option<String>,
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// Keep the subtree for this penalty instead of the best validation one.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct GaussianArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Rejection reward levels (comma list); one rejection action each.
    #[arg(long)]
    alpha: Option<String>,
    /// Add 0.01 to the first model's reward and sample on [0, 18].
    #[arg(long)]
    tail: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct ProjectileArgs {
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data CSV: v0, theta, c, target, split.
    #[arg(long)]
    out: String,
    /// Prediction CSV, one column per constituent model.
    #[arg(long = "preds-out")]
    preds_out: String,
}

#[derive(Args, Debug)]
struct MetaTreeArgs {
    /// Data CSV (with `--preds`) or reward CSV (without).
    #[arg(long)]
    data: String,
    #[arg(long)]
    preds: Option<String>,
    #[arg(long = "target-col", default_value = "target")]
    target_col: String,
    /// Task type of the data file when `--preds` is given.
    #[arg(long, value_enum)]
    reward: Option<RewardKind>,
    /// JSON list of extra ensemble weight vectors.
    #[arg(long)]
    ensembles: Option<String>,
    #[arg(long)]
    mean: bool,
    /// Label samples whose best model does worse than rejecting with this
    /// parameter as a separate rejection class.
    #[arg(long = "reject-alpha")]
    reject_alpha: Option<String>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long = "min-leaf", default_value_t = 1)]
    min_leaf: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct RejectIntervalArgs {
    /// CSV with a `score` column and a binary label column.
    #[arg(long)]
    scores: String,
    #[arg(long = "target-col", default_value = "target")]
    target_col: String,
    /// Accuracy floor over covered samples.
    #[arg(long)]
    alpha: f64,
    #[arg(long = "fnr-max")]
    fnr_max: Option<f64>,
    #[arg(long = "fpr-max")]
    fpr_max: Option<f64>,
    /// Restrict endpoints to a grid with this many steps.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct ClassPolicyArgs {
    /// CSV of model score columns and a label column.
    #[arg(long)]
    scores: String,
    #[arg(long = "target-col", default_value = "target")]
    target_col: String,
    /// Reward of rejecting.
    #[arg(long)]
    alpha: f64,
    /// Reward of a correct prediction per class (comma list).
    #[arg(long)]
    beta: Option<String>,
    #[command(flatten)]
    tree: TreeOpts,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct ExportDotArgs {
    #[arg(long)]
    tree: String,
    #[arg(long)]
    out: Option<String>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Runs the command line on `argv` (including the program name), writing
/// results to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let threads = std::env::var("OP2T_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let result = match threads.filter(|&t| t > 0) {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(cli.command, &mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => Err(Failure::Usage(format!("OP2T_THREADS: {e}"))),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Rewards(a) => cmd_rewards(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Prune(a) => cmd_prune(a, out),
        Command::Synth(SynthCommand::Gaussian(a)) => cmd_gaussian(a, out),
        Command::Synth(SynthCommand::Projectile(a)) => cmd_projectile(a, out),
        Command::Baseline(BaselineCommand::MetaTree(a)) => cmd_meta_tree(a, out),
        Command::RejectInterval(a) => cmd_reject_interval(a, out),
        Command::ClassPolicy(a) => cmd_class_policy(a, out),
        Command::ExportDot(a) => cmd_export_dot(a, out),
    }
}

fn emit(out: &mut dyn Write, path: Option<&str>, text: &str) -> Outcome {
    match path {
        Some(p) => write_text(p, text)?,
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })?,
    }
    Ok(())
}

fn say(out: &mut dyn Write, line: impl std::fmt::Display) -> Outcome {
    writeln!(out, "{line}").map_err(|source| {
        Failure::Data(Error::Io {
            path: "<stdout>".into(),
            source,
        })
    })
}

fn parse_list(flag: &str, text: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{flag}: cannot parse '{}' as a number", s.trim())))
        })
        .collect()
}

fn read_ensembles(path: &str) -> Result<Vec<Vec<f64>>> {
    let text = csvio::read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            format!("{path}: line {}, column {}", e.line(), e.column()),
            format!("expected a JSON list of weight vectors: {e}"),
        )
    })
}

fn build_actions(
    model_names: &[String],
    ensembles: Option<&str>,
    mean: bool,
    ridge: Option<Vec<f64>>,
) -> Result<ActionSet> {
    let mut actions = ActionSet::singles(model_names);
    if let Some(path) = ensembles {
        for (i, w) in read_ensembles(path)?.into_iter().enumerate() {
            actions = actions.push_ensemble(format!("ensemble{i}"), w)?;
        }
    }
    if mean {
        actions = actions.push_ensemble("mean", mean_ensemble(model_names.len()))?;
    }
    if let Some(w) = ridge {
        actions = actions.push_ensemble("ridge", w)?;
    }
    Ok(actions)
}

fn rejection_spec(text: &str, kind: TaskKind, n_classes: Option<usize>) -> std::result::Result<RejectionSpec, Failure> {
    let values = parse_list("--reject-alpha", text)?;
    Ok(match kind {
        TaskKind::Regression => match values.as_slice() {
            [a] => RejectionSpec::regression(*a)?,
            _ => return usage("--reject-alpha takes a single value for regression"),
        },
        TaskKind::Classification => {
            let k = n_classes.unwrap_or(values.len());
            match values.as_slice() {
                [a] => RejectionSpec::constant(*a, k)?,
                _ => RejectionSpec::classification(values)?,
            }
        }
    })
}

fn cmd_rewards(a: RewardsArgs, out: &mut dyn Write) -> Outcome {
    let classification = a.reward != RewardKind::Se;
    if a.ridge.is_some() && classification {
        return usage("--ridge applies to squared-error rewards only");
    }
    let data = Table::read(&a.data)?;
    let preds_table = Table::read(&a.preds)?;
    if data.rows.len() != preds_table.rows.len() {
        return Err(Error::DimensionMismatch {
            what: format!("rows of {}", a.preds),
            expected: data.rows.len(),
            found: preds_table.rows.len(),
        }
        .into());
    }
    let rows = data.select(a.split.as_deref())?;
    let preds = read_predictions(&preds_table, &rows)?;
    if classification != (preds.kind() == TaskKind::Classification) {
        return usage(format!(
            "--reward {:?} does not match the prediction file {}",
            a.reward, a.preds
        ));
    }
    let dataset = read_dataset(&data, &rows, &a.target_col, classification, preds.n_classes())?;
    let feature_names = dataset.feature_names().to_vec();
    let features = dataset.feature_rows();
    let bundle = validate(dataset, preds)?;
    let ridge = match a.ridge {
        Some(l) => {
            let h: Vec<Vec<f64>> = (0..bundle.n_rows()).map(|i| bundle.preds().row_values(i).to_vec()).collect();
            let crate::data::Targets::Real(y) = bundle.dataset().targets() else {
                return usage("--ridge needs real-valued targets");
            };
            Some(ridge_weights(&h, y, l)?)
        }
        None => None,
    };
    let mut actions = build_actions(bundle.preds().model_names(), a.ensembles.as_deref(), a.mean, ridge)?;
    let spec = match &a.reject_alpha {
        Some(text) => {
            actions = actions.with_rejection();
            Some(rejection_spec(text, bundle.kind(), bundle.preds().n_classes())?)
        }
        None => None,
    };
    let rewards = match a.reward {
        RewardKind::Se => build_regression_rewards(&bundle, &actions, spec.as_ref())?,
        RewardKind::Ce => build_classification_rewards(&bundle, &actions, ClassificationReward::CrossEntropy, spec.as_ref())?,
        RewardKind::Mis => {
            build_classification_rewards(&bundle, &actions, ClassificationReward::Misclassification, spec.as_ref())?
        }
    };
    emit(out, a.out.as_deref(), &write_rewards(&feature_names, &features, &rewards))
}

fn load_rewards(path: &str, task: Option<Task>) -> Result<(Vec<String>, Vec<Vec<f64>>, RewardMatrix)> {
    let t = Table::read(path)?;
    let rows = t.select(None)?;
    read_rewards(&t, &rows, task.map(Sense::from))
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Outcome {
    let lambda = a.tree.lambda().map_err(Failure::Usage)?;
    if a.grid_min_leaf.is_some() && lambda != Lambda::Auto {
        return usage("--grid-min-leaf needs --lambda auto");
    }
    let (names, x, r) = load_rewards(&a.data, a.task)?;
    let cfg = a.tree.config(lambda);
    let grid = match &a.grid_min_leaf {
        Some(list) => {
            let leaves = parse_list("--grid-min-leaf", list)?
                .into_iter()
                .map(|v| if v >= 1.0 && v.fract() == 0.0 { Ok(v as usize) } else { usage("--grid-min-leaf takes positive integers") })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            GridSpec::new(cfg.max_depth, leaves)
                .restarts(cfg.restarts)
                .seed(cfg.seed)
                .thresholds(cfg.thresholds)
        }
        None => GridSpec::from_config(&cfg),
    };
    let (tree, chosen_lambda) = match (lambda, &a.val) {
        (Lambda::Fixed(l), None) => (fit(&r, &x, &cfg)?, l),
        (Lambda::Fixed(_), Some(_)) => return usage("--val is only used with --lambda auto"),
        (Lambda::Auto, Some(val)) => {
            let (vnames, vx, vr) = load_rewards(val, a.task)?;
            if vnames != names {
                return Err(Error::parse(format!("{val}: header"), "feature columns differ from the training file").into());
            }
            let g = grid_search(&r, &x, &vr, &vx, &grid)?;
            (g.tree, g.lambda)
        }
        (Lambda::Auto, None) => {
            let g = cross_validate(&r, &x, a.folds, &grid)?;
            (g.tree, g.lambda)
        }
    };
    let tree = tree.with_feature_names(names)?;
    let summary = evaluate(&tree, &r, &x)?;
    emit(out, a.out.as_deref(), &tree.to_json())?;
    if a.out.is_some() {
        say(
            out,
            format!(
                "splits={} depth={} lambda={} total_reward={} reject_fraction={}",
                tree.n_splits(),
                tree.depth(),
                chosen_lambda,
                summary.total_reward,
                summary.reject_fraction
            ),
        )?;
    }
    Ok(())
}

fn load_tree(path: &str) -> Result<PolicyTree> {
    let text = csvio::read_text(path)?;
    PolicyTree::from_json(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{path}: {location}"),
            message,
        },
        other => other,
    })
}

fn cmd_predict(a: PredictArgs, out: &mut dyn Write) -> Outcome {
    let tree = load_tree(&a.tree)?;
    let t = Table::read(&a.data)?;
    let rows = t.select(None)?;
    let x = features_by_name(&t, &rows, tree.feature_names())?;
    let actions = tree.prescribe_all(&x)?;
    let header = vec!["action_index".to_string(), "action".to_string()];
    let body = actions
        .into_iter()
        .map(|k| vec![k.to_string(), tree.action_names()[k].clone()]);
    emit(out, a.out.as_deref(), &render(&header, body))
}

fn reorder(tree: &PolicyTree, names: &[String], x: Vec<Vec<f64>>, path: &str) -> Result<Vec<Vec<f64>>> {
    let idx = tree
        .feature_names()
        .iter()
        .map(|f| {
            names
                .iter()
                .position(|n| n == f)
                .ok_or_else(|| Error::parse(format!("{path}: header"), format!("missing column '{f}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(x.into_iter().map(|row| idx.iter().map(|&j| row[j]).collect()).collect())
}

#[derive(Serialize)]
struct EvalReport<'a> {
    total_reward: f64,
    mean_reward: f64,
    reject_fraction: f64,
    per_action_counts: Vec<(&'a str, usize)>,
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Outcome {
    let tree = load_tree(&a.tree)?;
    let (names, x, r) = load_rewards(&a.data, a.task)?;
    let x = reorder(&tree, &names, x, &a.data)?;
    let s = evaluate(&tree, &r, &x)?;
    match a.format {
        Format::Json => {
            let report = EvalReport {
                total_reward: s.total_reward,
                mean_reward: s.mean_reward,
                reject_fraction: s.reject_fraction,
                per_action_counts: tree
                    .action_names()
                    .iter()
                    .map(String::as_str)
                    .zip(s.per_action_counts.iter().copied())
                    .collect(),
            };
            say(out, serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Format::Csv => {
            let mut header = vec!["total_reward".to_string(), "mean_reward".into(), "reject_fraction".into()];
            header.extend(tree.action_names().iter().map(|n| format!("count:{n}")));
            let mut row = vec![s.total_reward.to_string(), s.mean_reward.to_string(), s.reject_fraction.to_string()];
            row.extend(s.per_action_counts.iter().map(|c| c.to_string()));
            emit(out, None, &render(&header, [row]))
        }
        Format::Dot => usage("eval supports --format json or csv"),
    }
}

fn cmd_prune(a: PruneArgs, out: &mut dyn Write) -> Outcome {
    let tree = load_tree(&a.tree)?;
    let (names, x, r) = load_rewards(&a.data, a.task)?;
    let x = reorder(&tree, &names, x, &a.data)?;
    let (vx, vr) = match &a.val {
        Some(v) => {
            let (vn, vx, vr) = load_rewards(v, a.task)?;
            (reorder(&tree, &vn, vx, v)?, vr)
        }
        None => (x.clone(), r.clone()),
    };
    let path = prune_path(&tree, &r, &x, &vr, &vx)?;
    let chosen = match a.lambda {
        Some(l) if l >= 0.0 => subtree_for_lambda(&path, l),
        Some(l) => return usage(format!("--lambda {l} must be >= 0")),
        None => select_by_validation(&path, &vr),
    };
    let header = vec!["lambda".to_string(), "splits".into(), "val_objective".into(), "selected".into()];
    let body = path.iter().map(|p| {
        vec![
            p.lambda.to_string(),
            p.n_splits().to_string(),
            p.val_objective.to_string(),
            u8::from(std::ptr::eq(p, chosen)).to_string(),
        ]
    });
    let table = render(&header, body);
    match &a.out {
        Some(path_out) => {
            write_text(path_out, &chosen.tree.to_json())?;
            emit(out, None, &table)
        }
        None => emit(out, None, &table),
    }
}

fn cmd_gaussian(a: GaussianArgs, out: &mut dyn Write) -> Outcome {
    let mut spec = if a.tail {
        GaussianRewardSpec::tail(a.seed)
    } else {
        GaussianRewardSpec::standard(a.seed)
    };
    spec.n = a.n;
    if let Some(list) = &a.alpha {
        spec.rejection_alphas = parse_list("--alpha", list)?;
    }
    let (x, r) = gaussian_rewards(&spec)?;
    emit(out, a.out.as_deref(), &write_rewards(&["x".to_string()], &x, &r))
}

fn cmd_projectile(a: ProjectileArgs, out: &mut dyn Write) -> Outcome {
    let d = gen_projectile_dataset(a.n, a.seed)?;
    let mut split = vec![""; a.n];
    for (name, rows) in [
        ("train", &d.partition.train),
        ("validation", &d.partition.validation),
        ("test", &d.partition.test),
    ] {
        for &i in rows {
            split[i] = name;
        }
    }
    let mut header: Vec<String> = ProjectileData::FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    header.push("target".into());
    header.push(csvio::SPLIT_COL.into());
    let body = (0..a.n).map(|i| {
        let mut row: Vec<String> = d.features[i].iter().map(|v| v.to_string()).collect();
        row.push(d.targets[i].to_string());
        row.push(split[i].to_string());
        row
    });
    write_text(&a.out, &render(&header, body))?;
    let pheader: Vec<String> = d.preds.model_names().to_vec();
    let pbody = (0..a.n).map(|i| d.preds.row_values(i).iter().map(|v| v.to_string()).collect());
    write_text(&a.preds_out, &render(&pheader, pbody))?;
    say(
        out,
        format!(
            "rows={} train={} validation={} test={}",
            a.n,
            d.partition.train.len(),
            d.partition.validation.len(),
            d.partition.test.len()
        ),
    )
}

fn cmd_meta_tree(a: MetaTreeArgs, out: &mut dyn Write) -> Outcome {
    let cfg = FitConfig::default().depth(a.depth).min_leaf(a.min_leaf);
    let data = Table::read(&a.data)?;
    let rows = data.select(a.split.as_deref())?;
    let (names, x, labels, rewards) = match &a.preds {
        Some(p) => {
            let Some(kind) = a.reward else {
                return usage("--reward is required with --preds");
            };
            let classification = kind != RewardKind::Se;
            let pt = Table::read(p)?;
            let preds = read_predictions(&pt, &rows)?;
            let ds = read_dataset(&data, &rows, &a.target_col, classification, preds.n_classes())?;
            let names = ds.feature_names().to_vec();
            let x = ds.feature_rows();
            let bundle = validate(ds, preds)?;
            let mut actions = build_actions(bundle.preds().model_names(), a.ensembles.as_deref(), a.mean, None)?;
            let labels = match &a.reject_alpha {
                Some(text) => {
                    actions = actions.with_rejection();
                    let spec = rejection_spec(text, bundle.kind(), bundle.preds().n_classes())?;
                    meta_labels_with_rejection(&bundle, &actions, &spec)?
                }
                None => meta_labels(&bundle, &actions)?,
            };
            (names, x, labels, None)
        }
        None => {
            if a.reject_alpha.is_some() || a.ensembles.is_some() || a.mean {
                return usage("--reject-alpha, --ensembles and --mean need --preds");
            }
            let (names, x, r) = read_rewards(&data, &rows, None)?;
            let labels = meta_labels_from_rewards(&r);
            (names, x, labels, Some(r))
        }
    };
    let tree = fit_meta_tree(&x, &labels, &cfg)?.with_feature_names(names)?;
    let pred = tree.predict_all(&x)?;
    emit(out, a.out.as_deref(), &tree.to_json())?;
    let mut line = format!(
        "splits={} depth={} label_accuracy={}",
        tree.n_splits(),
        tree.depth(),
        metric_accuracy(&labels.labels, &pred)?
    );
    if let Some(r) = rewards {
        let total: f64 = pred.iter().enumerate().map(|(i, &k)| r.get(i, k)).sum();
        line.push_str(&format!(" routed_total_reward={total}"));
    }
    if a.out.is_some() {
        say(out, line)?;
    }
    Ok(())
}

fn read_scores(path: &str, target: &str) -> Result<(Vec<String>, Vec<Vec<f64>>, Vec<usize>)> {
    let t = Table::read(path)?;
    let rows = t.select(None)?;
    let tcol = t.require(target)?;
    let cols = csvio::feature_columns(&t, Some(target));
    if cols.is_empty() {
        return Err(Error::parse(format!("{path}: header"), "no score columns"));
    }
    let names = cols.iter().map(|&c| t.header[c].clone()).collect();
    let x = t.numbers(&rows, &cols)?;
    let y = rows.iter().map(|&r| t.label(r, tcol)).collect::<Result<_>>()?;
    Ok((names, x, y))
}

fn cmd_reject_interval(a: RejectIntervalArgs, out: &mut dyn Write) -> Outcome {
    let (names, x, y) = read_scores(&a.scores, &a.target_col)?;
    let col = match names.iter().position(|n| n == "score") {
        Some(c) => c,
        None if names.len() == 1 => 0,
        None => {
            return Err(Error::parse(format!("{}: header", a.scores), "expected a 'score' column").into());
        }
    };
    let scores: Vec<f64> = x.iter().map(|r| r[col]).collect();
    let caps = ErrorCaps {
        fnr_max: a.fnr_max,
        fpr_max: a.fpr_max,
    };
    let r = match a.grid {
        Some(g) => solve_single_interval_grid(&scores, &y, a.alpha, caps, g)?,
        None => solve_single_interval(&scores, &y, a.alpha, caps)?,
    };
    match a.format {
        Some(Format::Json) => say(out, serde_json::to_string_pretty(&r).expect("interval serializes")),
        Some(Format::Dot) => usage("reject-interval supports --format json"),
        Some(Format::Csv) | None => {
            say(out, format!("a={}", r.a))?;
            say(out, format!("b={}", r.b))?;
            say(out, format!("coverage={}", r.coverage))?;
            say(out, format!("accuracy={}", r.achieved_accuracy))
        }
    }
}

fn cmd_class_policy(a: ClassPolicyArgs, out: &mut dyn Write) -> Outcome {
    let lambda = a.tree.lambda().map_err(Failure::Usage)?;
    let (names, x, y) = read_scores(&a.scores, &a.target_col)?;
    let k = y.iter().max().map_or(1, |m| m + 1).max(2);
    let mut cfg = ClassPolicyConfig::new(a.alpha, k, a.tree.config(lambda));
    if let Some(b) = &a.beta {
        let beta = parse_list("--beta", b)?;
        if beta.len() < k {
            return usage(format!("--beta needs {k} values"));
        }
        cfg.n_classes = beta.len();
        cfg = cfg.with_beta(beta);
    }
    let tree = fit_class_policy(&x, &y, &cfg)?.with_feature_names(names)?;
    emit(out, a.out.as_deref(), &tree.to_json())?;
    if a.out.is_some() {
        say(out, format!("splits={} depth={}", tree.n_splits(), tree.depth()))?;
    }
    Ok(())
}

fn cmd_export_dot(a: ExportDotArgs, out: &mut dyn Write) -> Outcome {
    let tree = load_tree(&a.tree)?;
    emit(out, a.out.as_deref(), &tree.to_dot())
}
