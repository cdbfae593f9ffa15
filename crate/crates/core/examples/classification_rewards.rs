//! Reward matrices from two classifiers' probabilities: cross-entropy and
//! 0/1 correctness, a mean ensemble, and a rejection action. The fitted
//! tree learns which region each model is trustworthy in.

use op2t::data::{validate, Dataset, PredictionTensor, Targets};
use op2t::rewards::{build_classification_rewards, mean_ensemble, ActionSet, ClassificationReward, RejectionSpec};
use op2t::tree::{evaluate, fit, FitConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> op2t::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 800;
    let mut x = Vec::new();
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    for _ in 0..n {
        let u: f64 = rng.gen_range(0.0..1.0);
        let y = usize::from(rng.gen_bool(0.5));
        // Model A is sharp left of 0.5, model B right of it; elsewhere each
        // is a coin flip around the right answer.
        let mut q = |good: bool| if good { 0.9 } else { rng.gen_range(0.25..0.75) };
        let (qa, qb) = (q(u < 0.5), q(u >= 0.5));
        let p = |q: f64| if y == 1 { vec![1.0 - q, q] } else { vec![q, 1.0 - q] };
        probs.push(vec![p(qa), p(qb)]);
        x.push(vec![u]);
        labels.push(y);
    }
    let names = vec!["A".to_string(), "B".to_string()];
    let dataset = Dataset::new(x.clone(), Targets::Classes { labels, n_classes: 2 }, vec!["u".into()])?;
    let bundle = validate(dataset, PredictionTensor::classification(probs, names.clone())?)?;
    let actions = ActionSet::singles(&names)
        .push_ensemble("mean", mean_ensemble(2))?
        .with_rejection();
    let rejection = RejectionSpec::constant(0.2, 2)?;

    for kind in [ClassificationReward::CrossEntropy, ClassificationReward::Misclassification] {
        let rewards = build_classification_rewards(&bundle, &actions, kind, Some(&rejection))?;
        let tree = fit(&rewards, &x, &FitConfig::default().depth(2).seed(1))?.with_feature_names(vec!["u".into()])?;
        let s = evaluate(&tree, &rewards, &x)?;
        println!("{kind:?}: counts {:?} over {:?}", s.per_action_counts, actions.names());
        println!("{}", tree.to_dot());
    }
    Ok(())
}
