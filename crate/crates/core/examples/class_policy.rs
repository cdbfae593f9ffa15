//! A tree over two models' scores that prescribes a class or rejects, and
//! how the rejected share moves with the rejection reward.

use op2t::reject_intervals::{class_policy_rewards, fit_class_policy, ClassPolicyConfig};
use op2t::tree::{evaluate, FitConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> op2t::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..600 {
        let y = usize::from(rng.gen_bool(0.5));
        let c = if y == 1 { 0.62 } else { 0.38 };
        let s1: f64 = c + rng.gen_range(-0.3..0.3);
        let s2: f64 = c + rng.gen_range(-0.35..0.35);
        scores.push(vec![s1.clamp(0.0, 1.0), s2.clamp(0.0, 1.0)]);
        labels.push(y);
    }

    let tree_cfg = FitConfig::default().depth(3).min_leaf(10).restarts(4);
    for alpha in [0.5, 0.7, 0.9] {
        let config = ClassPolicyConfig::new(alpha, 2, tree_cfg.clone());
        let tree = fit_class_policy(&scores, &labels, &config)?;
        let summary = evaluate(&tree, &class_policy_rewards(&labels, &config)?, &scores)?;
        println!(
            "alpha {alpha}: {} splits, reject fraction {:.3}, total reward {:.1}",
            tree.n_splits(),
            summary.reject_fraction,
            summary.total_reward
        );
    }

    let config = ClassPolicyConfig::new(0.7, 2, tree_cfg).with_beta(vec![1.0, 2.0]);
    let tree = fit_class_policy(&scores, &labels, &config)?;
    println!("\nclass 1 weighted twice:\n{}", tree.to_dot());
    Ok(())
}
