//! Depth-1 policy tree against a depth-1 Meta-Tree on rewards where the
//! first model wins again in the far tail. The meta-labels only see who
//! wins each point, not by how much, so the Meta-Tree routes poorly.
//!
//! Usage: `cargo run --example tail_vs_meta_tree -- [seed]`

use op2t::baseline::{fit_meta_tree, meta_labels_from_rewards};
use op2t::synth::{gaussian_rewards, GaussianRewardSpec};
use op2t::tree::{evaluate, fit, FitConfig};

fn main() -> op2t::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = GaussianRewardSpec::tail(seed);
    let (x, rewards) = gaussian_rewards(&spec)?;
    // Per-point totals times the point spacing approximate integrals over x.
    let scale = (spec.hi - spec.lo) / spec.n as f64;
    let config = FitConfig::default().depth(1).restarts(10).seed(seed);

    let policy = fit(&rewards, &x, &config)?;
    let meta = fit_meta_tree(&x, &meta_labels_from_rewards(&rewards), &FitConfig::default().depth(1))?;

    let p = evaluate(&policy, &rewards, &x)?;
    let m = evaluate(meta.as_policy(), &rewards, &x)?;
    println!("policy tree  total {:.3}  split at {:?}", p.total_reward * scale, policy.thresholds_on(0));
    println!("meta-tree    total {:.3}  split at {:?}", m.total_reward * scale, meta.as_policy().thresholds_on(0));
    Ok(())
}
