//! Two Gaussian reward bumps on one feature, with and without a constant
//! rejection action. Prints where the prescribed action changes.
//!
//! Usage: `cargo run --example gaussian_policy -- [seed]`

use op2t::synth::{gaussian_rewards, GaussianRewardSpec};
use op2t::tree::{fit, FitConfig, PolicyTree};

fn changes(tree: &PolicyTree, lo: f64, hi: f64) -> String {
    let mut cuts = tree.thresholds_on(0);
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);
    let mut out = String::new();
    let mut last: Option<&str> = None;
    for w in edges.windows(2) {
        let name = &tree.action_names()[tree.prescribe(&[(w[0] + w[1]) / 2.0]).unwrap()];
        if last != Some(name.as_str()) {
            if last.is_some() {
                out.push_str(&format!(" | {:.3} | ", w[0]));
            }
            out.push_str(name);
            last = Some(name);
        }
    }
    out
}

fn main() -> op2t::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let config = FitConfig::default().depth(3).restarts(10).seed(seed);

    let spec = GaussianRewardSpec::standard(seed);
    let (x, rewards) = gaussian_rewards(&spec)?;
    let tree = fit(&rewards, &x, &config)?;
    println!("no rejection   {}", changes(&tree, spec.lo, spec.hi));

    for alpha in [0.1, 0.3] {
        let spec = GaussianRewardSpec::standard(seed).with_rejection(alpha);
        let (x, rewards) = gaussian_rewards(&spec)?;
        let tree = fit(&rewards, &x, &config)?;
        println!("alpha = {alpha:<5}  {}", changes(&tree, spec.lo, spec.hi));
    }
    Ok(())
}
