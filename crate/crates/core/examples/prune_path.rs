//! Fit a deep tree on training rewards, prune it along the weakest-link
//! path and pick the subtree with the best validation reward.

use op2t::synth::{gaussian_rewards, GaussianRewardSpec};
use op2t::tree::{fit, prune_path, select_by_validation, FitConfig};

fn main() -> op2t::Result<()> {
    let (x_train, train) = gaussian_rewards(&GaussianRewardSpec::standard(1).with_rejection(0.3))?;
    let (x_val, val) = gaussian_rewards(&GaussianRewardSpec::standard(2).with_rejection(0.3))?;

    let deep = fit(&train, &x_train, &FitConfig::default().depth(4).restarts(4))?;
    let path = prune_path(&deep, &train, &x_train, &val, &x_val)?;
    println!("{:>10} {:>7} {:>14}", "lambda", "splits", "val reward");
    for p in &path {
        println!("{:>10.4} {:>7} {:>14.3}", p.lambda, p.n_splits(), p.val_objective);
    }
    let chosen = select_by_validation(&path, &val);
    println!("\nselected {} splits:\n{}", chosen.n_splits(), chosen.tree.to_dot());
    Ok(())
}
