//! Route projectile launches between two closed-form physics models and a
//! k-NN regressor, and compare test MSE against each model alone.
//!
//! Usage: `cargo run --release --example projectile_routing -- [n] [seed] [depth]`

use op2t::baseline::metric_mse;
use op2t::data::{validate, Dataset, Targets};
use op2t::rewards::{build_regression_rewards, ActionSet};
use op2t::synth::{gen_projectile_dataset, ProjectileData};
use op2t::tree::{fit, FitConfig};

fn main() -> op2t::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let depth = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);

    let data = gen_projectile_dataset(n, seed)?;
    let names: Vec<String> = ProjectileData::FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let dataset = Dataset::new(data.features.clone(), Targets::Real(data.targets.clone()), names.clone())?;
    let bundle = validate(dataset, data.preds.clone())?;
    let actions = ActionSet::singles(bundle.preds().model_names());

    // The policy is fit on the validation split; the k-NN model never saw it.
    let val = bundle.subset(&data.partition.validation);
    let rewards = build_regression_rewards(&val, &actions, None)?;
    let val_x: Vec<Vec<f64>> = data.partition.validation.iter().map(|&i| data.features[i].clone()).collect();
    let config = FitConfig::default().depth(depth).min_leaf(20).restarts(8).seed(seed);
    let tree = fit(&rewards, &val_x, &config)?.with_feature_names(names)?;

    let test = &data.partition.test;
    let y: Vec<f64> = test.iter().map(|&i| data.targets[i]).collect();
    for (j, name) in ProjectileData::MODEL_NAMES.iter().enumerate() {
        let pred: Vec<f64> = test.iter().map(|&i| data.preds.value(i, j)).collect();
        println!("{name:>12}  test MSE {:>12.2}", metric_mse(&y, &pred)?);
    }
    let routed: Vec<f64> = test
        .iter()
        .map(|&i| tree.prescribe(&data.features[i]).map(|a| data.preds.value(i, a)))
        .collect::<op2t::Result<_>>()?;
    println!("{:>12}  test MSE {:>12.2}", "policy tree", metric_mse(&y, &routed)?);
    println!("\n{}", tree.to_dot());
    Ok(())
}
