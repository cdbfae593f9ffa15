use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rewards::{ActionSet, RewardMatrix, Sense};

/// Two models whose rewards are unit Gaussian bumps centred at `means`,
/// shifted by `offsets`, on `n` points drawn uniformly from `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRewardSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub seed: u64,
    pub means: (f64, f64),
    pub offsets: (f64, f64),
    /// One constant rejection column per entry.
    pub rejection_alphas: Vec<f64>,
}

impl GaussianRewardSpec {
    /// Bumps at 4 and 8 on `[0, 12]`, 500 points.
    pub fn standard(seed: u64) -> Self {
        GaussianRewardSpec {
            lo: 0.0,
            hi: 12.0,
            n: 500,
            seed,
            means: (4.0, 8.0),
            offsets: (0.0, 0.0),
            rejection_alphas: Vec::new(),
        }
    }

    /// The first model gains a constant 0.01 everywhere on `[0, 18]`, so it
    /// wins again far in the right tail.
    pub fn tail(seed: u64) -> Self {
        GaussianRewardSpec {
            hi: 18.0,
            offsets: (0.01, 0.0),
            ..Self::standard(seed)
        }
    }

    pub fn with_rejection(mut self, alpha: f64) -> Self {
        self.rejection_alphas.push(alpha);
        self
    }

    /// Reward of model `j` (0 or 1) at `x`.
    pub fn reward(&self, j: usize, x: f64) -> f64 {
        let (mu, delta) = if j == 0 {
            (self.means.0, self.offsets.0)
        } else {
            (self.means.1, self.offsets.1)
        };
        (-0.5 * (x - mu).powi(2)).exp() + delta
    }
}

/// Sampled points (one feature column) and their rewards, sense maximize.
/// Actions are `M1`, `M2`, then `reject` (or `reject@alpha` when several
/// rejection levels are requested).
pub fn gaussian_rewards(spec: &GaussianRewardSpec) -> Result<(Vec<Vec<f64>>, RewardMatrix)> {
    if !(spec.lo < spec.hi) || !spec.lo.is_finite() || !spec.hi.is_finite() {
        return Err(Error::config(format!("interval [{}, {}] is empty", spec.lo, spec.hi)));
    }
    if spec.n == 0 {
        return Err(Error::config("n must be positive"));
    }
    let mut actions = ActionSet::singles(&["M1".to_string(), "M2".to_string()]);
    match spec.rejection_alphas.as_slice() {
        [] => {}
        [_] => actions = actions.with_rejection(),
        many => {
            for a in many {
                actions = actions.with_named_rejection(format!("reject@{a}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let xs: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(spec.lo..spec.hi)).collect();
    let rows = xs
        .iter()
        .map(|&x| {
            let mut r = vec![spec.reward(0, x), spec.reward(1, x)];
            r.extend(&spec.rejection_alphas);
            r
        })
        .collect();
    let rewards = RewardMatrix::new(rows, Sense::Maximize, actions)?;
    Ok((xs.into_iter().map(|x| vec![x]).collect(), rewards))
}
