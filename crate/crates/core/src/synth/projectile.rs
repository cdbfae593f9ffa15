use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::KnnRegressor;
use crate::data::{split, Partition, PredictionTensor, SplitSpec};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Launch speed (m/s), angle (rad), linear drag coefficient, mass (kg) and
/// gravitational acceleration (m/s²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectileParams {
    pub v0: f64,
    pub theta: f64,
    pub c: f64,
    pub mass: f64,
    pub g: f64,
}

impl ProjectileParams {
    /// Unit mass under standard gravity.
    pub fn new(v0: f64, theta: f64, c: f64) -> Self {
        ProjectileParams {
            v0,
            theta,
            c,
            mass: 1.0,
            g: GRAVITY,
        }
    }

    /// Terminal velocity `m g / c`.
    pub fn terminal_velocity(&self) -> Result<f64> {
        if self.c > 0.0 {
            Ok(self.mass * self.g / self.c)
        } else {
            Err(Error::ZeroDrag)
        }
    }

    fn degenerate(&self) -> bool {
        self.v0 <= 0.0 || self.theta <= 0.0 || self.theta >= FRAC_PI_2
    }
}

/// Drag-free range `v0² sin(2θ) / g`.
pub fn physics_no_drag(p: &ProjectileParams) -> f64 {
    p.v0 * p.v0 * (2.0 * p.theta).sin() / p.g
}

/// Horizontal distance approached as `t → ∞` under drag, `v0 v_t cos θ / g`;
/// an upper bound on the true range.
pub fn physics_drag_limit(p: &ProjectileParams) -> Result<f64> {
    let vt = p.terminal_velocity()?;
    Ok(p.v0 * vt * p.theta.cos() / p.g)
}

/// `u - 1 + e^{-u}` without cancellation for small `u`.
fn phi(u: f64) -> f64 {
    if u < 0.1 {
        let mut term = u * u / 2.0;
        let mut sum = 0.0;
        for k in 3..14 {
            sum += term;
            term *= -u / k as f64;
        }
        sum
    } else {
        u + (-u).exp_m1()
    }
}

/// Height at time `t` under linear drag (`c > 0`) or in vacuum (`c = 0`).
pub fn height_at(p: &ProjectileParams, t: f64) -> f64 {
    let vy = p.v0 * p.theta.sin();
    if p.c <= 0.0 {
        return vy * t - 0.5 * p.g * t * t;
    }
    let vt = p.mass * p.g / p.c;
    let u = p.g * t / vt;
    vt * vy / p.g * -(-u).exp_m1() - vt * vt / p.g * phi(u)
}

fn horizontal_at(p: &ProjectileParams, t: f64) -> f64 {
    let vx = p.v0 * p.theta.cos();
    if p.c <= 0.0 {
        return vx * t;
    }
    let vt = p.mass * p.g / p.c;
    vx * vt / p.g * -(-p.g * t / vt).exp_m1()
}

/// Landing distance: the positive root of the height is bracketed by
/// doubling and refined by bisection, then mapped to horizontal position.
/// Degenerate launches (no speed, flat or vertical angle) land at 0.
pub fn ground_truth_range(p: &ProjectileParams) -> f64 {
    if p.degenerate() {
        return 0.0;
    }
    if p.c <= 0.0 {
        return physics_no_drag(p);
    }
    let tol = 1e-10 * p.v0.max(1.0);
    let mut hi = p.v0 * p.theta.sin() / p.g;
    let mut lo = 0.0;
    while height_at(p, hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        t = 0.5 * (lo + hi);
        let y = height_at(p, t);
        if y.abs() <= tol || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if y > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
    }
    horizontal_at(p, t)
}

/// Sampled launches with their true ranges and three constituent range
/// models: drag-free physics, the drag limit, and a k-NN fit on the
/// training split.
#[derive(Debug, Clone)]
pub struct ProjectileData {
    /// Rows `(v0, theta, c)`.
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Columns `no_drag`, `drag_limit`, `knn`.
    pub preds: PredictionTensor,
    /// 50 / 25 / 25 split; the k-NN model sees only `train`.
    pub partition: Partition,
}

impl ProjectileData {
    pub const FEATURE_NAMES: [&'static str; 3] = ["v0", "theta", "c"];
    pub const MODEL_NAMES: [&'static str; 3] = ["no_drag", "drag_limit", "knn"];
}

/// `n` launches uniform over `[0, 100] × [0, π/2] × (0, 1]`.
pub fn gen_projectile_dataset(n: usize, seed: u64) -> Result<ProjectileData> {
    if n < 10 {
        return Err(Error::config("projectile dataset needs n >= 10"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v0 = rng.gen_range(0.0..=100.0);
            let theta = rng.gen_range(0.0..=FRAC_PI_2);
            let mut c = 0.0;
            while c == 0.0 {
                c = rng.gen_range(0.0..=1.0);
            }
            vec![v0, theta, c]
        })
        .collect();
    let params: Vec<ProjectileParams> = features
        .iter()
        .map(|r| ProjectileParams::new(r[0], r[1], r[2]))
        .collect();
    let targets: Vec<f64> = params.par_iter().map(ground_truth_range).collect();
    let partition = split(n, &SplitSpec::new(0.5, 0.25, 0.25, seed)?)?;
    let train_x: Vec<Vec<f64>> = partition.train.iter().map(|&i| features[i].clone()).collect();
    let train_y: Vec<f64> = partition.train.iter().map(|&i| targets[i]).collect();
    let knn = KnnRegressor::fit(&train_x, &train_y, KnnRegressor::DEFAULT_K)?;
    let knn_pred = knn.predict_all(&features);
    let preds = params
        .iter()
        .zip(knn_pred)
        .map(|(p, k)| Ok(vec![physics_no_drag(p), physics_drag_limit(p)?, k]))
        .collect::<Result<Vec<_>>>()?;
    let names = ProjectileData::MODEL_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(ProjectileData {
        features,
        targets,
        preds: PredictionTensor::regression(preds, names)?,
        partition,
    })
}
