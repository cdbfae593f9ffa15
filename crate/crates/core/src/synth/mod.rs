//! Synthetic experiments with analytic answers: two Gaussian reward bumps
//! on a line, and projectile range under linear drag.

mod gaussian;
mod knn;
mod projectile;

pub use gaussian::{gaussian_rewards, GaussianRewardSpec};
pub use knn::KnnRegressor;
pub use projectile::{
    gen_projectile_dataset, ground_truth_range, height_at, physics_drag_limit, physics_no_drag, ProjectileData,
    ProjectileParams, GRAVITY,
};
