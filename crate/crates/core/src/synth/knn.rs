use rayon::prelude::*;

use crate::error::{Error, Result};

/// Inverse-distance-weighted k-nearest-neighbour regressor on standardized
/// features. A query at zero distance from a training row returns that
/// row's target (the lowest-index one if several coincide).
#[derive(Debug, Clone, PartialEq)]
pub struct KnnRegressor {
    k: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    points: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl KnnRegressor {
    pub const DEFAULT_K: usize = 10;

    pub fn fit(features: &[Vec<f64>], targets: &[f64], k: usize) -> Result<Self> {
        if features.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                what: "targets".into(),
                expected: features.len(),
                found: targets.len(),
            });
        }
        if features.is_empty() || k == 0 {
            return Err(Error::config("k-NN needs at least one training row and k >= 1"));
        }
        let d = features[0].len();
        let n = features.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                let var = features.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut model = KnnRegressor {
            k: k.min(features.len()),
            mean,
            scale,
            points: Vec::new(),
            targets: targets.to_vec(),
        };
        model.points = features.iter().map(|r| model.standardize(r)).collect();
        Ok(model)
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let q = self.standardize(row);
        // (squared distance, index), kept sorted ascending
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, p) in self.points.iter().enumerate() {
            let d2: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == self.k && d2 >= best[self.k - 1].0 {
                continue;
            }
            let at = best.partition_point(|&(d, _)| d <= d2);
            best.insert(at, (d2, i));
            best.truncate(self.k);
        }
        if best[0].0 == 0.0 {
            return self.targets[best[0].1];
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &(d2, i) in &best {
            let w = 1.0 / d2.sqrt();
            num += w * self.targets[i];
            den += w;
        }
        num / den
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.par_iter().map(|r| self.predict(r)).collect()
    }
}
