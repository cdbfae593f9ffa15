//! Widest-coverage rejection interval for a noisy binary scorer at several
//! accuracy floors, with and without a false-negative cap.

use op2t::reject_intervals::{solve_single_interval, ErrorCaps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> op2t::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..400 {
        let y = usize::from(rng.gen_bool(0.4));
        let centre = if y == 1 { 0.65 } else { 0.35 };
        let s: f64 = centre + rng.gen_range(-0.3..0.3);
        scores.push(s.clamp(0.0, 1.0));
        labels.push(y);
    }

    println!("{:>6} {:>8} {:>8} {:>9} {:>9}", "alpha", "a", "b", "coverage", "accuracy");
    for alpha in [0.7, 0.8, 0.9, 0.95, 1.0] {
        let r = solve_single_interval(&scores, &labels, alpha, ErrorCaps::default())?;
        println!("{alpha:>6} {:>8.4} {:>8.4} {:>9} {:>9.4}", r.a, r.b, r.coverage, r.achieved_accuracy);
    }

    let caps = ErrorCaps {
        fnr_max: Some(0.02),
        fpr_max: None,
    };
    let r = solve_single_interval(&scores, &labels, 0.8, caps)?;
    println!("\nalpha 0.8 with FNR <= 0.02: [{:.4}, {:.4}] covers {} (FNR {:?})", r.a, r.b, r.coverage, r.achieved_fnr);
    Ok(())
}
