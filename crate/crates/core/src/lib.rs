//! Optimal predictive-policy trees.
//!
//! Given only the outputs of a collection of pre-trained models, this crate
//! learns a shallow axis-aligned decision tree that routes every input to the
//! constituent model, fixed ensemble, or rejection action with the best total
//! reward. The tree is optimized globally by coordinate descent over its
//! nodes rather than grown greedily.
//!
//! The pipeline is:
//!
//! 1. [`data`]: datasets, prediction tensors, validation and splitting.
//! 2. [`rewards`]: per-sample, per-action reward matrices (cross-entropy,
//!    0/1 correctness, squared error, parameterized rejection).
//! 3. [`tree`]: fitting, pruning, inference and serialization of policy trees.
//! 4. [`baseline`]: the meta-labeling classification tree and metrics.
//! 5. [`reject_intervals`]: rejection intervals over one model's score and
//!    class-prescribing rejection policies over many models' scores.
//! 6. [`synth`]: synthetic worlds with analytic answers.
//!
//! The `op2t` binary exposes each step as a subcommand; see [`cli`].

pub mod baseline;
pub mod cli;
pub mod data;
pub mod error;
pub mod reject_intervals;
pub mod rewards;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
