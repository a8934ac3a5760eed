//! Experiment harness: dataset generators, a line-oriented config format,
//! a deterministic parallel runner and CSV output.
//!
//! # Seeding
//!
//! Every random draw comes from a ChaCha20 stream seeded by
//! [`split_seed`](crate::mechanisms::split_seed):
//!
//! ```text
//! splitmix64(z):  z += 0x9E3779B97F4A7C15
//!                 z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                 z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                 return z ^ (z >> 31)
//! split_seed(m, [i1, .., ik]) = h_k  where h_0 = splitmix64(m),
//!                                          h_j = splitmix64(h_{j-1} ^ splitmix64(i_j))
//! ```
//!
//! Dataset `d` of an experiment with tag `e` uses `split_seed(m, [e, 2^64-1, d])`;
//! run `r` of mechanism `k` at grid point `j` on that dataset uses
//! `split_seed(m, [e, d, r, k, j])`. The experiment tag hashes the
//! experiment id bytes with the same mixer, and `k` is the mechanism's
//! position in [`MechanismKind::ALL`], so editing the mechanism list of a
//! config never changes the draws of the mechanisms that remain.

mod config;
mod generators;
mod runner;

pub use config::{parse_config, parse_delta, ExperimentConfig, MechanismKind};
pub use generators::GeneratorSpec;
pub use runner::{experiment_tag, run_experiment, run_experiments, write_csv, ResultRow, CSV_COLUMNS};
