//! Differentially private histogram release with flexible accuracy.
//!
//! The crate covers the histogram data model, lossy optimal transport,
//! distortion measures, the truncated-Laplace histogram mechanism and its
//! bucketed variants, baseline mechanisms, accuracy and privacy
//! certificates, exact audits, and the benchmark harness.

pub mod audit;
pub mod bench;
pub mod baselines;
pub mod certificates;
pub mod distortion;
pub mod error;
mod flow;
pub mod hist;
pub mod mechanisms;
mod lp;
pub mod textfmt;
pub mod transport;

pub use error::{Error, Result};
pub use hist::{dhist, dsupp, eval_statistic, neighbors, Histogram, MetricSpace, Point, Release, StatValue, Statistic};
