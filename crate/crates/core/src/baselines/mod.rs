//! Comparison mechanisms: exponential mechanism, propose-test-release,
//! smooth sensitivity, stability-based histogram thresholding and an
//! iterative tallest-bar selector.
//!
//! All of them work on dense 1-D bars `0..B`.

pub mod stability;

use std::fmt;

use rand::Rng;

use crate::error::{check_positive, invalid_param, Error, Result};
use crate::hist::{eval_bars, Release, Statistic};
use crate::mechanisms::{laplace, RngStream};

pub use stability::{flips, Flips};

/// The comparison mechanisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Exponential,
    Ptr,
    SmoothSensitivity,
    BnsHistogram,
    SanPoints,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Exponential,
        BaselineKind::Ptr,
        BaselineKind::SmoothSensitivity,
        BaselineKind::BnsHistogram,
        BaselineKind::SanPoints,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Exponential => "exponential",
            BaselineKind::Ptr => "ptr",
            BaselineKind::SmoothSensitivity => "smooth",
            BaselineKind::BnsHistogram => "bns",
            BaselineKind::SanPoints => "sanpoints",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(BaselineKind::Exponential),
            "ptr" => Ok(BaselineKind::Ptr),
            "smooth" | "ss" | "smooth_sensitivity" => Ok(BaselineKind::SmoothSensitivity),
            "bns" => Ok(BaselineKind::BnsHistogram),
            "sanpoints" => Ok(BaselineKind::SanPoints),
            other => invalid_param(format!("unknown baseline {other}")),
        }
    }

    /// Whether the reconstruction is only approximate.
    pub fn approximate(&self) -> bool {
        matches!(self, BaselineKind::SanPoints)
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn scalar_stat(stat: Statistic) -> Result<()> {
    stat.validate()?;
    if stat == Statistic::Support {
        return Err(Error::UnsupportedStatistic("baselines release scalar statistics only".into()));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    check_positive("delta", delta)?;
    if delta >= 1.0 {
        return invalid_param("delta must be below 1");
    }
    Ok(())
}

/// Exponential mechanism over the domain `0..B` with utility `−|f(x) − r|`
/// and error sensitivity `B`. `ε = 0` gives the uniform distribution.
pub fn exp_mech(stat: Statistic, bars: &[u64], eps: f64, rng: &mut RngStream) -> Result<Release> {
    scalar_stat(stat)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return invalid_param("epsilon must be non-negative and finite");
    }
    let Some(f) = eval_bars(stat, bars) else { return Ok(Release::Undefined) };
    let weights = exp_weights(bars.len(), f, eps);
    Ok(Release::scalar(sample_weighted(&weights, rng) as f64))
}

/// Unnormalized exponential-mechanism weights `exp(−ε|f − r| / 2B)`.
pub fn exp_weights(domain: usize, f: usize, eps: f64) -> Vec<f64> {
    let b = domain as f64;
    (0..domain).map(|r| (-eps * f.abs_diff(r) as f64 / (2.0 * b)).exp()).collect()
}

fn sample_weighted(weights: &[f64], rng: &mut RngStream) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Propose-test-release with a precomputed flip table: release `f(x)` when
/// the noisy distance to instability exceeds `ln(1/δ)/ε`, otherwise a
/// uniformly random domain value.
pub fn ptr_release(stat: Statistic, bars: &[u64], fl: &Flips, eps: f64, delta: f64, rng: &mut RngStream) -> Result<Release> {
    scalar_stat(stat)?;
    check_positive("epsilon", eps)?;
    check_delta(delta)?;
    let Some(f) = eval_bars(stat, bars) else { return Ok(Release::Undefined) };
    let noisy = match fl.ptr_distance() {
        Some(d) => d as f64 + laplace(rng, 1.0 / eps),
        None => f64::INFINITY,
    };
    if noisy > (1.0 / delta).ln() / eps {
        Ok(Release::scalar(f as f64))
    } else {
        Ok(Release::scalar(rng.random_range(0..bars.len().max(1)) as f64))
    }
}

pub fn ptr_mech(stat: Statistic, bars: &[u64], eps: f64, delta: f64, rng: &mut RngStream) -> Result<Release> {
    ptr_release(stat, bars, &flips(stat, bars)?, eps, delta, rng)
}

/// Smoothing parameter `β = ε / (2 ln(2/δ))`.
pub fn ss_beta(eps: f64, delta: f64) -> f64 {
    eps / (2.0 * (2.0 / delta).ln())
}

/// Smooth-sensitivity release `f(x) + (2·SS/ε)·Lap(1)` with a precomputed
/// flip table. The release is not clamped to the domain.
pub fn ss_release(stat: Statistic, bars: &[u64], fl: &Flips, eps: f64, delta: f64, rng: &mut RngStream) -> Result<Release> {
    scalar_stat(stat)?;
    check_positive("epsilon", eps)?;
    check_delta(delta)?;
    let Some(f) = eval_bars(stat, bars) else { return Ok(Release::Undefined) };
    let ss = fl.smooth_sensitivity(ss_beta(eps, delta));
    Ok(Release::scalar(f as f64 + 2.0 * ss / eps * laplace(rng, 1.0)))
}

pub fn ss_mech(stat: Statistic, bars: &[u64], eps: f64, delta: f64, rng: &mut RngStream) -> Result<Release> {
    ss_release(stat, bars, &flips(stat, bars)?, eps, delta, rng)
}

/// Reporting threshold `1 + 2 ln(2/δ)/ε` of the thresholded histogram.
pub fn bns_threshold(eps: f64, delta: f64) -> f64 {
    1.0 + 2.0 * (2.0 / delta).ln() / eps
}

/// Stability-based histogram: every nonzero bar gets `Lap(2/ε)` noise and
/// is reported (rounded) only above the threshold; empty bars stay empty.
pub fn bns_hist(bars: &[u64], eps: f64, delta: f64, rng: &mut RngStream) -> Result<Vec<u64>> {
    check_positive("epsilon", eps)?;
    check_delta(delta)?;
    let threshold = bns_threshold(eps, delta);
    Ok(bars
        .iter()
        .map(|&c| {
            if c == 0 {
                return 0;
            }
            let noisy = c as f64 + laplace(rng, 2.0 / eps);
            if noisy > threshold {
                noisy.round() as u64
            } else {
                0
            }
        })
        .collect())
}

/// Iterative tallest-bar selection: `k_rounds` exponential-mechanism picks
/// without replacement (utility = height, budget `ε/(2k)` each), each
/// chosen bar reported with `Lap(2k/ε)` noise, clamped at 0 and rounded.
pub fn sanpoints(bars: &[u64], eps: f64, k_rounds: usize, rng: &mut RngStream) -> Result<Vec<u64>> {
    check_positive("epsilon", eps)?;
    if bars.is_empty() {
        return Ok(Vec::new());
    }
    if k_rounds == 0 || k_rounds > bars.len() {
        return invalid_param(format!("rounds must lie in 1..={}, got {k_rounds}", bars.len()));
    }
    let k = k_rounds as f64;
    let per_round = eps / (2.0 * k);
    let mut out = vec![0u64; bars.len()];
    let mut remaining: Vec<usize> = (0..bars.len()).collect();
    for _ in 0..k_rounds {
        let logits: Vec<f64> = remaining.iter().map(|&i| per_round * bars[i] as f64 / 2.0).collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let pick = remaining.remove(sample_weighted(&weights, rng));
        let noisy = bars[pick] as f64 + laplace(rng, 2.0 * k / eps);
        out[pick] = noisy.max(0.0).round() as u64;
    }
    Ok(out)
}

/// Runs a baseline and releases the statistic. Flip tables are only used
/// by PTR and smooth sensitivity; pass one to avoid recomputing it.
#[allow(clippy::too_many_arguments)]
pub fn run_baseline(
    kind: BaselineKind,
    stat: Statistic,
    bars: &[u64],
    eps: f64,
    delta: f64,
    sanpoints_rounds: usize,
    fl: Option<&Flips>,
    rng: &mut RngStream,
) -> Result<Release> {
    match kind {
        BaselineKind::Exponential => exp_mech(stat, bars, eps, rng),
        BaselineKind::Ptr | BaselineKind::SmoothSensitivity => {
            let computed;
            let fl = match fl {
                Some(f) => f,
                None => {
                    computed = flips(stat, bars)?;
                    &computed
                }
            };
            if kind == BaselineKind::Ptr {
                ptr_release(stat, bars, fl, eps, delta, rng)
            } else {
                ss_release(stat, bars, fl, eps, delta, rng)
            }
        }
        BaselineKind::BnsHistogram => {
            scalar_stat(stat)?;
            let y = bns_hist(bars, eps, delta, rng)?;
            Ok(eval_bars(stat, &y).map_or(Release::Undefined, |i| Release::scalar(i as f64)))
        }
        BaselineKind::SanPoints => {
            scalar_stat(stat)?;
            let y = sanpoints(bars, eps, sanpoints_rounds, rng)?;
            Ok(eval_bars(stat, &y).map_or(Release::Undefined, |i| Release::scalar(i as f64)))
        }
    }
}
