//! Distortion measures between histograms: dropping elements, moving
//! elements, and dropping followed by moving.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{check_finite, invalid_input, invalid_param, Error, Result};
use crate::hist::{Histogram, Point};
use crate::transport::{self, hist_coupling, DiscreteDistribution};

/// Which distortion measure to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistortionKind {
    Drop,
    Move,
    /// Drop then move, with trade-off `η >= 0`.
    DropMove(f64),
}

impl std::fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistortionKind::Drop => f.write_str("drop"),
            DistortionKind::Move => f.write_str("move"),
            DistortionKind::DropMove(eta) => write!(f, "drop-move(eta={eta})"),
        }
    }
}

/// Fraction of `x` that must be dropped to reach `y`; infinite when `y` is
/// not a sub-multiset of `x`.
pub fn drop(x: &Histogram, y: &Histogram) -> Result<f64> {
    if x.is_empty() {
        return invalid_input("drop needs a non-empty source histogram");
    }
    if !y.is_sub_of(x) {
        return Ok(f64::INFINITY);
    }
    Ok((x.size() - y.size()) as f64 / x.size() as f64)
}

/// `W∞` between equal-size histograms; infinite when the sizes differ, zero
/// when both are empty.
pub fn move_distance(x: &Histogram, y: &Histogram) -> Result<f64> {
    if x.size() != y.size() {
        return Ok(f64::INFINITY);
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    crate::hist::dhist(x, y)
}

/// Result of the drop-then-move distortion.
#[derive(Clone, Debug, PartialEq)]
pub struct DrmvValue {
    pub value: f64,
    /// False when the value is only an upper bound from a witness.
    pub exact: bool,
    /// The intermediate histogram attaining `value`, when finite.
    pub witness: Option<Histogram>,
}

/// Largest total count handled by exhaustive enumeration.
pub const DRMV_ENUM_BOUND: u64 = 24;
const DRMV_CANDIDATE_GUARD: u64 = 2_000_000;

/// `inf_z drop(x, z) + η·move(z, y)` with the default enumeration bound.
pub fn drmv(x: &Histogram, y: &Histogram, eta: f64) -> Result<DrmvValue> {
    drmv_with(x, y, eta, DRMV_ENUM_BOUND, None)
}

/// As [`drmv`], with an explicit enumeration bound and an optional
/// caller-supplied intermediate histogram used beyond the bound.
pub fn drmv_with(
    x: &Histogram,
    y: &Histogram,
    eta: f64,
    bound: u64,
    witness: Option<&Histogram>,
) -> Result<DrmvValue> {
    check_finite("eta", eta)?;
    if eta < 0.0 {
        return invalid_param("eta must be non-negative");
    }
    if x.is_empty() {
        return invalid_input("drmv needs a non-empty source histogram");
    }
    if y.size() > x.size() {
        return Ok(DrmvValue { value: f64::INFINITY, exact: true, witness: None });
    }
    let drop_part = (x.size() - y.size()) as f64 / x.size() as f64;
    let bars: Vec<(Point, u64)> = x.iter().map(|(p, c)| (p.clone(), c)).collect();
    if x.size() <= bound && count_subsets(&bars, y.size()) <= DRMV_CANDIDATE_GUARD {
        let mut best: Option<(f64, Histogram)> = None;
        let mut current = vec![0u64; bars.len()];
        enumerate(&bars, 0, y.size(), &mut current, &mut |counts| {
            let z = Histogram::from_pairs(x.space(), bars.iter().zip(counts).map(|((p, _), &c)| (p.clone(), c)))?;
            let v = drop_part + eta * move_distance(&z, y)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, z));
            }
            Ok(())
        })?;
        let (value, z) = best.ok_or_else(|| Error::Infeasible("no intermediate histogram".into()))?;
        return Ok(DrmvValue { value, exact: true, witness: Some(z) });
    }
    let z = match witness {
        Some(z) => {
            if !z.is_sub_of(x) || z.size() != y.size() {
                return invalid_input("witness must be a sub-histogram of x with the size of y");
            }
            z.clone()
        }
        None => {
            let (_, cells) = transport::embed_into(x, y)?;
            Histogram::from_pairs(x.space(), cells.into_iter().map(|(gx, _, c)| (gx, c)))?
        }
    };
    let value = drop_part + eta * move_distance(&z, y)?;
    Ok(DrmvValue { value, exact: false, witness: Some(z) })
}

fn count_subsets(bars: &[(Point, u64)], size: u64) -> u64 {
    // Number of vectors 0 <= z_i <= x_i summing to `size`, saturating.
    let mut ways = vec![0u64; size as usize + 1];
    ways[0] = 1;
    for (_, c) in bars {
        let mut next = vec![0u64; size as usize + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for take in 0..=(*c).min(size - s as u64) {
                let t = s + take as usize;
                next[t] = next[t].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[size as usize]
}

fn enumerate(
    bars: &[(Point, u64)],
    i: usize,
    remaining: u64,
    current: &mut Vec<u64>,
    visit: &mut dyn FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if i == bars.len() {
        return if remaining == 0 { visit(current) } else { Ok(()) };
    }
    let rest: u64 = bars[i + 1..].iter().map(|b| b.1).sum();
    let lo = remaining.saturating_sub(rest);
    for take in lo..=bars[i].1.min(remaining) {
        current[i] = take;
        enumerate(bars, i + 1, remaining - take, current, visit)?;
    }
    current[i] = 0;
    Ok(())
}

/// Evaluates a distortion measure; drop-move uses [`drmv`].
pub fn distortion(kind: DistortionKind, x: &Histogram, y: &Histogram) -> Result<f64> {
    match kind {
        DistortionKind::Drop => drop(x, y),
        DistortionKind::Move => move_distance(x, y),
        DistortionKind::DropMove(eta) => Ok(drmv(x, y, eta)?.value),
    }
}

/// Supremum of the distortion from `x` over the support of a finitely
/// supported distribution of histograms, given as `(histogram, probability)`.
pub fn dhat(kind: DistortionKind, x: &Histogram, dist: &[(Histogram, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (y, p) in dist {
        if *p > 0.0 {
            worst = worst.max(distortion(kind, x, y)?);
        }
    }
    Ok(worst)
}

pub type Frac = Ratio<i128>;

/// Output of [`drop_move_switch`].
#[derive(Clone, Debug)]
pub struct SwitchOutput {
    /// `move(x, z)`.
    pub alpha1: f64,
    /// `drop(z, y)`, exact.
    pub alpha2: Frac,
    /// The fractional histogram `s`, as point masses.
    pub fractional: BTreeMap<Point, Frac>,
    /// The coupling of `s` with `y` certifying `move(s, y) <= alpha1`.
    pub coupling: Vec<(Point, Point, Frac)>,
    /// Largest-remainder rounding of `s` to integer counts.
    pub rounded: Histogram,
}

impl SwitchOutput {
    /// `drop(x, s)` for the fractional `s`, exact.
    pub fn fractional_drop(&self, x: &Histogram) -> Option<Frac> {
        let n = x.size() as i128;
        let mut total = Frac::from_integer(0);
        for (p, m) in &self.fractional {
            if *m > Frac::from_integer(x.get(p) as i128) {
                return None;
            }
            total += *m;
        }
        Some((Frac::from_integer(n) - total) / Frac::from_integer(n))
    }

    /// Largest distance carried by the certifying coupling.
    pub fn coupling_distance(&self) -> f64 {
        self.coupling.iter().map(|c| c.0.dist(&c.1)).fold(0.0, f64::max)
    }

    /// `W∞` between the normalized fractional `s` and `y`.
    pub fn fractional_move(&self, y: &Histogram) -> Result<f64> {
        let total: Frac = self.fractional.values().sum();
        if total != Frac::from_integer(y.size() as i128) {
            return Ok(f64::INFINITY);
        }
        if y.is_empty() {
            return Ok(0.0);
        }
        let atoms = self
            .fractional
            .iter()
            .filter(|(_, m)| **m > Frac::from_integer(0))
            .map(|(p, m)| (p.clone(), to_f64(*m / total)))
            .collect();
        let s = DiscreteDistribution::new(y.space(), renormalize(atoms))?;
        transport::winf(&s, &y.normalized()?)
    }
}

fn to_f64(r: Frac) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn renormalize(mut atoms: Vec<(Point, f64)>) -> Vec<(Point, f64)> {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    atoms
}

/// Turns a move followed by a drop into a drop followed by a move.
///
/// Given `move(x, z) = α1` and `drop(z, y) = α2 < 1`, builds `s` with
/// `drop(x, s) = α2` and `move(s, y) <= α1` by thinning an optimal coupling
/// of `x` and `z` according to `y / z`.
pub fn drop_move_switch(x: &Histogram, z: &Histogram, y: &Histogram) -> Result<SwitchOutput> {
    if x.is_empty() {
        return invalid_input("switch needs a non-empty x");
    }
    let alpha1 = move_distance(x, z)?;
    if !alpha1.is_finite() {
        return invalid_input("move(x, z) must be finite");
    }
    if !y.is_sub_of(z) {
        return invalid_input("y must be a sub-histogram of z");
    }
    let alpha2 = Frac::new((z.size() - y.size()) as i128, z.size() as i128);
    if alpha2 >= Frac::from_integer(1) {
        return invalid_param("drop(z, y) must be below 1");
    }
    let (_, cells) = hist_coupling(x, z)?;
    let mut fractional: BTreeMap<Point, Frac> = BTreeMap::new();
    let mut coupling = Vec::new();
    for (gx, gz, f) in cells {
        let m = Frac::new(f as i128 * y.get(&gz) as i128, z.get(&gz) as i128);
        if m > Frac::from_integer(0) {
            *fractional.entry(gx.clone()).or_insert(Frac::from_integer(0)) += m;
            coupling.push((gx, gz, m));
        }
    }
    let rounded = largest_remainder(x, &fractional, y.size())?;
    Ok(SwitchOutput { alpha1, alpha2, fractional, coupling, rounded })
}

/// Rounds fractional masses to integers with the given total, giving the
/// leftover units to the largest fractional parts (ties to smaller points).
pub fn largest_remainder(x: &Histogram, masses: &BTreeMap<Point, Frac>, total: u64) -> Result<Histogram> {
    let mut base: Vec<(Point, u64, Frac)> = masses
        .iter()
        .map(|(p, m)| (p.clone(), m.floor().to_integer() as u64, m.fract()))
        .collect();
    let assigned: u64 = base.iter().map(|b| b.1).sum();
    let mut leftover = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| base[b].2.cmp(&base[a].2).then(a.cmp(&b)));
    for i in order {
        if leftover == 0 {
            break;
        }
        if base[i].2 > Frac::from_integer(0) {
            base[i].1 += 1;
            leftover -= 1;
        }
    }
    Histogram::from_pairs(x.space(), base.into_iter().map(|(p, c, _)| (p, c)))
}
