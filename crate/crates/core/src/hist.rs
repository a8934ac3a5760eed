//! Ground points, histograms, histogram metrics and the histogram statistics.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid_input, Error, Result};
use crate::transport::{self, DiscreteDistribution};

/// A point of the ground set `[0, B)^d`.
///
/// Coordinates are finite reals. Integer-valued coordinates (the 1-D bar
/// indices used by the benchmarks) are represented exactly.
#[derive(Clone, Debug)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return invalid_input("a point needs at least one coordinate");
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return invalid_input(format!("non-finite coordinate {c}"));
        }
        Ok(Point(coords.into_iter().map(|c| if c == 0.0 { 0.0 } else { c }).collect()))
    }

    /// A 1-D point. Panics on a non-finite value.
    pub fn scalar(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite coordinate {v}");
        Point(vec![if v == 0.0 { 0.0 } else { v }])
    }

    pub fn int(i: i64) -> Self {
        Point(vec![i as f64])
    }

    /// Rounds every coordinate to 12 decimal digits so that bucket centers
    /// computed along different arithmetic paths compare equal.
    pub fn canonical(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords.into_iter().map(round12).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The single coordinate of a 1-D point.
    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        if self.0.len() == 1 && other.0.len() == 1 {
            return (self.0[0] - other.0[0]).abs();
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn round12(v: f64) -> f64 {
    if v.abs() >= 1e6 {
        return v;
    }
    let r = (v * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| format!("{c}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The ground set `[0, bound)^dim` with the Euclidean metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSpace {
    pub dim: usize,
    pub bound: f64,
}

impl MetricSpace {
    pub fn new(dim: usize, bound: f64) -> Result<Self> {
        if dim == 0 {
            return invalid_input("dimension must be positive");
        }
        if !(bound.is_finite() && bound > 0.0) {
            return invalid_input(format!("bound must be positive and finite, got {bound}"));
        }
        Ok(MetricSpace { dim, bound })
    }

    /// The 1-D domain of `bars` integer points `0..bars`.
    pub fn line(bars: usize) -> Self {
        MetricSpace { dim: 1, bound: bars as f64 }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim && p.coords().iter().all(|&c| c >= 0.0 && c < self.bound)
    }

    /// Largest distance between two points of the ground set.
    pub fn diameter(&self) -> f64 {
        self.bound * (self.dim as f64).sqrt()
    }
}

/// A multiset over the ground set: a map from point to positive count.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    space: MetricSpace,
    bars: BTreeMap<Point, u64>,
}

impl Histogram {
    pub fn empty(space: MetricSpace) -> Self {
        Histogram { space, bars: BTreeMap::new() }
    }

    /// Builds a histogram, summing repeated points and dropping zero counts.
    pub fn from_pairs<I: IntoIterator<Item = (Point, u64)>>(space: MetricSpace, pairs: I) -> Result<Self> {
        let mut h = Histogram::empty(space);
        for (p, c) in pairs {
            h.add(p, c)?;
        }
        Ok(h)
    }

    /// A 1-D histogram whose bar `i` has count `counts[i]`.
    pub fn from_bars(counts: &[u64]) -> Self {
        let mut bars = BTreeMap::new();
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                bars.insert(Point::int(i as i64), c);
            }
        }
        Histogram { space: MetricSpace::line(counts.len().max(1)), bars }
    }

    /// Dense counts over the bars `0..space.bound` of a 1-D integer domain.
    pub fn to_bars(&self) -> Result<Vec<u64>> {
        if self.space.dim != 1 {
            return invalid_input("dense bars need a 1-D histogram");
        }
        let n = self.space.bound.ceil() as usize;
        let mut out = vec![0u64; n];
        for (p, &c) in &self.bars {
            let v = p.value();
            if v.fract() != 0.0 {
                return invalid_input(format!("point {v} is not an integer bar"));
            }
            out[v as usize] += c;
        }
        Ok(out)
    }

    pub fn add(&mut self, p: Point, count: u64) -> Result<()> {
        if !self.space.contains(&p) {
            return invalid_input(format!("point {p} outside the ground set"));
        }
        if count > 0 {
            *self.bars.entry(p).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn space(&self) -> MetricSpace {
        self.space
    }

    pub fn size(&self) -> u64 {
        self.bars.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn get(&self, p: &Point) -> u64 {
        self.bars.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, u64)> + '_ {
        self.bars.iter().map(|(p, &c)| (p, c))
    }

    pub fn support(&self) -> Vec<Point> {
        self.bars.keys().cloned().collect()
    }

    pub fn support_len(&self) -> usize {
        self.bars.len()
    }

    /// True when `self(g) <= other(g)` for every point.
    pub fn is_sub_of(&self, other: &Histogram) -> bool {
        self.bars.iter().all(|(p, &c)| c <= other.get(p))
    }

    pub fn l1_diff(&self, other: &Histogram) -> u64 {
        let mut total = 0u64;
        for (p, &c) in &self.bars {
            total += c.abs_diff(other.get(p));
        }
        for (p, &c) in &other.bars {
            if !self.bars.contains_key(p) {
                total += c;
            }
        }
        total
    }

    /// The normalized histogram `x / |x|`.
    pub fn normalized(&self) -> Result<DiscreteDistribution> {
        let n = self.size();
        if n == 0 {
            return invalid_input("cannot normalize an empty histogram");
        }
        DiscreteDistribution::new(
            self.space,
            self.bars.iter().map(|(p, &c)| (p.clone(), c as f64 / n as f64)).collect(),
        )
    }
}

fn same_space(x: &Histogram, y: &Histogram) -> Result<()> {
    if x.space.dim != y.space.dim {
        return invalid_input("histograms live on different ground sets");
    }
    Ok(())
}

/// `x ~ y` iff the two histograms differ by at most one element.
pub fn neighbors(x: &Histogram, y: &Histogram) -> Result<bool> {
    same_space(x, y)?;
    Ok(x.l1_diff(y) <= 1)
}

/// The histogram distance: W∞ between the normalized histograms.
pub fn dhist(x: &Histogram, y: &Histogram) -> Result<f64> {
    same_space(x, y)?;
    if x.is_empty() || y.is_empty() {
        return invalid_input("dhist needs non-empty histograms");
    }
    transport::winf_hist(x, y)
}

/// Hausdorff distance between two finite point sets.
pub fn dsupp(s1: &[Point], s2: &[Point]) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return invalid_input("dsupp needs non-empty sets");
    }
    let directed = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|p| b.iter().map(|q| p.dist(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(s1, s2).max(directed(s2, s1)))
}

/// The 1-D extreme-point shortcut `max(|min1 - min2|, |max1 - max2|)`.
///
/// It never exceeds [`dsupp`] and agrees with it whenever no interior point
/// of one set is far from the other set.
pub fn dsupp_extremes(s1: &[Point], s2: &[Point]) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return invalid_input("dsupp needs non-empty sets");
    }
    let lo = |s: &[Point]| s.iter().map(Point::value).fold(f64::INFINITY, f64::min);
    let hi = |s: &[Point]| s.iter().map(Point::value).fold(f64::NEG_INFINITY, f64::max);
    Ok((lo(s1) - lo(s2)).abs().max((hi(s1) - hi(s2)).abs()))
}

/// The histogram statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistic {
    Max,
    Min,
    /// Largest point whose count is at least `k`.
    MaxK(u64),
    /// Most frequent point, ties going to the smallest point.
    Mode,
    Support,
}

impl Statistic {
    pub fn validate(&self) -> Result<()> {
        if let Statistic::MaxK(0) = self {
            return Err(Error::InvalidParameter("MaxK needs k >= 1".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            Statistic::Max => "max".into(),
            Statistic::Min => "min".into(),
            Statistic::MaxK(k) => format!("max_{k}"),
            Statistic::Mode => "mode".into(),
            Statistic::Support => "support".into(),
        }
    }

    /// Parses `max`, `min`, `mode`, `support` or `max_<k>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let stat = match s.as_str() {
            "max" => Statistic::Max,
            "min" => Statistic::Min,
            "mode" => Statistic::Mode,
            "support" | "supp" => Statistic::Support,
            other => match other.strip_prefix("max_").or_else(|| other.strip_prefix("maxk")) {
                Some(k) => Statistic::MaxK(
                    k.trim_start_matches(['_', '=', ':'])
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad statistic {s}")))?,
                ),
                None => return Err(Error::InvalidParameter(format!("unknown statistic {s}"))),
            },
        };
        stat.validate()?;
        Ok(stat)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Value of a statistic: a single point or a point set.
#[derive(Clone, Debug, PartialEq)]
pub enum StatValue {
    Point(Point),
    Set(Vec<Point>),
}

impl StatValue {
    /// Distance between two values of the same statistic: Euclidean for
    /// points, [`dsupp`] for sets.
    pub fn dist(&self, other: &StatValue) -> Result<f64> {
        match (self, other) {
            (StatValue::Point(a), StatValue::Point(b)) => Ok(a.dist(b)),
            (StatValue::Set(a), StatValue::Set(b)) => dsupp(a, b),
            _ => invalid_input("cannot compare a point with a set"),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            StatValue::Point(p) if p.dim() == 1 => Some(p.value()),
            _ => None,
        }
    }
}

impl fmt::Display for StatValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatValue::Point(p) => write!(f, "{p}"),
            StatValue::Set(s) => {
                let parts: Vec<String> = s.iter().map(|p| p.to_string()).collect();
                write!(f, "{{{}}}", parts.join(" "))
            }
        }
    }
}

/// A mechanism's released value, possibly undefined (for example when every
/// bar was dropped).
#[derive(Clone, Debug, PartialEq)]
pub enum Release {
    Undefined,
    Value(StatValue),
}

impl Release {
    pub fn scalar(v: f64) -> Self {
        Release::Value(StatValue::Point(Point::scalar(v)))
    }

    pub fn from_result(r: Result<StatValue>) -> Self {
        r.map(Release::Value).unwrap_or(Release::Undefined)
    }

    pub fn value(&self) -> Option<&StatValue> {
        match self {
            Release::Undefined => None,
            Release::Value(v) => Some(v),
        }
    }
}

impl fmt::Display for Release {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Release::Undefined => f.write_str("undefined"),
            Release::Value(v) => write!(f, "{v}"),
        }
    }
}

fn require_1d(stat: Statistic, x: &Histogram) -> Result<()> {
    if x.space.dim != 1 {
        return Err(Error::UnsupportedStatistic(format!("{stat} is defined on 1-D histograms only")));
    }
    Ok(())
}

/// Evaluates a statistic on a non-empty histogram.
pub fn eval_statistic(stat: Statistic, x: &Histogram) -> Result<StatValue> {
    stat.validate()?;
    if x.is_empty() {
        return Err(Error::UndefinedStatistic(format!("{stat} of an empty histogram")));
    }
    match stat {
        Statistic::Support => return Ok(StatValue::Set(x.support())),
        _ => require_1d(stat, x)?,
    }
    let point = match stat {
        Statistic::Max => x.bars.keys().next_back().cloned(),
        Statistic::Min => x.bars.keys().next().cloned(),
        Statistic::MaxK(k) => x.bars.iter().rev().find(|(_, &c)| c >= k).map(|(p, _)| p.clone()),
        Statistic::Mode => {
            let mut best: Option<(&Point, u64)> = None;
            for (p, &c) in &x.bars {
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((p, c));
                }
            }
            best.map(|(p, _)| p.clone())
        }
        Statistic::Support => unreachable!(),
    };
    point
        .map(StatValue::Point)
        .ok_or_else(|| Error::UndefinedStatistic(format!("no bar qualifies for {stat}")))
}

/// Statistic evaluation on dense 1-D bars, returning the bar index.
pub fn eval_bars(stat: Statistic, bars: &[u64]) -> Option<usize> {
    match stat {
        Statistic::Max => bars.iter().rposition(|&c| c > 0),
        Statistic::Min => bars.iter().position(|&c| c > 0),
        Statistic::MaxK(k) => bars.iter().rposition(|&c| c >= k.max(1)),
        Statistic::Mode => {
            let mut best: Option<(usize, u64)> = None;
            for (i, &c) in bars.iter().enumerate() {
                if c > 0 && best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((i, c));
                }
            }
            best.map(|(i, _)| i)
        }
        Statistic::Support => None,
    }
}
