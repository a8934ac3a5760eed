//! Line-oriented text formats for histograms and distributions.
//!
//! One entry per line, `<point> <value>`, where a point is a comma-separated
//! list of coordinates. Blank lines and text after `#` are ignored.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hist::{Histogram, MetricSpace, Point};
use crate::transport::DiscreteDistribution;

fn entries(text: &str) -> Result<Vec<(usize, Point, &str)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
        let mut parts = line.split_whitespace();
        let (Some(point), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(format!("expected `<point> <value>`, got `{line}`")));
        };
        let coords = point
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| parse_err(format!("bad coordinate `{c}`"))))
            .collect::<Result<Vec<f64>>>()?;
        let p = Point::new(coords).map_err(|e| parse_err(e.to_string()))?;
        out.push((i + 1, p, value));
    }
    Ok(out)
}

fn infer_space(points: &[&Point]) -> Result<MetricSpace> {
    let Some(first) = points.first() else { return MetricSpace::new(1, 1.0) };
    let dim = first.dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::Parse { line: 0, msg: "points of different dimensions".into() });
    }
    let top = points.iter().flat_map(|p| p.coords().iter().copied()).fold(0.0f64, f64::max);
    MetricSpace::new(dim, (top + 1.0).floor())
}

/// Parses a histogram. Without an explicit space, the dimension comes from
/// the points and the bound is `⌊max coordinate⌋ + 1`.
pub fn parse_histogram(text: &str, space: Option<MetricSpace>) -> Result<Histogram> {
    let rows = entries(text)?;
    let mut counts = Vec::with_capacity(rows.len());
    for (line, _, v) in &rows {
        let c: u64 = v.parse().map_err(|_| Error::Parse { line: *line, msg: format!("bad count `{v}`") })?;
        counts.push(c);
    }
    let space = match space {
        Some(s) => s,
        None => infer_space(&rows.iter().map(|r| &r.1).collect::<Vec<_>>())?,
    };
    let mut h = Histogram::empty(space);
    for ((line, p, _), c) in rows.into_iter().zip(counts) {
        h.add(p, c).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    }
    Ok(h)
}

/// Formats a histogram, one bar per line, sorted by point.
pub fn format_histogram(h: &Histogram) -> String {
    let mut s = String::new();
    for (p, c) in h.iter() {
        let _ = writeln!(s, "{} {c}", coords(p));
    }
    s
}

fn coords(p: &Point) -> String {
    p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses a distribution given as `<point> <mass>` lines; masses must sum
/// to one.
pub fn parse_distribution(text: &str, space: Option<MetricSpace>) -> Result<DiscreteDistribution> {
    let rows = entries(text)?;
    let mut atoms = Vec::with_capacity(rows.len());
    for (line, p, v) in &rows {
        let m: f64 = v.parse().map_err(|_| Error::Parse { line: *line, msg: format!("bad mass `{v}`") })?;
        atoms.push((p.clone(), m));
    }
    let space = match space {
        Some(s) => s,
        None => infer_space(&rows.iter().map(|r| &r.1).collect::<Vec<_>>())?,
    };
    DiscreteDistribution::new(space, atoms)
}

/// Parses either a distribution (fractional masses) or a histogram
/// (integer counts, normalized).
pub fn parse_distribution_or_histogram(text: &str, space: Option<MetricSpace>) -> Result<DiscreteDistribution> {
    match parse_histogram(text, space) {
        Ok(h) if !h.is_empty() => h.normalized(),
        _ => parse_distribution(text, space),
    }
}
