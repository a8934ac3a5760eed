//! Lossy optimal transport between finitely supported distributions.
//!
//! `W∞^γ(P, Q) <= β` holds exactly when a flow of mass at least `1 - γ` can
//! be routed from `P` to `Q` along pairs at distance at most `β`; the unrouted
//! mass is parked on the diagonal. All distances are found by binary search
//! over the candidate thresholds with a max-flow feasibility test.

use crate::error::{check_unit, invalid_input, Result};
use crate::flow::{CostFlowNet, FlowNet};
use crate::hist::{Histogram, MetricSpace, Point};

/// Mass sums must equal one within this tolerance.
pub const MASS_TOL: f64 = 1e-12;
/// Feasibility slack for floating-point flow.
pub const FLOW_SLACK: f64 = 1e-12;

/// A finitely supported probability distribution over a ground set.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    space: MetricSpace,
    atoms: Vec<(Point, f64)>,
}

impl DiscreteDistribution {
    /// Atoms must be distinct points with positive masses summing to one.
    pub fn new(space: MetricSpace, mut atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid_input("a distribution needs at least one atom");
        }
        for (p, m) in &atoms {
            if !(m.is_finite() && *m > 0.0) {
                return invalid_input(format!("mass {m} at {p} must be positive"));
            }
            if !space.contains(p) {
                return invalid_input(format!("atom {p} outside the ground set"));
            }
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid_input("atom points must be distinct");
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return invalid_input(format!("masses sum to {total}, not 1"));
        }
        Ok(DiscreteDistribution { space, atoms })
    }

    /// Convenience constructor for 1-D distributions on `[0, bound)`.
    pub fn on_line(bound: f64, atoms: &[(f64, f64)]) -> Result<Self> {
        let space = MetricSpace::new(1, bound)?;
        DiscreteDistribution::new(space, atoms.iter().map(|&(p, m)| (Point::scalar(p), m)).collect())
    }

    pub fn point_mass(space: MetricSpace, p: Point) -> Result<Self> {
        DiscreteDistribution::new(space, vec![(p, 1.0)])
    }

    pub fn space(&self) -> MetricSpace {
        self.space
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }

    pub fn mass_at(&self, p: &Point) -> f64 {
        self.atoms.binary_search_by(|a| a.0.cmp(p)).map(|i| self.atoms[i].1).unwrap_or(0.0)
    }
}

/// A (possibly lossy) coupling, listed as weighted pairs of points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coupling {
    pub cells: Vec<(Point, Point, f64)>,
}

impl Coupling {
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }

    /// `Δ(φ1, P) + Δ(φ2, Q)`.
    pub fn marginal_deviation(&self, p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
        let first = marginal(self.cells.iter().map(|c| (&c.0, c.2)));
        let second = marginal(self.cells.iter().map(|c| (&c.1, c.2)));
        tv_raw(&first, p.atoms()) + tv_raw(&second, q.atoms())
    }

    /// Largest distance carried by a cell of positive mass.
    pub fn max_cell_distance(&self) -> f64 {
        self.cells.iter().filter(|c| c.2 > 0.0).map(|c| c.0.dist(&c.1)).fold(0.0, f64::max)
    }
}

fn marginal<'a>(cells: impl Iterator<Item = (&'a Point, f64)>) -> Vec<(Point, f64)> {
    let mut m: std::collections::BTreeMap<Point, f64> = Default::default();
    for (p, w) in cells {
        *m.entry(p.clone()).or_insert(0.0) += w;
    }
    m.into_iter().collect()
}

/// Half the L1 distance between two sorted atom lists.
fn tv_raw(a: &[(Point, f64)], b: &[(Point, f64)]) -> f64 {
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            total += a[i].1.abs();
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            total += b[j].1.abs();
            j += 1;
        } else {
            total += (a[i].1 - b[j].1).abs();
            i += 1;
            j += 1;
        }
    }
    total / 2.0
}

fn same_space(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.space.dim != q.space.dim {
        return invalid_input("distributions live on different ground sets");
    }
    Ok(())
}

/// Total variation distance.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    same_space(p, q)?;
    Ok(tv_raw(&p.atoms, &q.atoms).min(1.0))
}

/// Sorted distinct pairwise distances between the two supports, plus zero.
fn candidates(a: &[Point], b: &[Point]) -> Vec<f64> {
    let mut ds: Vec<f64> = Vec::with_capacity(a.len() * b.len() + 1);
    ds.push(0.0);
    for p in a {
        for q in b {
            ds.push(p.dist(q));
        }
    }
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    ds
}

/// Finds a common denominator that represents every mass exactly, if the
/// masses are (numerically) small-denominator rationals.
fn rational_scale(masses: &[f64]) -> Option<(i128, Vec<i128>)> {
    let mut denom: i128 = 1;
    for &m in masses {
        let d = (1..=4096i128).find(|&d| {
            let v = m * d as f64;
            (v - v.round()).abs() < 1e-12 * d as f64
        })?;
        denom = lcm(denom, d);
        if denom > 1 << 40 {
            return None;
        }
    }
    let ints: Vec<i128> = masses.iter().map(|&m| (m * denom as f64).round() as i128).collect();
    Some((denom, ints))
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i128, b: i128) -> i128 {
    a / gcd(a, b) * b
}

/// Bipartite transport instance shared by the feasibility tests.
struct Instance<'a> {
    src: Vec<&'a Point>,
    dst: Vec<&'a Point>,
    src_mass: Vec<f64>,
    dst_mass: Vec<f64>,
    exact: Option<(i128, Vec<i128>, Vec<i128>)>,
}

impl<'a> Instance<'a> {
    fn new(p: &'a DiscreteDistribution, q: &'a DiscreteDistribution) -> Self {
        let src_mass: Vec<f64> = p.atoms.iter().map(|a| a.1).collect();
        let dst_mass: Vec<f64> = q.atoms.iter().map(|a| a.1).collect();
        let exact = match (rational_scale(&src_mass), rational_scale(&dst_mass)) {
            (Some((d1, a)), Some((d2, b))) => {
                let d = lcm(d1, d2);
                let a: Vec<i128> = a.into_iter().map(|v| v * (d / d1)).collect();
                let b: Vec<i128> = b.into_iter().map(|v| v * (d / d2)).collect();
                (a.iter().sum::<i128>() == d && b.iter().sum::<i128>() == d).then_some((d, a, b))
            }
            _ => None,
        };
        Instance {
            src: p.atoms.iter().map(|a| &a.0).collect(),
            dst: q.atoms.iter().map(|a| &a.0).collect(),
            src_mass,
            dst_mass,
            exact,
        }
    }

    /// Maximum mass routable along pairs at distance at most `beta`, with
    /// the routed amount on each pair.
    fn routable(&self, beta: f64) -> (f64, Vec<(usize, usize, f64)>) {
        let (n, m) = (self.src.len(), self.dst.len());
        let (s, t) = (n + m, n + m + 1);
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|&(i, j)| self.src[i].dist(self.dst[j]) <= beta)
            .collect();
        match &self.exact {
            Some((d, a, b)) => {
                let mut g = FlowNet::<i128>::new(n + m + 2);
                for (i, &c) in a.iter().enumerate() {
                    g.add_edge(s, i, c);
                }
                for (j, &c) in b.iter().enumerate() {
                    g.add_edge(n + j, t, c);
                }
                let ids: Vec<usize> = pairs.iter().map(|&(i, j)| g.add_edge(i, n + j, *d)).collect();
                let total = g.max_flow(s, t);
                let cells = pairs
                    .iter()
                    .zip(ids)
                    .map(|(&(i, j), e)| (i, j, g.flow(e) as f64 / *d as f64))
                    .filter(|c| c.2 > 0.0)
                    .collect();
                (total as f64 / *d as f64, cells)
            }
            None => {
                let mut g = FlowNet::<f64>::new(n + m + 2);
                for (i, &c) in self.src_mass.iter().enumerate() {
                    g.add_edge(s, i, c);
                }
                for (j, &c) in self.dst_mass.iter().enumerate() {
                    g.add_edge(n + j, t, c);
                }
                let ids: Vec<usize> = pairs.iter().map(|&(i, j)| g.add_edge(i, n + j, 1.0)).collect();
                let total = g.max_flow(s, t);
                let cells = pairs
                    .iter()
                    .zip(ids)
                    .map(|(&(i, j), e)| (i, j, g.flow(e)))
                    .filter(|c| c.2 > 0.0)
                    .collect();
                (total, cells)
            }
        }
    }
}

/// Smallest candidate threshold whose routable mass reaches `need`.
fn search(inst: &Instance<'_>, cands: &[f64], need: f64) -> usize {
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if inst.routable(cands[mid]).0 >= need - FLOW_SLACK {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// `W∞` (no mass loss).
pub fn winf(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    winf_lossy(p, q, 0.0)
}

/// The γ-lossy ∞-Wasserstein distance.
pub fn winf_lossy(p: &DiscreteDistribution, q: &DiscreteDistribution, gamma: f64) -> Result<f64> {
    Ok(winf_lossy_witness(p, q, gamma)?.0)
}

/// `W∞^γ` together with an optimal lossy coupling.
pub fn winf_lossy_witness(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    gamma: f64,
) -> Result<(f64, Coupling)> {
    same_space(p, q)?;
    check_unit("gamma", gamma)?;
    let inst = Instance::new(p, q);
    let (beta, cells) = if gamma >= 1.0 {
        (0.0, Vec::new())
    } else {
        let src: Vec<Point> = p.atoms.iter().map(|a| a.0.clone()).collect();
        let dst: Vec<Point> = q.atoms.iter().map(|a| a.0.clone()).collect();
        let cands = candidates(&src, &dst);
        let idx = if tv_distance(p, q)? <= gamma { 0 } else { search(&inst, &cands, 1.0 - gamma) };
        (cands[idx], inst.routable(cands[idx]).1)
    };
    let mut used = vec![0.0; inst.src.len()];
    let mut coupling = Coupling::default();
    for &(i, j, w) in &cells {
        used[i] += w;
        coupling.cells.push((inst.src[i].clone(), inst.dst[j].clone(), w));
    }
    for (i, u) in used.iter().enumerate() {
        let slack = inst.src_mass[i] - u;
        if slack > 0.0 {
            coupling.cells.push((inst.src[i].clone(), inst.src[i].clone(), slack));
        }
    }
    Ok((beta, coupling))
}

/// The θ-lossy average Wasserstein distance: the cheapest way to transport
/// mass `1 - θ` from `P` to `Q`, the remaining mass travelling for free.
pub fn w_avg_lossy(p: &DiscreteDistribution, q: &DiscreteDistribution, theta: f64) -> Result<f64> {
    same_space(p, q)?;
    check_unit("theta", theta)?;
    let need = 1.0 - theta;
    if need <= 0.0 {
        return Ok(0.0);
    }
    let (n, m) = (p.atoms.len(), q.atoms.len());
    let (s, t) = (n + m, n + m + 1);
    let mut g = CostFlowNet::new(n + m + 2);
    for (i, a) in p.atoms.iter().enumerate() {
        g.add_edge(s, i, a.1, 0.0);
    }
    for (j, b) in q.atoms.iter().enumerate() {
        g.add_edge(n + j, t, b.1, 0.0);
    }
    for (i, a) in p.atoms.iter().enumerate() {
        for (j, b) in q.atoms.iter().enumerate() {
            g.add_edge(i, n + j, f64::INFINITY, a.0.dist(&b.0));
        }
    }
    let (_, cost) = g.min_cost_flow(s, t, need);
    Ok(cost.max(0.0))
}

/// Histogram transport on integer capacities: `x(g)·|y|` on the source side
/// and `y(g)·|x|` on the sink side.
struct HistInstance {
    src: Vec<(Point, u64)>,
    dst: Vec<(Point, u64)>,
    scale_src: i128,
    scale_dst: i128,
}

impl HistInstance {
    fn new(x: &Histogram, y: &Histogram, normalize: bool) -> Self {
        let (nx, ny) = (x.size() as i128, y.size() as i128);
        HistInstance {
            src: x.iter().map(|(p, c)| (p.clone(), c)).collect(),
            dst: y.iter().map(|(p, c)| (p.clone(), c)).collect(),
            scale_src: if normalize { ny } else { 1 },
            scale_dst: if normalize { nx } else { 1 },
        }
    }

    fn target(&self) -> i128 {
        let a: i128 = self.src.iter().map(|s| s.1 as i128).sum();
        a * self.scale_src
    }

    fn flow(&self, beta: f64) -> (i128, Vec<(usize, usize, i128)>) {
        let (n, m) = (self.src.len(), self.dst.len());
        let (s, t) = (n + m, n + m + 1);
        let mut g = FlowNet::<i128>::new(n + m + 2);
        for (i, a) in self.src.iter().enumerate() {
            g.add_edge(s, i, a.1 as i128 * self.scale_src);
        }
        for (j, b) in self.dst.iter().enumerate() {
            g.add_edge(n + j, t, b.1 as i128 * self.scale_dst);
        }
        let mut ids = Vec::new();
        for (i, a) in self.src.iter().enumerate() {
            for (j, b) in self.dst.iter().enumerate() {
                if a.0.dist(&b.0) <= beta {
                    ids.push((i, j, g.add_edge(i, n + j, i128::MAX / 8)));
                }
            }
        }
        let total = g.max_flow(s, t);
        let cells = ids.into_iter().map(|(i, j, e)| (i, j, g.flow(e))).filter(|c| c.2 > 0).collect();
        (total, cells)
    }

    fn solve(&self) -> (f64, Vec<(usize, usize, i128)>) {
        let src: Vec<Point> = self.src.iter().map(|a| a.0.clone()).collect();
        let dst: Vec<Point> = self.dst.iter().map(|a| a.0.clone()).collect();
        let cands = candidates(&src, &dst);
        let target = self.target();
        let (mut lo, mut hi) = (0usize, cands.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.flow(cands[mid]).0 >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        (cands[lo], self.flow(cands[lo]).1)
    }
}

/// Exact `W∞(x/|x|, y/|y|)` for non-empty histograms.
pub(crate) fn winf_hist(x: &Histogram, y: &Histogram) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return invalid_input("transport between empty histograms");
    }
    Ok(HistInstance::new(x, y, true).solve().0)
}

/// `(from, to, count)` cells of an integral coupling.
pub type Cells = Vec<(Point, Point, u64)>;

/// Optimal integral coupling between two histograms of equal size, as
/// `(distance, [(from, to, count)])`.
pub fn hist_coupling(x: &Histogram, z: &Histogram) -> Result<(f64, Cells)> {
    if x.size() != z.size() {
        return invalid_input("integral coupling needs histograms of equal size");
    }
    if x.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let inst = HistInstance::new(x, z, false);
    let (beta, cells) = inst.solve();
    let cells = cells
        .into_iter()
        .map(|(i, j, f)| (inst.src[i].0.clone(), inst.dst[j].0.clone(), f as u64))
        .collect();
    Ok((beta, cells))
}

/// Smallest `β` such that `y` embeds into a sub-multiset of `x` moving every
/// element of `y` by at most `β`, with the embedding as `(x point, y point,
/// count)` cells. Requires `|y| <= |x|`.
pub(crate) fn embed_into(x: &Histogram, y: &Histogram) -> Result<(f64, Cells)> {
    if y.size() > x.size() {
        return invalid_input("cannot embed a larger histogram");
    }
    if y.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    // Route y (source) into x (sink) without normalization.
    let inst = HistInstance::new(y, x, false);
    let (beta, cells) = inst.solve();
    let cells = cells
        .into_iter()
        .map(|(i, j, f)| (inst.dst[j].0.clone(), inst.src[i].0.clone(), f as u64))
        .collect();
    Ok((beta, cells))
}
