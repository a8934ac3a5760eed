//! Local-sensitivity structure of the 1-D histogram statistics.
//!
//! A *flip* is a pair of neighboring histograms on which the statistic is
//! defined and takes different values; both endpoints have local
//! sensitivity at least the flip's span `|f(h) − f(h')|`. For each span we
//! keep the cheapest endpoint, measured as L1 distance from the input. The
//! propose-test-release distance, the ladder `A(k)` and the smooth
//! sensitivity all follow from that table.

use crate::error::{Error, Result};
use crate::hist::Statistic;

/// Cheapest endpoint cost for every span `1..bars`.
#[derive(Clone, Debug, PartialEq)]
pub struct Flips {
    /// `best[s]` is the smallest distance from the input to a histogram
    /// with a flip of span `s`, or `None` when no such histogram exists.
    pub best: Vec<Option<u64>>,
}

impl Flips {
    fn new(bars: usize) -> Self {
        Flips { best: vec![None; bars.max(1)] }
    }

    fn offer(&mut self, span: usize, cost: u64) {
        let slot = &mut self.best[span];
        if slot.is_none_or(|c| cost < c) {
            *slot = Some(cost);
        }
    }

    /// Distance to the nearest histogram with positive local sensitivity.
    pub fn ptr_distance(&self) -> Option<u64> {
        self.best.iter().flatten().copied().min()
    }

    /// `A(k)`: largest local sensitivity within distance `k`.
    pub fn ladder(&self, k: u64) -> u64 {
        self.best
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some_and(|c| c <= k))
            .map(|(s, _)| s as u64)
            .max()
            .unwrap_or(0)
    }

    pub fn local_sensitivity(&self) -> u64 {
        self.ladder(0)
    }

    /// `max_k e^{−βk} A(k)`.
    pub fn smooth_sensitivity(&self, beta: f64) -> f64 {
        self.best
            .iter()
            .enumerate()
            .filter_map(|(s, c)| c.map(|c| s as f64 * (-beta * c as f64).exp()))
            .fold(0.0, f64::max)
    }
}

/// Flip table of a statistic on dense 1-D bars.
pub fn flips(stat: Statistic, bars: &[u64]) -> Result<Flips> {
    stat.validate()?;
    match stat {
        Statistic::Max => Ok(max_k_flips(bars, 1)),
        Statistic::MaxK(k) => Ok(max_k_flips(bars, k)),
        Statistic::Min => {
            let rev: Vec<u64> = bars.iter().rev().copied().collect();
            Ok(max_k_flips(&rev, 1))
        }
        Statistic::Mode => Ok(mode_flips(bars)),
        Statistic::Support => Err(Error::UnsupportedStatistic("support has no scalar local sensitivity".into())),
    }
}

fn max_k_flips(x: &[u64], k: u64) -> Flips {
    let n = x.len();
    let mut out = Flips::new(n);
    // e(w): removals needed to push bar w below k.
    let e: Vec<u64> = x.iter().map(|&c| c.saturating_sub(k - 1)).collect();
    let mut suffix = vec![0u64; n + 1];
    for w in (0..n).rev() {
        suffix[w] = suffix[w + 1] + e[w];
    }
    for p in 0..n {
        let raise_p = k.saturating_sub(x[p]);
        // p is the top qualifying bar and one addition at i > p overtakes it.
        for i in p + 1..n {
            let cost = raise_p + x[i].abs_diff(k - 1) + suffix[p + 1] - e[i];
            out.offer(i - p, cost);
        }
        // p is the top qualifying bar with exactly k, j the next one below;
        // one removal at p drops the statistic to j.
        let exact_p = x[p].abs_diff(k) + suffix[p + 1];
        for j in 0..p {
            let cost = exact_p + k.saturating_sub(x[j]) + suffix[j + 1] - suffix[p];
            out.offer(p - j, cost);
        }
    }
    out
}

/// `Σ max(0, x_w − c)` over index ranges, from a table when it is small.
struct Excess<'a> {
    x: &'a [u64],
    cap_limit: u64,
    /// `table[s][c] = Σ_{w < s} max(0, x_w − c)`.
    table: Option<Vec<Vec<u64>>>,
}

impl<'a> Excess<'a> {
    fn new(x: &'a [u64]) -> Self {
        let m = x.iter().copied().max().unwrap_or(0);
        let cap_limit = m + 3;
        let table = ((x.len() as u64 + 1) * cap_limit <= 4_000_000).then(|| {
            let mut t = vec![vec![0u64; cap_limit as usize]; x.len() + 1];
            for s in 0..x.len() {
                for c in 0..cap_limit as usize {
                    t[s + 1][c] = t[s][c] + x[s].saturating_sub(c as u64);
                }
            }
            t
        });
        Excess { x, cap_limit, table }
    }

    /// Sum over `w` in `lo..hi`.
    fn range(&self, lo: usize, hi: usize, c: u64) -> u64 {
        if lo >= hi {
            return 0;
        }
        match &self.table {
            Some(t) if c < self.cap_limit => t[hi][c as usize] - t[lo][c as usize],
            _ => self.x[lo..hi].iter().map(|&v| v.saturating_sub(c)).sum(),
        }
    }
}

/// A one-parameter family of histograms with a mode flip between `u` and
/// `v`: bar `u` holds `T`, bar `v` holds `T − v_gap`, bars before the split
/// are capped at `T − lo_gap` and bars after it at `T − hi_gap`.
struct ModeFamily {
    u: usize,
    v: usize,
    v_gap: u64,
    split: usize,
    lo_gap: u64,
    hi_gap: u64,
    t_min: u64,
}

impl ModeFamily {
    fn cost(&self, x: &[u64], ex: &Excess, t: u64) -> u64 {
        let (lo_cap, hi_cap) = (t - self.lo_gap, t - self.hi_gap);
        let mut total = x[self.u].abs_diff(t) + x[self.v].abs_diff(t - self.v_gap);
        total += ex.range(0, self.split, lo_cap) + ex.range(self.split + 1, x.len(), hi_cap);
        // The two pinned bars are not capped.
        for w in [self.u, self.v] {
            if w != self.split {
                let cap = if w < self.split { lo_cap } else { hi_cap };
                total -= x[w].saturating_sub(cap);
            }
        }
        total
    }

    /// Minimizes the convex cost over integer `T` by bisecting on the
    /// forward difference.
    fn min_cost(&self, x: &[u64], ex: &Excess, t_max: u64) -> u64 {
        let (mut lo, mut hi) = (self.t_min, t_max.max(self.t_min));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.cost(x, ex, mid + 1) >= self.cost(x, ex, mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        self.cost(x, ex, lo)
    }
}

fn mode_flips(x: &[u64]) -> Flips {
    let n = x.len();
    let mut out = Flips::new(n);
    let ex = Excess::new(x);
    let t_max = x.iter().copied().max().unwrap_or(0) + 2;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let families = if v < u {
                [
                    // u is the mode; adding at v makes v the mode.
                    ModeFamily { u, v, v_gap: 1, split: u, lo_gap: 1, hi_gap: 0, t_min: 1 },
                    // u is the mode; removing at u makes v the mode.
                    ModeFamily { u, v, v_gap: 1, split: v, lo_gap: 2, hi_gap: 1, t_min: 2 },
                ]
            } else {
                [
                    ModeFamily { u, v, v_gap: 0, split: u, lo_gap: 1, hi_gap: 0, t_min: 1 },
                    ModeFamily { u, v, v_gap: 0, split: v, lo_gap: 1, hi_gap: 0, t_min: 1 },
                ]
            };
            for f in families {
                out.offer(u.abs_diff(v), f.min_cost(x, &ex, t_max));
            }
        }
    }
    out
}
