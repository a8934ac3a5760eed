//! Ground-truth checks: exact privacy loss on tiny domains, flexible error
//! under a drop budget, drop witnesses, and brute-force oracles for the
//! transport and distortion routines.

use crate::certificates::trlap_delta;
use crate::error::{check_unit, invalid_input, Error, Result};
use crate::hist::{dsupp, eval_statistic, Histogram, Point, Release, StatValue, Statistic};
use crate::lp::{Lp, LpOutcome, Sense};
use crate::mechanisms::{trlap_output_pmf, NoiseSpec};
use crate::transport::DiscreteDistribution;

/// Largest joint output space enumerated by [`dp_delta_exact`].
pub const OUTPUT_SPACE_GUARD: u128 = 1_000_000;

/// Two neighboring inputs of a mechanism whose output bars are independent,
/// described by the per-bar output laws under each input.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditInstance {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub law_x: Vec<Vec<f64>>,
    pub law_y: Vec<Vec<f64>>,
}

impl AuditInstance {
    /// The truncated Laplace mechanism on dense bars, with `q = τ|x|`
    /// computed separately for each input.
    pub fn trlap(x: &[u64], y: &[u64], tau: f64, eps: f64) -> Result<Self> {
        if x.len() != y.len() {
            return invalid_input("neighboring inputs need the same number of bars");
        }
        let l1: u64 = x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).sum();
        if l1 > 1 {
            return invalid_input("inputs are not neighbors");
        }
        let law = |h: &[u64]| -> Result<Vec<Vec<f64>>> {
            let q = tau * h.iter().sum::<u64>() as f64;
            if q == 0.0 {
                return Ok(h.iter().map(|&c| point_law(c)).collect());
            }
            let spec = NoiseSpec::new(q, eps)?;
            Ok(h.iter().map(|&c| trlap_output_pmf(c, spec)).collect())
        };
        Ok(AuditInstance { x: x.to_vec(), y: y.to_vec(), law_x: law(x)?, law_y: law(y)? })
    }

    fn output_space(&self) -> u128 {
        self.law_x.iter().zip(&self.law_y).map(|(a, b)| a.len().max(b.len()) as u128).product()
    }
}

fn point_law(c: u64) -> Vec<f64> {
    let mut v = vec![0.0; c as usize + 1];
    v[c as usize] = 1.0;
    v
}

/// Tight `δ` at `ε`: the larger over both orderings of
/// `Σ_o [P(o) − e^ε Q(o)]_+`, by enumerating the joint output space.
pub fn dp_delta_exact(inst: &AuditInstance, eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter("epsilon must be non-negative and finite".into()));
    }
    let size = inst.output_space();
    if size > OUTPUT_SPACE_GUARD {
        return Err(Error::GuardExceeded(format!("instance too large: {size} joint outputs")));
    }
    let dims: Vec<usize> = inst.law_x.iter().zip(&inst.law_y).map(|(a, b)| a.len().max(b.len())).collect();
    let at = |law: &[f64], j: usize| law.get(j).copied().unwrap_or(0.0);
    let factor = eps.exp();
    let (mut fwd, mut bwd) = (0.0f64, 0.0f64);
    let mut idx = vec![0usize; dims.len()];
    loop {
        let mut p = 1.0;
        let mut q = 1.0;
        for (b, &j) in idx.iter().enumerate() {
            p *= at(&inst.law_x[b], j);
            q *= at(&inst.law_y[b], j);
        }
        fwd += (p - factor * q).max(0.0);
        bwd += (q - factor * p).max(0.0);
        let mut b = 0;
        loop {
            if b == dims.len() {
                return Ok(fwd.max(bwd));
            }
            idx[b] += 1;
            if idx[b] < dims[b] {
                break;
            }
            idx[b] = 0;
            b += 1;
        }
    }
}

/// One line of a privacy audit of the truncated Laplace mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct DpAuditRow {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub eps: f64,
    pub tau: f64,
    pub delta_exact: f64,
    /// Certified `δ` with `q = τ·min(|x|, |y|)`.
    pub delta_cert: f64,
}

impl DpAuditRow {
    pub fn ok(&self, tol: f64) -> bool {
        self.delta_exact <= self.delta_cert + tol
    }
}

/// All ordered neighbor pairs `(x, x − e_i)` on `bars` bars with
/// `|x| <= max_n` and a non-empty smaller side.
pub fn neighbor_pairs(bars: usize, max_n: u64) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut all = vec![vec![]];
    for _ in 0..bars {
        let mut next = Vec::new();
        for h in &all {
            let used: u64 = h.iter().sum();
            for c in 0..=max_n - used {
                let mut g: Vec<u64> = h.clone();
                g.push(c);
                next.push(g);
            }
        }
        all = next;
    }
    let mut out = Vec::new();
    for x in all {
        for i in 0..bars {
            if x[i] > 0 && x.iter().sum::<u64>() >= 2 {
                let mut y = x.clone();
                y[i] -= 1;
                out.push((x.clone(), y));
            }
        }
    }
    out
}

/// Audits every neighbor pair for which the certificate applies
/// (`ετ·min(|x|, |y|) >= 2`).
pub fn audit_trlap(pairs: &[(Vec<u64>, Vec<u64>)], tau: f64, eps_grid: &[f64]) -> Result<Vec<DpAuditRow>> {
    let mut rows = Vec::new();
    for (x, y) in pairs {
        let n = x.iter().sum::<u64>().min(y.iter().sum());
        for &eps in eps_grid {
            let q = tau * n as f64;
            if eps * q < 2.0 - 1e-12 {
                continue;
            }
            let inst = AuditInstance::trlap(x, y, tau, eps)?;
            rows.push(DpAuditRow {
                x: x.clone(),
                y: y.clone(),
                eps,
                tau,
                delta_exact: dp_delta_exact(&inst, eps)?,
                delta_cert: trlap_delta(eps, q),
            });
        }
    }
    Ok(rows)
}

/// Elements that may be dropped: `⌊budget·n⌋` with a small tolerance.
pub fn drop_allowance(n: u64, budget: f64) -> u64 {
    ((budget * n as f64) + 1e-9).floor().max(0.0) as u64
}

/// Largest support enumerated by the brute-force support routine.
pub const SUPPORT_GUARD: usize = 20;

/// Smallest error `|f(x') − released|` over inputs `x'` obtained from `x`
/// by dropping at most a `budget` fraction of its elements. An undefined
/// release scores the diameter of the ground set.
pub fn flexible_error(kind: Statistic, x: &Histogram, released: &Release, budget: f64) -> Result<f64> {
    kind.validate()?;
    check_unit("budget", budget)?;
    if x.is_empty() {
        return invalid_input("flexible error needs a non-empty input");
    }
    let Some(value) = released.value() else { return Ok(x.space().diameter()) };
    let n = x.size();
    let allowance = drop_allowance(n, budget);
    if let Statistic::Support = kind {
        return support_flex(x, value, allowance);
    }
    let r = match value {
        StatValue::Point(p) if p.dim() == 1 => p.value(),
        _ => return invalid_input("released value must be a 1-D point"),
    };
    if x.space().dim != 1 {
        return Err(Error::UnsupportedStatistic(format!("{kind} needs a 1-D histogram")));
    }
    let bars: Vec<(f64, u64)> = x.iter().map(|(p, c)| (p.value(), c)).collect();
    let reachable = reachable_values(kind, &bars, allowance);
    reachable
        .into_iter()
        .map(|v| (v - r).abs())
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
        .ok_or_else(|| Error::UndefinedStatistic(format!("{kind} is undefined on every admissible input")))
}

/// Values of the statistic reachable by dropping at most `allowance`
/// elements (the input itself included when defined).
pub fn reachable_values(kind: Statistic, bars: &[(f64, u64)], allowance: u64) -> Vec<f64> {
    let mut out = Vec::new();
    match kind {
        Statistic::Max | Statistic::Min => {
            let ordered: Vec<&(f64, u64)> =
                if kind == Statistic::Max { bars.iter().rev().collect() } else { bars.iter().collect() };
            let mut beyond = 0u64;
            for &&(v, c) in &ordered {
                if beyond > allowance {
                    break;
                }
                out.push(v);
                beyond += c;
            }
        }
        Statistic::MaxK(k) => {
            let mut spent = 0u64;
            for &(v, c) in bars.iter().rev() {
                if c >= k {
                    if spent > allowance {
                        break;
                    }
                    out.push(v);
                    spent += c - k + 1;
                }
            }
        }
        Statistic::Mode => {
            for (b, &(v, cb)) in bars.iter().enumerate() {
                let cost: u64 = bars
                    .iter()
                    .enumerate()
                    .filter(|(w, _)| *w != b)
                    .map(|(w, &(_, cw))| (cw + u64::from(w < b)).saturating_sub(cb))
                    .sum();
                if cost <= allowance {
                    out.push(v);
                }
            }
        }
        Statistic::Support => {}
    }
    out
}

fn support_flex(x: &Histogram, value: &StatValue, allowance: u64) -> Result<f64> {
    let StatValue::Set(released) = value else { return invalid_input("support release must be a set") };
    if released.is_empty() {
        return Ok(x.space().diameter());
    }
    let bars: Vec<(Point, u64)> = x.iter().map(|(p, c)| (p.clone(), c)).collect();
    if bars.len() > SUPPORT_GUARD {
        return Err(Error::GuardExceeded(format!("support of {} points", bars.len())));
    }
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << bars.len()) {
        let dropped: u64 = bars.iter().enumerate().filter(|(i, _)| mask & (1 << i) == 0).map(|(_, b)| b.1).sum();
        if dropped > allowance {
            continue;
        }
        let kept: Vec<Point> =
            bars.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, b)| b.0.clone()).collect();
        best = best.min(dsupp(&kept, released)?);
    }
    Ok(best)
}

/// True iff `y <= x` pointwise and `drop(x, y) <= budget`.
pub fn check_drop_witness(x: &Histogram, y: &Histogram, budget: f64) -> bool {
    if !y.is_sub_of(x) {
        return false;
    }
    if x.is_empty() {
        return true;
    }
    (x.size() - y.size()) as f64 <= budget * x.size() as f64 + 1e-9
}

/// Largest number of atoms per side accepted by [`brute_winf_lossy`].
pub const LP_ATOM_GUARD: usize = 4;

/// `W∞^γ` by linear programming: for each candidate threshold, the least
/// marginal deviation of a coupling supported on pairs within it.
pub fn brute_winf_lossy(p: &DiscreteDistribution, q: &DiscreteDistribution, gamma: f64) -> Result<f64> {
    check_unit("gamma", gamma)?;
    if p.atoms().len() > LP_ATOM_GUARD || q.atoms().len() > LP_ATOM_GUARD {
        return Err(Error::GuardExceeded("at most 4 atoms per side".into()));
    }
    let mut omega: Vec<Point> = p.atoms().iter().chain(q.atoms()).map(|a| a.0.clone()).collect();
    omega.sort();
    omega.dedup();
    let mut cands = vec![0.0];
    for a in &omega {
        for b in &omega {
            cands.push(a.dist(b));
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    for beta in cands {
        if min_deviation(p, q, &omega, beta) <= gamma + 1e-9 {
            return Ok(beta);
        }
    }
    Err(Error::Infeasible("no threshold admits a coupling".into()))
}

fn min_deviation(p: &DiscreteDistribution, q: &DiscreteDistribution, omega: &[Point], beta: f64) -> f64 {
    let m = omega.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| omega[i].dist(&omega[j]) <= beta + 1e-12)
        .collect();
    let k = pairs.len();
    // Variables: coupling cells, then s_u, then t_u.
    let mut lp = Lp::new(k + 2 * m);
    for u in 0..m {
        lp.cost[k + u] = 0.5;
        lp.cost[k + m + u] = 0.5;
    }
    lp.row((0..k).map(|c| (c, 1.0)).collect(), Sense::Eq, 1.0);
    for u in 0..m {
        let first: Vec<(usize, f64)> = pairs.iter().enumerate().filter(|(_, pr)| pr.0 == u).map(|(c, _)| (c, 1.0)).collect();
        let second: Vec<(usize, f64)> = pairs.iter().enumerate().filter(|(_, pr)| pr.1 == u).map(|(c, _)| (c, 1.0)).collect();
        let (pu, qu) = (p.mass_at(&omega[u]), q.mass_at(&omega[u]));
        for (marg, target, slack) in [(&first, pu, k + u), (&second, qu, k + m + u)] {
            let mut up = marg.clone();
            up.push((slack, -1.0));
            lp.row(up, Sense::Le, target);
            let mut down = marg.clone();
            down.push((slack, 1.0));
            lp.row(down, Sense::Ge, target);
        }
    }
    match lp.solve() {
        LpOutcome::Optimal(v) => v,
        _ => f64::INFINITY,
    }
}

/// `W∞` between equal-size histograms via Hall's condition: the least
/// threshold at which every set of source points has enough target mass
/// within reach. Exponential in the support size.
pub fn hall_move(x: &Histogram, y: &Histogram) -> Result<f64> {
    if x.size() != y.size() {
        return Ok(f64::INFINITY);
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let xs: Vec<(&Point, u64)> = x.iter().collect();
    let ys: Vec<(&Point, u64)> = y.iter().collect();
    if xs.len() > SUPPORT_GUARD {
        return Err(Error::GuardExceeded("support too large for Hall's condition".into()));
    }
    let mut cands: Vec<f64> = xs.iter().flat_map(|a| ys.iter().map(move |b| a.0.dist(b.0))).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    for beta in cands {
        let ok = (1u32..(1u32 << xs.len())).all(|mask| {
            let chosen = || xs.iter().enumerate().filter(move |(i, _)| mask & (1 << i) != 0);
            let need: u64 = chosen().map(|(_, a)| a.1).sum();
            let have: u64 = ys.iter().filter(|b| chosen().any(|(_, a)| a.0.dist(b.0) <= beta)).map(|b| b.1).sum();
            need <= have
        });
        if ok {
            return Ok(beta);
        }
    }
    Err(Error::Infeasible("Hall's condition never holds".into()))
}

/// Drop-then-move distortion by full enumeration of intermediate
/// histograms, with moves measured by [`hall_move`].
pub fn brute_drmv(x: &Histogram, y: &Histogram, eta: f64) -> Result<f64> {
    if x.is_empty() {
        return invalid_input("drmv needs a non-empty source histogram");
    }
    if y.size() > x.size() {
        return Ok(f64::INFINITY);
    }
    let bars: Vec<(Point, u64)> = x.iter().map(|(p, c)| (p.clone(), c)).collect();
    let mut best = f64::INFINITY;
    let mut counts = vec![0u64; bars.len()];
    loop {
        if counts.iter().sum::<u64>() == y.size() {
            let z = Histogram::from_pairs(x.space(), bars.iter().zip(&counts).map(|(b, &c)| (b.0.clone(), c)))?;
            let drop = (x.size() - y.size()) as f64 / x.size() as f64;
            best = best.min(drop + eta * hall_move(&z, y)?);
        }
        let mut i = 0;
        loop {
            if i == bars.len() {
                return Ok(best);
            }
            counts[i] += 1;
            if counts[i] <= bars[i].1 {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Flexible error of a statistic evaluated by brute force over every drop
/// pattern, for small inputs.
pub fn brute_flexible_error(kind: Statistic, x: &Histogram, released: &Release, budget: f64) -> Result<f64> {
    let Some(value) = released.value() else { return Ok(x.space().diameter()) };
    let allowance = drop_allowance(x.size(), budget);
    let bars: Vec<(Point, u64)> = x.iter().map(|(p, c)| (p.clone(), c)).collect();
    let mut counts: Vec<u64> = bars.iter().map(|b| b.1).collect();
    let mut best = f64::INFINITY;
    loop {
        let dropped = x.size() - counts.iter().sum::<u64>();
        if dropped <= allowance {
            let z = Histogram::from_pairs(x.space(), bars.iter().zip(&counts).map(|(b, &c)| (b.0.clone(), c)))?;
            if let Ok(v) = eval_statistic(kind, &z) {
                best = best.min(v.dist(value)?);
            }
        }
        let mut i = 0;
        loop {
            if i == bars.len() {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(Error::UndefinedStatistic("no admissible input".into()))
                };
            }
            if counts[i] > 0 {
                counts[i] -= 1;
                break;
            }
            counts[i] = bars[i].1;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hist::MetricSpace;

    fn h(pairs: &[(i64, u64)]) -> Histogram {
        Histogram::from_pairs(MetricSpace::line(128), pairs.iter().map(|&(p, c)| (Point::int(p), c))).unwrap()
    }

    #[test]
    fn exact_delta_examples() {
        let same = AuditInstance::trlap(&[5, 3], &[5, 3], 0.3, 1.0).unwrap();
        assert_eq!(dp_delta_exact(&same, 0.0).unwrap(), 0.0);
        assert_eq!(dp_delta_exact(&same, 1.0).unwrap(), 0.0);

        let inst = AuditInstance::trlap(&[12], &[11], 0.5, 1.0).unwrap();
        let d0 = dp_delta_exact(&inst, 0.0).unwrap();
        let tv: f64 = (0..13)
            .map(|j| (inst.law_x[0].get(j).unwrap_or(&0.0) - inst.law_y[0].get(j).unwrap_or(&0.0)).abs())
            .sum::<f64>()
            / 2.0;
        assert!((d0 - tv).abs() < 1e-12);
        let d1 = dp_delta_exact(&inst, 1.0).unwrap();
        assert!(d1 <= trlap_delta(1.0, 6.0) + 1e-9);
        assert!(d1 <= d0);
    }

    #[test]
    fn guard_is_enforced() {
        let inst = AuditInstance::trlap(&[200; 3], &[200, 200, 199], 0.1, 1.0).unwrap();
        assert!(matches!(dp_delta_exact(&inst, 1.0), Err(Error::GuardExceeded(_))));
    }

    #[test]
    fn flexible_error_examples() {
        let x = h(&[(1, 1), (2, 1), (3, 1), (100, 1)]);
        let r = Release::scalar(5.0);
        assert_eq!(flexible_error(Statistic::Max, &x, &r, 0.0).unwrap(), 95.0);
        assert_eq!(flexible_error(Statistic::Max, &x, &r, 0.25).unwrap(), 2.0);

        let x = h(&[(1, 3), (4, 3)]);
        let at_b = Release::scalar(4.0);
        assert_eq!(flexible_error(Statistic::Mode, &x, &at_b, 0.0).unwrap(), 3.0);
        assert_eq!(flexible_error(Statistic::Mode, &x, &at_b, 1.0 / 6.0).unwrap(), 0.0);

        assert_eq!(flexible_error(Statistic::Max, &x, &Release::Undefined, 0.1).unwrap(), 128.0);
    }

    #[test]
    fn flexible_error_matches_enumeration() {
        let stats = [Statistic::Max, Statistic::Min, Statistic::MaxK(2), Statistic::Mode, Statistic::Support];
        let inputs = [
            h(&[(0, 2), (3, 1), (5, 2), (6, 3)]),
            h(&[(1, 4), (2, 4)]),
            h(&[(0, 1), (7, 1), (9, 2), (10, 1), (12, 1)]),
        ];
        for x in &inputs {
            for stat in stats {
                let releases: Vec<Release> = if stat == Statistic::Support {
                    vec![Release::Value(StatValue::Set(vec![Point::int(0), Point::int(6)]))]
                } else {
                    (0..14).map(|r| Release::scalar(r as f64)).collect()
                };
                for r in &releases {
                    for b in 0..=8 {
                        let budget = b as f64 / 8.0;
                        let fast = flexible_error(stat, x, r, budget);
                        let slow = brute_flexible_error(stat, x, r, budget);
                        match (fast, slow) {
                            (Ok(a), Ok(b)) => assert_eq!(a, b, "{stat} {x:?} {r} {budget}"),
                            (Err(_), Err(_)) => {}
                            (a, b) => panic!("{stat} {x:?} {r} {budget}: {a:?} vs {b:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn drop_witness_examples() {
        let x = h(&[(0, 5), (2, 5)]);
        assert!(check_drop_witness(&x, &x, 0.0));
        assert!(!check_drop_witness(&x, &h(&[(0, 5), (2, 5), (3, 1)]), 1.0));
        let budget = 0.2;
        let k = (budget * 10.0_f64).ceil() as u64 + 1;
        assert!(!check_drop_witness(&x, &h(&[(0, 5 - k), (2, 5)]), budget));
        assert!(check_drop_witness(&x, &h(&[(0, 3), (2, 5)]), budget));
    }

    #[test]
    fn lp_oracle_examples() {
        let d = |a: &[(f64, f64)]| DiscreteDistribution::on_line(16.0, a).unwrap();
        let p = d(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(brute_winf_lossy(&p, &p, 0.0).unwrap(), 0.0);
        assert_eq!(brute_winf_lossy(&p, &d(&[(0.0, 1.0)]), 0.5).unwrap(), 0.0);
        assert_eq!(brute_winf_lossy(&p, &d(&[(0.0, 1.0)]), 0.25).unwrap(), 1.0);
    }

    #[test]
    fn hall_and_enumeration_oracles() {
        assert_eq!(hall_move(&h(&[(0, 1), (1, 1)]), &h(&[(0, 1), (2, 1)])).unwrap(), 1.0);
        assert_eq!(brute_drmv(&h(&[(0, 1), (100, 1)]), &h(&[(1, 1)]), 1.0).unwrap(), 1.5);
    }
}
