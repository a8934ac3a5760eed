//! Dense two-phase simplex with Bland's rule, for the small linear programs
//! used by the brute-force oracles.

const EPS: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Minimize `cost · x` subject to the rows and `x >= 0`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Lp {
    pub vars: usize,
    pub cost: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

impl Lp {
    pub fn new(vars: usize) -> Self {
        Lp { vars, cost: vec![0.0; vars], rows: Vec::new() }
    }

    pub fn row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let mut dense = vec![0.0; self.vars];
        for (j, v) in coeffs {
            dense[j] += v;
        }
        self.rows.push((dense, sense, rhs));
    }

    pub fn solve(&self) -> LpOutcome {
        let m = self.rows.len();
        let n = self.vars;
        let slack_count = self.rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let art_count = self.rows.iter().filter(|r| r.1 != Sense::Le || r.2 < 0.0).count();
        let cols = n + slack_count + art_count;
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0usize; m];
        let mut is_art = vec![false; cols];
        let (mut next_slack, mut next_art) = (n, n + slack_count);
        for (i, (coeffs, sense, rhs)) in self.rows.iter().enumerate() {
            let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = coeffs[j] * flip;
            }
            t[i][cols] = rhs * flip;
            let slack_sign = match sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => 0.0,
            } * flip;
            if *sense != Sense::Eq {
                t[i][next_slack] = slack_sign;
                if slack_sign > 0.0 {
                    basis[i] = next_slack;
                }
                next_slack += 1;
            }
            if *sense == Sense::Eq || slack_sign < 0.0 {
                t[i][next_art] = 1.0;
                is_art[next_art] = true;
                basis[i] = next_art;
                next_art += 1;
            }
        }
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        let all = vec![true; cols];
        if iterate(&mut t, &mut basis, &phase1, &all).is_err() {
            return LpOutcome::Infeasible;
        }
        let infeas: f64 = (0..m).filter(|&i| is_art[basis[i]]).map(|i| t[i][cols]).sum();
        if infeas > 1e-9 {
            return LpOutcome::Infeasible;
        }
        for i in 0..m {
            if is_art[basis[i]] {
                if let Some(j) = (0..cols).find(|&j| !is_art[j] && t[i][j].abs() > 1e-9) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }
        let mut phase2 = self.cost.clone();
        phase2.resize(cols, 0.0);
        let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
        if iterate(&mut t, &mut basis, &phase2, &allowed).is_err() {
            return LpOutcome::Unbounded;
        }
        let value = (0..m).map(|i| phase2[basis[i]] * t[i][cols]).sum();
        LpOutcome::Optimal(value)
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[r] = c;
}

fn iterate(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: &[bool]) -> Result<(), ()> {
    let cols = cost.len();
    loop {
        let entering = (0..cols).find(|&j| {
            allowed[j] && !basis.contains(&j) && {
                let reduced = cost[j] - (0..t.len()).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                reduced < -EPS
            }
        });
        let Some(c) = entering else { return Ok(()) };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][c] > EPS {
                let ratio = t[i][cols] / t[i][c];
                let better = match best {
                    None => true,
                    Some((bi, br)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && basis[i] < basis[bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else { return Err(()) };
        pivot(t, basis, r, c);
    }
}
