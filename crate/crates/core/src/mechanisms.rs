//! The shifted-truncated Laplace histogram mechanism, bucketing, BucketHist
//! and statistics released by post-processing, plus the seeded random
//! streams every randomized routine draws from.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{check_finite, check_positive, invalid_input, invalid_param, Result};
use crate::hist::{eval_statistic, Histogram, MetricSpace, Point, Release, Statistic};

/// Deterministic pseudo-random stream (ChaCha20) seeded by a 64-bit seed.
#[derive(Clone, Debug)]
pub struct RngStream(ChaCha20Rng);

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.0.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a task seed from a master seed and a list of indices:
/// `h0 = splitmix64(master)`, `h(i+1) = splitmix64(h(i) ^ splitmix64(idx(i)))`.
pub fn split_seed(master: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(splitmix64(master), |h, &i| splitmix64(h ^ splitmix64(i)))
}

/// Laplace draw with mean 0 and the given scale.
pub fn laplace(rng: &mut RngStream, scale: f64) -> f64 {
    let u = rng.open01() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// `expm1(x) / expm1(y)` for `0 <= x <= y`, without overflow.
fn expm1_ratio(x: f64, y: f64) -> f64 {
    if y < 700.0 {
        return x.exp_m1() / y.exp_m1();
    }
    ((x - y).exp() - (-y).exp()) / (-(-y).exp_m1())
}

/// `ln(1 + c·expm1(y))` for `c` in `[0, 1]`, without overflow.
fn ln1p_scaled(c: f64, y: f64) -> f64 {
    if y < 700.0 {
        return (c * y.exp_m1()).ln_1p();
    }
    y + (c + (1.0 - c) * (-y).exp()).ln()
}

/// Parameters of the shifted-truncated Laplace noise: Laplace with mean
/// `-q/2` and scale `1/ε`, restricted and renormalized to `[-q, 0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub q: f64,
    pub eps: f64,
}

impl NoiseSpec {
    pub fn new(q: f64, eps: f64) -> Result<Self> {
        check_positive("q", q)?;
        check_positive("epsilon", eps)?;
        Ok(NoiseSpec { q, eps })
    }

    fn half(&self) -> f64 {
        self.eps * self.q / 2.0
    }

    /// `P(z <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= -self.q {
            return 0.0;
        }
        if t >= 0.0 {
            return 1.0;
        }
        if t <= -self.q / 2.0 {
            0.5 * expm1_ratio(self.eps * (t + self.q), self.half())
        } else {
            1.0 - 0.5 * expm1_ratio(-self.eps * t, self.half())
        }
    }

    /// Inverse of [`NoiseSpec::cdf`] on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let t = if u <= 0.5 {
            -self.q + ln1p_scaled(2.0 * u, self.half()) / self.eps
        } else {
            -ln1p_scaled(2.0 * (1.0 - u), self.half()) / self.eps
        };
        t.clamp(-self.q, 0.0)
    }

    pub fn mean(&self) -> f64 {
        -self.q / 2.0
    }

    pub fn variance(&self) -> f64 {
        let (a, e) = (self.q / 2.0, self.eps);
        let tail = (-e * a).exp();
        (2.0 / (e * e) - tail * (a * a + 2.0 * a / e + 2.0 / (e * e))) / (1.0 - tail)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Largest number of elements a single bar can lose:
    /// `round(q)` rounded half away from zero.
    pub fn max_drop(&self) -> u64 {
        (self.q + 0.5).floor() as u64
    }
}

/// Rounds to the nearest integer, halves away from zero, and clamps at 0.
fn release_count(v: f64) -> u64 {
    v.round().max(0.0) as u64
}

/// Exact law of a released bar of true count `k`, as `pmf[j] = P(y = j)`.
pub fn trlap_output_pmf(k: u64, spec: NoiseSpec) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    let kf = k as f64;
    let mut pmf = vec![0.0; k as usize + 1];
    pmf[0] = spec.cdf(0.5 - kf);
    for (j, slot) in pmf.iter_mut().enumerate().take(k as usize).skip(1) {
        let j = j as f64;
        *slot = (spec.cdf(j + 0.5 - kf) - spec.cdf(j - 0.5 - kf)).max(0.0);
    }
    pmf[k as usize] = 1.0 - spec.cdf(-0.5);
    pmf
}

/// Emptiness probabilities `p_k` of the optimal one-bar mechanism:
/// `p_k = δ(e^{kε} − 1)/(e^ε − 1)` up to `q/2`, mirrored by `p_k = 1 − p_{q−k}`.
pub fn emptiness_probs(q: u64, eps: f64, delta: f64, check_pareto: bool) -> Result<Vec<f64>> {
    check_positive("epsilon", eps)?;
    check_positive("delta", delta)?;
    if q == 0 {
        return invalid_param("q must be positive");
    }
    if check_pareto {
        let lhs = delta * expm1_ratio(eps * q as f64 / 2.0, eps);
        if (lhs - 0.5).abs() > 1e-9 {
            return invalid_param(format!("(epsilon, delta, q) not on the pareto curve: {lhs} != 1/2"));
        }
    }
    let low = |k: u64| delta * (k as f64 * eps).exp_m1() / eps.exp_m1();
    Ok((0..=q)
        .map(|k| {
            if 2 * k < q {
                low(k)
            } else if 2 * k == q {
                if check_pareto {
                    0.5
                } else {
                    low(k)
                }
            } else {
                1.0 - low(q - k)
            }
        })
        .collect())
}

fn check_tau(tau: f64) -> Result<()> {
    check_finite("tau", tau)?;
    if !(0.0..1.0).contains(&tau) {
        return invalid_param(format!("tau must lie in [0, 1), got {tau}"));
    }
    Ok(())
}

/// The shifted-truncated Laplace mechanism with `q = τ|x|`. Every nonzero
/// bar receives independent noise and is released as `max(0, round(x + z))`.
pub fn mech_trlap(x: &Histogram, tau: f64, eps: f64, rng: &mut RngStream) -> Result<Histogram> {
    check_tau(tau)?;
    check_positive("epsilon", eps)?;
    if x.is_empty() {
        return invalid_input("mechanism input must be non-empty");
    }
    let q = tau * x.size() as f64;
    if q == 0.0 {
        return Ok(x.clone());
    }
    let spec = NoiseSpec::new(q, eps)?;
    let mut out = Histogram::empty(x.space());
    for (p, c) in x.iter() {
        out.add(p.clone(), release_count(c as f64 + spec.sample(rng)))?;
    }
    Ok(out)
}

/// [`mech_trlap`] on dense 1-D bars, in place, with an explicit `q`.
pub fn trlap_bars(bars: &mut [u64], q: f64, eps: f64, rng: &mut RngStream) -> Result<()> {
    if q == 0.0 {
        return Ok(());
    }
    let spec = NoiseSpec::new(q, eps)?;
    for c in bars.iter_mut().filter(|c| **c > 0) {
        *c = release_count(*c as f64 + spec.sample(rng));
    }
    Ok(())
}

/// Grid of cubes of side `w` covering `[0, B)^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BucketSpec {
    pub w: f64,
    pub bound: f64,
    pub dim: usize,
}

impl BucketSpec {
    pub fn new(w: f64, space: MetricSpace) -> Result<Self> {
        check_positive("bucket width", w)?;
        Ok(BucketSpec { w, bound: space.bound, dim: space.dim })
    }

    /// Buckets per axis, `⌈B/w⌉`.
    pub fn per_axis(&self) -> u64 {
        ((self.bound / self.w) - 1e-9).ceil().max(1.0) as u64
    }

    /// Total bucket count `t = ⌈B/w⌉^d`.
    pub fn count(&self) -> f64 {
        (self.per_axis() as f64).powi(self.dim as i32)
    }

    pub fn center(&self, p: &Point) -> Result<Point> {
        let last = self.per_axis() as f64 - 1.0;
        let coords = p
            .coords()
            .iter()
            .map(|&c| self.w * (((c / self.w).floor()).min(last) + 0.5))
            .collect();
        Point::canonical(coords)
    }

    /// Space holding every bucket center.
    pub fn output_space(&self) -> MetricSpace {
        MetricSpace { dim: self.dim, bound: self.w * self.per_axis() as f64 }
    }
}

/// Moves every element to the center of its bucket.
pub fn mech_bucket(x: &Histogram, spec: BucketSpec) -> Result<Histogram> {
    if x.space().dim != spec.dim {
        return invalid_input("bucket grid and histogram differ in dimension");
    }
    let input = MetricSpace { dim: spec.dim, bound: spec.bound };
    let mut out = Histogram::empty(spec.output_space());
    for (p, c) in x.iter() {
        if !input.contains(p) {
            return invalid_input(format!("point {p} outside the ground set"));
        }
        out.add(spec.center(p)?, c)?;
    }
    Ok(out)
}

/// Parameters of BucketHist: drop budget `α`, output error `β`, privacy `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechParams {
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
}

/// Quantities derived from [`MechParams`] on a given space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derived {
    pub w: f64,
    pub t: f64,
    pub tau: f64,
    pub buckets: BucketSpec,
}

impl MechParams {
    pub fn new(alpha: f64, beta: f64, eps: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        if !(0.0..1.0).contains(&alpha) {
            return invalid_param(format!("alpha must lie in [0, 1), got {alpha}"));
        }
        check_positive("beta", beta)?;
        check_positive("epsilon", eps)?;
        Ok(MechParams { alpha, beta, eps })
    }

    /// `w = 2β/√d`, so each element moves at most `(w/2)√d = β`;
    /// `t = ⌈B/w⌉^d` and `τ = α/t`.
    pub fn derive(&self, space: MetricSpace) -> Result<Derived> {
        let w = 2.0 * self.beta / (space.dim as f64).sqrt();
        let buckets = BucketSpec::new(w, space)?;
        let t = buckets.count();
        let tau = self.alpha / t;
        check_tau(tau)?;
        Ok(Derived { w, t, tau, buckets })
    }
}

/// BucketHist: bucketing followed by the truncated Laplace mechanism.
pub fn mech_buckethist(x: &Histogram, p: MechParams, rng: &mut RngStream) -> Result<Histogram> {
    let d = p.derive(x.space())?;
    mech_trlap(&mech_bucket(x, d.buckets)?, d.tau, p.eps, rng)
}

/// A statistic released by post-processing BucketHist.
pub fn mech_hbs(kind: Statistic, x: &Histogram, p: MechParams, rng: &mut RngStream) -> Result<Release> {
    kind.validate()?;
    let y = mech_buckethist(x, p, rng)?;
    Ok(Release::from_result(eval_statistic(kind, &y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        let s = NoiseSpec::new(2.0, 1.0).unwrap();
        assert_eq!(s.cdf(-2.0), 0.0);
        assert_eq!(s.cdf(0.0), 1.0);
        assert!((s.cdf(-1.0) - 0.5).abs() < 1e-15);
        // Direct Laplace(-1, 1) CDF ratio.
        let f = |t: f64| if t < -1.0 { 0.5 * (t + 1.0).exp() } else { 1.0 - 0.5 * (-(t + 1.0)).exp() };
        let direct = (f(-0.5) - f(-2.0)) / (f(0.0) - f(-2.0));
        assert!((s.cdf(-0.5) - direct).abs() < 1e-14);
        assert!((s.cdf(-0.5) - 0.8112).abs() < 1e-4);
    }

    #[test]
    fn quantile_inverts_cdf_and_survives_extremes() {
        for &(q, e) in &[(2.0, 1.0), (27.4, 1.0), (3000.0, 5.0), (0.01, 0.01)] {
            let s = NoiseSpec::new(q, e).unwrap();
            for i in 1..100 {
                let u = i as f64 / 100.0;
                let t = s.quantile(u);
                assert!((-q..=0.0).contains(&t));
                assert!((s.cdf(t) - u).abs() < 1e-9, "q={q} e={e} u={u}");
            }
        }
    }

    #[test]
    fn pmf_examples() {
        let s = NoiseSpec::new(2.0, 1.0).unwrap();
        assert_eq!(trlap_output_pmf(0, s), vec![1.0]);
        let p = trlap_output_pmf(1, s);
        assert!((p[0] - 0.8112).abs() < 1e-4);
        for k in 0..8 {
            let p = trlap_output_pmf(k, s);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn emptiness_boundaries() {
        let (q, e) = (4u64, 0.7f64);
        let delta = e.exp_m1() / (2.0 * (e * q as f64 / 2.0).exp_m1());
        let p = emptiness_probs(q, e, delta, true).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[4] - 1.0).abs() < 1e-15);
        assert_eq!(p[2], 0.5);
        assert!(emptiness_probs(q, e, delta * 2.0, true).is_err());
        assert!(emptiness_probs(q, e, delta * 2.0, false).is_ok());
    }

    #[test]
    fn trlap_basic_properties() {
        let x = Histogram::from_bars(&[5, 0, 1, 40, 7]);
        let mut rng = RngStream::new(7);
        let q = 0.2 * x.size() as f64;
        let slack = (q + 0.5).floor() as u64;
        for _ in 0..200 {
            let y = mech_trlap(&x, 0.2, 1.0, &mut rng).unwrap();
            for (p, c) in x.iter() {
                assert!(y.get(p) <= c && y.get(p) + slack >= c);
            }
            assert!(y.is_sub_of(&x));
        }
        assert_eq!(mech_trlap(&x, 0.0, 1.0, &mut rng).unwrap(), x);
        assert!(mech_trlap(&x, 1.0, 1.0, &mut rng).is_err());
        assert!(mech_trlap(&Histogram::from_bars(&[0]), 0.1, 1.0, &mut rng).is_err());
    }

    #[test]
    fn determinism() {
        let x = Histogram::from_bars(&[5, 9, 1, 40, 7]);
        let a = mech_trlap(&x, 0.1, 0.5, &mut RngStream::new(3)).unwrap();
        let b = mech_trlap(&x, 0.1, 0.5, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(split_seed(1, &[0, 1]), split_seed(1, &[1, 0]));
        assert_eq!(split_seed(9, &[4, 2]), split_seed(9, &[4, 2]));
    }

    #[test]
    fn bucket_examples() {
        let space = MetricSpace::line(100);
        let spec = BucketSpec::new(10.0, space).unwrap();
        let x = Histogram::from_pairs(space, [(Point::int(3), 2), (Point::int(97), 1)]).unwrap();
        let y = mech_bucket(&x, spec).unwrap();
        let expect: Vec<(f64, u64)> = y.iter().map(|(p, c)| (p.value(), c)).collect();
        assert_eq!(expect, vec![(5.0, 2), (95.0, 1)]);
        assert_eq!(mech_bucket(&y, spec).unwrap(), y);
    }

    #[test]
    fn derived_parameters() {
        let p = MechParams::new(0.05, 5.0, 1.0).unwrap();
        let d = p.derive(MetricSpace::line(100)).unwrap();
        assert_eq!((d.w, d.t), (10.0, 10.0));
        assert!((d.tau - 0.005).abs() < 1e-15);
    }

    #[test]
    fn hbs_without_drop_budget_releases_bucketed_max() {
        let x = Histogram::from_bars(&[0, 3, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let p = MechParams::new(0.0, 2.0, 1.0).unwrap();
        let r = mech_hbs(Statistic::Max, &x, p, &mut RngStream::new(1)).unwrap();
        let v = r.value().unwrap().as_scalar().unwrap();
        assert!((v - 7.0).abs() <= 2.0);
        let single = Histogram::from_pairs(MetricSpace::line(20), [(Point::int(5), 1)]).unwrap();
        let p = MechParams::new(0.01, 2.0, 1.0).unwrap();
        let r = mech_hbs(Statistic::Max, &single, p, &mut RngStream::new(2)).unwrap();
        assert_eq!(r, Release::scalar(6.0));
    }
}
