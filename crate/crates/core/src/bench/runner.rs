use std::io::Write;

use rayon::prelude::*;

use crate::audit::{drop_allowance, reachable_values};
use crate::baselines::{flips, run_baseline, BaselineKind, Flips};
use crate::certificates::solve_q;
use crate::error::{Error, Result};
use crate::hist::{eval_bars, MetricSpace, Release, Statistic};
use crate::mechanisms::{split_seed, splitmix64, trlap_bars, BucketSpec, RngStream};

use super::config::{ExperimentConfig, MechanismKind};
use super::generators::GeneratorSpec;

pub const CSV_COLUMNS: [&str; 8] =
    ["experiment", "mechanism", "epsilon", "mean_err_pct", "mean_flex_err_pct", "stderr_pct", "runs", "flags"];

const DATASET_STREAM: u64 = u64::MAX;
const TAU_CLAMP: f64 = 1.0 - 1e-9;

/// Aggregated result of one (experiment, mechanism, ε) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub mechanism: String,
    pub epsilon: f64,
    pub mean_err_pct: f64,
    pub mean_flex_err_pct: f64,
    pub stderr_pct: f64,
    pub runs: usize,
    pub flags: String,
}

/// Seed tag of an experiment id.
pub fn experiment_tag(id: &str) -> u64 {
    id.bytes().fold(splitmix64(0), |h, b| splitmix64(h ^ b as u64))
}

struct Dataset {
    bars: Vec<u64>,
    n: u64,
    truth: usize,
    /// Values reachable by dropping within the budget, ascending.
    reachable: Vec<f64>,
    flips: Option<Flips>,
}

impl Dataset {
    fn flex_error(&self, released: Option<f64>, range: f64) -> f64 {
        let Some(r) = released else { return range };
        let i = self.reachable.partition_point(|&v| v < r);
        let below = i.checked_sub(1).map(|j| r - self.reachable[j]);
        let above = self.reachable.get(i).map(|v| v - r);
        below.into_iter().chain(above).fold(range, f64::min)
    }
}

/// Parameters of the truncated Laplace noise for one dataset and ε.
#[derive(Clone, Copy)]
struct NoiseParams {
    q: f64,
    tau: f64,
    clamped: bool,
}

fn noise_params(eps: f64, delta: f64, n: u64) -> Result<NoiseParams> {
    let q = solve_q(eps, delta)?;
    let tau = q / n as f64;
    Ok(if tau >= 1.0 {
        NoiseParams { q: TAU_CLAMP * n as f64, tau: TAU_CLAMP, clamped: true }
    } else {
        NoiseParams { q, tau, clamped: false }
    })
}

fn bucket_spec(cfg: &ExperimentConfig, range: usize) -> Result<BucketSpec> {
    BucketSpec::new(2.0 * cfg.beta_frac * range as f64, MetricSpace::line(range))
}

/// Bucketing, truncated Laplace noise on the bucket counts, then the
/// statistic read off at the bucket center.
fn bucketed(stat: Statistic, bars: &[u64], spec: BucketSpec, q: f64, eps: f64, rng: &mut RngStream) -> Result<Option<f64>> {
    let per_axis = spec.per_axis() as usize;
    let mut buckets = vec![0u64; per_axis];
    for (i, &c) in bars.iter().enumerate() {
        buckets[((i as f64 / spec.w).floor() as usize).min(per_axis - 1)] += c;
    }
    trlap_bars(&mut buckets, q, eps, rng)?;
    Ok(eval_bars(stat, &buckets).map(|j| spec.w * (j as f64 + 0.5)))
}

fn release_scalar(r: &Release) -> Option<f64> {
    r.value().and_then(|v| v.as_scalar())
}

fn build_datasets(cfg: &ExperimentConfig) -> Result<Vec<Dataset>> {
    let tag = experiment_tag(&cfg.id);
    let needs_flips = cfg.mechanisms.iter().any(|m| {
        matches!(m, MechanismKind::Baseline(BaselineKind::Ptr) | MechanismKind::Baseline(BaselineKind::SmoothSensitivity))
    });
    (0..cfg.datasets)
        .into_par_iter()
        .map(|d| {
            let mut rng = RngStream::new(split_seed(cfg.seed, &[tag, DATASET_STREAM, d as u64]));
            let bars = cfg.generator.generate(cfg.scale, &mut rng)?;
            let n: u64 = bars.iter().sum();
            let truth = eval_bars(cfg.statistic, &bars).ok_or_else(|| {
                Error::UndefinedStatistic(format!("experiment {}: {} undefined on dataset {d}", cfg.id, cfg.statistic))
            })?;
            let pairs: Vec<(f64, u64)> =
                bars.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as f64, c)).collect();
            let mut reachable = reachable_values(cfg.statistic, &pairs, drop_allowance(n, cfg.drop_budget));
            reachable.sort_by(f64::total_cmp);
            let flips = if needs_flips { Some(flips(cfg.statistic, &bars)?) } else { None };
            Ok(Dataset { bars, n, truth, reachable, flips })
        })
        .collect()
}

/// Runs every (mechanism, ε, dataset, run) task of an experiment and
/// aggregates one row per (mechanism, ε). Results do not depend on the
/// number of worker threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let range = cfg.generator.bars();
    let range_f = range as f64;
    let tag = experiment_tag(&cfg.id);
    let datasets = build_datasets(cfg)?;
    let spec = bucket_spec(cfg, range)?;
    let noise: Vec<Vec<NoiseParams>> = cfg
        .epsilons
        .iter()
        .map(|&e| datasets.iter().map(|ds| noise_params(e, cfg.delta, ds.n)).collect())
        .collect::<Result<_>>()?;

    let per_cell = cfg.datasets * cfg.runs;
    let cells: Vec<(MechanismKind, usize)> =
        cfg.mechanisms.iter().flat_map(|&m| (0..cfg.epsilons.len()).map(move |j| (m, j))).collect();
    let scores: Vec<(f64, f64)> = (0..cells.len() * per_cell)
        .into_par_iter()
        .map(|task| {
            let (mech, j) = cells[task / per_cell];
            let d = (task % per_cell) / cfg.runs;
            let r = task % cfg.runs;
            let eps = cfg.epsilons[j];
            let ds = &datasets[d];
            let mut rng = RngStream::new(split_seed(cfg.seed, &[tag, d as u64, r as u64, mech.index(), j as u64]));
            let released = match mech {
                MechanismKind::BucketHist => bucketed(cfg.statistic, &ds.bars, spec, noise[j][d].q, eps, &mut rng)?,
                MechanismKind::Trlap => {
                    let mut y = ds.bars.clone();
                    trlap_bars(&mut y, noise[j][d].q, eps, &mut rng)?;
                    eval_bars(cfg.statistic, &y).map(|i| i as f64)
                }
                MechanismKind::Baseline(b) => {
                    let rel = run_baseline(
                        b,
                        cfg.statistic,
                        &ds.bars,
                        eps,
                        cfg.delta,
                        cfg.sanpoints_rounds.min(range),
                        ds.flips.as_ref(),
                        &mut rng,
                    )?;
                    release_scalar(&rel)
                }
            };
            let err = released.map_or(range_f, |v| (v - ds.truth as f64).abs().min(range_f));
            let flex = ds.flex_error(released, range_f).min(err);
            Ok((100.0 * err / range_f, 100.0 * flex / range_f))
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<ResultRow> = cells
        .iter()
        .enumerate()
        .map(|(c, &(mech, j))| {
            let block = &scores[c * per_cell..(c + 1) * per_cell];
            let k = block.len() as f64;
            let mean = block.iter().map(|s| s.0).sum::<f64>() / k;
            let flex = block.iter().map(|s| s.1).sum::<f64>() / k;
            let var = if block.len() > 1 {
                block.iter().map(|s| (s.0 - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            ResultRow {
                experiment: cfg.id.clone(),
                mechanism: mech.name().to_string(),
                epsilon: cfg.epsilons[j],
                mean_err_pct: mean,
                mean_flex_err_pct: flex,
                stderr_pct: (var / k).sqrt(),
                runs: block.len(),
                flags: flags(cfg, mech, &noise[j], spec),
            }
        })
        .collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn flags(cfg: &ExperimentConfig, mech: MechanismKind, noise: &[NoiseParams], spec: BucketSpec) -> String {
    let mut out = Vec::new();
    let mut echo = |t: f64| {
        let p = noise[0];
        out.push(format!("q={:.4}", p.q));
        out.push(format!("tau={:.6e}", p.tau));
        out.push(format!("alpha={:.6e}", p.tau * t));
        if noise.iter().any(|p| p.clamped) {
            out.push("cert unavailable".to_string());
        }
    };
    match mech {
        MechanismKind::BucketHist => {
            echo(spec.count());
            out.push(format!("beta={}", cfg.beta_frac * cfg.generator.bars() as f64));
        }
        MechanismKind::Trlap => echo(cfg.generator.bars() as f64),
        MechanismKind::Baseline(b) if b.approximate() => out.push("approximate reproduction".to_string()),
        MechanismKind::Baseline(_) => {}
    }
    if matches!(cfg.generator, GeneratorSpec::Cauchy { .. }) {
        out.push("cauchy-rejection".to_string());
    }
    out.join("; ")
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then_with(|| a.mechanism.cmp(&b.mechanism))
            .then_with(|| a.epsilon.total_cmp(&b.epsilon))
    });
}

/// Runs several experiments, optionally on a dedicated pool of `threads`
/// workers, and returns all rows sorted by (experiment, mechanism, ε).
pub fn run_experiments(cfgs: &[ExperimentConfig], threads: Option<usize>) -> Result<Vec<ResultRow>> {
    let work = || -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for cfg in cfgs {
            rows.extend(run_experiment(cfg)?);
        }
        sort_rows(&mut rows);
        Ok(rows)
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Writes rows as CSV with the columns of [`CSV_COLUMNS`].
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.mechanism.clone(),
            r.epsilon.to_string(),
            format!("{:.4}", r.mean_err_pct),
            format!("{:.4}", r.mean_flex_err_pct),
            format!("{:.4}", r.stderr_pct),
            r.runs.to_string(),
            r.flags.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mechs: &[MechanismKind]) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new("t", GeneratorSpec::parse("cauchy:10,2,400,20,2").unwrap(), Statistic::Max, vec![0.5, 2.0]);
        cfg.datasets = 3;
        cfg.runs = 4;
        cfg.mechanisms = mechs.to_vec();
        cfg.sanpoints_rounds = 3;
        cfg
    }

    fn csv_of(rows: &[ResultRow]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = small(&MechanismKind::ALL);
        let one = csv_of(&run_experiments(std::slice::from_ref(&cfg), Some(1)).unwrap());
        let four = csv_of(&run_experiments(std::slice::from_ref(&cfg), Some(4)).unwrap());
        assert_eq!(one, four);
        assert!(one.starts_with("experiment,mechanism,epsilon,mean_err_pct,mean_flex_err_pct,stderr_pct,runs,flags\n"));
        assert_eq!(one.lines().count(), 1 + 7 * 2);
    }

    #[test]
    fn dropping_a_mechanism_keeps_the_others_fixed() {
        let all = run_experiment(&small(&MechanismKind::ALL)).unwrap();
        let some = run_experiment(&small(&[MechanismKind::BucketHist, MechanismKind::Baseline(BaselineKind::Ptr)])).unwrap();
        for row in &some {
            assert!(all.contains(row));
        }
    }

    #[test]
    fn rows_are_well_formed() {
        let rows = run_experiment(&small(&MechanismKind::ALL)).unwrap();
        for r in &rows {
            assert!((0.0..=100.0).contains(&r.mean_err_pct));
            assert!(r.mean_flex_err_pct <= r.mean_err_pct + 1e-12);
            assert_eq!(r.runs, 12);
            assert!(r.flags.contains("cauchy-rejection"));
        }
        let sp = rows.iter().find(|r| r.mechanism == "sanpoints").unwrap();
        assert!(sp.flags.contains("approximate reproduction"));
        let bh = rows.iter().find(|r| r.mechanism == "buckethist").unwrap();
        assert!(bh.flags.contains("q=") && bh.flags.contains("beta=1"));
    }

    #[test]
    fn infeasible_tau_is_clamped_and_flagged() {
        let mut cfg = ExperimentConfig::new("tiny", GeneratorSpec::parse("step:2x3").unwrap(), Statistic::Max, vec![0.1]);
        cfg.mechanisms = vec![MechanismKind::Trlap];
        cfg.datasets = 1;
        cfg.runs = 2;
        let rows = run_experiment(&cfg).unwrap();
        assert!(rows[0].flags.contains("cert unavailable"));
    }
}
