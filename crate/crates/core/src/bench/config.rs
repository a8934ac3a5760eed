use std::fmt;

use crate::baselines::BaselineKind;
use crate::error::{Error, Result};
use crate::hist::Statistic;

use super::generators::GeneratorSpec;

/// A mechanism the runner can evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    /// BucketHist with `β = beta_frac · B`, followed by the statistic.
    BucketHist,
    /// The truncated Laplace mechanism on the raw bars (no bucketing).
    Trlap,
    Baseline(BaselineKind),
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 7] = [
        MechanismKind::BucketHist,
        MechanismKind::Trlap,
        MechanismKind::Baseline(BaselineKind::Exponential),
        MechanismKind::Baseline(BaselineKind::Ptr),
        MechanismKind::Baseline(BaselineKind::SmoothSensitivity),
        MechanismKind::Baseline(BaselineKind::BnsHistogram),
        MechanismKind::Baseline(BaselineKind::SanPoints),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::BucketHist => "buckethist",
            MechanismKind::Trlap => "trlap",
            MechanismKind::Baseline(b) => b.name(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buckethist" | "hbs" => Ok(MechanismKind::BucketHist),
            "trlap" => Ok(MechanismKind::Trlap),
            other => BaselineKind::parse(other).map(MechanismKind::Baseline),
        }
    }

    /// Position in [`MechanismKind::ALL`]; part of every run seed.
    pub fn index(&self) -> u64 {
        MechanismKind::ALL.iter().position(|m| m == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment: a data generator, a statistic and an evaluation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub generator: GeneratorSpec,
    pub statistic: Statistic,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub datasets: usize,
    pub runs: usize,
    pub drop_budget: f64,
    pub mechanisms: Vec<MechanismKind>,
    pub seed: u64,
    pub scale: f64,
    /// `β` of the bucketed mechanism as a fraction of the range `B`.
    pub beta_frac: f64,
    pub sanpoints_rounds: usize,
}

impl ExperimentConfig {
    pub fn new(id: &str, generator: GeneratorSpec, statistic: Statistic, epsilons: Vec<f64>) -> Self {
        ExperimentConfig {
            id: id.to_string(),
            generator,
            statistic,
            epsilons,
            delta: 2f64.powi(-20),
            datasets: 10,
            runs: 10,
            drop_budget: 0.005,
            mechanisms: MechanismKind::ALL.to_vec(),
            seed: 1,
            scale: 1.0,
            beta_frac: 0.05,
            sanpoints_rounds: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("experiment {}: {msg}", self.id)));
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("epsilons must be a non-empty list of positive numbers".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.datasets == 0 || self.runs == 0 {
            return bad("datasets and runs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.drop_budget) {
            return bad(format!("drop_budget must lie in [0, 1], got {}", self.drop_budget));
        }
        if self.mechanisms.is_empty() {
            return bad("no mechanisms".into());
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if !(self.beta_frac.is_finite() && self.beta_frac > 0.0) {
            return bad(format!("beta_frac must be positive, got {}", self.beta_frac));
        }
        if self.sanpoints_rounds == 0 {
            return bad("sanpoints_rounds must be at least 1".into());
        }
        if self.statistic == Statistic::Support {
            return bad("the benchmark evaluates scalar statistics only".into());
        }
        Ok(())
    }
}

/// Accepts a decimal number or a power of two written `2^-20`.
pub fn parse_delta(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.strip_prefix("2^") {
        Some(exp) => exp
            .trim_matches(['(', ')'])
            .parse::<i32>()
            .map(|e| 2f64.powi(e))
            .map_err(|_| Error::InvalidParameter(format!("bad delta {s}")))?,
        None => s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad delta {s}")))?,
    };
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {s}")));
    }
    Ok(v)
}

#[derive(Clone, Default)]
struct Fields {
    generator: Option<String>,
    statistic: Option<String>,
    epsilons: Option<String>,
    delta: Option<String>,
    datasets: Option<String>,
    runs: Option<String>,
    drop_budget: Option<String>,
    mechanisms: Option<String>,
    seed: Option<String>,
    scale: Option<String>,
    beta_frac: Option<String>,
    sanpoints_rounds: Option<String>,
    id: Option<String>,
}

impl Fields {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "generator" => &mut self.generator,
            "statistic" => &mut self.statistic,
            "epsilons" => &mut self.epsilons,
            "delta" => &mut self.delta,
            "datasets" => &mut self.datasets,
            "runs" => &mut self.runs,
            "drop_budget" => &mut self.drop_budget,
            "mechanisms" => &mut self.mechanisms,
            "seed" => &mut self.seed,
            "scale" => &mut self.scale,
            "beta_frac" => &mut self.beta_frac,
            "sanpoints_rounds" => &mut self.sanpoints_rounds,
            "experiment" => &mut self.id,
            _ => return None,
        })
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &Option<String>, line: usize) -> Result<Option<T>> {
    v.as_deref()
        .map(|s| s.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("bad value `{s}` for {key}") }))
        .transpose()
}

fn build(fields: &Fields, line: usize) -> Result<ExperimentConfig> {
    let missing = |k: &str| Error::Parse { line, msg: format!("experiment is missing `{k}`") };
    let id = fields.id.clone().ok_or_else(|| missing("experiment"))?;
    let generator = GeneratorSpec::parse(fields.generator.as_deref().ok_or_else(|| missing("generator"))?)?;
    let statistic = Statistic::parse(fields.statistic.as_deref().ok_or_else(|| missing("statistic"))?)?;
    let epsilons = fields
        .epsilons
        .as_deref()
        .ok_or_else(|| missing("epsilons"))?
        .split(',')
        .map(|e| e.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad epsilon `{e}`") }))
        .collect::<Result<Vec<f64>>>()?;
    let mut cfg = ExperimentConfig::new(&id, generator, statistic, epsilons);
    if let Some(d) = &fields.delta {
        cfg.delta = parse_delta(d)?;
    }
    if let Some(v) = num("datasets", &fields.datasets, line)? {
        cfg.datasets = v;
    }
    if let Some(v) = num("runs", &fields.runs, line)? {
        cfg.runs = v;
    }
    if let Some(v) = num("drop_budget", &fields.drop_budget, line)? {
        cfg.drop_budget = v;
    }
    if let Some(v) = num("seed", &fields.seed, line)? {
        cfg.seed = v;
    }
    if let Some(v) = num("scale", &fields.scale, line)? {
        cfg.scale = v;
    }
    if let Some(v) = num("beta_frac", &fields.beta_frac, line)? {
        cfg.beta_frac = v;
    }
    if let Some(v) = num("sanpoints_rounds", &fields.sanpoints_rounds, line)? {
        cfg.sanpoints_rounds = v;
    }
    if let Some(m) = &fields.mechanisms {
        cfg.mechanisms = m.split(',').map(MechanismKind::parse).collect::<Result<Vec<_>>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a config file.
///
/// Lines are `key = value`; `#` starts a comment. A line `[name]` opens an
/// experiment whose id is `name`; keys that appear before the first
/// section are defaults for every experiment. Keys: `generator`,
/// `statistic`, `epsilons` (comma list), `delta` (number or `2^-20`),
/// `datasets`, `runs`, `drop_budget`, `mechanisms` (comma list),
/// `seed`, `scale`, `beta_frac`, `sanpoints_rounds`, and `experiment`
/// to override the id.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let mut defaults = Fields::default();
    let mut current: Option<(Fields, usize)> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if let Some((f, at)) = current.take() {
                out.push(build(&f, at)?);
            }
            let mut f = defaults.clone();
            f.id = Some(name.trim().to_string());
            current = Some((f, line_no));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse { line: line_no, msg: format!("expected `key = value`, got `{line}`") });
        };
        let key = key.trim().to_ascii_lowercase();
        let target = match current.as_mut() {
            Some((f, _)) => f,
            None => &mut defaults,
        };
        let slot = target.slot(&key).ok_or_else(|| Error::Parse { line: line_no, msg: format!("unknown key `{key}`") })?;
        *slot = Some(value.trim().to_string());
    }
    if let Some((f, at)) = current.take() {
        out.push(build(&f, at)?);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, msg: "config defines no experiment".into() });
    }
    Ok(out)
}
