use rand_distr::{Cauchy, Distribution, Poisson};

use crate::error::{Error, Result};
use crate::mechanisms::RngStream;

/// How a dataset is produced. All generators emit dense 1-D bars.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// `items` i.i.d. Cauchy draws binned into `bars` unit bars; draws outside
    /// `[0, bars)` are rejected and redrawn; the last `zero_last` bars are
    /// then emptied.
    Cauchy { median: f64, scale: f64, items: u64, bars: usize, zero_last: usize },
    /// Runs of equal heights, `(height, width)`.
    Step(Vec<(u64, usize)>),
    /// `bars` i.i.d. Poisson heights.
    Poisson { bars: usize, mean: f64 },
    /// A step profile with independent uniform integer jitter in
    /// `[-noise, noise]` on every bar.
    NoisyStep { steps: Vec<(u64, usize)>, noise: u64 },
}

fn bad(spec: &str) -> Error {
    Error::InvalidParameter(format!("bad generator spec `{spec}`"))
}

fn parse_steps(s: &str, spec: &str) -> Result<Vec<(u64, usize)>> {
    let steps = s
        .split(',')
        .map(|part| {
            let (h, w) = part.trim().split_once(['x', '×']).ok_or_else(|| bad(spec))?;
            Ok((h.trim().parse().map_err(|_| bad(spec))?, w.trim().parse().map_err(|_| bad(spec))?))
        })
        .collect::<Result<Vec<(u64, usize)>>>()?;
    if steps.is_empty() || steps.iter().all(|&(_, w)| w == 0) {
        return Err(bad(spec));
    }
    Ok(steps)
}

fn expand(steps: &[(u64, usize)]) -> Vec<u64> {
    steps.iter().flat_map(|&(h, w)| std::iter::repeat_n(h, w)).collect()
}

fn scaled(h: u64, scale: f64) -> u64 {
    (h as f64 * scale).round() as u64
}

impl GeneratorSpec {
    /// Parses `cauchy:median,scale,items,bars,zero_last`,
    /// `step:1000x50,1x50`, `poisson:bars,mean` or
    /// `noisystep:130x120,200x5;noise=5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad(spec))?;
        let nums = |s: &str| s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad(spec))).collect::<Result<Vec<f64>>>();
        let g = match kind.trim().to_ascii_lowercase().as_str() {
            "cauchy" => match *nums(rest)?.as_slice() {
                [median, scale, items, bars, zero_last] => GeneratorSpec::Cauchy {
                    median,
                    scale,
                    items: items as u64,
                    bars: bars as usize,
                    zero_last: zero_last as usize,
                },
                [median, scale, items, bars] => {
                    GeneratorSpec::Cauchy { median, scale, items: items as u64, bars: bars as usize, zero_last: 0 }
                }
                _ => return Err(bad(spec)),
            },
            "step" => GeneratorSpec::Step(parse_steps(rest, spec)?),
            "poisson" => match *nums(rest)?.as_slice() {
                [bars, mean] => GeneratorSpec::Poisson { bars: bars as usize, mean },
                _ => return Err(bad(spec)),
            },
            "noisystep" => {
                let (steps, noise) = match rest.split_once(';') {
                    Some((s, n)) => {
                        let n = n.trim().strip_prefix("noise").ok_or_else(|| bad(spec))?;
                        let n = n.trim_start_matches([' ', '=']).parse().map_err(|_| bad(spec))?;
                        (s, n)
                    }
                    None => (rest, 5),
                };
                GeneratorSpec::NoisyStep { steps: parse_steps(steps, spec)?, noise }
            }
            _ => return Err(bad(spec)),
        };
        g.validate().map_err(|_| bad(spec))?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            GeneratorSpec::Cauchy { median, scale, items, bars, zero_last } => {
                median.is_finite() && *scale > 0.0 && scale.is_finite() && *items > 0 && *bars > 0 && zero_last < bars
            }
            GeneratorSpec::Step(_) | GeneratorSpec::NoisyStep { .. } => true,
            GeneratorSpec::Poisson { bars, mean } => *bars > 0 && *mean > 0.0 && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid generator {self:?}")))
        }
    }

    /// Number of bars `B` of every dataset.
    pub fn bars(&self) -> usize {
        match self {
            GeneratorSpec::Cauchy { bars, .. } | GeneratorSpec::Poisson { bars, .. } => *bars,
            GeneratorSpec::Step(steps) | GeneratorSpec::NoisyStep { steps, .. } => steps.iter().map(|s| s.1).sum(),
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, GeneratorSpec::Step(_))
    }

    /// Draws a dataset. `scale` multiplies heights (or the item count for
    /// the Cauchy generator) and keeps the shape.
    pub fn generate(&self, scale: f64, rng: &mut RngStream) -> Result<Vec<u64>> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Ok(match self {
            GeneratorSpec::Cauchy { median, scale: s, items, bars, zero_last } => {
                let dist = Cauchy::new(*median, *s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let upper = *bars as f64;
                let mut out = vec![0u64; *bars];
                for _ in 0..scaled(*items, scale) {
                    let v = loop {
                        let v: f64 = dist.sample(rng);
                        if (0.0..upper).contains(&v) {
                            break v;
                        }
                    };
                    out[(v.floor() as usize).min(bars - 1)] += 1;
                }
                for c in out.iter_mut().rev().take(*zero_last) {
                    *c = 0;
                }
                out
            }
            GeneratorSpec::Step(steps) => expand(steps).into_iter().map(|h| scaled(h, scale)).collect(),
            GeneratorSpec::Poisson { bars, mean } => {
                let dist = Poisson::new(mean * scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                (0..*bars).map(|_| dist.sample(rng) as u64).collect()
            }
            GeneratorSpec::NoisyStep { steps, noise } => {
                let span = 2 * noise + 1;
                expand(steps)
                    .into_iter()
                    .map(|h| {
                        let jitter = (rng.open01() * span as f64).floor() as i64 - *noise as i64;
                        scaled((h as i64 + jitter).max(0) as u64, scale)
                    })
                    .collect()
            }
        })
    }
}
