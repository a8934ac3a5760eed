use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flexhist::audit::{audit_trlap, flexible_error, neighbor_pairs};
use flexhist::baselines::{run_baseline, BaselineKind};
use flexhist::bench::{parse_config, parse_delta, run_experiments, write_csv};
use flexhist::certificates::{hbs_accuracy_cert, solve_q, trlap_dp_cert};
use flexhist::mechanisms::{mech_hbs, mech_trlap, BucketSpec, MechParams, RngStream};
use flexhist::textfmt::{format_histogram, parse_distribution_or_histogram, parse_histogram};
use flexhist::transport::winf_lossy;
use flexhist::{eval_statistic, Point, Release, StatValue, Statistic};

#[derive(Parser)]
#[command(name = "flexhist", version, about = "Private histogram release with flexible accuracy")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark experiments.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Run a single mechanism on a histogram file.
    #[command(subcommand)]
    Mech(MechCmd),
    /// Privacy and accuracy audits.
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Optimal transport distances.
    #[command(subcommand)]
    Transport(TransportCmd),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run every experiment of a config file and write a CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the master seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Subcommand)]
enum MechCmd {
    Run(MechRun),
}

#[derive(Args)]
struct MechRun {
    /// trlap, buckethist, exponential, ptr, smooth, bns or sanpoints.
    #[arg(long)]
    mech: String,
    /// max, min, max_<k>, mode or support.
    #[arg(long)]
    stat: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "2^-20")]
    delta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output error of the bucketed mechanism; defaults to a twentieth of the range.
    #[arg(long)]
    beta: Option<f64>,
    /// Drop budget of the bucketed mechanism; derived from (ε, δ) when absent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 10)]
    sanpoints_rounds: usize,
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Exact privacy audit of the truncated Laplace mechanism on small
    /// neighbor pairs; exits 1 if any pair exceeds its certified δ.
    Dp {
        #[arg(long)]
        tau: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[arg(long, default_value_t = 15)]
        max_n: u64,
        #[arg(long, default_value_t = 1)]
        bars: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Flexible error of a released value; exits 1 if it exceeds `--beta`.
    Flex {
        #[arg(long)]
        stat: String,
        #[arg(long, default_value_t = 0.005)]
        budget: f64,
        #[arg(long)]
        input: PathBuf,
        /// Released value: a number, comma-separated coordinates, or
        /// `undefined`. Support releases list points separated by spaces.
        #[arg(long, allow_hyphen_values = true)]
        release: String,
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Subcommand)]
enum TransportCmd {
    /// γ-lossy ∞-Wasserstein distance between two distributions.
    Winf {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
}

type CliResult = Result<ExitCode, String>;

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bench_run(config: &PathBuf, out: &PathBuf, seed: Option<u64>, threads: Option<usize>) -> CliResult {
    let mut cfgs = parse_config(&read(config)?).map_err(err)?;
    if let Some(s) = seed {
        cfgs.iter_mut().for_each(|c| c.seed = s);
    }
    let rows = run_experiments(&cfgs, threads).map_err(err)?;
    let file = fs::File::create(out).map_err(|e| format!("{}: {e}", out.display()))?;
    write_csv(&rows, file).map_err(err)?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn mech_run(a: &MechRun) -> CliResult {
    let stat = Statistic::parse(&a.stat).map_err(err)?;
    let delta = parse_delta(&a.delta).map_err(err)?;
    let x = parse_histogram(&read(&a.input)?, None).map_err(err)?;
    if x.is_empty() {
        return Err("input histogram is empty".into());
    }
    let mut rng = RngStream::new(a.seed);
    let n = x.size();
    let space = x.space();
    match a.mech.trim().to_ascii_lowercase().as_str() {
        "buckethist" | "hbs" => {
            let beta = a.beta.unwrap_or(space.bound / 20.0);
            let alpha = match a.alpha {
                Some(al) => al,
                None => {
                    let w = 2.0 * beta / (space.dim as f64).sqrt();
                    let t = BucketSpec::new(w, space).map_err(err)?.count();
                    let derived = solve_q(a.eps, delta).map_err(err)? / n as f64 * t;
                    if derived >= 1.0 {
                        eprintln!("note: derived alpha {derived} clamped below 1; input too small for the requested delta");
                    }
                    derived.min(1.0 - 1e-9)
                }
            };
            let p = MechParams::new(alpha, beta, a.eps).map_err(err)?;
            let d = p.derive(space).map_err(err)?;
            let rel = mech_hbs(stat, &x, p, &mut rng).map_err(err)?;
            println!("release {rel}");
            println!("params alpha={} beta={} w={} t={} tau={}", alpha, beta, d.w, d.t, d.tau);
            println!("{}", trlap_dp_cert(a.eps, d.tau, n).map_err(err)?);
            match hbs_accuracy_cert(stat, p, space.dim) {
                Ok(c) => println!("{c}"),
                Err(e) => println!("CERT accuracy unavailable: {e}"),
            }
        }
        "trlap" => {
            let q = solve_q(a.eps, delta).map_err(err)?;
            let tau = q / n as f64;
            let y = mech_trlap(&x, tau, a.eps, &mut rng).map_err(err)?;
            println!("release {}", Release::from_result(eval_statistic(stat, &y)));
            println!("params q={q} tau={tau}");
            println!("{}", trlap_dp_cert(a.eps, tau, n).map_err(err)?);
            print!("{}", format_histogram(&y));
        }
        other => {
            let kind = BaselineKind::parse(other).map_err(err)?;
            let bars = x.to_bars().map_err(err)?;
            let rounds = a.sanpoints_rounds.min(bars.len());
            let rel = run_baseline(kind, stat, &bars, a.eps, delta, rounds, None, &mut rng).map_err(err)?;
            println!("release {rel}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_point(s: &str) -> Result<Point, String> {
    let coords = s.split(',').map(|c| c.trim().parse::<f64>().map_err(err)).collect::<Result<Vec<_>, _>>()?;
    Point::new(coords).map_err(err)
}

fn parse_release(stat: Statistic, s: &str) -> Result<Release, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("undefined") {
        return Ok(Release::Undefined);
    }
    Ok(Release::Value(match stat {
        Statistic::Support => StatValue::Set(s.split_whitespace().map(parse_point).collect::<Result<_, _>>()?),
        _ => StatValue::Point(parse_point(s)?),
    }))
}

fn audit_dp(tau: f64, eps_grid: &[f64], max_n: u64, bars: usize, tol: f64) -> CliResult {
    let pairs = neighbor_pairs(bars, max_n);
    let rows = audit_trlap(&pairs, tau, eps_grid).map_err(err)?;
    let mut violations = 0usize;
    for r in &rows {
        let ok = r.ok(tol);
        violations += usize::from(!ok);
        println!(
            "{} x={:?} y={:?} eps={} tau={} delta_exact={:.6e} delta_cert={:.6e}",
            if ok { "OK" } else { "VIOLATION" },
            r.x,
            r.y,
            r.eps,
            r.tau,
            r.delta_exact,
            r.delta_cert
        );
    }
    println!("audited {} pairs, {} violations", rows.len(), violations);
    Ok(if violations == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn audit_flex(stat: &str, budget: f64, input: &PathBuf, release: &str, beta: Option<f64>) -> CliResult {
    let stat = Statistic::parse(stat).map_err(err)?;
    let x = parse_histogram(&read(input)?, None).map_err(err)?;
    let rel = parse_release(stat, release)?;
    let e = flexible_error(stat, &x, &rel, budget).map_err(err)?;
    let plain = match (rel.value(), eval_statistic(stat, &x)) {
        (Some(v), Ok(t)) => v.dist(&t).map_err(err)?,
        _ => x.space().diameter(),
    };
    println!("flexible_error {e}");
    println!("plain_error {plain}");
    match beta {
        Some(b) if e > b + 1e-9 => {
            println!("VIOLATION flexible error exceeds beta={b}");
            Ok(ExitCode::from(1))
        }
        Some(b) => {
            println!("OK within beta={b}");
            Ok(ExitCode::SUCCESS)
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn transport_winf(p: &PathBuf, q: &PathBuf, gamma: f64) -> CliResult {
    let pd = parse_distribution_or_histogram(&read(p)?, None).map_err(err)?;
    let qd = parse_distribution_or_histogram(&read(q)?, None).map_err(err)?;
    // Both sides must live in one space; use the larger bound.
    let bound = pd.space().bound.max(qd.space().bound);
    let rebase = |d: &flexhist::transport::DiscreteDistribution| {
        let space = flexhist::MetricSpace::new(d.space().dim, bound).map_err(err)?;
        flexhist::transport::DiscreteDistribution::new(space, d.atoms().to_vec()).map_err(err)
    };
    let v = winf_lossy(&rebase(&pd)?, &rebase(&qd)?, gamma).map_err(err)?;
    println!("winf {v}");
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Command::Bench(BenchCmd::Run { config, out, seed, threads }) => bench_run(&config, &out, seed, threads),
        Command::Mech(MechCmd::Run(a)) => mech_run(&a),
        Command::Audit(AuditCmd::Dp { tau, eps_grid, max_n, bars, tol }) => audit_dp(tau, &eps_grid, max_n, bars, tol),
        Command::Audit(AuditCmd::Flex { stat, budget, input, release, beta }) => {
            audit_flex(&stat, budget, &input, &release, beta)
        }
        Command::Transport(TransportCmd::Winf { p, q, gamma }) => transport_winf(&p, &q, gamma),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
