//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 margin validation failure,
//! 4 violated exact identity.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construction::{build_d, build_x, draw_labels, standardized_mean};
use crate::limitlaw::LimitLaw;
use crate::margins::{split, validate, MarginSpec};
use crate::rng::seeded_rng;
use crate::statistics::{convergence_study, enumerate_exact, StatsError, StudyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MARGIN: i32 = 3;
pub const EXIT_IDENTITY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "piid", version, about = "Pairwise independent sequences and their non-Gaussian limit law")]
pub struct Cli {
    /// Maximum number of worker threads (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw labels, indicators and values for one sequence and write them as CSV.
    Generate(GenerateArgs),
    /// Evaluate the limit law on a grid, with moments and quantiles.
    Limit(LimitArgs),
    /// Enumerate all label sequences and check the exact independence identities.
    Verify(VerifyArgs),
    /// Monte-Carlo convergence of the standardized mean to the limit law.
    Converge(ConvergeArgs),
    /// Analytic shape parameter r and a Monte-Carlo estimate from draws of W.
    EstimateR(EstimateArgs),
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    /// Margin: `name[:key=value,...]`, inline JSON, or a path to a JSON file.
    #[arg(long)]
    margin: String,
    /// Number of labels; the sequence has m(m-1)/2 values.
    #[arg(long)]
    m: usize,
    #[arg(long, env = "PIID_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct LimitArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long, allow_hyphen_values = true)]
    r: f64,
    /// Evaluation grid `start:stop:step`.
    #[arg(long, default_value = "-4:8:0.01", allow_hyphen_values = true)]
    grid: String,
    /// Probabilities whose quantiles are reported.
    #[arg(long, value_delimiter = ',')]
    quantile: Vec<f64>,
    /// Number of direct draws of S to write.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, env = "PIID_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory for `limit.csv`, `limit.json` and `samples.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    m: usize,
    /// List every marginal and pair probability.
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct ConvergeArgs {
    #[arg(long)]
    margin: String,
    /// Strictly increasing sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    m_grid: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, env = "PIID_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory for `converge.csv` and `converge.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    margin: String,
    /// Number of draws of W.
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    /// Batches for the standard error.
    #[arg(long, default_value_t = 100)]
    batches: usize,
    #[arg(long, env = "PIID_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Margin(String),
    Identity(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Margin(_) => EXIT_MARGIN,
            Failure::Identity(_) => EXIT_IDENTITY,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Margin(m) | Failure::Identity(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let dispatch = || match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Limit(a) => limit(a),
        Command::Verify(a) => verify(a),
        Command::Converge(a) => converge(a),
        Command::EstimateR(a) => estimate_r(a),
    };
    let result = match cli.workers {
        None => dispatch(),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(dispatch),
            Err(e) => Err(config(e)),
        },
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn load_margin(arg: &str) -> Result<MarginSpec<f64>, Failure> {
    let path = Path::new(arg);
    if !arg.trim_start().starts_with('{') && (path.is_file() || arg.ends_with(".json")) {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {arg}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| Failure::Config(format!("cannot parse {arg}: {e}")));
    }
    arg.parse().map_err(config)
}

/// Parses, validates and splits a margin; validation failures exit with 3.
fn checked_split(arg: &str) -> Result<(MarginSpec<f64>, crate::margins::SplitMargin<f64>), Failure> {
    let spec = load_margin(arg)?;
    let report = validate(&spec);
    if let Some(err) = report.to_error() {
        return Err(Failure::Margin(format!("margin '{arg}' is not admissible: {err}")));
    }
    let s = split(&spec).map_err(|e| Failure::Margin(e.to_string()))?;
    Ok((spec, s))
}

fn margin_json(spec: &MarginSpec<f64>) -> Value {
    serde_json::to_value(spec).unwrap_or(Value::Null)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Outcome {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(config)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn generate(a: &GenerateArgs) -> Outcome {
    if a.m < 2 {
        return Err(Failure::Config(format!("--m must be at least 2, got {}", a.m)));
    }
    let (spec, s) = checked_split(&a.margin)?;
    let mut rng = seeded_rng(a.seed);
    let labels = draw_labels(s.ell(), a.m, &mut rng).map_err(config)?;
    let d = build_d(&labels);
    let x = build_x(&d, &s, &mut rng);
    let mut w = create(&a.out, "labels.csv")?;
    labels.write_csv(&mut w).and_then(|_| w.flush()).map_err(config)?;
    let mut w = create(&a.out, "sample.csv")?;
    x.write_csv(&mut w).and_then(|_| w.flush()).map_err(config)?;
    let mom = s.moments();
    let meta = json!({
        "command": "generate",
        "config": a,
        "margin": margin_json(&spec),
        "ell": s.ell(),
        "m": a.m,
        "n": x.n(),
        "seed": a.seed,
        "r": mom.r,
        "mu": mom.mu,
        "sigma": mom.sigma,
        "mu_u": mom.mu_u,
        "mu_v": mom.mu_v,
        "sigma_u": mom.sigma_u,
        "sigma_v": mom.sigma_v,
        "ones": d.ones(),
        "standardized_mean": standardized_mean(&x).map_err(config)?,
        "files": ["labels.csv", "sample.csv", "meta.json"],
    });
    let text = pretty(&meta);
    write_text(&a.out, "meta.json", &text)?;
    print!("{text}");
    Ok(())
}

/// `start:stop:step` to the points `start + i step` up to `stop`.
fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::Config(format!("grid must be start:stop:step with step > 0 and stop > start, got '{spec}'"));
    let [start, stop, step] = parts.as_slice() else {
        return Err(bad());
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if !(step > 0.0 && stop > start && start.is_finite() && stop.is_finite()) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Failure::Config(format!("grid '{spec}' has too many points")));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn limit(a: &LimitArgs) -> Outcome {
    let law = LimitLaw::new(a.ell, a.r).map_err(config)?;
    let grid = parse_grid(&a.grid)?;
    let mut quantiles = Vec::new();
    for &p in &a.quantile {
        let s = law.quantile(p).map_err(config)?;
        quantiles.push(json!({ "p": p, "s": s }));
    }
    let summary = law.summary();
    let meta = json!({
        "command": "limit",
        "config": a,
        "ell": summary.ell,
        "r": summary.r,
        "mean": summary.mean,
        "variance": summary.variance,
        "skewness": summary.skewness,
        "kurtosis": summary.kurtosis,
        "support": [summary.support.0, summary.support.1],
        "gaussian_distance": law.gaussian_distance(),
        "quantiles": quantiles,
        "grid_points": grid.len(),
    });
    let text = pretty(&meta);
    if let Some(dir) = &a.out {
        let mut csv = String::with_capacity(grid.len() * 72);
        csv.push_str("s,pdf,cdf\n");
        for &s in &grid {
            let _ = writeln!(csv, "{s:.16e},{:.16e},{:.16e}", law.pdf(s), law.cdf(s));
        }
        write_text(dir, "limit.csv", &csv)?;
        write_text(dir, "limit.json", &text)?;
        if let Some(count) = a.samples {
            let draws = law.sample(&mut seeded_rng(a.seed), count);
            let mut csv = String::from("i,s\n");
            for (i, s) in draws.iter().enumerate() {
                let _ = writeln!(csv, "{},{s:.16e}", i + 1);
            }
            write_text(dir, "samples.csv", &csv)?;
        }
    }
    print!("{text}");
    Ok(())
}

fn verify(a: &VerifyArgs) -> Outcome {
    if a.m < 3 {
        return Err(Failure::Config(format!("verify needs m >= 3 to form a triple, got {}", a.m)));
    }
    let law = match enumerate_exact(a.ell, a.m) {
        Ok(law) => law,
        Err(e @ (StatsError::TooLarge { .. } | StatsError::InvalidParameter(_))) => return Err(config(e)),
        Err(e) => return Err(Failure::Identity(e.to_string())),
    };
    print!("{}", law.render(a.full));
    let check = law.check();
    if !check.violations.is_empty() {
        return Err(Failure::Identity(format!("{} exact identities violated", check.violations.len())));
    }
    if check.triple_counterexample.is_none() {
        return Err(Failure::Identity("every triple factorizes".into()));
    }
    println!("result: pairwise independent, not mutually independent");
    Ok(())
}

fn converge(a: &ConvergeArgs) -> Outcome {
    let (spec, s) = checked_split(&a.margin)?;
    let report = convergence_study(&s, &a.m_grid, a.reps, a.seed, StudyOptions::default()).map_err(config)?;
    let csv = report.to_csv();
    let meta = json!({
        "command": "converge",
        "config": a,
        "margin": margin_json(&spec),
        "report": report,
    });
    let text = pretty(&meta);
    if let Some(dir) = &a.out {
        write_text(dir, "converge.csv", &csv)?;
        write_text(dir, "converge.json", &text)?;
    }
    match a.format {
        Format::Csv => print!("{csv}"),
        Format::Json => print!("{text}"),
    }
    Ok(())
}

/// `(μ̂_V − μ̂) / (σ̂ √(ℓ − 1))` from draws of `W`.
fn r_hat(draws: &[f64], in_a: &[bool], ell: u32) -> f64 {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let (sum_v, count_v) = draws
        .iter()
        .zip(in_a)
        .filter(|(_, &a)| a)
        .fold((0.0, 0usize), |(s, c), (x, _)| (s + x, c + 1));
    let mu_v = sum_v / count_v as f64;
    (mu_v - mean) / (var.sqrt() * ((ell - 1) as f64).sqrt())
}

fn estimate_r(a: &EstimateArgs) -> Outcome {
    let (spec, s) = checked_split(&a.margin)?;
    if a.batches < 2 || a.draws < 2 * a.batches {
        return Err(Failure::Config("need at least 2 batches and 2 draws per batch".into()));
    }
    let mut rng = seeded_rng(a.seed);
    let mut draws = Vec::with_capacity(a.draws);
    for _ in 0..a.draws {
        draws.push(spec.sample_w(&mut rng).map_err(|e| Failure::Margin(e.to_string()))?);
    }
    let in_a: Vec<bool> = draws.iter().map(|&x| s.set_a().contains(x)).collect();
    let estimate = r_hat(&draws, &in_a, s.ell());
    let size = a.draws / a.batches;
    let batch: Vec<f64> = (0..a.batches)
        .map(|b| r_hat(&draws[b * size..(b + 1) * size], &in_a[b * size..(b + 1) * size], s.ell()))
        .collect();
    let bm = batch.iter().sum::<f64>() / batch.len() as f64;
    let bvar = batch.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (batch.len() - 1) as f64;
    let std_error = (bvar / batch.len() as f64).sqrt();
    let out = json!({
        "command": "estimate-r",
        "config": a,
        "margin": margin_json(&spec),
        "ell": s.ell(),
        "analytic_r": s.r(),
        "estimate": estimate,
        "std_error": std_error,
        "draws": a.draws,
        "seed": a.seed,
    });
    print!("{}", pretty(&out));
    Ok(())
}
