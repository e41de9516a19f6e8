use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ergolab::diagnostics::{
    k_property_check, relative_mixing_statistic, rwm_verdict, vlb_statistic, vlb_zero_entropy,
    vwb_statistic, DiagnosticReport, DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_TOL,
};
use ergolab::entropy::{conditional_block_entropy, nats_to_bits};
use ergolab::experiments::{emit_report, fiber_half_pairs, run_experiment, ExperimentConfig};
use ergolab::io::{
    load_system, read_distribution, read_trajectory, read_words, sample_named, write_trajectory,
};
use ergolab::metrics::{dbar_words, distribution_distance, fbar_words, DEFAULT_EXACT_LIMIT};
use ergolab::symbolic::Symbol;
use ergolab::systems::{SkewProduct, StateFunction, SystemModel};
use ergolab::{Error, Result, WordMetric};

#[derive(Parser)]
#[command(
    name = "ergolab",
    version,
    about = "d-bar/f-bar metrics, entropy and class diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// f̄ distance between two words or two block distributions.
    Fbar(DistanceArgs),
    /// d̄ distance between two words or two block distributions.
    Dbar(DistanceArgs),
    /// Conditional block entropy H(N-block | k-past).
    Entropy(EntropyArgs),
    /// Relative weak mixing verdict over the fiber-half pair family.
    Rwm(RwmArgs),
    /// Very weak Bernoulli check.
    Vwb(LawArgs),
    /// Loosely Bernoulli check (f̄ conditional laws, or the clique form).
    Vlb(VlbArgs),
    /// Finite K check.
    Kcheck(KArgs),
    /// Relative mixing statistic for the fiber lower half.
    Relmix(RelmixArgs),
    /// Dump a labelled trajectory.
    Sample(SampleArgs),
    /// Run a genericity experiment from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DistanceArgs {
    /// Two word files; the first word of each is used.
    #[arg(long, num_args = 2, conflicts_with = "dist")]
    words: Option<Vec<PathBuf>>,
    /// Two distribution CSV files.
    #[arg(long, num_args = 2)]
    dist: Option<Vec<PathBuf>>,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
}

/// Where a sample comes from: a trajectory file, or a system spec sampled here.
#[derive(Args)]
struct SampleSource {
    #[arg(long, required_unless_present = "sample")]
    system: Option<PathBuf>,
    /// Trajectory dump to read instead of sampling.
    #[arg(long, conflicts_with = "system")]
    sample: Option<PathBuf>,
    /// `gen`, `base` or `product:<level>`.
    #[arg(long, default_value = "gen")]
    partition: String,
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SampleSource {
    fn labels(&self) -> Result<(Vec<Symbol>, u64)> {
        if let Some(p) = &self.sample {
            let t = read_trajectory(p)?;
            return Ok((t.labels, t.seed));
        }
        let sys = load_system(self.system.as_deref().expect("clap requires one source"))?;
        Ok((
            sample_named(&sys, &self.partition, self.steps, self.seed)?.labels,
            self.seed,
        ))
    }
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    source: SampleSource,
    #[arg(long = "N", default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Report bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct RwmArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long = "L", value_delimiter = ',', default_values_t = [64, 256, 1024])]
    l: Vec<usize>,
    /// Conditioning window; defaults to L.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the EA trace as CSV instead of the JSON report.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct LawArgs {
    #[command(flatten)]
    source: SampleSource,
    #[arg(long = "N", default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct VlbArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Clique form for zero-entropy samples.
    #[arg(long)]
    zero_entropy: bool,
}

#[derive(Args)]
struct KArgs {
    #[command(flatten)]
    source: SampleSource,
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k0: usize,
    #[arg(long, default_value_t = 8)]
    k1: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

#[derive(Args)]
struct RelmixArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 8, 64])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SampleSource,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?
    );
    Ok(())
}

fn print_report(r: &DiagnosticReport, csv: bool) -> Result<()> {
    if !csv {
        return print_json(r);
    }
    println!("series,x,value");
    for row in &r.trace {
        println!("{},{},{}", row.series, row.x, row.value);
    }
    Ok(())
}

fn skew_of(path: &Path) -> Result<SkewProduct> {
    match load_system(path)? {
        SystemModel::Skew(s) => Ok(s),
        _ => Err(Error::Parameter(
            "this diagnostic needs a skew-product system".into(),
        )),
    }
}

fn distance(metric: WordMetric, a: &DistanceArgs) -> Result<()> {
    if let Some(w) = &a.words {
        let u = read_words(&w[0])?;
        let v = read_words(&w[1])?;
        let (u, v) = match (u.first(), v.first()) {
            (Some(u), Some(v)) => (u, v),
            _ => return Err(Error::Validation("word file holds no words".into())),
        };
        let value = match metric {
            WordMetric::Dbar => dbar_words(u, v)?,
            WordMetric::Fbar => fbar_words(u, v)?,
        };
        println!("{value}");
        return print_json(&json!({
            "metric": metric,
            "value": value,
            "method": "exact",
            "length": u.len(),
        }));
    }
    let d = a
        .dist
        .as_ref()
        .ok_or_else(|| Error::Parameter("give --words or --dist".into()))?;
    let r = distribution_distance(
        metric,
        &read_distribution(&d[0])?,
        &read_distribution(&d[1])?,
        a.exact_limit,
    )?;
    println!("{}", r.value);
    print_json(&r)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fbar(a) => distance(WordMetric::Fbar, &a),
        Command::Dbar(a) => distance(WordMetric::Dbar, &a),
        Command::Entropy(a) => {
            let (labels, _) = a.source.labels()?;
            let e = conditional_block_entropy(&labels, a.n, a.k)?;
            let scale = |x: f64| if a.bits { nats_to_bits(x) } else { x };
            let mut flags = Vec::new();
            if e.undersampled {
                flags.push("undersampled");
            }
            print_json(&json!({
                "value": scale(e.value),
                "std_error": scale(e.std_error),
                "miller_madow": scale(e.miller_madow),
                "units": if a.bits { "bits" } else { "nats" },
                "N": a.n,
                "k": a.k,
                "windows": e.windows,
                "flags": flags,
            }))
        }
        Command::Rwm(a) => {
            let ext = skew_of(&a.system)?;
            let r = rwm_verdict(
                &ext,
                &fiber_half_pairs(&ext)?,
                &a.l,
                a.m,
                a.tol,
                a.samples,
                a.seed,
            )?;
            print_report(&r, a.csv)
        }
        Command::Vwb(a) => {
            let (labels, seed) = a.source.labels()?;
            let mut r = vwb_statistic(&labels, a.n, a.k, a.eps)?.report();
            r.seed = Some(seed);
            print_json(&r)
        }
        Command::Vlb(a) => {
            let l = &a.law;
            let (labels, seed) = l.source.labels()?;
            let mut r = if a.zero_entropy {
                vlb_zero_entropy(&labels, l.n, l.eps)?.report()
            } else {
                vlb_statistic(&labels, l.n, l.k, l.eps)?.report()
            };
            r.seed = Some(seed);
            print_json(&r)
        }
        Command::Kcheck(a) => {
            let (labels, seed) = a.source.labels()?;
            let mut r = k_property_check(&labels, a.n, a.k0, a.k1, a.eps, a.delta)?.report();
            r.seed = Some(seed);
            print_json(&r)
        }
        Command::Relmix(a) => {
            let ext = skew_of(&a.system)?;
            let f = StateFunction::fiber_lower_half(&ext);
            let mut r = DiagnosticReport::named("relmix");
            for (i, &n) in a.n.iter().enumerate() {
                let rm = relative_mixing_statistic(&ext, &f, &f, n, a.samples, a.seed)?;
                r.trace.push(ergolab::diagnostics::TraceRow {
                    series: 0,
                    x: n as f64,
                    value: rm.centered_form,
                });
                r.trace.push(ergolab::diagnostics::TraceRow {
                    series: 1,
                    x: n as f64,
                    value: rm.covariance_form,
                });
                if i + 1 == a.n.len() {
                    r.values.insert("centered_form".into(), rm.centered_form);
                    r.values
                        .insert("covariance_form".into(), rm.covariance_form);
                    r.values.insert("identity_gap".into(), rm.identity_gap);
                }
            }
            r.parameters.insert("samples".into(), a.samples as f64);
            r.seed = Some(a.seed);
            print_report(&r, a.csv)
        }
        Command::Sample(a) => {
            let sys = load_system(
                a.source
                    .system
                    .as_deref()
                    .ok_or_else(|| Error::Parameter("sample needs --system".into()))?,
            )?;
            let t = sample_named(&sys, &a.source.partition, a.source.steps, a.source.seed)?;
            write_trajectory(&a.out, &t)
        }
        Command::Experiment(a) => {
            let mut cfg = ExperimentConfig::load(&a.config)?;
            if a.workers.is_some() {
                cfg.workers = a.workers;
            }
            let dir = a
                .out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let result = run_experiment(&cfg)?;
            let (csv, json) = emit_report(&result, &dir)?;
            print_json(&json!({
                "label": result.label,
                "trials": result.trials.len(),
                "passes": result.passes,
                "pass_rate": result.pass_rate,
                "interval": result.interval,
                "csv": csv,
                "json": json,
            }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
