//! Genericity experiments: draw random cocycles over a fixed base, run a
//! diagnostic on each extension, report pass rates.
//!
//! Results are empirical analogues of genericity statements. A pass rate
//! says how often a finite diagnostic accepted a sampled extension, nothing
//! about residual sets.
//!
//! Seeds: trial `i` uses `t = split_seed(master, i)`, its cocycle is drawn
//! from `split_seed(t, 0)` and its trajectory from `split_seed(t, 1)`.
//! Base statistics use `split_seed(master, u64::MAX)`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    k_property_check, relative_mixing_statistic, rwm_verdict, vlb_statistic, vlb_zero_entropy,
    vwb_statistic, DiagnosticReport, DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_TOL,
};
use crate::entropy::{
    analytic_entropy, conditional_block_entropy, entropy_rate_estimate, EntropyEstimate,
};
use crate::error::{Error, Result};
use crate::io::SystemSpec;
use crate::symbolic::{Partition, StateSet, Symbol};
use crate::systems::{
    sample_trajectory, skew_product, split_seed, CocycleSpec, FiberMap, SkewProduct, StateFunction,
    SystemModel,
};

/// Environment variable that overrides the configured master seed.
pub const SEED_ENV: &str = "ERGOLAB_SEED";

pub const LABEL: &str = "empirical analogue";

const BASE_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Entropy,
    Rwm,
    Class,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassName {
    Vwb,
    Vlb,
    Kcheck,
    Relmix,
}

/// Which fiber maps the trials use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleFamily {
    /// Identity on every fiber.
    Frozen,
    /// Independent uniform rotation per base generator cell, fresh per trial.
    RandomRotation,
    ConstantRotation {
        steps: u32,
    },
    CellDriven {
        steps: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyEstimator {
    /// `H(X_0 | k-past)`.
    Conditional,
    /// `H_N / N`.
    Block,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyParams {
    pub estimator: EntropyEstimator,
    pub past: usize,
    pub block: usize,
    /// Dyadic fiber level of the extension partition; `None` is the generator.
    pub level: Option<u32>,
    pub margin: f64,
    pub steps: usize,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            estimator: EntropyEstimator::Conditional,
            past: 1,
            block: 8,
            level: None,
            margin: 0.1,
            steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RwmParams {
    pub l_schedule: Vec<usize>,
    /// Conditioning window `M`; `None` conditions on the whole averaging window.
    pub window: Option<usize>,
    pub tol: f64,
    pub samples: usize,
}

impl Default for RwmParams {
    fn default() -> Self {
        RwmParams {
            l_schedule: vec![64, 256, 1024],
            window: None,
            tol: DEFAULT_TOL,
            samples: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LawParams {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    /// Use the clique form (zero-entropy bases) instead of the conditional form.
    pub zero_entropy: bool,
    pub level: u32,
    pub steps: usize,
}

impl Default for LawParams {
    fn default() -> Self {
        LawParams {
            n: 8,
            k: 4,
            eps: DEFAULT_EPS,
            zero_entropy: false,
            level: 1,
            steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KParams {
    pub n: usize,
    pub k0: usize,
    pub k1: usize,
    pub eps: f64,
    pub delta: f64,
    pub level: u32,
    pub steps: usize,
}

impl Default for KParams {
    fn default() -> Self {
        KParams {
            n: 2,
            k0: 2,
            k1: 4,
            eps: DEFAULT_EPS,
            delta: DEFAULT_DELTA,
            level: 1,
            steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelmixParams {
    pub n: usize,
    pub tol: f64,
    pub samples: usize,
}

impl Default for RelmixParams {
    fn default() -> Self {
        RelmixParams {
            n: 64,
            tol: DEFAULT_TOL,
            samples: 1024,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticParams {
    pub entropy: EntropyParams,
    pub rwm: RwmParams,
    pub vwb: LawParams,
    pub vlb: LawParams,
    pub kcheck: KParams,
    pub relmix: RelmixParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub class: Option<ClassName>,
    pub seed: u64,
    pub trials: usize,
    pub fiber: u32,
    #[serde(default)]
    pub workers: Option<usize>,
    pub base: SystemSpec,
    pub cocycles: CocycleFamily,
    #[serde(default)]
    pub diagnostic: DiagnosticParams,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a config and applies the `ERGOLAB_SEED` override.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.seed = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{SEED_ENV}=`{s}` is not a u64")))?;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub cocycle: String,
    pub pass: bool,
    pub report: DiagnosticReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub label: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// Base statistic or precondition report.
    pub baseline: Option<DiagnosticReport>,
    pub trials: Vec<TrialRecord>,
    pub passes: usize,
    pub pass_rate: Option<f64>,
    /// 95% Wilson score interval for the pass rate.
    pub interval: Option<(f64, f64)>,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(passes: usize, trials: usize, z: f64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let p = passes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

fn cocycle_for(family: &CocycleFamily, base: &SystemModel, seed: u64) -> CocycleSpec {
    let cells = base.generator();
    match family {
        CocycleFamily::Frozen => CocycleSpec::Constant(FiberMap::identity()),
        CocycleFamily::RandomRotation => CocycleSpec::Random { cells, seed },
        CocycleFamily::ConstantRotation { steps } => {
            CocycleSpec::Constant(FiberMap::Rotation(*steps))
        }
        CocycleFamily::CellDriven { steps } => CocycleSpec::CellDriven {
            cells,
            maps: steps.iter().map(|&s| FiberMap::Rotation(s)).collect(),
        },
    }
}

fn describe(ext: &SkewProduct) -> String {
    let maps: Vec<String> = ext
        .cocycle()
        .maps()
        .iter()
        .map(|m| match m {
            FiberMap::Rotation(s) => s.to_string(),
            FiberMap::Permutation(p) => format!("perm{:?}", p.as_slice()),
        })
        .collect();
    format!("[{}]", maps.join(" "))
}

fn entropy_of(sample: &[Symbol], p: &EntropyParams) -> Result<EntropyEstimate> {
    match p.estimator {
        EntropyEstimator::Conditional => conditional_block_entropy(sample, 1, p.past),
        EntropyEstimator::Block => entropy_rate_estimate(sample, p.block),
    }
}

fn extension_partition(ext: &SystemModel, level: Option<u32>) -> Result<Partition> {
    match level {
        Some(l) => ext.product_partition(l),
        None => Ok(ext.generator()),
    }
}

fn entropy_report(h: &EntropyEstimate, stat: &str) -> DiagnosticReport {
    let mut r = DiagnosticReport::named(stat);
    r.values.insert("entropy".into(), h.value);
    r.values.insert("std_error".into(), h.std_error);
    r.parameters.insert("block".into(), h.block_length as f64);
    r.parameters.insert("past".into(), h.past_length as f64);
    r.parameters
        .insert("sample_length".into(), h.sample_length as f64);
    if h.undersampled {
        r.flags.push("undersampled".into());
    }
    r
}

fn base_entropy(cfg: &ExperimentConfig, base: &SystemModel) -> Result<DiagnosticReport> {
    let p = &cfg.diagnostic.entropy;
    if let Some(h) = analytic_entropy(base) {
        let mut r = DiagnosticReport::named("base_entropy");
        r.values.insert("entropy".into(), h);
        r.values.insert("std_error".into(), 0.0);
        r.flags.push("analytic".into());
        return Ok(r);
    }
    let seed = split_seed(cfg.seed, BASE_STREAM);
    let t = sample_trajectory(base, &base.generator(), p.steps, seed, 0)?;
    let mut r = entropy_report(&entropy_of(&t.labels, p)?, "base_entropy");
    r.seed = Some(seed);
    Ok(r)
}

/// `(H, H)` and `(H, Hᶜ)` for the lower fiber half `H`.
pub fn fiber_half_pairs(ext: &SkewProduct) -> Result<Vec<(StateSet, StateSet)>> {
    let m = ext.fiber_size() as usize;
    let n = ext.base_states() * m;
    let half = StateSet::from_indices(n, (0..n).filter(|o| o % m < m / 2))?;
    Ok(vec![
        (half.clone(), half.clone()),
        (half.clone(), half.complement()),
    ])
}

/// Runs a class diagnostic on a sample; `None` for diagnostics that are not
/// sample based.
fn class_on_sample(
    class: ClassName,
    sample: &[Symbol],
    cfg: &DiagnosticParams,
) -> Result<DiagnosticReport> {
    match class {
        ClassName::Vwb => {
            let p = &cfg.vwb;
            Ok(vwb_statistic(sample, p.n, p.k, p.eps)?.report())
        }
        ClassName::Vlb => {
            let p = &cfg.vlb;
            if p.zero_entropy {
                Ok(vlb_zero_entropy(sample, p.n, p.eps)?.report())
            } else {
                Ok(vlb_statistic(sample, p.n, p.k, p.eps)?.report())
            }
        }
        ClassName::Kcheck | ClassName::Relmix => {
            let p = &cfg.kcheck;
            Ok(k_property_check(sample, p.n, p.k0, p.k1, p.eps, p.delta)?.report())
        }
    }
}

fn class_steps_level(class: ClassName, cfg: &DiagnosticParams) -> (usize, u32) {
    match class {
        ClassName::Vwb => (cfg.vwb.steps, cfg.vwb.level),
        ClassName::Vlb => (cfg.vlb.steps, cfg.vlb.level),
        ClassName::Kcheck | ClassName::Relmix => (cfg.kcheck.steps, cfg.kcheck.level),
    }
}

/// Refuses to run when the base itself fails the class diagnostic. For
/// `relmix` the base must pass the K check.
fn class_precondition(
    cfg: &ExperimentConfig,
    class: ClassName,
    base: &SystemModel,
) -> Result<DiagnosticReport> {
    let seed = split_seed(cfg.seed, BASE_STREAM);
    let (steps, _) = class_steps_level(class, &cfg.diagnostic);
    let t = sample_trajectory(base, &base.generator(), steps, seed, 0)?;
    let mut r = class_on_sample(class, &t.labels, &cfg.diagnostic)?;
    r.seed = Some(seed);
    if r.verdict != Some(true) {
        return Err(Error::Precondition(format!(
            "base sample fails the {} diagnostic; class preservation needs a base in the class",
            r.statistic
        )));
    }
    Ok(r)
}

fn run_trial(
    cfg: &ExperimentConfig,
    base: &SystemModel,
    baseline: Option<&DiagnosticReport>,
    trial: usize,
) -> Result<TrialRecord> {
    let seed = split_seed(cfg.seed, trial as u64);
    let spec = cocycle_for(&cfg.cocycles, base, split_seed(seed, 0));
    let sys = skew_product(base.clone(), &spec, cfg.fiber)?;
    let SystemModel::Skew(ext) = &sys else {
        unreachable!("skew_product builds a skew product")
    };
    let sample_seed = split_seed(seed, 1);
    let d = &cfg.diagnostic;
    let mut report = match cfg.experiment {
        ExperimentKind::Entropy => {
            let p = &d.entropy;
            let part = extension_partition(&sys, p.level)?;
            let t = sample_trajectory(&sys, &part, p.steps, sample_seed, 0)?;
            let h = entropy_of(&t.labels, p)?;
            let hb = baseline
                .and_then(|b| b.values.get("entropy").copied())
                .unwrap_or(f64::NAN);
            let mut r = entropy_report(&h, "entropy_genericity");
            r.values.insert("base_entropy".into(), hb);
            r.values.insert("excess".into(), h.value - hb);
            r.parameters.insert("margin".into(), p.margin);
            r.verdict = Some(h.value <= hb + p.margin);
            if h.value > hb + 3.0 * h.std_error {
                r.flags
                    .push("exceeds base entropy by more than 3 SE".into());
            }
            r
        }
        ExperimentKind::Rwm => {
            let p = &d.rwm;
            rwm_verdict(
                ext,
                &fiber_half_pairs(ext)?,
                &p.l_schedule,
                p.window,
                p.tol,
                p.samples,
                sample_seed,
            )?
        }
        ExperimentKind::Class => {
            let class = cfg
                .class
                .ok_or_else(|| Error::Parameter("class experiment needs `class`".into()))?;
            if class == ClassName::Relmix {
                let p = &d.relmix;
                let f = StateFunction::fiber_lower_half(ext);
                let rm = relative_mixing_statistic(ext, &f, &f, p.n, p.samples, sample_seed)?;
                let mut r = DiagnosticReport::named("relmix");
                r.values.insert("centered_form".into(), rm.centered_form);
                r.values
                    .insert("covariance_form".into(), rm.covariance_form);
                r.values.insert("identity_gap".into(), rm.identity_gap);
                r.parameters.insert("n".into(), p.n as f64);
                r.parameters.insert("tol".into(), p.tol);
                r.parameters.insert("samples".into(), p.samples as f64);
                r.verdict = Some(rm.centered_form < p.tol);
                r
            } else {
                let (steps, level) = class_steps_level(class, d);
                let part = sys.product_partition(level)?;
                let t = sample_trajectory(&sys, &part, steps, sample_seed, 0)?;
                class_on_sample(class, &t.labels, d)?
            }
        }
    };
    report.seed = Some(sample_seed);
    report.parameters.insert("fiber".into(), cfg.fiber as f64);
    Ok(TrialRecord {
        trial,
        seed,
        cocycle: describe(ext),
        pass: report.verdict == Some(true),
        report,
    })
}

/// Runs every trial of `cfg`. Trials run in parallel; results keep trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.fiber == 0 || cfg.trials == 0 {
        return Err(Error::Parameter(
            "need fiber size >= 1 and at least one trial".into(),
        ));
    }
    if cfg.experiment == ExperimentKind::Class && cfg.class.is_none() {
        return Err(Error::Parameter("class experiment needs `class`".into()));
    }
    let base = cfg.base.build(Path::new("."))?;
    if base.fiber_size().is_some() {
        return Err(Error::Parameter(
            "base must not itself be an extension".into(),
        ));
    }
    let baseline = match cfg.experiment {
        ExperimentKind::Entropy => Some(base_entropy(cfg, &base)?),
        ExperimentKind::Rwm => None,
        ExperimentKind::Class => Some(class_precondition(
            cfg,
            cfg.class.expect("checked above"),
            &base,
        )?),
    };
    let work = || -> Result<Vec<TrialRecord>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, &base, baseline.as_ref(), i))
            .collect()
    };
    let trials = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Parameter(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let passes = trials.iter().filter(|t| t.pass).count();
    let n = trials.len();
    Ok(ExperimentResult {
        label: LABEL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        baseline,
        passes,
        pass_rate: (n > 0).then(|| passes as f64 / n as f64),
        interval: wilson_interval(passes, n, 1.96),
        trials,
    })
}

pub fn run_entropy_genericity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_kind(cfg, ExperimentKind::Entropy)?;
    run_experiment(cfg)
}

pub fn run_rwm_genericity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_kind(cfg, ExperimentKind::Rwm)?;
    run_experiment(cfg)
}

pub fn run_class_preservation(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_kind(cfg, ExperimentKind::Class)?;
    run_experiment(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.experiment != kind {
        return Err(Error::Parameter(format!(
            "config is a {:?} experiment, expected {kind:?}",
            cfg.experiment
        )));
    }
    Ok(())
}

const CSV_HEADER: [&str; 7] = [
    "trial",
    "seed",
    "cocycle",
    "statistic",
    "pass",
    "values",
    "flags",
];

fn joined(map: &std::collections::BTreeMap<String, f64>) -> String {
    map.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per trial. Floats use shortest round-trip formatting, so equal
/// results give identical bytes.
pub fn render_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for t in &result.trials {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.cocycle.clone(),
            t.report.statistic.clone(),
            t.pass.to_string(),
            joined(&t.report.values),
            t.report.flags.join(";"),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn render_json(result: &ExperimentResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_json(text: &str) -> Result<ExperimentResult> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes `<name>.csv` and `<name>.json` into `dir`; returns both paths.
pub fn emit_report(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", result.config.name));
    let json = dir.join(format!("{}.json", result.config.name));
    fs::write(&csv, render_csv(result)?)?;
    fs::write(&json, render_json(result)?)?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: &str, extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            r#"
name = "t"
experiment = "{kind}"
seed = 7
trials = 4
fiber = 8
{extra}

[base]
kind = "bernoulli"
p = [0.5, 0.5]

[cocycles]
family = "random_rotation"

[diagnostic.entropy]
steps = 20000

[diagnostic.rwm]
l_schedule = [16]
samples = 16
"#
        ))
        .unwrap()
    }

    #[test]
    fn wilson_matches_closed_form() {
        // 45 of 50 at z = 1.96, computed by hand from the score formula.
        let (lo, hi) = wilson_interval(45, 50, 1.96).unwrap();
        assert!((lo - 0.78640).abs() < 1e-4, "{lo}");
        assert!((hi - 0.95653).abs() < 1e-4, "{hi}");
        assert_eq!(wilson_interval(0, 0, 1.96), None);
        let (lo, hi) = wilson_interval(0, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.35);
    }

    #[test]
    fn zero_trials_give_header_only_csv() {
        let mut cfg = config("entropy", "");
        cfg.trials = 0;
        assert!(run_experiment(&cfg).is_err());
        cfg.trials = 1;
        let mut r = run_experiment(&cfg).unwrap();
        r.trials.clear();
        assert_eq!(
            render_csv(&r).unwrap(),
            "trial,seed,cocycle,statistic,pass,values,flags\n"
        );
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = config("entropy", "");
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(render_csv(&a).unwrap(), render_csv(&b).unwrap());
        let mut one = cfg.clone();
        one.workers = Some(1);
        assert_eq!(
            render_csv(&run_experiment(&one).unwrap()).unwrap(),
            render_csv(&a).unwrap()
        );
    }

    #[test]
    fn json_round_trip() {
        let r = run_experiment(&config("rwm", "")).unwrap();
        assert_eq!(parse_json(&render_json(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn class_needs_a_class_and_a_good_base() {
        assert!(matches!(
            run_experiment(&config("class", "")),
            Err(Error::Parameter(_))
        ));
        let mut cfg = config("class", "class = \"vlb\"");
        cfg.base = SystemSpec::Permutation {
            perm: vec![1, 2, 0],
        };
        cfg.diagnostic.vlb.steps = 3000;
        // Period 3 is not weak mixing; its conditional laws are point masses.
        cfg.class = Some(ClassName::Vwb);
        cfg.diagnostic.vwb.steps = 3000;
        assert!(matches!(run_experiment(&cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        assert!(run_rwm_genericity(&config("entropy", "")).is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = config("class", "class = \"kcheck\"");
        assert_eq!(
            ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(),
            cfg
        );
        assert!(ExperimentConfig::from_toml("name = 1").is_err());
    }
}
