//! Finitary diagnostics: the EA statistic and RWM verdicts, the factor
//! statistic, VWB/VLB conditional-law checks, the zero-entropy VLB clique,
//! the finite K check and relative mixing.
//!
//! Conditional expectations over the base are exact fiber sums; the only
//! stochastic error is the sampling of base paths. None of these numbers
//! certifies an infinite-limit property.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{conditional_block_entropy, gapped_conditional_entropy, max_resolved_past};
use crate::error::{dimension, Error, Result};
use crate::metrics::{
    distribution_distance, fbar_symbols, Method, WordMetric, DEFAULT_EXACT_LIMIT,
};
use crate::symbolic::{BlockCounts, StateSet, Symbol, WordDistribution};
use crate::systems::{
    relative_independent_product, split_seed, SkewProduct, StateFunction, SystemModel,
};

pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 0.05;
/// Pasts seen fewer times than this are excluded from conditional laws.
pub const OCCUPANCY_FLOOR: u64 = 100;
/// Base paths drawn per parallel chunk.
const CHUNK: usize = 64;

const SCOPE: &str =
    "finitary surrogate evaluated on finite data; not a certificate of the limit property";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub series: usize,
    pub x: f64,
    pub value: f64,
}

/// Common report shape for every diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub statistic: String,
    pub values: BTreeMap<String, f64>,
    pub parameters: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub verdict: Option<bool>,
    pub flags: Vec<String>,
    pub trace: Vec<TraceRow>,
    pub scope: String,
}

impl DiagnosticReport {
    /// Empty report for `statistic`, scope set.
    pub fn named(statistic: &str) -> Self {
        Self::new(statistic)
    }

    fn new(statistic: &str) -> Self {
        DiagnosticReport {
            statistic: statistic.to_string(),
            values: BTreeMap::new(),
            parameters: BTreeMap::new(),
            seed: None,
            verdict: None,
            flags: Vec::new(),
            trace: Vec::new(),
            scope: SCOPE.to_string(),
        }
    }

    fn value(mut self, k: &str, v: f64) -> Self {
        self.values.insert(k.to_string(), v);
        self
    }

    fn param(mut self, k: &str, v: f64) -> Self {
        self.parameters.insert(k.to_string(), v);
        self
    }
}

fn check_shape(ext: &SkewProduct, set: &StateSet) -> Result<()> {
    let n = ext.base_states() * ext.fiber_size() as usize;
    if set.space_size() != n {
        return Err(dimension("extension state set", n, set.space_size()));
    }
    Ok(())
}

fn check_fn(ext: &SkewProduct, f: &StateFunction) -> Result<()> {
    f.check_shape(ext)
}

/// `∫ E(f|Y) E(g|Y) dν`, normalized by the base mass so that constants
/// pass through exactly.
fn factor_inner(ext: &SkewProduct, f: &StateFunction, g: &StateFunction) -> f64 {
    let mu = ext.base().observable_measure();
    let total: f64 = mu.iter().sum();
    mu.iter()
        .enumerate()
        .map(|(x, w)| w * f.fiber_average(x) * g.fiber_average(x))
        .sum::<f64>()
        / total
}

/// Draws a base path of `len` observables from the invariant measure.
fn base_path(base: &SystemModel, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    base.orbit(rng.random())?.observables(len)
}

/// Two base paths sharing the conditioning window `0..=m_window` and
/// conditionally independent afterwards. Shift bases continue from the
/// last shared symbol; other bases are returned identical.
fn conditioned_pair(
    base: &SystemModel,
    len: usize,
    m_window: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let shared = (m_window + 1).min(len);
    if base.shift_successor(0, &mut rng.clone()).is_none() || shared == len {
        let p = base_path(base, len, rng)?;
        return Ok((p.clone(), p));
    }
    let mut a = base_path(base, shared, rng)?;
    let mut b = a.clone();
    for _ in shared..len {
        let (la, lb) = (*a.last().unwrap(), *b.last().unwrap());
        a.push(base.shift_successor(la, rng).unwrap());
        b.push(base.shift_successor(lb, rng).unwrap());
    }
    Ok((a, b))
}

/// `F[u][i] = f(x_i, u_i)` along the fiber orbit of every start `u`.
fn fiber_orbit_values(ext: &SkewProduct, f: &StateFunction, path: &[usize]) -> Vec<f64> {
    let m = ext.fiber_size() as usize;
    let l = path.len();
    let mut out = vec![0.0; m * l];
    for u0 in 0..m {
        let mut u = u0 as u32;
        for (i, &x) in path.iter().enumerate() {
            out[u0 * l + i] = f.value(x, u);
            u = ext.fiber_step(x, u);
        }
    }
    out
}

/// `E_{u,v}[((1/L) Σ_i F[u][i] G[v][i])²]`, choosing the cheaper contraction.
fn paired_square_mean(fm: &[f64], gm: &[f64], m: usize, l: usize) -> f64 {
    let mut total = 0.0;
    if m <= l {
        for u in 0..m {
            let fu = &fm[u * l..(u + 1) * l];
            for v in 0..m {
                let gv = &gm[v * l..(v + 1) * l];
                let s: f64 = fu.iter().zip(gv).map(|(a, b)| a * b).sum();
                total += s * s;
            }
        }
    } else {
        for i in 0..l {
            for j in 0..l {
                let a: f64 = (0..m).map(|u| fm[u * l + i] * fm[u * l + j]).sum();
                let b: f64 = (0..m).map(|v| gm[v * l + i] * gm[v * l + j]).sum();
                total += a * b;
            }
        }
    }
    total / ((m * m) as f64 * (l * l) as f64)
}

/// Mean and standard error of a per-sample statistic, evaluated in fixed
/// chunks with split seeds and reduced in chunk order.
fn sample_mean<F>(samples: usize, seed: u64, per_sample: F) -> Result<(f64, f64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if samples == 0 {
        return Err(Error::Parameter("need at least one base sample".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, c as u64));
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let v = per_sample(&mut rng)?;
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for p in partial {
        let (a, b) = p?;
        s += a;
        s2 += b;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EaEstimate {
    pub value: f64,
    pub std_error: f64,
    /// `a = ∫ 1_C ⊗ 1_D dλ`.
    pub a: f64,
    pub l: usize,
    pub m_window: usize,
    pub samples: usize,
    /// True when both copies share the whole base path, either because the
    /// window covers it or because the base is not a shift.
    pub shared_path: bool,
    pub flags: Vec<String>,
}

/// The EA statistic for the pair `(C, D)` of extension state sets.
///
/// `(1/L²) Σ_{i,j} ∫ E(T^i f T^j f | 𝒫_M) E(T^i g T^j g | 𝒫_M) dμ - a²` with
/// `f = 1_C`, `g = 1_D`, conditioning on base coordinates `0..=M`. Each
/// base sample is a pair of conditionally independent paths; fiber
/// averages are exact.
pub fn ea_statistic(
    ext: &SkewProduct,
    c: &StateSet,
    d: &StateSet,
    l: usize,
    m_window: usize,
    samples: usize,
    seed: u64,
) -> Result<EaEstimate> {
    if l == 0 {
        return Err(Error::Parameter("averaging length L must be >= 1".into()));
    }
    check_shape(ext, c)?;
    check_shape(ext, d)?;
    let f = StateFunction::indicator(ext, c)?;
    let g = StateFunction::indicator(ext, d)?;
    let a = factor_inner(ext, &f, &g);
    let m = ext.fiber_size() as usize;
    let base = ext.base();
    let is_shift = matches!(base, SystemModel::Bernoulli(_) | SystemModel::Markov(_));
    let mut flags = Vec::new();
    if !is_shift && m_window + 1 < l {
        flags.push("non-shift base: conditioning on the full base path".to_string());
    }
    let (mean, se) = sample_mean(samples, seed, |rng| {
        let (p1, p2) = conditioned_pair(base, l, m_window, rng)?;
        let fm = fiber_orbit_values(ext, &f, &p1);
        let gm = fiber_orbit_values(ext, &g, &p2);
        Ok(paired_square_mean(&fm, &gm, m, l))
    })?;
    Ok(EaEstimate {
        value: mean - a * a,
        std_error: se,
        a,
        l,
        m_window,
        samples,
        shared_path: !is_shift || m_window + 1 >= l,
        flags,
    })
}

/// Aggregates EA over a pair family and an `L` schedule.
///
/// Passes iff every pair's EA drops below `tol` at some `L`. The window
/// `M` defaults to `L` (full conditioning) when `m_window` is `None`.
#[allow(clippy::too_many_arguments)]
pub fn rwm_verdict(
    ext: &SkewProduct,
    pairs: &[(StateSet, StateSet)],
    l_schedule: &[usize],
    m_window: Option<usize>,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<DiagnosticReport> {
    if pairs.is_empty() || l_schedule.is_empty() {
        return Err(Error::Parameter(
            "need a nonempty pair family and L schedule".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..l_schedule.len()).map(move |k| (p, k)))
        .collect();
    let results: Vec<Result<EaEstimate>> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(p, k))| {
            let l = l_schedule[k];
            ea_statistic(
                ext,
                &pairs[p].0,
                &pairs[p].1,
                l,
                m_window.unwrap_or(l),
                samples,
                split_seed(seed, idx as u64),
            )
        })
        .collect();
    let mut report = DiagnosticReport::new("rwm");
    let mut passed = vec![false; pairs.len()];
    let mut min_ea = vec![f64::INFINITY; pairs.len()];
    for (res, &(p, k)) in results.into_iter().zip(&jobs) {
        let e = res?;
        passed[p] |= e.value < tol;
        min_ea[p] = min_ea[p].min(e.value);
        for fl in e.flags {
            if !report.flags.contains(&fl) {
                report.flags.push(fl);
            }
        }
        report.trace.push(TraceRow {
            series: p,
            x: l_schedule[k] as f64,
            value: e.value,
        });
    }
    let worst = min_ea.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    report.verdict = Some(passed.iter().all(|&b| b));
    report.seed = Some(seed);
    Ok(report
        .value("max_over_pairs_min_ea", worst)
        .value("pairs_passed", passed.iter().filter(|&&b| b).count() as f64)
        .param("pairs", pairs.len() as f64)
        .param("tol", tol)
        .param("samples", samples as f64)
        .param("M", m_window.map_or(-1.0, |m| m as f64))
        .param("fiber", ext.fiber_size() as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorStatistic {
    pub value: f64,
    pub std_error: f64,
    pub a: f64,
    pub n: usize,
    pub samples: usize,
}

/// `∫ |(1/N) Σ_{n<N} Pf_i(T^n x) Pf_j(T^n x) - a_ij|² dμ(x)` with `P` the
/// fiber average and `a_ij = ∫ Pf_i Pf_j`.
pub fn factor_rwm_statistic(
    ext: &SkewProduct,
    fi: &StateFunction,
    fj: &StateFunction,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<FactorStatistic> {
    if n == 0 {
        return Err(Error::Parameter("averaging length N must be >= 1".into()));
    }
    check_fn(ext, fi)?;
    check_fn(ext, fj)?;
    let a = factor_inner(ext, fi, fj);
    let prod: Vec<f64> = (0..ext.base_states())
        .map(|x| fi.fiber_average(x) * fj.fiber_average(x))
        .collect();
    let (value, std_error) = sample_mean(samples, seed, |rng| {
        let path = base_path(ext.base(), n, rng)?;
        let avg = path.iter().map(|&x| prod[x]).sum::<f64>() / n as f64;
        Ok((avg - a).powi(2))
    })?;
    Ok(FactorStatistic {
        value,
        std_error,
        a,
        n,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeMixing {
    pub n: usize,
    /// `‖E(T^n f·g | Y) - E(T^n f | Y) E(g | Y)‖₂`.
    pub covariance_form: f64,
    /// `‖E(T^n f·g̃ | Y)‖₂` with `g̃ = g - E(g | Y)`.
    pub centered_form: f64,
    /// Largest pointwise difference of the two integrands.
    pub identity_gap: f64,
    pub samples: usize,
}

/// Both forms of the relative-mixing statistic on common base samples.
pub fn relative_mixing_statistic(
    ext: &SkewProduct,
    f: &StateFunction,
    g: &StateFunction,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<RelativeMixing> {
    check_fn(ext, f)?;
    check_fn(ext, g)?;
    if samples == 0 {
        return Err(Error::Parameter("need at least one base sample".into()));
    }
    let g_tilde = g.centered();
    let m = ext.fiber_size() as usize;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Result<(f64, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, c as u64));
            let (mut sa, mut sb, mut gap) = (0.0, 0.0, 0.0f64);
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let path = base_path(ext.base(), n + 1, &mut rng)?;
                let (x0, xn) = (path[0], path[n]);
                let (mut fg, mut fsum, mut gsum, mut fgt) = (0.0, 0.0, 0.0, 0.0);
                for u0 in 0..m as u32 {
                    let mut u = u0;
                    for &x in &path[..n] {
                        u = ext.fiber_step(x, u);
                    }
                    let fv = f.value(xn, u);
                    fg += fv * g.value(x0, u0);
                    fsum += fv;
                    gsum += g.value(x0, u0);
                    fgt += fv * g_tilde.value(x0, u0);
                }
                let mf = m as f64;
                let a = fg / mf - (fsum / mf) * (gsum / mf);
                let b = fgt / mf;
                sa += a * a;
                sb += b * b;
                gap = gap.max((a - b).abs());
            }
            Ok((sa, sb, gap))
        })
        .collect();
    let (mut sa, mut sb, mut gap) = (0.0, 0.0, 0.0f64);
    for p in partial {
        let (a, b, g) = p?;
        sa += a;
        sb += b;
        gap = gap.max(g);
    }
    let count = samples as f64;
    Ok(RelativeMixing {
        n,
        covariance_form: (sa / count).sqrt(),
        centered_form: (sb / count).sqrt(),
        identity_gap: gap,
        samples,
    })
}

/// `∫ T^n(f⊗f)·(g̃⊗g̃) dλ` by direct simulation of the relative product,
/// averaging over independent starts drawn from `λ`.
pub fn relative_product_correlation(
    ext: &SkewProduct,
    f: &StateFunction,
    g: &StateFunction,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_fn(ext, f)?;
    check_fn(ext, g)?;
    let g_tilde = g.centered();
    let rel = relative_independent_product(&SystemModel::Skew(ext.clone()))?;
    let SystemModel::RelProduct(r) = &rel else {
        unreachable!("relative product of a skew product")
    };
    sample_mean(samples, seed, |rng| {
        let mut orbit = rel.orbit(rng.random())?;
        let (x0, u0, v0) = r.split(orbit.observe());
        for _ in 0..n {
            orbit.step()?;
        }
        let (xn, un, vn) = r.split(orbit.observe());
        Ok(f.value(xn, un) * f.value(xn, vn) * g_tilde.value(x0, u0) * g_tilde.value(x0, v0))
    })
}

/// Options shared by the conditional-law checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawCheckOptions {
    pub occupancy_floor: u64,
    pub exact_limit: usize,
}

impl Default for LawCheckOptions {
    fn default() -> Self {
        LawCheckOptions {
            occupancy_floor: OCCUPANCY_FLOOR,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLawCheck {
    pub metric: WordMetric,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    /// Mass of retained pasts whose conditional law is within `ε`.
    pub good_mass: f64,
    /// Mass of pasts below the occupancy floor.
    pub unresolved_mass: f64,
    /// Largest distance over retained pasts.
    pub worst_distance: f64,
    pub retained_pasts: usize,
    pub verdict: bool,
    pub bounded_distances: usize,
    pub undersampled: bool,
}

impl ConditionalLawCheck {
    pub fn report(&self) -> DiagnosticReport {
        let name = match self.metric {
            WordMetric::Dbar => "vwb",
            WordMetric::Fbar => "vlb",
        };
        let mut r = DiagnosticReport::new(name)
            .value("good_mass", self.good_mass)
            .value("unresolved_mass", self.unresolved_mass)
            .value("worst_distance", self.worst_distance)
            .value("retained_pasts", self.retained_pasts as f64)
            .param("N", self.n as f64)
            .param("k", self.k as f64)
            .param("eps", self.eps);
        r.verdict = Some(self.verdict);
        if self.undersampled {
            r.flags.push("undersampled".into());
        }
        if self.bounded_distances > 0 {
            r.flags.push(format!(
                "{} bracketed distances (upper bound used)",
                self.bounded_distances
            ));
        }
        r
    }
}

/// Compares the unconditional `N`-block law with the `N`-block law given
/// each `k`-past, under `metric`.
pub fn conditional_law_check(
    metric: WordMetric,
    sample: &[Symbol],
    n: usize,
    k: usize,
    eps: f64,
    opts: LawCheckOptions,
) -> Result<ConditionalLawCheck> {
    if n == 0 {
        return Err(Error::Parameter("block length N must be >= 1".into()));
    }
    let counts = BlockCounts::from_sample(sample, k + n)?;
    let total = counts.total() as f64;
    let mut unconditional: BTreeMap<Vec<Symbol>, f64> = BTreeMap::new();
    let mut by_past: BTreeMap<&[Symbol], Vec<(&[Symbol], u64)>> = BTreeMap::new();
    for (w, &c) in counts.counts() {
        *unconditional.entry(w[k..].to_vec()).or_insert(0.0) += c as f64 / total;
        by_past.entry(&w[..k]).or_default().push((&w[k..], c));
    }
    let uncond = WordDistribution::new(n, unconditional)?;
    let mut unresolved = 0u64;
    let retained: Vec<(u64, WordDistribution)> = by_past
        .into_values()
        .filter_map(|futures| {
            let c: u64 = futures.iter().map(|f| f.1).sum();
            if c < opts.occupancy_floor {
                unresolved += c;
                return None;
            }
            let w = futures
                .into_iter()
                .map(|(f, x)| (f.to_vec(), x as f64 / c as f64))
                .collect();
            Some(WordDistribution::new(n, w).map(|d| (c, d)))
        })
        .collect::<Result<_>>()?;
    let distances: Vec<Result<(f64, Method)>> = retained
        .par_iter()
        .map(|(_, d)| {
            distribution_distance(metric, &uncond, d, opts.exact_limit).map(|r| (r.upper, r.method))
        })
        .collect();
    let (mut good, mut worst, mut bounded) = (0u64, 0.0f64, 0);
    for ((c, _), d) in retained.iter().zip(distances) {
        let (dist, method) = d?;
        if method == Method::Bounded {
            bounded += 1;
        }
        worst = worst.max(dist);
        if dist < eps {
            good += c;
        }
    }
    let good_mass = good as f64 / total;
    Ok(ConditionalLawCheck {
        metric,
        n,
        k,
        eps,
        good_mass,
        unresolved_mass: unresolved as f64 / total,
        worst_distance: if retained.is_empty() { 1.0 } else { worst },
        retained_pasts: retained.len(),
        verdict: good_mass > 1.0 - eps,
        bounded_distances: bounded,
        undersampled: unresolved > 0 || opts.occupancy_floor < OCCUPANCY_FLOOR,
    })
}

pub fn vwb_statistic(
    sample: &[Symbol],
    n: usize,
    k: usize,
    eps: f64,
) -> Result<ConditionalLawCheck> {
    conditional_law_check(
        WordMetric::Dbar,
        sample,
        n,
        k,
        eps,
        LawCheckOptions::default(),
    )
}

pub fn vlb_statistic(
    sample: &[Symbol],
    n: usize,
    k: usize,
    eps: f64,
) -> Result<ConditionalLawCheck> {
    conditional_law_check(
        WordMetric::Fbar,
        sample,
        n,
        k,
        eps,
        LawCheckOptions::default(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntropyVlb {
    pub n: usize,
    pub eps: f64,
    pub g_mass: f64,
    pub members: Vec<Vec<Symbol>>,
    pub support: usize,
    pub verdict: bool,
    pub undersampled: bool,
}

impl ZeroEntropyVlb {
    pub fn report(&self) -> DiagnosticReport {
        let mut r = DiagnosticReport::new("vlb_zero_entropy")
            .value("g_mass", self.g_mass)
            .value("members", self.members.len() as f64)
            .value("support", self.support as f64)
            .param("N", self.n as f64)
            .param("eps", self.eps);
        r.verdict = Some(self.verdict);
        if self.undersampled {
            r.flags.push("undersampled".into());
        }
        r
    }
}

/// Greedy mass-descending growth of a set of `N`-blocks that are pairwise
/// within `ε` in `f̄`.
pub fn vlb_zero_entropy(sample: &[Symbol], n: usize, eps: f64) -> Result<ZeroEntropyVlb> {
    let counts = BlockCounts::from_sample(sample, n)?;
    let total = counts.total() as f64;
    let mut blocks: Vec<(&Vec<Symbol>, u64)> =
        counts.counts().iter().map(|(w, &c)| (w, c)).collect();
    blocks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut members: Vec<&Vec<Symbol>> = Vec::new();
    let mut mass = 0u64;
    let mut thin = false;
    for (w, c) in &blocks {
        let fits = members
            .iter()
            .all(|m| fbar_symbols(m, w).map(|d| d < eps).unwrap_or(false));
        if fits {
            members.push(w);
            mass += c;
            thin |= *c < OCCUPANCY_FLOOR;
        }
    }
    let g_mass = mass as f64 / total;
    Ok(ZeroEntropyVlb {
        n,
        eps,
        g_mass,
        members: members.into_iter().cloned().collect(),
        support: blocks.len(),
        verdict: g_mass > 1.0 - eps,
        undersampled: thin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KCheck {
    pub n: usize,
    pub k0: usize,
    pub k1: usize,
    pub eps: f64,
    pub delta: f64,
    /// Measured per-step entropy `H(X_0 | h_past-past)`.
    pub h_rate: f64,
    /// `min(k1, longest well-sampled past)`.
    pub h_past: usize,
    /// `H((N+k0)-block | k1-past)`.
    pub cond1_lhs: f64,
    /// `(N + k0) ĥ + δ`.
    pub cond1_rhs: f64,
    /// `H(N-block | past at times -k1..=-k0)`.
    pub cond2_lhs: f64,
    /// `H(N-block) - ε`.
    pub cond2_rhs: f64,
    pub cond1: bool,
    pub cond2: bool,
    pub verdict: bool,
    pub undersampled: bool,
}

impl KCheck {
    pub fn report(&self) -> DiagnosticReport {
        let mut r = DiagnosticReport::new("kcheck")
            .value("h_rate", self.h_rate)
            .value("cond1_lhs", self.cond1_lhs)
            .value("cond1_rhs", self.cond1_rhs)
            .value("cond2_lhs", self.cond2_lhs)
            .value("cond2_rhs", self.cond2_rhs)
            .value("cond1", self.cond1 as u8 as f64)
            .value("cond2", self.cond2 as u8 as f64)
            .param("N", self.n as f64)
            .param("k0", self.k0 as f64)
            .param("k1", self.k1 as f64)
            .param("h_past", self.h_past as f64)
            .param("eps", self.eps)
            .param("delta", self.delta);
        r.verdict = Some(self.verdict);
        if self.undersampled {
            r.flags.push("undersampled".into());
        }
        r
    }
}

/// Finite K check.
///
/// Condition (1) bounds the entropy of the `(N+k0)`-block following a
/// `k1`-past by `(N+k0)·ĥ + δ`, with `ĥ` measured on the same sample using
/// the longest past (at most `k1`) that the sample resolves.
/// Condition (2) asks that the `N`-block keep all but `ε` of its entropy
/// given the remote past at times `-k1..=-k0`.
pub fn k_property_check(
    sample: &[Symbol],
    n: usize,
    k0: usize,
    k1: usize,
    eps: f64,
    delta: f64,
) -> Result<KCheck> {
    if k0 == 0 || k1 <= k0 {
        return Err(Error::Parameter(format!(
            "need k1 > k0 >= 1, got k0={k0}, k1={k1}"
        )));
    }
    let h_past = k1.min(max_resolved_past(sample, 1));
    let h = conditional_block_entropy(sample, 1, h_past)?;
    let c1 = conditional_block_entropy(sample, n + k0, k1)?;
    let hn = conditional_block_entropy(sample, n, 0)?;
    let c2 = gapped_conditional_entropy(sample, n, k1 - k0 + 1, k0 - 1)?;
    let cond1_rhs = (n + k0) as f64 * h.value + delta;
    let cond2_rhs = hn.value - eps;
    let cond1 = c1.value < cond1_rhs;
    let cond2 = c2.value > cond2_rhs;
    Ok(KCheck {
        n,
        k0,
        k1,
        eps,
        delta,
        h_rate: h.value,
        h_past,
        cond1_lhs: c1.value,
        cond1_rhs,
        cond2_lhs: c2.value,
        cond2_rhs,
        cond1,
        cond2,
        verdict: cond1 && cond2,
        undersampled: h.undersampled || c1.undersampled || c2.undersampled,
    })
}
