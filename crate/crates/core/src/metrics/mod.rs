//! The weak metric on automorphisms and the `d̄`/`f̄` metrics on words and
//! on word distributions.
//!
//! Distances between distributions are coupling infima. Small problems are
//! solved exactly; larger ones return a bracket `[lower, upper]` and say so.

pub mod lcs;
pub mod transport;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dimension, Result};
use crate::symbolic::{Measure, StateSet, Symbol, Word, WordDistribution};
use crate::systems::FinitePermutation;
use transport::{CostMatrix, TransportPlan};

/// Largest cost matrix (entries) solved exactly by default.
pub const DEFAULT_EXACT_LIMIT: usize = 10_000;

/// `D(S, T) = Σ_{k<terms} 2^{-(k+1)} (μ(S A_k △ T A_k) + μ(S⁻¹A_k △ T⁻¹A_k))`
/// under the uniform measure.
pub fn weak_distance(
    s: &FinitePermutation,
    t: &FinitePermutation,
    sets: &[StateSet],
    terms: usize,
) -> Result<f64> {
    if s.len() != t.len() {
        return Err(dimension("weak distance", s.len(), t.len()));
    }
    if sets.is_empty() || terms > sets.len() {
        return Err(crate::Error::Parameter(format!(
            "need 1 <= terms <= {} sets, got {terms}",
            sets.len()
        )));
    }
    let mu = Measure::uniform(s.len())?;
    let (si, ti) = (s.inverse(), t.inverse());
    let mut total = 0.0;
    let mut weight = 1.0;
    for a in &sets[..terms] {
        if a.space_size() != s.len() {
            return Err(dimension("weak distance set", s.len(), a.space_size()));
        }
        weight *= 0.5;
        let fwd = a
            .image(|i| s.apply(i))
            .symmetric_difference(&a.image(|i| t.apply(i)));
        let back = a
            .image(|i| si.apply(i))
            .symmetric_difference(&a.image(|i| ti.apply(i)));
        total += weight * (mu.of(&fwd) + mu.of(&back));
    }
    Ok(total)
}

/// Normalized Hamming distance of equal-length symbol strings.
pub fn hamming_fraction(u: &[Symbol], v: &[Symbol]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(dimension("word length", u.len(), v.len()));
    }
    let diff = u.iter().zip(v).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / u.len() as f64)
}

/// `1 - LCS(u, v)/n` for equal-length symbol strings.
pub fn fbar_symbols(u: &[Symbol], v: &[Symbol]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(dimension("word length", u.len(), v.len()));
    }
    Ok((u.len() - lcs::lcs_length(u, v)) as f64 / u.len() as f64)
}

pub fn dbar_words(u: &Word, v: &Word) -> Result<f64> {
    hamming_fraction(u.symbols(), v.symbols())
}

pub fn fbar_words(u: &Word, v: &Word) -> Result<f64> {
    fbar_symbols(u.symbols(), v.symbols())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordMetric {
    Dbar,
    Fbar,
}

impl WordMetric {
    pub fn cost(self, u: &[Symbol], v: &[Symbol]) -> f64 {
        match self {
            WordMetric::Dbar => hamming_fraction(u, v),
            WordMetric::Fbar => fbar_symbols(u, v),
        }
        .expect("equal lengths checked by caller")
    }
}

/// A coupling of two word distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub p_words: Vec<Vec<Symbol>>,
    pub q_words: Vec<Vec<Symbol>>,
    /// `(index into p_words, index into q_words, mass)`.
    pub joint: Vec<(usize, usize, f64)>,
}

impl Coupling {
    fn from_plan(p: &WordDistribution, q: &WordDistribution, plan: TransportPlan) -> Self {
        Coupling {
            p_words: p.words().into_iter().map(<[Symbol]>::to_vec).collect(),
            q_words: q.words().into_iter().map(<[Symbol]>::to_vec).collect(),
            joint: plan.entries,
        }
    }

    pub fn p_marginal(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.p_words.len()];
        for &(i, _, w) in &self.joint {
            s[i] += w;
        }
        s
    }

    pub fn q_marginal(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.q_words.len()];
        for &(_, j, w) in &self.joint {
            s[j] += w;
        }
        s
    }
}

/// Result of a distribution distance, with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub metric: WordMetric,
    /// Exact value, or the upper end of the bracket when bounded.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub support_p: usize,
    pub support_q: usize,
    #[serde(skip)]
    pub coupling: Option<Coupling>,
}

fn cost_matrix(metric: WordMetric, p: &[&[Symbol]], q: &[&[Symbol]]) -> CostMatrix {
    let data: Vec<f64> = p
        .par_iter()
        .flat_map_iter(|u| q.iter().map(move |v| metric.cost(u, v)))
        .collect();
    CostMatrix {
        rows: p.len(),
        cols: q.len(),
        data,
    }
}

/// Lower bounds from one-coordinate marginals.
///
/// For `d̄`, every coupling mismatches coordinate `i` with probability at
/// least the total variation of the `i`-th marginals. For `f̄`, an LCS is
/// at most `Σ_a min(#a(u), #a(v))`, which bounds `f̄` below by half the `ℓ¹`
/// gap of letter frequencies; averaging gives the total variation of the
/// pooled one-coordinate marginals.
fn marginal_lower_bound(metric: WordMetric, p: &WordDistribution, q: &WordDistribution) -> f64 {
    let n = p.length();
    let tv = |a: &std::collections::BTreeMap<Symbol, f64>,
              b: &std::collections::BTreeMap<Symbol, f64>| {
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
        0.5 * keys
            .into_iter()
            .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>()
    };
    let pooled_tv = {
        let mut pa = std::collections::BTreeMap::new();
        let mut qa = std::collections::BTreeMap::new();
        for i in 0..n {
            for (k, w) in p.coordinate_marginal(i) {
                *pa.entry(k).or_insert(0.0) += w / n as f64;
            }
            for (k, w) in q.coordinate_marginal(i) {
                *qa.entry(k).or_insert(0.0) += w / n as f64;
            }
        }
        tv(&pa, &qa)
    };
    match metric {
        WordMetric::Fbar => pooled_tv,
        WordMetric::Dbar => {
            let per_coordinate = (0..n)
                .map(|i| tv(&p.coordinate_marginal(i), &q.coordinate_marginal(i)))
                .sum::<f64>()
                / n as f64;
            per_coordinate.max(pooled_tv)
        }
    }
}

/// Coupling distance between two `n`-block distributions under `metric`.
pub fn distribution_distance(
    metric: WordMetric,
    p: &WordDistribution,
    q: &WordDistribution,
    exact_limit: usize,
) -> Result<DistanceReport> {
    if p.length() != q.length() {
        return Err(dimension(
            "distribution block length",
            p.length(),
            q.length(),
        ));
    }
    let (pw, qw) = (p.words(), q.words());
    let (a, b) = (p.probabilities(), q.probabilities());
    let (sp, sq) = (pw.len(), qw.len());
    if sp.saturating_mul(sq) <= exact_limit {
        let c = cost_matrix(metric, &pw, &qw);
        let plan = transport::solve(&a, &b, &c)?;
        let v = plan.cost.max(0.0);
        return Ok(DistanceReport {
            metric,
            value: v,
            lower: v,
            upper: v,
            method: Method::Exact,
            support_p: sp,
            support_q: sq,
            coupling: Some(Coupling::from_plan(p, q, plan)),
        });
    }
    let c = cost_matrix(metric, &pw, &qw);
    let plan = transport::greedy_upper_bound(&a, &b, &c);
    let upper = plan.cost;
    let lower = marginal_lower_bound(metric, p, q).min(upper);
    log::info!("{metric:?} distance bracketed on a {sp}x{sq} support");
    Ok(DistanceReport {
        metric,
        value: upper,
        lower,
        upper,
        method: Method::Bounded,
        support_p: sp,
        support_q: sq,
        coupling: Some(Coupling::from_plan(p, q, plan)),
    })
}

pub fn dbar_distributions(
    p: &WordDistribution,
    q: &WordDistribution,
    exact_limit: usize,
) -> Result<DistanceReport> {
    distribution_distance(WordMetric::Dbar, p, q, exact_limit)
}

pub fn fbar_distributions(
    p: &WordDistribution,
    q: &WordDistribution,
    exact_limit: usize,
) -> Result<DistanceReport> {
    distribution_distance(WordMetric::Fbar, p, q, exact_limit)
}
