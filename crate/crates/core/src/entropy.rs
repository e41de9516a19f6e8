//! Block, conditional and analytic entropies, plug-in entropy-rate
//! estimates, and ε-independence of partitions.
//!
//! All values are in nats. Empirical estimates count sliding windows of a
//! single sample; every conditional quantity is computed from one window
//! table so that the joint and its marginals are consistent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{Symbol, WordDistribution};
use crate::systems::SystemModel;

/// Undersampling threshold: flag when `alphabet^window > sample / 50`.
pub const UNDERSAMPLING_RATIO: f64 = 50.0;

pub fn nats_to_bits(x: f64) -> f64 {
    x / std::f64::consts::LN_2
}

fn plogp_sum(weights: impl Iterator<Item = f64>) -> f64 {
    let h: f64 = weights.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
    h.max(0.0)
}

/// Shannon entropy of a block distribution.
pub fn block_entropy(dist: &WordDistribution) -> f64 {
    plogp_sum(dist.iter().map(|(_, p)| p))
}

/// Shannon entropy of a probability vector.
pub fn shannon(p: &[f64]) -> f64 {
    plogp_sum(p.iter().copied())
}

/// A plug-in estimate with its bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Future block length `N`.
    pub block_length: usize,
    /// Past length `k` (0 for unconditioned blocks).
    pub past_length: usize,
    /// Gap between past and future, if any.
    pub gap: usize,
    pub sample_length: usize,
    pub windows: u64,
    /// Delta-method standard error, ignoring serial correlation.
    pub std_error: f64,
    /// Plug-in value plus the Miller–Madow bias correction.
    pub miller_madow: f64,
    pub undersampled: bool,
}

impl EntropyEstimate {
    /// Same estimate divided by the block length.
    pub fn per_symbol(&self) -> EntropyEstimate {
        let n = self.block_length.max(1) as f64;
        EntropyEstimate {
            value: self.value / n,
            std_error: self.std_error / n,
            miller_madow: self.miller_madow / n,
            ..self.clone()
        }
    }
}

/// Sliding-window counts keyed by a base-`alphabet` integer code.
struct WindowTable {
    alphabet: u128,
    window: usize,
    counts: Vec<(u128, u64)>,
    total: u64,
}

fn alphabet_of(sample: &[Symbol]) -> u32 {
    sample.iter().copied().max().map_or(1, |m| m as u32 + 1)
}

impl WindowTable {
    fn build(sample: &[Symbol], window: usize, alphabet: u32) -> Result<Self> {
        if window == 0 {
            return Err(Error::Parameter("window length must be >= 1".into()));
        }
        if sample.len() < window {
            return Err(Error::InsufficientData {
                needed: window,
                available: sample.len(),
            });
        }
        let a = alphabet.max(1) as u128;
        let top = (0..window - 1).try_fold(1u128, |acc, _| acc.checked_mul(a));
        let Some(top) = top.filter(|t| t.checked_mul(a).is_some()) else {
            return Err(Error::Parameter(format!(
                "alphabet {alphabet} with window {window} exceeds the block code range"
            )));
        };
        // code = Σ_i s_{t+i} a^{window-1-i}, so the first symbol is most significant.
        let mut codes = Vec::with_capacity(sample.len() - window + 1);
        let mut code = 0u128;
        for &s in &sample[..window] {
            code = code * a + s as u128;
        }
        codes.push(code);
        for t in window..sample.len() {
            code = (code - sample[t - window] as u128 * top) * a + sample[t] as u128;
            codes.push(code);
        }
        let counts = run_lengths(codes);
        Ok(WindowTable {
            alphabet: a,
            window,
            counts,
            total: (sample.len() - window + 1) as u64,
        })
    }
}

/// Sorts and collapses equal keys into `(key, count)` pairs.
fn run_lengths<K: Ord + Copy>(mut keys: Vec<K>) -> Vec<(K, u64)> {
    keys.sort_unstable();
    let mut out: Vec<(K, u64)> = Vec::new();
    for k in keys {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// `H(future | past)` from a window table, where `past` and `future` are
/// disjoint position ranges of the window. Empty `past` gives `H(future)`.
fn conditional_from_table(
    table: &WindowTable,
    past: std::ops::Range<usize>,
    future: std::ops::Range<usize>,
) -> (f64, f64, f64) {
    let n = table.total as f64;
    let a = table.alphabet;
    let (p_low, p_width) = (
        a.pow((table.window - past.end) as u32),
        a.pow(past.len() as u32),
    );
    let (f_low, f_width) = (
        a.pow((table.window - future.end) as u32),
        a.pow(future.len() as u32),
    );
    let mut joint: Vec<((u128, u128), u64)> = Vec::with_capacity(table.counts.len());
    for &(code, c) in &table.counts {
        joint.push((((code / p_low) % p_width, (code / f_low) % f_width), c));
    }
    joint.sort_unstable();
    let mut rows: Vec<((u128, u128), u64)> = Vec::with_capacity(joint.len());
    for (k, c) in joint {
        match rows.last_mut() {
            Some((last, lc)) if *last == k => *lc += c,
            _ => rows.push((k, c)),
        }
    }
    // Rows are grouped by past key; each group's total is the past count.
    let (mut h, mut h2) = (0.0, 0.0);
    let mut pasts = 0usize;
    let mut i = 0;
    while i < rows.len() {
        let pk = rows[i].0 .0;
        let j = i + rows[i..].iter().take_while(|r| r.0 .0 == pk).count();
        let cp: u64 = rows[i..j].iter().map(|r| r.1).sum();
        for &(_, c) in &rows[i..j] {
            let p = c as f64 / n;
            let l = -(c as f64 / cp as f64).ln();
            h += p * l;
            h2 += p * l * l;
        }
        pasts += 1;
        i = j;
    }
    let var = (h2 - h * h).max(0.0) / n;
    let correction = (rows.len() as f64 - pasts as f64) / (2.0 * n);
    (h.max(0.0), var.sqrt(), correction)
}

fn undersampled(alphabet: u32, window: usize, sample_len: usize) -> bool {
    (window as f64) * (alphabet.max(1) as f64).ln() > (sample_len as f64 / UNDERSAMPLING_RATIO).ln()
}

/// Longest past `k` for which the `(N + k)`-window estimate is not
/// undersampled at the sample's alphabet; 0 when none is.
pub fn max_resolved_past(sample: &[Symbol], n: usize) -> usize {
    let a = alphabet_of(sample);
    (0..sample.len())
        .take_while(|&k| !undersampled(a, n + k, sample.len()))
        .last()
        .unwrap_or(0)
}

/// `H(N-block | k-past)` from the sample's `(N + k)`-window counts.
pub fn conditional_block_entropy(sample: &[Symbol], n: usize, k: usize) -> Result<EntropyEstimate> {
    gapped_conditional_entropy(sample, n, k, 0)
}

/// `H(N-block | past k-block ending `gap` symbols before the future)`.
pub fn gapped_conditional_entropy(
    sample: &[Symbol],
    n: usize,
    k: usize,
    gap: usize,
) -> Result<EntropyEstimate> {
    gapped_with_alphabet(sample, alphabet_of(sample), n, k, gap)
}

pub(crate) fn gapped_with_alphabet(
    sample: &[Symbol],
    alphabet: u32,
    n: usize,
    k: usize,
    gap: usize,
) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::Parameter("block length N must be >= 1".into()));
    }
    let window = k + gap + n;
    let table = WindowTable::build(sample, window, alphabet)?;
    let (value, se, corr) = conditional_from_table(&table, 0..k, k + gap..window);
    let flag = undersampled(alphabet, window, sample.len());
    if flag {
        log::warn!("entropy estimate undersampled: alphabet {alphabet}, window {window}");
    }
    Ok(EntropyEstimate {
        value,
        block_length: n,
        past_length: k,
        gap,
        sample_length: sample.len(),
        windows: table.total,
        std_error: se,
        miller_madow: value + corr,
        undersampled: flag,
    })
}

/// Plug-in `H_N / N`.
pub fn entropy_rate_estimate(sample: &[Symbol], n: usize) -> Result<EntropyEstimate> {
    Ok(conditional_block_entropy(sample, n, 0)?.per_symbol())
}

/// `H_N / N` for each `N`, with a flag when the sequence increases by more
/// than two standard errors anywhere.
pub fn entropy_rate_profile(
    sample: &[Symbol],
    ns: &[usize],
) -> Result<(Vec<EntropyEstimate>, bool)> {
    let est: Vec<EntropyEstimate> = ns
        .iter()
        .map(|&n| entropy_rate_estimate(sample, n))
        .collect::<Result<_>>()?;
    let nonmonotone = est
        .windows(2)
        .any(|w| w[1].value > w[0].value + 2.0 * (w[0].std_error + w[1].std_error));
    Ok((est, nonmonotone))
}

/// Exact entropy where it is known in closed form.
pub fn analytic_entropy(model: &SystemModel) -> Option<f64> {
    match model {
        SystemModel::Bernoulli(b) => Some(shannon(b.probabilities())),
        SystemModel::Markov(m) => Some(
            m.stationary()
                .iter()
                .zip(m.matrix())
                .map(|(pi, row)| pi * shannon(row))
                .sum(),
        ),
        SystemModel::Rotation(_) | SystemModel::Permutation(_) => Some(0.0),
        _ => None,
    }
}

/// A joint distribution of two partitions: `weights[i][j] = μ(P_i ∩ Q_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    weights: Vec<Vec<f64>>,
}

impl JointTable {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let cols = weights.first().map_or(0, Vec::len);
        if weights.is_empty() || cols == 0 {
            return Err(Error::Validation("empty joint table".into()));
        }
        if weights.iter().any(|r| r.len() != cols) {
            return Err(Error::Validation("ragged joint table".into()));
        }
        let flat: Vec<f64> = weights.iter().flatten().copied().collect();
        crate::symbolic::validate_probability_vector(&flat, 1e-9)?;
        Ok(JointTable { weights })
    }

    /// Joint law of two labelings of a sample.
    pub fn from_labels(p: &[Symbol], q: &[Symbol]) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() {
            return Err(crate::error::dimension("joint labels", p.len(), q.len()));
        }
        let (a, b) = (alphabet_of(p) as usize, alphabet_of(q) as usize);
        let mut w = vec![vec![0.0; b]; a];
        for (&x, &y) in p.iter().zip(q) {
            w[x as usize][y as usize] += 1.0;
        }
        let n = p.len() as f64;
        w.iter_mut().flatten().for_each(|x| *x /= n);
        JointTable::new(w)
    }

    pub fn product(p: &[f64], q: &[f64]) -> Result<Self> {
        JointTable::new(
            p.iter()
                .map(|a| q.iter().map(|b| a * b).collect())
                .collect(),
        )
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn p_marginal(&self) -> Vec<f64> {
        self.weights.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn q_marginal(&self) -> Vec<f64> {
        (0..self.weights[0].len())
            .map(|j| self.weights.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn entropy_p(&self) -> f64 {
        shannon(&self.p_marginal())
    }

    /// `H(P | Q)`.
    pub fn conditional_entropy_p_given_q(&self) -> f64 {
        let flat: Vec<f64> = self.weights.iter().flatten().copied().collect();
        (shannon(&flat) - shannon(&self.q_marginal())).max(0.0)
    }

    pub fn mutual_information(&self) -> f64 {
        (self.entropy_p() - self.conditional_entropy_p_given_q()).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsIndependence {
    pub verdict: bool,
    /// Columns `j` with `Σ_i |μ(P_i|Q_j) - μ(P_i)| < ε`.
    pub witness: Vec<usize>,
    pub witness_mass: f64,
    /// Per-column deviation; `None` for null columns.
    pub column_deviation: Vec<Option<f64>>,
    pub null_columns: Vec<usize>,
    /// `witness_mass - (1 - ε)`.
    pub mass_slack: f64,
    /// `ε - max deviation over the witness` (ε if the witness is empty).
    pub deviation_slack: f64,
}

/// Tests whether `P` is ε-independent of `Q`.
pub fn eps_independence(joint: &JointTable, eps: f64) -> EpsIndependence {
    let p = joint.p_marginal();
    let q = joint.q_marginal();
    let mut witness = Vec::new();
    let mut null_columns = Vec::new();
    let mut column_deviation = Vec::with_capacity(q.len());
    let mut mass = 0.0;
    let mut worst: f64 = 0.0;
    for (j, &qj) in q.iter().enumerate() {
        if qj <= 0.0 {
            null_columns.push(j);
            column_deviation.push(None);
            continue;
        }
        let dev: f64 = (0..p.len())
            .map(|i| (joint.weights[i][j] / qj - p[i]).abs())
            .sum();
        column_deviation.push(Some(dev));
        if dev < eps {
            witness.push(j);
            mass += qj;
            worst = worst.max(dev);
        }
    }
    EpsIndependence {
        verdict: mass > 1.0 - eps,
        witness,
        witness_mass: mass,
        column_deviation,
        null_columns,
        mass_slack: mass - (1.0 - eps),
        deviation_slack: eps - worst,
    }
}

/// Pinsker floor on the information of any joint that fails ε-independence.
///
/// A failing joint puts mass `>= ε` on columns with `ℓ¹` deviation `>= ε`,
/// each contributing at least `ε²/2` nats of divergence.
pub fn pinsker_delta(eps: f64) -> f64 {
    eps.powi(3) / 2.0
}

/// Smallest mutual information found over a grid of failing joints with
/// `cells` rows: one column of mass `w >= ε` tilted by exactly `ε` in `ℓ¹`,
/// and one compensating column.
pub fn delta_grid_search(eps: f64, cells: usize) -> f64 {
    assert!(cells >= 2 && eps > 0.0 && eps < 1.0);
    let steps = 40;
    let mut best = f64::INFINITY;
    let marginals = simplex_grid(cells, 12);
    for p in &marginals {
        for a in 0..cells {
            for b in 0..cells {
                if a == b {
                    continue;
                }
                for ws in 0..=steps {
                    let w = eps + (1.0 - eps) * 0.999 * ws as f64 / steps as f64;
                    // bad column: move ε/2 from b to a
                    let mut bad = p.clone();
                    bad[a] += eps / 2.0;
                    bad[b] -= eps / 2.0;
                    if bad[b] < 0.0 {
                        continue;
                    }
                    // compensating column keeps the P marginal
                    let good: Vec<f64> = p
                        .iter()
                        .zip(&bad)
                        .map(|(pi, bi)| (pi - w * bi) / (1.0 - w))
                        .collect();
                    if good.iter().any(|&g| g < 0.0) {
                        continue;
                    }
                    let weights: Vec<Vec<f64>> = (0..cells)
                        .map(|i| vec![w * bad[i], (1.0 - w) * good[i]])
                        .collect();
                    if let Ok(j) = JointTable::new(weights) {
                        best = best.min(j.mutual_information());
                    }
                }
            }
        }
    }
    best
}

fn simplex_grid(cells: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(resolution, cells, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .filter(|v| v.iter().all(|&x| x > 0))
        .map(|v| {
            v.into_iter()
                .map(|x| x as f64 / resolution as f64)
                .collect()
        })
        .collect()
}

/// The shipped `δ(ε, |𝒫|)`: half the grid-search minimum, never above
/// the Pinsker floor.
pub fn delta_for(eps: f64, cells: usize) -> f64 {
    (0.5 * delta_grid_search(eps, cells)).min(pinsker_delta(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::sample_trajectory;
    use rand::{Rng, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn block_entropy_examples() {
        let pm = WordDistribution::point_mass(&[0, 1]).unwrap();
        assert_eq!(block_entropy(&pm), 0.0);
        let u = WordDistribution::uniform_on(&[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        assert!(close(block_entropy(&u), 4f64.ln(), 1e-12));
        let d = WordDistribution::from_pairs(1, [(vec![0], 0.5), (vec![1], 0.25), (vec![2], 0.25)])
            .unwrap();
        assert!(close(block_entropy(&d), 1.5 * 2f64.ln(), 1e-12));
    }

    #[test]
    fn k_zero_is_block_entropy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s: Vec<Symbol> = (0..5000).map(|_| rng.random_range(0..3)).collect();
        let est = conditional_block_entropy(&s, 3, 0).unwrap();
        let d = crate::symbolic::empirical_word_distribution(&s, 3).unwrap();
        assert!(close(est.value, block_entropy(&d), 1e-12));
    }

    #[test]
    fn iid_conditional_entropy_matches_n_log_2() {
        let coin = SystemModel::bernoulli(vec![0.5, 0.5]).unwrap();
        let t = sample_trajectory(&coin, &coin.generator(), 1_000_000, 7, 0).unwrap();
        let est = conditional_block_entropy(&t.labels, 3, 5).unwrap();
        assert!(close(est.value, 3.0 * 2f64.ln(), 0.02));
        assert!(!est.undersampled);
    }

    #[test]
    fn period_two_past_determines_future() {
        let s: Vec<Symbol> = (0..1000).map(|i| (i % 2) as Symbol).collect();
        assert!(conditional_block_entropy(&s, 4, 1).unwrap().value.abs() < 1e-12);
        assert_eq!(entropy_rate_estimate(&[3; 100], 5).unwrap().value, 0.0);
    }

    #[test]
    fn insufficient_data() {
        assert!(matches!(
            conditional_block_entropy(&[0, 1, 0], 3, 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn undersampling_flag() {
        let s: Vec<Symbol> = (0..1000).map(|i| (i % 2) as Symbol).collect();
        assert!(conditional_block_entropy(&s, 5, 5).unwrap().undersampled);
        assert!(!conditional_block_entropy(&s, 2, 2).unwrap().undersampled);
    }

    #[test]
    fn analytic_entropies() {
        let coin = SystemModel::bernoulli(vec![0.5, 0.5]).unwrap();
        assert!(close(analytic_entropy(&coin).unwrap(), 2f64.ln(), 1e-15));
        let perm = SystemModel::permutation(vec![2, 0, 1]).unwrap();
        assert_eq!(analytic_entropy(&perm), Some(0.0));
        let q: f64 = 0.2;
        let mk = SystemModel::markov(vec![vec![1.0 - q, q], vec![q, 1.0 - q]]).unwrap();
        let expect = -q * q.ln() - (1.0 - q) * (1.0 - q).ln();
        assert!(close(analytic_entropy(&mk).unwrap(), expect, 1e-12));
        let t = sample_trajectory(&mk, &mk.generator(), 1_000_000, 3, 0).unwrap();
        let est = conditional_block_entropy(&t.labels, 1, 1).unwrap();
        assert!(close(est.value, expect, 0.01));
    }

    #[test]
    fn eps_independence_examples() {
        let prod = JointTable::product(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        let r = eps_independence(&prod, 1e-6);
        assert!(r.verdict);
        assert_eq!(r.witness, vec![0, 1, 2]);

        let diag = JointTable::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let r = eps_independence(&diag, 0.1);
        assert!(!r.verdict);
        assert!(close(r.column_deviation[0].unwrap(), 1.0, 1e-12));

        let mixed: Vec<Vec<f64>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| 0.99 * 0.25 + if i == j { 0.005 } else { 0.0 })
                    .collect()
            })
            .collect();
        let r = eps_independence(&JointTable::new(mixed).unwrap(), 0.1);
        assert!(r.verdict);
        // each column moves 0.01 in total variation sum
        assert!(close(r.column_deviation[0].unwrap(), 0.01, 1e-12));
    }

    #[test]
    fn null_columns_are_reported() {
        let j = JointTable::new(vec![vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        let r = eps_independence(&j, 0.1);
        assert_eq!(r.null_columns, vec![1]);
        assert!(r.verdict);
    }

    #[test]
    fn conditioning_reduces_entropy_on_exact_joints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
                .collect();
            let s: f64 = w.iter().flatten().sum();
            let j = JointTable::new(
                w.into_iter()
                    .map(|r| r.into_iter().map(|x| x / s).collect())
                    .collect(),
            )
            .unwrap();
            assert!(j.conditional_entropy_p_given_q() <= j.entropy_p() + 1e-12);
        }
        let prod = JointTable::product(&[0.1, 0.9], &[0.4, 0.6]).unwrap();
        assert!(close(
            prod.conditional_entropy_p_given_q(),
            prod.entropy_p(),
            1e-12
        ));
    }

    #[test]
    fn grid_search_delta_respects_pinsker() {
        for &eps in &[0.05, 0.1, 0.2, 0.3] {
            for cells in 2..=3 {
                let grid = delta_grid_search(eps, cells);
                assert!(
                    grid >= pinsker_delta(eps) * (1.0 - 1e-9),
                    "eps {eps}: {grid}"
                );
                assert!(delta_for(eps, cells) <= pinsker_delta(eps));
            }
        }
    }

    #[test]
    fn delta_bridge_on_random_joints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let eps = 0.2;
        let delta = delta_for(eps, 2);
        let mut checked = 0;
        for _ in 0..20_000 {
            let cols = rng.random_range(1..=4);
            let q: Vec<f64> = (0..cols).map(|_| rng.random_range(0.01..1.0)).collect();
            let qs: f64 = q.iter().sum();
            let base: f64 = rng.random_range(0.05..0.95);
            let weights: Vec<Vec<f64>> = {
                let cond: Vec<f64> = (0..cols)
                    .map(|_| (base + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0))
                    .collect();
                vec![
                    (0..cols).map(|j| q[j] / qs * cond[j]).collect(),
                    (0..cols).map(|j| q[j] / qs * (1.0 - cond[j])).collect(),
                ]
            };
            let j = JointTable::new(weights).unwrap();
            if j.conditional_entropy_p_given_q() > j.entropy_p() - delta {
                checked += 1;
                assert!(eps_independence(&j, eps).verdict);
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn chain_rule_on_exact_markov_blocks() {
        // Exact N-block laws of a 3-state chain; H_N equals the sum of
        // one-step conditionals H(X_j | X_0..X_{j-1}).
        let p = [[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.4, 0.1, 0.5]];
        let mk = SystemModel::markov(p.iter().map(|r| r.to_vec()).collect()).unwrap();
        let pi = mk.observable_measure();
        let block = |n: usize| -> Vec<f64> {
            let mut out = Vec::new();
            for code in 0..3usize.pow(n as u32) {
                let mut w = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    w.push(c % 3);
                    c /= 3;
                }
                let mut pr = pi[w[0]];
                for t in 1..n {
                    pr *= p[w[t - 1]][w[t]];
                }
                out.push(pr);
            }
            out
        };
        for n in 1..=5 {
            let hn = shannon(&block(n));
            // H(X_j | X_0..X_{j-1}) from the exact (j+1)-block joint table
            let chain: f64 = (0..n)
                .map(|j| {
                    let b = block(j + 1);
                    let past = 3usize.pow(j as u32);
                    let w: Vec<Vec<f64>> = (0..3)
                        .map(|x| (0..past).map(|c| b[c + x * past]).collect())
                        .collect();
                    JointTable::new(w).unwrap().conditional_entropy_p_given_q()
                })
                .sum();
            assert!(close(hn, chain, 1e-9));
            let markov_form = shannon(&pi) + (n - 1) as f64 * analytic_entropy(&mk).unwrap();
            assert!(close(hn, markov_form, 1e-9));
        }
    }
}
