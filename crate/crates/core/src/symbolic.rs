//! Alphabets, words, partitions, finite algebras and empirical block laws.
//!
//! State spaces are finite index sets `0..n` carrying explicit probability
//! weights. Everything downstream (metrics, entropy, diagnostics) consumes
//! the types defined here.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{dimension, Error, Result};

/// A symbol of a finite alphabet.
pub type Symbol = u16;

/// Largest admissible alphabet.
pub const MAX_ALPHABET: u32 = 1 << 16;

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// The label set `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::Validation(format!(
                "alphabet size {size} outside 1..={MAX_ALPHABET}"
            )));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }

    pub fn contains(self, s: Symbol) -> bool {
        u32::from(s) < self.0
    }
}

/// A finite word over an [`Alphabet`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Validation("words must have length >= 1".into()));
        }
        if let Some(bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::Validation(format!(
                "symbol {bad} not in alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(Word { alphabet, symbols })
    }

    /// Parses a word written as consecutive digits, e.g. `"0110"`.
    pub fn from_digits(alphabet: Alphabet, digits: &str) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::Parse(format!("bad digit {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(alphabet, symbols)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.symbols {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A probability vector on the finite state space `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate_probability_vector(&weights, PROBABILITY_TOLERANCE)?;
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("empty state space".into()));
        }
        Ok(Measure {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn of(&self, set: &StateSet) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }
}

pub(crate) fn validate_probability_vector(w: &[f64], tol: f64) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Validation("empty probability vector".into()));
    }
    if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Validation(format!("invalid probability {x}")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::Validation(format!(
            "probabilities sum to {s}, not 1"
        )));
    }
    Ok(())
}

/// A subset of a finite state space, stored as a membership mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateSet {
    mask: Vec<bool>,
}

impl StateSet {
    pub fn from_indices(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; n];
        for i in members {
            if i >= n {
                return Err(dimension("state set member", n, i));
            }
            mask[i] = true;
        }
        Ok(StateSet { mask })
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        StateSet { mask }
    }

    pub fn full(n: usize) -> Self {
        StateSet {
            mask: vec![true; n],
        }
    }

    pub fn empty(n: usize) -> Self {
        StateSet {
            mask: vec![false; n],
        }
    }

    pub fn space_size(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn complement(&self) -> StateSet {
        StateSet {
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn symmetric_difference(&self, other: &StateSet) -> StateSet {
        StateSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Image of the set under a map of the state space.
    pub fn image(&self, map: impl Fn(usize) -> usize) -> StateSet {
        let mut mask = vec![false; self.mask.len()];
        for i in self.iter() {
            mask[map(i)] = true;
        }
        StateSet { mask }
    }

    pub fn as_mask(&self) -> &[bool] {
        &self.mask
    }
}

/// A labeled finite partition: every state maps to exactly one nonempty cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    cell_of: Vec<u32>,
    cell_count: u32,
}

impl Partition {
    pub fn new(cell_of: Vec<u32>, cell_count: u32) -> Result<Self> {
        if cell_of.is_empty() || cell_count == 0 {
            return Err(Error::Validation("partition of an empty space".into()));
        }
        let mut seen = vec![false; cell_count as usize];
        for &c in &cell_of {
            if c >= cell_count {
                return Err(Error::Validation(format!(
                    "cell label {c} >= cell count {cell_count}"
                )));
            }
            seen[c as usize] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("cell {empty} is empty")));
        }
        Ok(Partition {
            cell_of,
            cell_count,
        })
    }

    /// Builds a partition from arbitrary labels, compacting them in
    /// increasing label order.
    pub fn from_labels(labels: &[u32]) -> Result<Self> {
        let mut distinct: Vec<u32> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let index: HashMap<u32, u32> = distinct
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        Partition::new(
            labels.iter().map(|l| index[l]).collect(),
            distinct.len() as u32,
        )
    }

    pub fn trivial(states: usize) -> Result<Self> {
        Partition::new(vec![0; states], 1)
    }

    pub fn discrete(states: usize) -> Result<Self> {
        Partition::new((0..states as u32).collect(), states as u32)
    }

    pub fn states(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cell_count(&self) -> u32 {
        self.cell_count
    }

    pub fn cell(&self, state: usize) -> u32 {
        self.cell_of[state]
    }

    pub fn labels(&self) -> &[u32] {
        &self.cell_of
    }

    pub fn cell_set(&self, cell: u32) -> StateSet {
        StateSet::from_mask(self.cell_of.iter().map(|&c| c == cell).collect())
    }

    /// Cells as lists of states, in label order.
    pub fn atoms(&self) -> Vec<Vec<usize>> {
        let mut atoms = vec![Vec::new(); self.cell_count as usize];
        for (s, &c) in self.cell_of.iter().enumerate() {
            atoms[c as usize].push(s);
        }
        atoms
    }

    /// Mass of each cell under `mu`.
    pub fn cell_masses(&self, mu: &Measure) -> Result<Vec<f64>> {
        if mu.len() != self.states() {
            return Err(dimension("partition measure", self.states(), mu.len()));
        }
        let mut out = vec![0.0; self.cell_count as usize];
        for (s, &c) in self.cell_of.iter().enumerate() {
            out[c as usize] += mu.weights()[s];
        }
        Ok(out)
    }

    /// True when every cell of `self` lies inside one cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.states() != coarser.states() {
            return false;
        }
        let mut parent: Vec<Option<u32>> = vec![None; self.cell_count as usize];
        for (s, &c) in self.cell_of.iter().enumerate() {
            let p = coarser.cell_of[s];
            match parent[c as usize] {
                None => parent[c as usize] = Some(p),
                Some(q) if q != p => return false,
                _ => {}
            }
        }
        true
    }

    /// Equality up to relabeling of cells.
    pub fn same_cells(&self, other: &Partition) -> bool {
        self.cell_count == other.cell_count && self.refines(other) && other.refines(self)
    }
}

/// Common refinement of two partitions of the same space.
///
/// Cells are indexed by the lexicographic order of the `(P-label, Q-label)`
/// pairs that actually occur.
pub fn join(p: &Partition, q: &Partition) -> Result<Partition> {
    if p.states() != q.states() {
        return Err(dimension("join", p.states(), q.states()));
    }
    let mut pairs: Vec<(u32, u32)> = p
        .cell_of
        .iter()
        .zip(&q.cell_of)
        .map(|(&a, &b)| (a, b))
        .collect();
    let labels = pairs.clone();
    pairs.sort_unstable();
    pairs.dedup();
    let index: HashMap<(u32, u32), u32> = pairs
        .iter()
        .enumerate()
        .map(|(i, &pair)| (pair, i as u32))
        .collect();
    Partition::new(
        labels.iter().map(|pair| index[pair]).collect(),
        pairs.len() as u32,
    )
}

/// `μ(A △ B)`.
pub fn measure_algebra_distance(a: &StateSet, b: &StateSet, mu: &Measure) -> Result<f64> {
    if a.space_size() != mu.len() {
        return Err(dimension(
            "measure algebra distance",
            mu.len(),
            a.space_size(),
        ));
    }
    if b.space_size() != mu.len() {
        return Err(dimension(
            "measure algebra distance",
            mu.len(),
            b.space_size(),
        ));
    }
    Ok(a.as_mask()
        .iter()
        .zip(b.as_mask())
        .zip(mu.weights())
        .filter(|((x, y), _)| x != y)
        .map(|(_, w)| w)
        .sum())
}

/// The algebra generated by finitely many disjoint atoms covering the space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    states: usize,
    atoms: Vec<Vec<usize>>,
}

impl FiniteAlgebra {
    pub fn new(states: usize, atoms: Vec<Vec<usize>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("algebra with no atoms".into()));
        }
        let mut owner = vec![false; states];
        for atom in &atoms {
            for &s in atom {
                if s >= states {
                    return Err(dimension("algebra atom", states, s));
                }
                if owner[s] {
                    return Err(Error::Validation(format!("state {s} belongs to two atoms")));
                }
                owner[s] = true;
            }
        }
        if let Some(missing) = owner.iter().position(|o| !o) {
            return Err(Error::Validation(format!(
                "state {missing} not covered by any atom"
            )));
        }
        Ok(FiniteAlgebra { states, atoms })
    }

    pub fn generated_by(p: &Partition) -> Self {
        FiniteAlgebra {
            states: p.states(),
            atoms: p.atoms(),
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    /// Union of the atoms selected by `pick`.
    pub fn union_of(&self, pick: impl Fn(usize) -> bool) -> StateSet {
        let mut mask = vec![false; self.states];
        for (i, atom) in self.atoms.iter().enumerate() {
            if pick(i) {
                for &s in atom {
                    mask[s] = true;
                }
            }
        }
        StateSet::from_mask(mask)
    }
}

/// `min_B μ(E △ B)` over the elements `B` of the algebra.
///
/// An atom enters the minimizer iff more than half its mass lies in `E`;
/// the objective separates over atoms so this rule is exact.
pub fn distance_to_algebra(e: &StateSet, alg: &FiniteAlgebra, mu: &Measure) -> Result<f64> {
    if e.space_size() != alg.states() || mu.len() != alg.states() {
        return Err(dimension(
            "distance to algebra",
            alg.states(),
            e.space_size(),
        ));
    }
    let w = mu.weights();
    Ok(alg
        .atoms()
        .iter()
        .map(|atom| {
            let (inside, outside) = atom.iter().fold((0.0, 0.0), |(i, o), &s| {
                if e.contains(s) {
                    (i + w[s], o)
                } else {
                    (i, o + w[s])
                }
            });
            inside.min(outside)
        })
        .sum())
}

/// Integer counts of sliding-window blocks of a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCounts {
    length: usize,
    total: u64,
    counts: BTreeMap<Vec<Symbol>, u64>,
}

impl BlockCounts {
    pub fn from_sample(sample: &[Symbol], length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Parameter("block length must be >= 1".into()));
        }
        if sample.len() < length {
            return Err(Error::InsufficientData {
                needed: length,
                available: sample.len(),
            });
        }
        let mut raw: HashMap<&[Symbol], u64> = HashMap::new();
        for w in sample.windows(length) {
            *raw.entry(w).or_insert(0) += 1;
        }
        let total = (sample.len() - length + 1) as u64;
        let counts = raw.into_iter().map(|(k, v)| (k.to_vec(), v)).collect();
        Ok(BlockCounts {
            length,
            total,
            counts,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<Vec<Symbol>, u64> {
        &self.counts
    }
}

/// A probability law on words of one fixed length.
#[derive(Clone, Debug, PartialEq)]
pub struct WordDistribution {
    length: usize,
    weights: BTreeMap<Vec<Symbol>, f64>,
}

impl WordDistribution {
    pub fn new(length: usize, weights: BTreeMap<Vec<Symbol>, f64>) -> Result<Self> {
        if length == 0 {
            return Err(Error::Validation("word length must be >= 1".into()));
        }
        if let Some(w) = weights.keys().find(|w| w.len() != length) {
            return Err(dimension("word distribution", length, w.len()));
        }
        let probs: Vec<f64> = weights.values().copied().collect();
        validate_probability_vector(&probs, PROBABILITY_TOLERANCE)?;
        let weights = weights.into_iter().filter(|(_, p)| *p > 0.0).collect();
        Ok(WordDistribution { length, weights })
    }

    pub fn from_pairs<I>(length: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Symbol>, f64)>,
    {
        let mut weights = BTreeMap::new();
        for (w, p) in pairs {
            *weights.entry(w).or_insert(0.0) += p;
        }
        WordDistribution::new(length, weights)
    }

    pub fn point_mass(word: &[Symbol]) -> Result<Self> {
        WordDistribution::from_pairs(word.len(), [(word.to_vec(), 1.0)])
    }

    /// Uniform law on the given words (duplicates add weight).
    pub fn uniform_on(words: &[Vec<Symbol>]) -> Result<Self> {
        let n = words
            .first()
            .map(|w| w.len())
            .ok_or_else(|| Error::Validation("no words".into()))?;
        let p = 1.0 / words.len() as f64;
        WordDistribution::from_pairs(n, words.iter().map(|w| (w.clone(), p)))
    }

    pub fn from_counts(counts: &BlockCounts) -> Self {
        let total = counts.total as f64;
        WordDistribution {
            length: counts.length,
            weights: counts
                .counts
                .iter()
                .map(|(w, &c)| (w.clone(), c as f64 / total))
                .collect(),
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, word: &[Symbol]) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }

    /// Support words with their probabilities, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], f64)> + '_ {
        self.weights.iter().map(|(w, &p)| (w.as_slice(), p))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.values().copied().collect()
    }

    pub fn words(&self) -> Vec<&[Symbol]> {
        self.weights.keys().map(|w| w.as_slice()).collect()
    }

    /// Law of the symbol at one coordinate.
    pub fn coordinate_marginal(&self, i: usize) -> BTreeMap<Symbol, f64> {
        let mut m = BTreeMap::new();
        for (w, p) in self.iter() {
            *m.entry(w[i]).or_insert(0.0) += p;
        }
        m
    }
}

/// Sliding-window law of the length-`n` blocks of `sample`.
pub fn empirical_word_distribution(sample: &[Symbol], n: usize) -> Result<WordDistribution> {
    Ok(WordDistribution::from_counts(&BlockCounts::from_sample(
        sample, n,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(labels: &[u32]) -> Partition {
        Partition::from_labels(labels).unwrap()
    }

    #[test]
    fn join_with_trivial_is_identity() {
        let p = part(&[0, 0, 1, 2, 1]);
        let t = Partition::trivial(5).unwrap();
        assert_eq!(join(&p, &t).unwrap(), p);
    }

    #[test]
    fn join_is_idempotent() {
        let p = part(&[2, 0, 1, 2, 1]);
        assert!(join(&p, &p).unwrap().same_cells(&p));
    }

    #[test]
    fn join_of_crossed_halves_is_discrete() {
        let p = part(&[0, 0, 1, 1]);
        let q = part(&[0, 1, 0, 1]);
        let j = join(&p, &q).unwrap();
        assert_eq!(j.cell_count(), 4);
        assert_eq!(j.labels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn join_rejects_mismatched_spaces() {
        let p = part(&[0, 1]);
        let q = part(&[0, 1, 1]);
        assert!(matches!(join(&p, &q), Err(Error::Dimension { .. })));
    }

    #[test]
    fn partition_rejects_empty_cell() {
        assert!(Partition::new(vec![0, 0, 2], 3).is_err());
    }

    #[test]
    fn measure_distance_examples() {
        let mu4 = Measure::uniform(4).unwrap();
        let a = StateSet::from_indices(4, [0, 1]).unwrap();
        assert_eq!(measure_algebra_distance(&a, &a, &mu4).unwrap(), 0.0);
        assert_eq!(
            measure_algebra_distance(&a, &a.complement(), &mu4).unwrap(),
            1.0
        );
        let mu8 = Measure::uniform(8).unwrap();
        let a = StateSet::from_indices(8, [0, 1, 2, 3]).unwrap();
        let b = StateSet::from_indices(8, [2, 3, 4, 5]).unwrap();
        assert_eq!(measure_algebra_distance(&a, &b, &mu8).unwrap(), 0.5);
    }

    #[test]
    fn measure_rejects_non_probability() {
        assert!(Measure::new(vec![0.5, 0.4]).is_err());
        assert!(Measure::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn distance_to_algebra_examples() {
        let mu = Measure::uniform(4).unwrap();
        let alg = FiniteAlgebra::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let atom = StateSet::from_indices(4, [2, 3]).unwrap();
        assert_eq!(distance_to_algebra(&atom, &alg, &mu).unwrap(), 0.0);
        assert_eq!(
            distance_to_algebra(&StateSet::full(4), &alg, &mu).unwrap(),
            0.0
        );
        let e = StateSet::from_indices(4, [0]).unwrap();
        assert_eq!(distance_to_algebra(&e, &alg, &mu).unwrap(), 0.25);
    }

    #[test]
    fn algebra_rejects_overlap_and_gaps() {
        assert!(FiniteAlgebra::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(FiniteAlgebra::new(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn empirical_distribution_of_alternation() {
        let s: Vec<Symbol> = (0..10).map(|i| (i % 2) as Symbol).collect();
        let d = empirical_word_distribution(&s, 2).unwrap();
        assert_eq!(d.support_size(), 2);
        assert!((d.weight(&[0, 1]) - 5.0 / 9.0).abs() < 1e-15);
        assert!((d.weight(&[1, 0]) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_distribution_of_constant() {
        let d = empirical_word_distribution(&[3; 20], 4).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.weight(&[3, 3, 3, 3]), 1.0);
    }

    #[test]
    fn empirical_distribution_needs_data() {
        assert!(matches!(
            empirical_word_distribution(&[0, 1], 3),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn word_validation() {
        let a = Alphabet::new(2).unwrap();
        assert!(Word::new(a, vec![0, 2]).is_err());
        assert!(Word::new(a, vec![]).is_err());
        assert_eq!(Word::from_digits(a, "0110").unwrap().to_string(), "0 1 1 0");
        assert!(Alphabet::new(0).is_err());
        assert!(Alphabet::new(MAX_ALPHABET + 1).is_err());
    }
}
