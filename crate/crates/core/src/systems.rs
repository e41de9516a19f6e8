//! Desk-scale measure-preserving systems and their seeded samplers.
//!
//! Every model exposes a finite *observable space*: the symbol of a shift,
//! the arc of a circle coding, the point of a permutation, or the product
//! index `(base, fiber…)` of an extension. Partitions passed to
//! [`sample_trajectory`] act on this space.
//!
//! Fibers are `m`-point uniform grids; fiber maps are grid bijections, so
//! the disintegration over the base is uniform and every conditional
//! expectation given the base is a finite sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dimension, Error, Result};
use crate::symbolic::{validate_probability_vector, Partition, StateSet, Symbol};

/// Default fiber grid size.
pub const DEFAULT_FIBER: u32 = 1 << 10;
/// Default bound on first-return searches.
pub const DEFAULT_HORIZON: u64 = 10_000_000;
/// Largest denominator used for rotation angles.
pub const MAX_ANGLE_DENOMINATOR: u64 = 1 << 31;

const STATIONARY_TOLERANCE: f64 = 1e-9;

/// A rotation angle `num/den` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num >= den {
            return Err(Error::Validation(format!(
                "angle {num}/{den} outside [0, 1)"
            )));
        }
        Ok(Rational { num, den })
    }

    /// Last continued-fraction convergent of `x` with denominator `<= max_den`.
    pub fn approximate(x: f64, max_den: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Validation(format!("angle {x} outside [0, 1)")));
        }
        let (mut h0, mut h1) = (0u64, 1u64);
        let (mut k0, mut k1) = (1u64, 0u64);
        let mut rest = x;
        let mut best = Rational { num: 0, den: 1 };
        for _ in 0..64 {
            let a = rest.floor();
            let a_int = a as u64;
            let h2 = a_int.checked_mul(h1).and_then(|v| v.checked_add(h0));
            let k2 = a_int.checked_mul(k1).and_then(|v| v.checked_add(k0));
            let (Some(h2), Some(k2)) = (h2, k2) else {
                break;
            };
            if k2 > max_den {
                break;
            }
            best = Rational { num: h2, den: k2 };
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let frac = rest - a;
            if frac < 1e-15 || (x - h2 as f64 / k2 as f64).abs() < 1e-18 {
                break;
            }
            rest = 1.0 / frac;
        }
        Rational::new(best.num % best.den, best.den)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// A measure-preserving bijection of the fiber grid `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberMap {
    /// `u ↦ u + steps mod m`.
    Rotation(u32),
    /// An explicit permutation of the grid.
    Permutation(Vec<u32>),
}

impl FiberMap {
    pub fn identity() -> Self {
        FiberMap::Rotation(0)
    }

    #[inline]
    pub fn apply(&self, u: u32, m: u32) -> u32 {
        match self {
            FiberMap::Rotation(s) => {
                let v = u + s;
                if v >= m {
                    v - m
                } else {
                    v
                }
            }
            FiberMap::Permutation(p) => p[u as usize],
        }
    }

    fn validate(&self, m: u32) -> Result<()> {
        match self {
            FiberMap::Rotation(s) if *s >= m => Err(Error::Validation(format!(
                "rotation by {s} steps on a {m}-point fiber"
            ))),
            FiberMap::Permutation(p) => {
                if p.len() != m as usize {
                    return Err(dimension("fiber permutation", m as usize, p.len()));
                }
                let mut seen = vec![false; p.len()];
                for &x in p {
                    if x >= m || seen[x as usize] {
                        return Err(Error::Validation("fiber map is not a bijection".into()));
                    }
                    seen[x as usize] = true;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// How base points select fiber maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CocycleSpec {
    /// The same fiber map everywhere.
    Constant(FiberMap),
    /// One fiber map per cell of a partition of the base observables.
    CellDriven {
        cells: Partition,
        maps: Vec<FiberMap>,
    },
    /// One independent uniform grid rotation per cell, drawn from `seed`.
    Random { cells: Partition, seed: u64 },
}

/// A cocycle resolved against a concrete base and fiber size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedCocycle {
    cell_of: Vec<u32>,
    maps: Vec<FiberMap>,
}

impl ResolvedCocycle {
    fn resolve(spec: &CocycleSpec, base_states: usize, m: u32) -> Result<Self> {
        let (cell_of, maps) = match spec {
            CocycleSpec::Constant(map) => (vec![0; base_states], vec![map.clone()]),
            CocycleSpec::CellDriven { cells, maps } => {
                if cells.states() != base_states {
                    return Err(dimension("cocycle partition", base_states, cells.states()));
                }
                if maps.len() != cells.cell_count() as usize {
                    return Err(dimension(
                        "cocycle fiber maps",
                        cells.cell_count() as usize,
                        maps.len(),
                    ));
                }
                (cells.labels().to_vec(), maps.clone())
            }
            CocycleSpec::Random { cells, seed } => {
                if cells.states() != base_states {
                    return Err(dimension("cocycle partition", base_states, cells.states()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let maps = (0..cells.cell_count())
                    .map(|_| FiberMap::Rotation(rng.random_range(0..m)))
                    .collect();
                (cells.labels().to_vec(), maps)
            }
        };
        for map in &maps {
            map.validate(m)?;
        }
        Ok(ResolvedCocycle { cell_of, maps })
    }

    #[inline]
    pub fn map_at(&self, base_obs: usize) -> &FiberMap {
        &self.maps[self.cell_of[base_obs] as usize]
    }

    pub fn maps(&self) -> &[FiberMap] {
        &self.maps
    }

    pub fn cell_of(&self) -> &[u32] {
        &self.cell_of
    }

    /// True when every fiber map is a grid rotation.
    pub fn is_rotation_valued(&self) -> bool {
        self.maps.iter().all(|m| matches!(m, FiberMap::Rotation(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliShift {
    p: Vec<f64>,
    cdf: Vec<f64>,
}

impl BernoulliShift {
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovShift {
    matrix: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    row_cdf: Vec<Vec<f64>>,
    stationary_cdf: Vec<f64>,
}

impl MarkovShift {
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }
}

/// Coding of a circle rotation by finitely many arcs.
///
/// The circle is the grid `Z/den` of the rotation angle; arc `i` covers
/// `starts[i]..starts[i+1]`. Observables are arcs; `coding` labels them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationCoding {
    angle: Rational,
    starts: Vec<u64>,
    coding: Partition,
}

impl RotationCoding {
    pub fn angle(&self) -> Rational {
        self.angle
    }

    pub fn arc_starts(&self) -> &[u64] {
        &self.starts
    }

    pub fn coding(&self) -> &Partition {
        &self.coding
    }

    fn arc_of(&self, x: u64) -> usize {
        self.starts.partition_point(|&s| s <= x) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitePermutation {
    perm: Vec<u32>,
}

impl FinitePermutation {
    pub fn new(perm: Vec<u32>) -> Result<Self> {
        FiberMap::Permutation(perm.clone()).validate(perm.len() as u32)?;
        Ok(FinitePermutation { perm })
    }

    pub fn identity(n: usize) -> Self {
        FinitePermutation {
            perm: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.perm[i] as usize
    }

    pub fn inverse(&self) -> FinitePermutation {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        FinitePermutation { perm: inv }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.perm
    }
}

/// Rokhlin skew product `(x, u) ↦ (Tx, S_x u)` on `base × Z/m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewProduct {
    base: Box<SystemModel>,
    cocycle: ResolvedCocycle,
    fiber: u32,
}

impl SkewProduct {
    pub fn base(&self) -> &SystemModel {
        &self.base
    }

    pub fn cocycle(&self) -> &ResolvedCocycle {
        &self.cocycle
    }

    pub fn fiber_size(&self) -> u32 {
        self.fiber
    }

    pub fn base_states(&self) -> usize {
        self.base.state_count()
    }

    #[inline]
    pub fn index(&self, base_obs: usize, u: u32) -> usize {
        base_obs * self.fiber as usize + u as usize
    }

    #[inline]
    pub fn split(&self, obs: usize) -> (usize, u32) {
        (
            obs / self.fiber as usize,
            (obs % self.fiber as usize) as u32,
        )
    }

    #[inline]
    pub fn fiber_step(&self, base_obs: usize, u: u32) -> u32 {
        self.cocycle.map_at(base_obs).apply(u, self.fiber)
    }
}

/// First-return map of a base system on a set of observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedSystem {
    base: Box<SystemModel>,
    target: StateSet,
    horizon: u64,
}

impl InducedSystem {
    pub fn base(&self) -> &SystemModel {
        &self.base
    }

    pub fn target(&self) -> &StateSet {
        &self.target
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn target_measure(&self) -> f64 {
        let mu = self.base.observable_measure();
        self.target.iter().map(|i| mu[i]).sum()
    }
}

/// `(x, u, v) ↦ (Tx, S_x u, S_x v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelIndepProduct {
    ext: SkewProduct,
}

impl RelIndepProduct {
    pub fn extension(&self) -> &SkewProduct {
        &self.ext
    }

    pub fn index(&self, base_obs: usize, u: u32, v: u32) -> usize {
        let m = self.ext.fiber as usize;
        (base_obs * m + u as usize) * m + v as usize
    }

    pub fn split(&self, obs: usize) -> (usize, u32, u32) {
        let m = self.ext.fiber as usize;
        (obs / (m * m), ((obs / m) % m) as u32, (obs % m) as u32)
    }
}

/// `(x, z1, z2) ↦ (Tx, R^{f(x)} z1, R^{f(x)} z2)` with `f ∈ {-1, 0, 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfTriple {
    base: Box<SystemModel>,
    f_values: Vec<i8>,
    steps: u32,
    fiber: u32,
    notes: Vec<String>,
}

impl TfTriple {
    pub fn base(&self) -> &SystemModel {
        &self.base
    }

    pub fn f_values(&self) -> &[i8] {
        &self.f_values
    }

    pub fn rotation_steps(&self) -> u32 {
        self.steps
    }

    pub fn fiber_size(&self) -> u32 {
        self.fiber
    }

    /// Warnings recorded at construction (degenerate `f`, large cells).
    pub fn hypothesis_notes(&self) -> &[String] {
        &self.notes
    }

    pub fn split(&self, obs: usize) -> (usize, u32, u32) {
        let m = self.fiber as usize;
        (obs / (m * m), ((obs / m) % m) as u32, (obs % m) as u32)
    }

    fn rotate(&self, z: u32, f: i8) -> u32 {
        let m = self.fiber;
        match f {
            1 => (z + self.steps) % m,
            -1 => (z + m - self.steps) % m,
            _ => z,
        }
    }
}

/// A desk-scale measure-preserving system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemModel {
    Bernoulli(BernoulliShift),
    Markov(MarkovShift),
    Rotation(RotationCoding),
    Permutation(FinitePermutation),
    Skew(SkewProduct),
    Induced(InducedSystem),
    RelProduct(RelIndepProduct),
    Tf(TfTriple),
}

/// A point of a system's phase space, as tracked by an [`Orbit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum State {
    /// Current symbol of a shift.
    Symbol(usize),
    /// Point of the rotation grid `Z/den`.
    Circle(u64),
    /// Point of a finite permutation.
    Point(usize),
    Skew {
        base: Box<State>,
        fiber: u32,
    },
    Induced {
        base: Box<State>,
        last_return: u64,
    },
    /// Two fiber coordinates over one base point.
    Pair {
        base: Box<State>,
        u: u32,
        v: u32,
    },
}

fn cdf_of(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

#[inline]
fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.random();
    cdf.partition_point(|&c| c <= r).min(cdf.len() - 1)
}

/// Solves `πP = π`, `Σπ = 1` by Gaussian elimination with partial pivoting.
fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // Rows: (P^T - I) with the last equation replaced by normalization.
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::Validation(
                "Markov matrix has no unique stationary vector".into(),
            ));
        }
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / a[col][col];
                if factor != 0.0 {
                    for k in col..=n {
                        a[row][k] -= factor * a[col][k];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect())
}

impl SystemModel {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        validate_probability_vector(&p, 1e-12)?;
        if p.len() > u16::MAX as usize + 1 {
            return Err(Error::Validation("alphabet too large".into()));
        }
        let cdf = cdf_of(&p);
        Ok(SystemModel::Bernoulli(BernoulliShift { p, cdf }))
    }

    pub fn markov(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::validate_stochastic(&matrix)?;
        let pi = stationary_vector(&matrix)?;
        Self::markov_with_stationary(matrix, pi)
    }

    pub fn markov_with_stationary(matrix: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        Self::validate_stochastic(&matrix)?;
        if stationary.len() != matrix.len() {
            return Err(dimension(
                "stationary vector",
                matrix.len(),
                stationary.len(),
            ));
        }
        validate_probability_vector(&stationary, 1e-12)?;
        for j in 0..matrix.len() {
            let s: f64 = (0..matrix.len())
                .map(|i| stationary[i] * matrix[i][j])
                .sum();
            if (s - stationary[j]).abs() > STATIONARY_TOLERANCE {
                return Err(Error::Validation(format!(
                    "stationary vector violates piP = pi at state {j}"
                )));
            }
        }
        let row_cdf = matrix.iter().map(|r| cdf_of(r)).collect();
        let stationary_cdf = cdf_of(&stationary);
        Ok(SystemModel::Markov(MarkovShift {
            matrix,
            stationary,
            row_cdf,
            stationary_cdf,
        }))
    }

    fn validate_stochastic(matrix: &[Vec<f64>]) -> Result<()> {
        if matrix.is_empty() {
            return Err(Error::Validation("empty Markov matrix".into()));
        }
        for row in matrix {
            if row.len() != matrix.len() {
                return Err(dimension("Markov matrix row", matrix.len(), row.len()));
            }
            validate_probability_vector(row, 1e-12)?;
        }
        Ok(())
    }

    /// Rotation by `angle` coded by arcs starting at `cuts` (first cut 0).
    pub fn rotation(angle: Rational, cuts: &[f64], coding: Partition) -> Result<Self> {
        if cuts.first() != Some(&0.0) {
            return Err(Error::Validation("first arc must start at 0".into()));
        }
        let q = angle.den;
        let starts: Vec<u64> = cuts.iter().map(|&c| (c * q as f64).ceil() as u64).collect();
        if starts.windows(2).any(|w| w[0] >= w[1]) || starts.last().is_some_and(|&s| s >= q) {
            return Err(Error::Validation(
                "arc cuts must be strictly increasing in [0, 1) at the angle's resolution".into(),
            ));
        }
        if coding.states() != starts.len() {
            return Err(dimension("rotation coding", starts.len(), coding.states()));
        }
        Ok(SystemModel::Rotation(RotationCoding {
            angle,
            starts,
            coding,
        }))
    }

    /// Rotation observed through `arcs` equal arcs, each its own cell.
    pub fn rotation_grid(angle: f64, arcs: usize) -> Result<Self> {
        let angle = Rational::approximate(angle, MAX_ANGLE_DENOMINATOR)?;
        let cuts: Vec<f64> = (0..arcs).map(|i| i as f64 / arcs as f64).collect();
        Self::rotation(angle, &cuts, Partition::discrete(arcs)?)
    }

    /// Sturmian coding: label 1 on `[1 - α, 1)`, 0 elsewhere.
    pub fn sturmian(alpha: f64) -> Result<Self> {
        let angle = Rational::approximate(alpha, MAX_ANGLE_DENOMINATOR)?;
        let starts = vec![0, angle.den - angle.num];
        if angle.num == 0 {
            return Err(Error::Validation("Sturmian angle must be positive".into()));
        }
        Ok(SystemModel::Rotation(RotationCoding {
            angle,
            starts,
            coding: Partition::discrete(2)?,
        }))
    }

    pub fn permutation(perm: Vec<u32>) -> Result<Self> {
        Ok(SystemModel::Permutation(FinitePermutation::new(perm)?))
    }

    /// Size of the observable space.
    pub fn state_count(&self) -> usize {
        match self {
            SystemModel::Bernoulli(b) => b.p.len(),
            SystemModel::Markov(mk) => mk.matrix.len(),
            SystemModel::Rotation(r) => r.starts.len(),
            SystemModel::Permutation(p) => p.perm.len(),
            SystemModel::Skew(s) => s.base.state_count() * s.fiber as usize,
            SystemModel::Induced(i) => i.base.state_count(),
            SystemModel::RelProduct(r) => {
                let m = r.ext.fiber as usize;
                r.ext.base.state_count() * m * m
            }
            SystemModel::Tf(t) => {
                let m = t.fiber as usize;
                t.base.state_count() * m * m
            }
        }
    }

    /// Invariant law of the observable at a single time.
    pub fn observable_measure(&self) -> Vec<f64> {
        match self {
            SystemModel::Bernoulli(b) => b.p.clone(),
            SystemModel::Markov(mk) => mk.stationary.clone(),
            SystemModel::Rotation(r) => {
                let q = r.angle.den;
                (0..r.starts.len())
                    .map(|i| {
                        let end = r.starts.get(i + 1).copied().unwrap_or(q);
                        (end - r.starts[i]) as f64 / q as f64
                    })
                    .collect()
            }
            SystemModel::Permutation(p) => vec![1.0 / p.perm.len() as f64; p.perm.len()],
            SystemModel::Skew(s) => product_with_uniform(&s.base.observable_measure(), s.fiber, 1),
            SystemModel::Induced(i) => {
                let mu = i.base.observable_measure();
                let mass = i.target_measure();
                mu.iter()
                    .enumerate()
                    .map(|(k, w)| if i.target.contains(k) { w / mass } else { 0.0 })
                    .collect()
            }
            SystemModel::RelProduct(r) => {
                product_with_uniform(&r.ext.base.observable_measure(), r.ext.fiber, 2)
            }
            SystemModel::Tf(t) => product_with_uniform(&t.base.observable_measure(), t.fiber, 2),
        }
    }

    /// The natural generating partition of the observable space.
    pub fn generator(&self) -> Partition {
        match self {
            SystemModel::Rotation(r) => r.coding.clone(),
            SystemModel::Induced(i) => i.base.generator(),
            SystemModel::Skew(_) | SystemModel::RelProduct(_) | SystemModel::Tf(_) => {
                let fiber = self.fiber_size().unwrap_or(1);
                if fiber.is_power_of_two() {
                    return self
                        .product_partition(fiber.trailing_zeros())
                        .expect("generator of a well-formed extension");
                }
                // Base generator cell times every fiber coordinate.
                let base = self.base().expect("extension has a base").generator();
                let m = fiber as usize;
                let per_point = self.state_count() / base.states();
                let labels: Vec<u32> = (0..self.state_count())
                    .map(|obs| {
                        base.cell(obs / per_point) * per_point as u32 + (obs % per_point) as u32
                    })
                    .collect();
                debug_assert!(per_point == m || per_point == m * m);
                Partition::from_labels(&labels).expect("nonempty state space")
            }
            _ => Partition::discrete(self.state_count()).expect("nonempty state space"),
        }
    }

    pub fn fiber_size(&self) -> Option<u32> {
        match self {
            SystemModel::Skew(s) => Some(s.fiber),
            SystemModel::RelProduct(r) => Some(r.ext.fiber),
            SystemModel::Tf(t) => Some(t.fiber),
            _ => None,
        }
    }

    /// `ℛ × 𝒬_n`: base generator times the dyadic fiber partition into
    /// `2^level` intervals (one factor per fiber coordinate).
    pub fn product_partition(&self, level: u32) -> Result<Partition> {
        let (base, m, coords) = match self {
            SystemModel::Skew(s) => (&*s.base, s.fiber, 1),
            SystemModel::RelProduct(r) => (&*r.ext.base, r.ext.fiber, 2),
            SystemModel::Tf(t) => (&*t.base, t.fiber, 2),
            _ => return Ok(self.generator()),
        };
        let cells = 1u64 << level;
        if cells > m as u64 {
            return Err(Error::Parameter(format!(
                "dyadic level {level} finer than a {m}-point fiber"
            )));
        }
        let g = base.generator();
        let mm = m as usize;
        let dyadic = |u: usize| (u as u64 * cells / m as u64) as u32;
        let labels: Vec<u32> = (0..self.state_count())
            .map(|obs| {
                if coords == 1 {
                    let (x, u) = (obs / mm, obs % mm);
                    g.cell(x) * cells as u32 + dyadic(u)
                } else {
                    let (x, u, v) = (obs / (mm * mm), (obs / mm) % mm, obs % mm);
                    (g.cell(x) * cells as u32 + dyadic(u)) * cells as u32 + dyadic(v)
                }
            })
            .collect();
        Partition::from_labels(&labels)
    }

    /// Base partition lifted to the observable space of an extension.
    pub fn lift_base_partition(&self, base_part: &Partition) -> Result<Partition> {
        let (base_states, per_point) = match self {
            SystemModel::Skew(s) => (s.base.state_count(), s.fiber as usize),
            SystemModel::RelProduct(r) => (r.ext.base.state_count(), (r.ext.fiber as usize).pow(2)),
            SystemModel::Tf(t) => (t.base.state_count(), (t.fiber as usize).pow(2)),
            _ => return Ok(base_part.clone()),
        };
        if base_part.states() != base_states {
            return Err(dimension(
                "lifted partition",
                base_states,
                base_part.states(),
            ));
        }
        let labels: Vec<u32> = (0..self.state_count())
            .map(|obs| base_part.cell(obs / per_point))
            .collect();
        Partition::from_labels(&labels)
    }

    /// The underlying base system of an extension or induced map.
    pub fn base(&self) -> Option<&SystemModel> {
        match self {
            SystemModel::Skew(s) => Some(&s.base),
            SystemModel::Induced(i) => Some(&i.base),
            SystemModel::RelProduct(r) => Some(&r.ext.base),
            SystemModel::Tf(t) => Some(&t.base),
            _ => None,
        }
    }

    /// Samples the next observable of a shift given the current one.
    ///
    /// `None` for systems whose future is not a function of the current
    /// observable and fresh randomness.
    pub fn shift_successor(&self, obs: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        match self {
            SystemModel::Bernoulli(b) => Some(draw(&b.cdf, rng)),
            SystemModel::Markov(mk) => Some(draw(&mk.row_cdf[obs], rng)),
            _ => None,
        }
    }

    /// Draws an initial state from the invariant measure.
    ///
    /// Shift symbols and circle points come from `dyn_rng`; fiber points from
    /// `fiber_rng`, so an extension and its base consume `dyn_rng` identically.
    pub fn initial_state(
        &self,
        dyn_rng: &mut ChaCha8Rng,
        fiber_rng: &mut ChaCha8Rng,
    ) -> Result<State> {
        Ok(match self {
            SystemModel::Bernoulli(b) => State::Symbol(draw(&b.cdf, dyn_rng)),
            SystemModel::Markov(mk) => State::Symbol(draw(&mk.stationary_cdf, dyn_rng)),
            SystemModel::Rotation(r) => State::Circle(dyn_rng.random_range(0..r.angle.den)),
            SystemModel::Permutation(p) => State::Point(dyn_rng.random_range(0..p.perm.len())),
            SystemModel::Skew(s) => State::Skew {
                base: Box::new(s.base.initial_state(dyn_rng, fiber_rng)?),
                fiber: fiber_rng.random_range(0..s.fiber),
            },
            SystemModel::RelProduct(r) => {
                let base = Box::new(r.ext.base.initial_state(dyn_rng, fiber_rng)?);
                let u = fiber_rng.random_range(0..r.ext.fiber);
                let v = fiber_rng.random_range(0..r.ext.fiber);
                State::Pair { base, u, v }
            }
            SystemModel::Tf(t) => {
                let base = Box::new(t.base.initial_state(dyn_rng, fiber_rng)?);
                let u = fiber_rng.random_range(0..t.fiber);
                let v = fiber_rng.random_range(0..t.fiber);
                State::Pair { base, u, v }
            }
            SystemModel::Induced(i) => {
                for _ in 0..i.horizon.max(1) {
                    let b = i.base.initial_state(dyn_rng, fiber_rng)?;
                    if i.target.contains(i.base.observe(&b)) {
                        return Ok(State::Induced {
                            base: Box::new(b),
                            last_return: 0,
                        });
                    }
                }
                return Err(Error::ReturnTimeOverflow { horizon: i.horizon });
            }
        })
    }

    /// Observable index of a state.
    pub fn observe(&self, state: &State) -> usize {
        match (self, state) {
            (SystemModel::Bernoulli(_) | SystemModel::Markov(_), State::Symbol(s)) => *s,
            (SystemModel::Rotation(r), State::Circle(x)) => r.arc_of(*x),
            (SystemModel::Permutation(_), State::Point(i)) => *i,
            (SystemModel::Skew(s), State::Skew { base, fiber }) => {
                s.index(s.base.observe(base), *fiber)
            }
            (SystemModel::Induced(i), State::Induced { base, .. }) => i.base.observe(base),
            (SystemModel::RelProduct(r), State::Pair { base, u, v }) => {
                r.index(r.ext.base.observe(base), *u, *v)
            }
            (SystemModel::Tf(t), State::Pair { base, u, v }) => {
                let m = t.fiber as usize;
                (t.base.observe(base) * m + *u as usize) * m + *v as usize
            }
            _ => panic!("state does not belong to this system"),
        }
    }

    /// Applies the transformation once.
    pub fn advance(&self, state: &mut State, rng: &mut ChaCha8Rng) -> Result<()> {
        match (self, state) {
            (SystemModel::Bernoulli(b), State::Symbol(s)) => *s = draw(&b.cdf, rng),
            (SystemModel::Markov(mk), State::Symbol(s)) => *s = draw(&mk.row_cdf[*s], rng),
            (SystemModel::Rotation(r), State::Circle(x)) => {
                *x += r.angle.num;
                if *x >= r.angle.den {
                    *x -= r.angle.den;
                }
            }
            (SystemModel::Permutation(p), State::Point(i)) => *i = p.apply(*i),
            (SystemModel::Skew(s), State::Skew { base, fiber }) => {
                *fiber = s.fiber_step(s.base.observe(base), *fiber);
                s.base.advance(base, rng)?;
            }
            (SystemModel::RelProduct(r), State::Pair { base, u, v }) => {
                let map = r.ext.cocycle.map_at(r.ext.base.observe(base));
                *u = map.apply(*u, r.ext.fiber);
                *v = map.apply(*v, r.ext.fiber);
                r.ext.base.advance(base, rng)?;
            }
            (SystemModel::Tf(t), State::Pair { base, u, v }) => {
                let f = t.f_values[t.base.observe(base)];
                *u = t.rotate(*u, f);
                *v = t.rotate(*v, f);
                t.base.advance(base, rng)?;
            }
            (SystemModel::Induced(i), State::Induced { base, last_return }) => {
                for n in 1..=i.horizon {
                    i.base.advance(base, rng)?;
                    if i.target.contains(i.base.observe(base)) {
                        *last_return = n;
                        return Ok(());
                    }
                }
                return Err(Error::ReturnTimeOverflow { horizon: i.horizon });
            }
            _ => panic!("state does not belong to this system"),
        }
        Ok(())
    }

    /// Orbit started from the invariant measure.
    pub fn orbit(&self, seed: u64) -> Result<Orbit<'_>> {
        let (mut dyn_rng, mut fiber_rng) = rngs(seed);
        let state = self.initial_state(&mut dyn_rng, &mut fiber_rng)?;
        Ok(Orbit {
            model: self,
            state,
            rng: dyn_rng,
        })
    }

    /// Orbit from a chosen initial state.
    pub fn orbit_at(&self, state: State, seed: u64) -> Orbit<'_> {
        Orbit {
            model: self,
            state,
            rng: rngs(seed).0,
        }
    }
}

fn product_with_uniform(base: &[f64], m: u32, coords: u32) -> Vec<f64> {
    let per = (m as usize).pow(coords);
    let w = 1.0 / per as f64;
    base.iter()
        .flat_map(|&b| std::iter::repeat_n(b * w, per))
        .collect()
}

/// Derives the seed of sub-task `index` from `master` with a splitmix64
/// finalizer, so parallel work is reproducible regardless of scheduling.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Dynamics and fiber-initialization streams derived from one seed.
pub(crate) fn rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let dyn_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fiber_rng = ChaCha8Rng::seed_from_u64(seed);
    fiber_rng.set_stream(1);
    (dyn_rng, fiber_rng)
}

/// A running orbit of a [`SystemModel`].
pub struct Orbit<'a> {
    model: &'a SystemModel,
    state: State,
    rng: ChaCha8Rng,
}

impl Orbit<'_> {
    pub fn observe(&self) -> usize {
        self.model.observe(&self.state)
    }

    pub fn step(&mut self) -> Result<()> {
        self.model.advance(&mut self.state, &mut self.rng)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Return time of the last step of an induced system.
    pub fn last_return_time(&self) -> Option<u64> {
        match &self.state {
            State::Induced { last_return, .. } => Some(*last_return),
            _ => None,
        }
    }

    /// Observables at the next `n` times, starting with the current one.
    pub fn observables(&mut self, n: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.observe());
            if i + 1 < n {
                self.step()?;
            }
        }
        Ok(out)
    }
}

/// Partition labels along a seeded orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub labels: Vec<Symbol>,
    pub alphabet: u32,
    pub seed: u64,
    pub burn_in: usize,
    pub length: usize,
}

pub fn sample_trajectory(
    sys: &SystemModel,
    part: &Partition,
    length: usize,
    seed: u64,
    burn_in: usize,
) -> Result<TrajectorySample> {
    if part.states() != sys.state_count() {
        return Err(dimension(
            "trajectory partition",
            sys.state_count(),
            part.states(),
        ));
    }
    if length == 0 {
        return Err(Error::Parameter("trajectory length must be >= 1".into()));
    }
    if part.cell_count() > u16::MAX as u32 + 1 {
        return Err(Error::Validation(
            "partition has too many cells for symbols".into(),
        ));
    }
    let mut orbit = sys.orbit(seed)?;
    for _ in 0..burn_in {
        orbit.step()?;
    }
    let mut labels = Vec::with_capacity(length);
    for i in 0..length {
        labels.push(part.cell(orbit.observe()) as Symbol);
        if i + 1 < length {
            orbit.step()?;
        }
    }
    Ok(TrajectorySample {
        labels,
        alphabet: part.cell_count(),
        seed,
        burn_in,
        length,
    })
}

pub fn skew_product(base: SystemModel, cocycle: &CocycleSpec, m: u32) -> Result<SystemModel> {
    if m == 0 {
        return Err(Error::Validation(
            "fiber grid must have at least one point".into(),
        ));
    }
    let cocycle = ResolvedCocycle::resolve(cocycle, base.state_count(), m)?;
    Ok(SystemModel::Skew(SkewProduct {
        base: Box::new(base),
        cocycle,
        fiber: m,
    }))
}

pub fn relative_independent_product(ext: &SystemModel) -> Result<SystemModel> {
    match ext {
        SystemModel::Skew(s) => Ok(SystemModel::RelProduct(RelIndepProduct { ext: s.clone() })),
        _ => Err(Error::Validation(
            "relative independent product needs a skew product".into(),
        )),
    }
}

pub fn induce(sys: SystemModel, target: StateSet, horizon: u64) -> Result<SystemModel> {
    if target.space_size() != sys.state_count() {
        return Err(dimension(
            "return set",
            sys.state_count(),
            target.space_size(),
        ));
    }
    let mu = sys.observable_measure();
    let mass: f64 = target.iter().map(|i| mu[i]).sum();
    if mass <= 0.0 {
        return Err(Error::Validation("return set has zero measure".into()));
    }
    Ok(SystemModel::Induced(InducedSystem {
        base: Box::new(sys),
        target,
        horizon,
    }))
}

/// Samples `count` consecutive `(return observable, return time)` pairs.
pub fn sample_returns(induced: &SystemModel, count: usize, seed: u64) -> Result<Vec<(usize, u64)>> {
    if !matches!(induced, SystemModel::Induced(_)) {
        return Err(Error::Validation(
            "return sampling needs an induced system".into(),
        ));
    }
    let mut orbit = induced.orbit(seed)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        orbit.step()?;
        out.push((orbit.observe(), orbit.last_return_time().unwrap_or(0)));
    }
    Ok(out)
}

/// Builds `T_f` from per-observable values of `f ∈ {-1, 0, 1}`.
///
/// The cells `{f = 1}` and `{f = -1}` must carry equal mass (within 1e-9).
/// A degenerate `f ≡ 0` or cells of mass `>= 1/4` are accepted with a note.
pub fn t_f_triple(base: SystemModel, f_values: &[i8], r_angle: f64, m: u32) -> Result<SystemModel> {
    if f_values.len() != base.state_count() {
        return Err(dimension(
            "T_f cell values",
            base.state_count(),
            f_values.len(),
        ));
    }
    if m == 0 || !(0.0..1.0).contains(&r_angle) {
        return Err(Error::Validation("bad fiber grid or rotation angle".into()));
    }
    if let Some(v) = f_values.iter().find(|v| !(-1..=1).contains(*v)) {
        return Err(Error::Validation(format!(
            "f value {v} not in {{-1, 0, 1}}"
        )));
    }
    let mu = base.observable_measure();
    let mass = |target: i8| -> f64 {
        f_values
            .iter()
            .zip(&mu)
            .filter(|(v, _)| **v == target)
            .map(|(_, w)| w)
            .sum()
    };
    let (plus, minus) = (mass(1), mass(-1));
    if (plus - minus).abs() > 1e-9 {
        return Err(Error::HypothesisViolation(format!(
            "mu(C_1) = {plus} differs from mu(C_-1) = {minus}"
        )));
    }
    let mut notes = Vec::new();
    if plus == 0.0 {
        notes.push("f is identically zero: fibers are frozen".to_string());
    } else if plus >= 0.25 {
        notes.push(format!("mu(C_1) = {plus} is not below 1/4"));
    }
    for n in &notes {
        log::warn!("T_f construction: {n}");
    }
    let steps = ((r_angle * m as f64).round() as u32) % m;
    Ok(SystemModel::Tf(TfTriple {
        base: Box::new(base),
        f_values: f_values.to_vec(),
        steps,
        fiber: m,
        notes,
    }))
}

/// A bounded function on the states `(base observable, fiber point)` of a
/// skew product, tabulated exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFunction {
    base_states: usize,
    fiber: u32,
    values: Vec<f64>,
}

impl StateFunction {
    pub fn from_fn(ext: &SkewProduct, f: impl Fn(usize, u32) -> f64) -> Self {
        let b = ext.base_states();
        let m = ext.fiber_size();
        let values = (0..b)
            .flat_map(|x| (0..m).map(move |u| (x, u)))
            .map(|(x, u)| f(x, u))
            .collect();
        StateFunction {
            base_states: b,
            fiber: m,
            values,
        }
    }

    pub fn indicator(ext: &SkewProduct, set: &StateSet) -> Result<Self> {
        if set.space_size() != ext.base_states() * ext.fiber_size() as usize {
            return Err(dimension(
                "state set",
                ext.base_states() * ext.fiber_size() as usize,
                set.space_size(),
            ));
        }
        Ok(Self::from_fn(ext, |x, u| {
            if set.contains(ext.index(x, u)) {
                1.0
            } else {
                0.0
            }
        }))
    }

    pub fn constant(ext: &SkewProduct, c: f64) -> Self {
        Self::from_fn(ext, |_, _| c)
    }

    /// Indicator of the lower half `u < m/2` of every fiber.
    pub fn fiber_lower_half(ext: &SkewProduct) -> Self {
        let half = ext.fiber_size() / 2;
        Self::from_fn(ext, |_, u| if u < half { 1.0 } else { 0.0 })
    }

    /// `u / m`.
    pub fn fiber_coordinate(ext: &SkewProduct) -> Self {
        let m = ext.fiber_size() as f64;
        Self::from_fn(ext, |_, u| u as f64 / m)
    }

    pub fn check_shape(&self, ext: &SkewProduct) -> Result<()> {
        if self.base_states != ext.base_states() || self.fiber != ext.fiber_size() {
            return Err(dimension(
                "state function",
                ext.base_states() * ext.fiber_size() as usize,
                self.values.len(),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, x: usize, u: u32) -> f64 {
        self.values[x * self.fiber as usize + u as usize]
    }

    pub fn fiber_values(&self, x: usize) -> &[f64] {
        let m = self.fiber as usize;
        &self.values[x * m..(x + 1) * m]
    }

    /// `E(f | base)(x)`: exact average over the fiber grid.
    pub fn fiber_average(&self, x: usize) -> f64 {
        self.fiber_values(x).iter().sum::<f64>() / self.fiber as f64
    }

    /// `f - E(f | base)`.
    pub fn centered(&self) -> StateFunction {
        let m = self.fiber as usize;
        let mut values = self.values.clone();
        for x in 0..self.base_states {
            let avg = self.fiber_average(x);
            for v in &mut values[x * m..(x + 1) * m] {
                *v -= avg;
            }
        }
        StateFunction { values, ..*self }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `∫ f(y, ·) dμ_y`: the exact fiber average at base observable `y`.
pub fn conditional_expectation(ext: &SkewProduct, f: &StateFunction, y: usize) -> Result<f64> {
    f.check_shape(ext)?;
    if y >= ext.base_states() {
        return Err(dimension("base point", ext.base_states(), y));
    }
    Ok(f.fiber_average(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> SystemModel {
        SystemModel::bernoulli(vec![0.5, 0.5]).unwrap()
    }

    fn as_skew(s: &SystemModel) -> &SkewProduct {
        match s {
            SystemModel::Skew(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(
            Rational::approximate(0.25, 1 << 31).unwrap(),
            Rational { num: 1, den: 4 }
        );
        let r = Rational::approximate(2f64.sqrt() - 1.0, 1 << 31).unwrap();
        assert!(r.den <= 1 << 31);
        assert!((r.as_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let r = Rational::approximate(2f64.sqrt() - 1.0, 100).unwrap();
        assert_eq!((r.num, r.den), (29, 70));
    }

    #[test]
    fn stationary_vector_of_two_state_chain() {
        let m = SystemModel::markov(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let pi = m.observable_measure();
        assert!((pi[0] - 0.75).abs() < 1e-12 && (pi[1] - 0.25).abs() < 1e-12);
        assert!(SystemModel::markov_with_stationary(
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
            vec![0.5, 0.5]
        )
        .is_err());
    }

    #[test]
    fn identity_permutation_has_constant_labels() {
        let sys = SystemModel::permutation(vec![0, 1, 2, 3]).unwrap();
        let part = Partition::from_labels(&[0, 1, 0, 1]).unwrap();
        let t = sample_trajectory(&sys, &part, 5, 9, 0).unwrap();
        assert!(t.labels.iter().all(|&l| l == t.labels[0]));
    }

    #[test]
    fn trajectory_rejects_incompatible_partition() {
        let part = Partition::trivial(3).unwrap();
        assert!(matches!(
            sample_trajectory(&coin(), &part, 10, 0, 0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = coin().generator();
        let a = sample_trajectory(&coin(), &g, 1000, 42, 3).unwrap();
        let b = sample_trajectory(&coin(), &g, 1000, 42, 3).unwrap();
        let c = sample_trajectory(&coin(), &g, 1000, 43, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.labels, c.labels);
    }

    #[test]
    fn rotation_coding_matches_angle_iteration() {
        let sys = SystemModel::rotation(
            Rational::approximate(2f64.sqrt() - 1.0, MAX_ANGLE_DENOMINATOR).unwrap(),
            &[0.0, 0.5],
            Partition::discrete(2).unwrap(),
        )
        .unwrap();
        let SystemModel::Rotation(r) = &sys else {
            unreachable!()
        };
        let (p, q) = (r.angle().num as u128, r.angle().den as u128);
        let t = sample_trajectory(&sys, &sys.generator(), 100_000, 5, 0).unwrap();
        let x0 = match sys.orbit(5).unwrap().state() {
            State::Circle(x) => *x as u128,
            _ => unreachable!(),
        };
        for (n, &l) in t.labels.iter().enumerate() {
            // label 0 iff the point lies in [0, 1/2)
            let x = (x0 + n as u128 * p) % q;
            let expect = if 2 * x < q { 0 } else { 1 };
            assert_eq!(l, expect, "time {n}");
        }
    }

    #[test]
    fn sturmian_word_is_mechanical() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let sys = SystemModel::sturmian(alpha).unwrap();
        let SystemModel::Rotation(r) = &sys else {
            unreachable!()
        };
        let (p, q) = (r.angle().num as u128, r.angle().den as u128);
        let t = sample_trajectory(&sys, &sys.generator(), 5000, 1, 0).unwrap();
        let x0 = match sys.orbit(1).unwrap().state() {
            State::Circle(x) => *x as u128,
            _ => unreachable!(),
        };
        for (n, &l) in t.labels.iter().enumerate() {
            let a = (x0 + n as u128 * p) / q;
            let b = (x0 + (n as u128 + 1) * p) / q;
            assert_eq!(l as u128, b - a);
        }
    }

    #[test]
    fn identity_cocycle_freezes_fiber() {
        let sk = skew_product(coin(), &CocycleSpec::Constant(FiberMap::identity()), 8).unwrap();
        let s = as_skew(&sk);
        let obs = sk.orbit(3).unwrap().observables(200).unwrap();
        let u0 = s.split(obs[0]).1;
        assert!(obs.iter().all(|&o| s.split(o).1 == u0));
        let base = coin().orbit(3).unwrap().observables(200).unwrap();
        let proj: Vec<usize> = obs.iter().map(|&o| s.split(o).0).collect();
        assert_eq!(proj, base);
    }

    #[test]
    fn unit_rotation_has_period_four() {
        let sk = skew_product(coin(), &CocycleSpec::Constant(FiberMap::Rotation(1)), 4).unwrap();
        let s = as_skew(&sk);
        let obs = sk.orbit(11).unwrap().observables(40).unwrap();
        for t in 0..36 {
            assert_eq!(s.split(obs[t]).1, s.split(obs[t + 4]).1);
            assert_eq!((s.split(obs[t]).1 + 1) % 4, s.split(obs[t + 1]).1);
        }
    }

    #[test]
    fn cell_driven_cocycle_is_a_driven_random_walk() {
        let cells = coin().generator();
        let spec = CocycleSpec::CellDriven {
            cells,
            maps: vec![FiberMap::Rotation(0), FiberMap::Rotation(1)],
        };
        let sk = skew_product(coin(), &spec, 8).unwrap();
        let s = as_skew(&sk);
        let obs = sk.orbit(21).unwrap().observables(10_000).unwrap();
        let base = coin().orbit(21).unwrap().observables(10_000).unwrap();
        // independent walk: position = start + number of ones seen so far
        let mut walk = s.split(obs[0]).1;
        for t in 0..obs.len() {
            assert_eq!(s.split(obs[t]).1, walk);
            walk = (walk + base[t] as u32) % 8;
        }
    }

    #[test]
    fn fiber_size_mismatch_is_rejected() {
        let spec = CocycleSpec::Constant(FiberMap::Permutation(vec![1, 0, 2]));
        assert!(skew_product(coin(), &spec, 4).is_err());
        let spec = CocycleSpec::Constant(FiberMap::Rotation(4));
        assert!(skew_product(coin(), &spec, 4).is_err());
        let spec = CocycleSpec::Constant(FiberMap::Permutation(vec![1, 1, 2, 3]));
        assert!(skew_product(coin(), &spec, 4).is_err());
    }

    #[test]
    fn relative_product_keeps_diagonal_and_difference() {
        let spec = CocycleSpec::CellDriven {
            cells: coin().generator(),
            maps: vec![FiberMap::Rotation(3), FiberMap::Rotation(1)],
        };
        let sk = skew_product(coin(), &spec, 4).unwrap();
        let rel = relative_independent_product(&sk).unwrap();
        let SystemModel::RelProduct(r) = &rel else {
            unreachable!()
        };
        let diag = State::Pair {
            base: Box::new(State::Symbol(1)),
            u: 2,
            v: 2,
        };
        let mut o = rel.orbit_at(diag, 4);
        for _ in 0..500 {
            let (_, u, v) = r.split(o.observe());
            assert_eq!(u, v);
            o.step().unwrap();
        }
        let obs = rel.orbit(8).unwrap().observables(2000).unwrap();
        let d0 = {
            let (_, u, v) = r.split(obs[0]);
            (v + 4 - u) % 4
        };
        assert!(obs.iter().all(|&o| {
            let (_, u, v) = r.split(o);
            (v + 4 - u) % 4 == d0
        }));
    }

    #[test]
    fn relative_product_of_identity_freezes_both() {
        let sk = skew_product(coin(), &CocycleSpec::Constant(FiberMap::identity()), 5).unwrap();
        let rel = relative_independent_product(&sk).unwrap();
        let SystemModel::RelProduct(r) = &rel else {
            unreachable!()
        };
        let obs = rel.orbit(2).unwrap().observables(100).unwrap();
        let (_, u0, v0) = r.split(obs[0]);
        assert!(obs.iter().all(|&o| {
            let (_, u, v) = r.split(o);
            u == u0 && v == v0
        }));
        assert!(relative_independent_product(&coin()).is_err());
    }

    #[test]
    fn induced_on_whole_space_is_the_system() {
        let ind = induce(coin(), StateSet::full(2), 100).unwrap();
        let r = sample_returns(&ind, 1000, 1).unwrap();
        assert!(r.iter().all(|&(_, t)| t == 1));
    }

    #[test]
    fn induced_rotation_cell_returns_every_four() {
        let rot = SystemModel::rotation_grid(0.25, 4).unwrap();
        let ind = induce(rot, StateSet::from_indices(4, [0]).unwrap(), 100).unwrap();
        let r = sample_returns(&ind, 100, 3).unwrap();
        assert!(r.iter().all(|&(a, t)| a == 0 && t == 4));
    }

    #[test]
    fn induced_overflow_is_reported() {
        let rot = SystemModel::rotation_grid(0.25, 4).unwrap();
        let ind = induce(rot, StateSet::from_indices(4, [1]).unwrap(), 3).unwrap();
        assert!(matches!(
            sample_returns(&ind, 10, 0),
            Err(Error::ReturnTimeOverflow { horizon: 3 })
        ));
        let perm = SystemModel::permutation(vec![0, 1]).unwrap();
        let ind = induce(perm, StateSet::from_indices(2, [0]).unwrap(), 50).unwrap();
        // orbits starting in {0} never leave it; orbits outside are never drawn
        assert!(sample_returns(&ind, 3, 0).is_ok());
    }

    #[test]
    fn induced_rejects_null_set() {
        let b = SystemModel::bernoulli(vec![1.0, 0.0]).unwrap();
        assert!(induce(b, StateSet::from_indices(2, [1]).unwrap(), 10).is_err());
    }

    #[test]
    fn tf_zero_function_freezes() {
        let tf = t_f_triple(coin(), &[0, 0], 0.25, 8).unwrap();
        let SystemModel::Tf(t) = &tf else {
            unreachable!()
        };
        assert_eq!(t.hypothesis_notes().len(), 1);
        let obs = tf.orbit(1).unwrap().observables(100).unwrap();
        let (_, a, b) = t.split(obs[0]);
        assert!(obs.iter().all(|&o| {
            let (_, u, v) = t.split(o);
            (u, v) == (a, b)
        }));
    }

    #[test]
    fn tf_alternation_returns_every_two_steps() {
        let swap = SystemModel::permutation(vec![1, 0]).unwrap();
        let tf = t_f_triple(swap, &[1, -1], 0.125, 16).unwrap();
        let SystemModel::Tf(t) = &tf else {
            unreachable!()
        };
        let obs = tf.orbit(6).unwrap().observables(101).unwrap();
        for k in 0..50 {
            assert_eq!(obs[2 * k], obs[2 * k + 2]);
        }
        assert_ne!(t.split(obs[0]).1, t.split(obs[1]).1);
    }

    #[test]
    fn tf_rejects_unbalanced_cells() {
        let b = SystemModel::bernoulli(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            t_f_triple(b, &[1, -1, 0], 0.1, 8),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn conditional_expectation_examples() {
        let sk = skew_product(coin(), &CocycleSpec::Constant(FiberMap::identity()), 4).unwrap();
        let s = as_skew(&sk);
        let base_only = StateFunction::from_fn(s, |x, _| x as f64 * 2.0 + 1.0);
        assert_eq!(conditional_expectation(s, &base_only, 1).unwrap(), 3.0);
        let coord = StateFunction::fiber_coordinate(s);
        assert_eq!(conditional_expectation(s, &coord, 0).unwrap(), 0.375);
        let sk8 = skew_product(coin(), &CocycleSpec::Constant(FiberMap::identity()), 8).unwrap();
        let s8 = as_skew(&sk8);
        let cell0 = StateFunction::from_fn(s8, |_, u| if u == 0 { 1.0 } else { 0.0 });
        for y in 0..2 {
            assert_eq!(conditional_expectation(s8, &cell0, y).unwrap(), 0.125);
        }
    }

    #[test]
    fn product_partition_cells() {
        let sk = skew_product(coin(), &CocycleSpec::Constant(FiberMap::identity()), 16).unwrap();
        assert_eq!(sk.product_partition(0).unwrap().cell_count(), 2);
        assert_eq!(sk.product_partition(1).unwrap().cell_count(), 4);
        assert_eq!(sk.product_partition(4).unwrap().cell_count(), 32);
        assert!(sk.product_partition(5).is_err());
        let rel = relative_independent_product(&sk).unwrap();
        assert_eq!(rel.product_partition(1).unwrap().cell_count(), 8);
    }
}
