//! File formats: word files, distribution CSV, system specs (TOML), cocycle
//! tables (CSV) and trajectory dumps.
//!
//! Word file:
//! ```text
//! alphabet=2 length=4
//! 0 1 0 1
//! 1 0 1 0
//! ```
//! Distribution CSV has header `word,probability`, words written as
//! space-separated symbols. Cocycle tables have header
//! `cell,rotation_steps`. Trajectory dumps start with
//! `# alphabet=<k> length=<n> seed=<s> burn_in=<b>` then one symbol per line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{Alphabet, Partition, Symbol, Word, WordDistribution};
use crate::systems::{
    sample_trajectory, skew_product, CocycleSpec, FiberMap, Rational, SystemModel,
    TrajectorySample, MAX_ANGLE_DENOMINATOR,
};

fn parse_symbols(line: &str) -> Result<Vec<Symbol>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<Symbol>()
                .map_err(|_| Error::Parse(format!("bad symbol `{t}`")))
        })
        .collect()
}

fn header_field(header: &str, key: &str) -> Result<u64> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("header lacks `{key}=`")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad `{key}` in header")))
}

pub fn parse_words(text: &str) -> Result<Vec<Word>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty word file".into()))?;
    let alphabet = Alphabet::new(header_field(header, "alphabet")? as u32)?;
    let length = header_field(header, "length")? as usize;
    lines
        .map(|l| {
            let w = Word::new(alphabet, parse_symbols(l)?)?;
            if w.len() != length {
                return Err(crate::error::dimension("word file entry", length, w.len()));
            }
            Ok(w)
        })
        .collect()
}

pub fn render_words(words: &[Word]) -> Result<String> {
    let first = words
        .first()
        .ok_or_else(|| Error::Validation("no words to write".into()))?;
    let mut out = format!(
        "alphabet={} length={}\n",
        first.alphabet().size(),
        first.len()
    );
    for w in words {
        if w.len() != first.len() {
            return Err(crate::error::dimension(
                "word file entry",
                first.len(),
                w.len(),
            ));
        }
        out.push_str(&w.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn read_words(path: &Path) -> Result<Vec<Word>> {
    parse_words(&fs::read_to_string(path)?)
}

pub fn write_words(path: &Path, words: &[Word]) -> Result<()> {
    Ok(fs::write(path, render_words(words)?)?)
}

#[derive(Serialize, Deserialize)]
struct DistributionRow {
    word: String,
    probability: f64,
}

pub fn parse_distribution(text: &str) -> Result<WordDistribution> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for row in rdr.deserialize::<DistributionRow>() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        pairs.push((parse_symbols(&row.word)?, row.probability));
    }
    let length = pairs
        .first()
        .map(|p| p.0.len())
        .ok_or_else(|| Error::Parse("distribution file has no rows".into()))?;
    WordDistribution::from_pairs(length, pairs)
}

pub fn render_distribution(dist: &WordDistribution) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (word, p) in dist.iter() {
        let word = word
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        w.serialize(DistributionRow {
            word,
            probability: p,
        })
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_distribution(path: &Path) -> Result<WordDistribution> {
    parse_distribution(&fs::read_to_string(path)?)
}

pub fn write_distribution(path: &Path, dist: &WordDistribution) -> Result<()> {
    Ok(fs::write(path, render_distribution(dist)?)?)
}

#[derive(Serialize, Deserialize)]
struct CocycleRow {
    cell: u32,
    rotation_steps: u32,
}

/// Rotation steps indexed by cell; every cell `0..n` must appear once.
pub fn parse_cocycle_table(text: &str) -> Result<Vec<u32>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows: Vec<CocycleRow> = Vec::new();
    for row in rdr.deserialize::<CocycleRow>() {
        rows.push(row.map_err(|e| Error::Parse(e.to_string()))?);
    }
    rows.sort_by_key(|r| r.cell);
    if rows.iter().enumerate().any(|(i, r)| r.cell != i as u32) {
        return Err(Error::Parse(
            "cocycle table cells must be 0..n, each once".into(),
        ));
    }
    Ok(rows.into_iter().map(|r| r.rotation_steps).collect())
}

pub fn render_cocycle_table(steps: &[u32]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (cell, &s) in steps.iter().enumerate() {
        w.serialize(CocycleRow {
            cell: cell as u32,
            rotation_steps: s,
        })
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn render_trajectory(t: &TrajectorySample) -> String {
    let mut out = format!(
        "# alphabet={} length={} seed={} burn_in={}\n",
        t.alphabet, t.length, t.seed, t.burn_in
    );
    for s in &t.labels {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str) -> Result<TrajectorySample> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|h| h.strip_prefix('#'))
        .ok_or_else(|| Error::Parse("trajectory header missing".into()))?;
    let alphabet = header_field(header, "alphabet")? as u32;
    let length = header_field(header, "length")? as usize;
    let labels: Vec<Symbol> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<Symbol>()
                .map_err(|_| Error::Parse(format!("bad symbol `{l}`")))
        })
        .collect::<Result<_>>()?;
    if labels.len() != length {
        return Err(crate::error::dimension(
            "trajectory length",
            length,
            labels.len(),
        ));
    }
    if labels.iter().any(|&s| s as u32 >= alphabet) {
        return Err(Error::Validation(
            "trajectory symbol outside alphabet".into(),
        ));
    }
    Ok(TrajectorySample {
        labels,
        alphabet,
        seed: header_field(header, "seed")?,
        burn_in: header_field(header, "burn_in")? as usize,
        length,
    })
}

pub fn read_trajectory(path: &Path) -> Result<TrajectorySample> {
    parse_trajectory(&fs::read_to_string(path)?)
}

pub fn write_trajectory(path: &Path, t: &TrajectorySample) -> Result<()> {
    Ok(fs::write(path, render_trajectory(t))?)
}

/// How a skew product's fiber maps are chosen, as written in a spec file.
/// Steps are indexed by the cells of the base generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleFile {
    Identity,
    Constant {
        steps: u32,
    },
    CellDriven {
        steps: Vec<u32>,
    },
    Random {
        seed: u64,
    },
    /// CSV `cell,rotation_steps`, relative to the spec file.
    Table {
        path: PathBuf,
    },
}

/// A system description readable from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Bernoulli {
        p: Vec<f64>,
    },
    Markov {
        matrix: Vec<Vec<f64>>,
    },
    /// Rotation coded by arcs starting at `cuts`; `labels` assigns arcs to
    /// cells (default: each arc its own cell).
    Rotation {
        alpha: f64,
        cuts: Vec<f64>,
        #[serde(default)]
        labels: Option<Vec<u32>>,
    },
    Sturmian {
        alpha: f64,
    },
    Permutation {
        perm: Vec<u32>,
    },
    Skew {
        fiber: u32,
        base: Box<SystemSpec>,
        cocycle: CocycleFile,
    },
}

impl SystemSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds the model; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<SystemModel> {
        match self {
            SystemSpec::Bernoulli { p } => SystemModel::bernoulli(p.clone()),
            SystemSpec::Markov { matrix } => SystemModel::markov(matrix.clone()),
            SystemSpec::Rotation {
                alpha,
                cuts,
                labels,
            } => {
                let angle = Rational::approximate(*alpha, MAX_ANGLE_DENOMINATOR)?;
                let coding = match labels {
                    Some(l) => Partition::from_labels(l)?,
                    None => Partition::discrete(cuts.len())?,
                };
                SystemModel::rotation(angle, cuts, coding)
            }
            SystemSpec::Sturmian { alpha } => SystemModel::sturmian(*alpha),
            SystemSpec::Permutation { perm } => SystemModel::permutation(perm.clone()),
            SystemSpec::Skew {
                fiber,
                base,
                cocycle,
            } => {
                let base = base.build(base_dir)?;
                let cells = base.generator();
                let spec = match cocycle {
                    CocycleFile::Identity => CocycleSpec::Constant(FiberMap::identity()),
                    CocycleFile::Constant { steps } => {
                        CocycleSpec::Constant(FiberMap::Rotation(*steps))
                    }
                    CocycleFile::CellDriven { steps } => CocycleSpec::CellDriven {
                        cells,
                        maps: steps.iter().map(|&s| FiberMap::Rotation(s)).collect(),
                    },
                    CocycleFile::Random { seed } => CocycleSpec::Random { cells, seed: *seed },
                    CocycleFile::Table { path } => {
                        let steps = parse_cocycle_table(&fs::read_to_string(base_dir.join(path))?)?;
                        CocycleSpec::CellDriven {
                            cells,
                            maps: steps.into_iter().map(FiberMap::Rotation).collect(),
                        }
                    }
                };
                skew_product(base, &spec, *fiber)
            }
        }
    }
}

pub fn load_system(path: &Path) -> Result<SystemModel> {
    let spec = SystemSpec::from_toml(&fs::read_to_string(path)?)?;
    spec.build(path.parent().unwrap_or(Path::new(".")))
}

/// Resolves a partition name: `gen` (the generator), `base` (the base
/// generator lifted to an extension) or `product:<level>`.
pub fn named_partition(sys: &SystemModel, name: &str) -> Result<Partition> {
    match name {
        "gen" => Ok(sys.generator()),
        "base" => match sys.base() {
            Some(b) => sys.lift_base_partition(&b.generator()),
            None => Ok(sys.generator()),
        },
        other => {
            let level = other
                .strip_prefix("product:")
                .and_then(|l| l.parse::<u32>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown partition `{other}`")))?;
            sys.product_partition(level)
        }
    }
}

/// Samples a labelled trajectory of `sys` under a named partition.
pub fn sample_named(
    sys: &SystemModel,
    partition: &str,
    steps: usize,
    seed: u64,
) -> Result<TrajectorySample> {
    sample_trajectory(sys, &named_partition(sys, partition)?, steps, seed, 0)
}
