//! Finite-state laboratory for relative mixing, entropy and class
//! diagnostics of skew-product extensions.
//!
//! Modules, bottom up: [`symbolic`] (alphabets, words, partitions, block
//! counts), [`metrics`] (d̄, f̄, transport), [`systems`] (shifts, rotations,
//! skew products, induced maps), [`entropy`], [`diagnostics`],
//! [`experiments`], and the file formats in [`io`].

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod symbolic;
pub mod systems;

pub use error::{Error, Result};
pub use metrics::{DistanceReport, Method, WordMetric};
pub use symbolic::{Alphabet, Partition, StateSet, Symbol, Word, WordDistribution};
pub use systems::{CocycleSpec, FiberMap, SkewProduct, SystemModel};
