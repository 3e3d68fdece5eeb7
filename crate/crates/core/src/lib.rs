//! Virtual-screening benchmark toolkit.
//!
//! The crate covers the full path from raw assay records to benchmark numbers:
//! molecule parsing and normalization ([`mol`]), substructure patterns
//! ([`smarts`]), dataset curation ([`curation`]), per-atom physicochemical
//! properties ([`physchem`]), graph featurization ([`featurize`]), the
//! 391-dimensional autocorrelation descriptor ([`descriptors`]), data splits
//! ([`splits`]), early-recognition metrics ([`metrics`]) and a small
//! benchmark harness with a linear baseline ranker ([`bench`]).

pub mod bench;
pub mod curation;
pub mod descriptors;
pub mod elements;
pub mod error;
pub mod featurize;
pub mod metrics;
pub mod mol;
pub mod physchem;
pub mod smarts;
pub mod splits;

pub use error::{ChemError, Result};
pub use mol::{Atom, Bond, BondOrder, Molecule};
