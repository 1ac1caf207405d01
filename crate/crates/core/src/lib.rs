//! Information-theoretic classification accuracy (ITCA) and the search for
//! the best combination of ambiguous class labels.
//!
//! The crate is organized bottom-up:
//!
//! - [`partitions`]: class combinations, their text form and enumeration.
//! - [`data`]: datasets, CSV I/O, stratified folds and the Gaussian simulator.
//! - [`classifiers`]: LDA, soft LDA, nearest centroid, random forest,
//!   majority and the oracle test instrument.
//! - [`criteria`]: cross-validated ITCA and the comparison criteria.
//! - [`search`]: exhaustive, greedy and breadth-first search with pruning.
//! - [`theory`]: closed-form population ITCA differences and region grids.
//! - [`baselines`]: clustering of class centers.
//! - [`benchmark`]: simulation sweeps shared by the CLI and the test suite.

pub mod baselines;
pub mod benchmark;
pub mod classifiers;
pub mod criteria;
pub mod data;
pub mod error;
pub mod gmm;
pub mod partitions;
pub mod search;
pub mod seeding;
pub mod theory;

pub use classifiers::{ClassifierKind, ClassifierSpec, TrainedClassifier};
pub use criteria::{CriterionName, CriterionReport};
pub use data::{Dataset, FeatureMatrix, FoldPlan, SimulationConfig};
pub use error::{Error, Result};
pub use partitions::{ForbiddenMerges, OrdinalEncoding, Partition};
pub use search::{SearchConfig, SearchTrace, Strategy};

