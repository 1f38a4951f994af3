//! Auto-ML search over two-step positive-unlabelled learning pipelines.
//!
//! The crate is organised bottom-up: [`space`] and [`config`] describe the
//! search space, [`classifiers`] provides the base learners, [`pu`] runs a
//! configuration as a two-step PU algorithm, [`evaluation`] scores it and
//! drives nested cross-validation, [`search`] holds the GA, BO and EBO
//! optimisers, [`baselines`] the S-EM and DF-PU methods and [`stats`] the
//! significance tests used to compare result files.

pub mod baselines;
pub mod classifiers;
pub mod config;
pub mod data;
pub mod evaluation;
pub mod pu;
pub mod rng;
pub mod search;
pub mod space;
pub mod stats;
pub mod synthetic;

pub use config::{random_config, validate_config, CandidateConfig, GeneValue, Violation};
pub use data::{DataError, Dataset, PuDataset};
pub use space::{search_space_size, ClassifierKey, Fraction, Gene, SearchSpace, SpaceError, SpaceVariant};
