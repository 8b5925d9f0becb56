//! Deterministic agent-based simulator of shrimp-culture feed distribution.
//!
//! A population of shrimp agents lives on a 2-D pond grid. Feed is dropped
//! from one, two or three feeders (or scattered uniformly), agents smell and
//! hunt pellets, grow one gram per fixed number of pellets, and are stressed
//! by a fuzzy evaluation of the water quality of their cell. Each crop
//! ("generation") runs until the mean size reaches the harvest criterion; a
//! genetic algorithm over the agents' tolerance genes links ten generations
//! into one pre-experiment, and sixteen feed configurations form the full
//! experiment matrix.

pub mod agents;
pub mod analytics;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod fuzzy;
pub mod genome;
pub mod habitat;

pub use config::{Density, Disposition, ExperimentConfig, FeedingMode, TuningDefaults};
pub use engine::{GenerationResult, PreExperiment};
pub use error::{Error, Result};
