//! Engine for generating safety-critical vehicle-pedestrian interaction data.
//!
//! The crate simulates one vehicle and one pedestrian on a parameterized
//! right-turn intersection, trains a pair of interacting actor-critic agents
//! in three stages (offline pre-training on recorded trajectories, gated
//! online refinement, large-scale generation), and emits filtered CSV
//! datasets together with an evaluation and statistical-validation suite.
//!
//! Module map:
//! - [`world`]: kinematics, observations, scenario geometry, rule-based control
//! - [`conflict`]: curvilinear time-to-collision and episode safety labels
//! - [`nn`]: sequence-encoder actor/critic networks with hand-rolled reverse mode
//! - [`reward`]: reward components and adaptive weighting
//! - [`rl`]: replay buffers, prioritized sampling, the training step
//! - [`pipeline`]: corpus ingestion, the three stages, dataset emission
//! - [`metrics`]: trajectory errors, distribution tests, behavioral grids
//! - [`config`]: merged run configuration and the plain-text key-value format

pub mod config;
pub mod conflict;
pub mod kv;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod reward;
pub mod rl;
pub mod seeding;
pub mod world;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("malformed input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("not ready: {0}")]
    NotReady(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
