//! Finite-state Markov chains read as symbolic dynamics.
//!
//! Realizations of a chain (with or without memory) are points of the space of
//! one-sided symbol sequences under the weighted metric
//! `delta(a, b) = sum_k d(a_k, b_k) / 2^k`, on which the left shift acts.
//! The crate provides:
//!
//! - [`state_space`]: validated finite metric spaces of states;
//! - [`transition`]: order-`r` transition laws, block events and lifting;
//! - [`sequence_space`]: `delta`, the shift, cylinders, and the diameter,
//!   separation and similarity checks;
//! - [`simulator`]: reproducible sample paths on a pinned generator ([`prng`]);
//! - [`chaos`]: unpredictability witnesses, arc coverage, Devaney certificates;
//! - [`random_walk`]: the reflecting walk on four levels and its event coding;
//! - [`config`] and [`io`]: the JSON chain spec and the CSV artifacts.

pub mod chaos;
pub mod config;
pub mod io;
pub mod prng;
pub mod random_walk;
pub mod sequence_space;
pub mod simulator;
pub mod state_space;
pub mod transition;

pub use chaos::{
    arc_coverage, devaney_certificate, divergence_locator, find_witnesses, ArcCoverage,
    DevaneyCertificate, Witness, WitnessReport,
};
pub use config::{Chain, ChainSpec, ConfigError};
pub use sequence_space::{Cylinder, EnumerationBudget, SymbolSequence};
pub use simulator::{random_initial, simulate, Realization};
pub use state_space::StateSpace;
pub use transition::{BlockEvent, TransitionModel};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Metric(#[from] state_space::MetricError),
    #[error(transparent)]
    Model(#[from] transition::ModelError),
    #[error(transparent)]
    Sequence(#[from] sequence_space::SequenceError),
    #[error(transparent)]
    Simulation(#[from] simulator::SimulationError),
    #[error(transparent)]
    Analysis(#[from] chaos::AnalysisError),
    #[error(transparent)]
    Walk(#[from] random_walk::WalkError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
