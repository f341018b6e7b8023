//! Simulator and analysis toolkit for coded caching with cooperative XOR
//! delivery.
//!
//! A server holds `N` files of `F` bits each and serves `K` users over a
//! shared broadcast link. During off-peak hours every user fills a cache of
//! `M` file-sized units by storing a random `q_i` fraction of each file `i`
//! (`model`, `allocation`). At request time the server XORs together bits
//! wanted by different users so that one broadcast slot serves several of
//! them at once (`delivery`). The crate provides:
//!
//! * `model`: system parameters, cache placements, demand bits, and a
//!   decodability verifier for transmission logs
//! * `bounds`: closed-form rate expressions and the per-allocation lower
//!   bound used as a baseline in experiments
//! * `allocation`: optimizers for the per-file caching fractions `q_i`
//! * `delivery`: the four XOR schedulers plus grouped and uncoded baselines
//! * `sim`: seeded Monte-Carlo rate experiments over a memory grid
//! * `fixture`: plain-text demand-bit fixtures and transmission-log
//!   serialization

pub mod allocation;
pub mod bounds;
pub mod delivery;
pub mod fixture;
pub mod model;
pub mod sim;

pub use allocation::{Grouping, KktSolution, Regime};
pub use model::{
    BitRecord, CacheAllocation, PlacementRealization, Popularity, RequestVector, SystemParams,
    Transmission, TransmissionLog, UserSet,
};
pub use sim::{DeliveryScheme, ExperimentConfig, PlacementScheme, RateStatistics};

/// Errors reported by constructors and solvers across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument or parameter set is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Two inputs that must agree in length or shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A fixture file could not be parsed.
    #[error("malformed fixture: {0}")]
    Fixture(String),
    /// An experiment configuration violates a cross-field constraint.
    #[error("invalid configuration: {0}")]
    Config(String),
}
