//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced by grid construction, univariate approximation and
/// network synthesis.
#[derive(Debug, Error)]
pub enum Error {
    /// The dimension must be at least 1.
    #[error("dimension must be at least 1")]
    ZeroDimension,

    /// The level budget must be at least 1.
    #[error("level budget must be at least 1")]
    ZeroLevel,

    /// No level up to the hard cap satisfies the requested tolerance.
    #[error("no level up to the cap {cap} meets the requested tolerance")]
    LevelCapExceeded { cap: u32 },

    /// An index count does not fit in 64 bits.
    #[error("index count overflows u64 at dimension {dim}, level budget {level}")]
    CountOverflow { dim: usize, level: u32 },

    /// A numeric parameter is outside its admissible range.
    #[error("parameter {name} = {value} is outside {range}")]
    BadParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A level/position pair is malformed.
    #[error("invalid level/position pair: {0}")]
    BadIndex(String),

    /// A function expected to be non-decreasing was observed decreasing.
    #[error("function is not non-decreasing on the interval (observed drop {drop} near x = {at})")]
    NotMonotone { at: f64, drop: f64 },

    /// Piecewise-affine node lists are malformed.
    #[error("invalid piecewise-affine data: {0}")]
    BadPieces(String),

    /// An activation cannot be used where requested.
    #[error("activation {name} is unusable here: {reason}")]
    BadActivation { name: String, reason: &'static str },

    /// A scaling search for an activation wrapper failed.
    #[error("activation scaling failed for {name}: {reason}")]
    ScalingFailed { name: String, reason: String },

    /// Network structure is inconsistent (widths, weight indices, ...).
    #[error("malformed network: {0}")]
    BadNetwork(String),

    /// JSON that does not match the network schema.
    #[error("network JSON does not match the schema: {0}")]
    BadJson(String),

    /// A named target is not in the registry.
    #[error("unknown target {name} (known: {known})")]
    UnknownTarget { name: String, known: String },

    /// Experiment configuration errors.
    #[error("invalid experiment configuration: {0}")]
    BadExperiment(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
