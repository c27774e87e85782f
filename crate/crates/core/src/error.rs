//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (negative gain,
    /// transmittivity outside [0, 1], empty grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Photon number above the configured hard cap.
    #[error("photon number n = {n} exceeds the size cap {cap}")]
    SizeCap { n: usize, cap: usize },

    /// Two objects that must share the same sector size do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The parity observable has no {+1, -1, 0} outcome map; it is exposed
    /// only through `measure::parity_correlation`.
    #[error("the parity scheme has no outcome map; use parity_correlation instead")]
    ParityOutcomeMap,

    /// Conditional correlation with zero conclusive probability.
    #[error("correlation undefined: conclusive probability is zero")]
    UndefinedCorrelation,

    /// SPDC truncation discarded more probability mass than allowed.
    #[error("truncated tail mass {mass:.3e} exceeds tolerance {tolerance:.3e}")]
    TruncationMass { mass: f64, tolerance: f64 },

    /// A fringe whose selected outcome vanishes identically has no visibility.
    #[error("degenerate fringe: {0}")]
    DegenerateFringe(String),
}

pub type Result<T> = std::result::Result<T, Error>;
