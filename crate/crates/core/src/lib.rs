//! Fuzzy dichotomic polarization measurements on multiphoton singlet states:
//! exact and Monte Carlo fringe statistics under photon loss, filtering
//! schemes, and CHSH optimization.
//!
//! The building blocks, bottom up:
//! - [`state`]: singlet amplitude tables in rotated bases and the photon-pair
//!   weight distribution of a high-gain down-conversion source;
//! - [`measure`]: count-level dichotomization schemes and joint outcome
//!   probabilities;
//! - [`loss`]: binomial-thinning loss, exact per-side convolution and seeded
//!   Monte Carlo sampling of outcome matrices;
//! - [`chsh`]: conditional correlations and CHSH maximization over analyzer
//!   angles;
//! - [`analysis`]: fringe sweeps, visibility, success probability, harmonic
//!   content, and the classical triangular-reference ratio.

pub mod analysis;
pub mod chsh;
pub mod error;
pub mod loss;
pub mod math;
pub mod measure;
pub mod state;

pub use analysis::{
    fringe_sweep, harmonic_content, linear_reference_ratio, success_probability, uniform_grid,
    visibility, visibility_curve, FringePattern, LinearReferenceRatio, VisibilityCurve,
};
pub use chsh::{chsh_at, correlation_e, maximize_chsh, AngleSettings, ChshResult, Method};
pub use error::{Error, Result};
pub use loss::{
    fringe_point, outcome_matrix_exact, outcome_matrix_mc, spdc_fringe_point, thin_binomial_exact,
    LossChannel, McConfig, OutcomeMatrix,
};
pub use measure::{
    joint_probabilities, outcome_weights, parity_correlation, JointOutcomeProbs,
    MeasurementScheme, Outcome, OutcomeWeights,
};
pub use state::{
    mean_photons, singlet_coefficients, spdc_weights, CoefficientMatrix, SpdcWeights, StateSpec,
    DEFAULT_N_CAP,
};
