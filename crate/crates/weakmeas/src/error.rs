//! Error types shared across the crate.

use thiserror::Error;

/// Validation and runtime errors for model construction and simulation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`")]
    InvalidParameter { name: &'static str },

    #[error("state escaped the physical region at step {step}: {detail}")]
    StateEscape { step: u64, detail: String },

    #[error("state contains non-finite entries")]
    NonFiniteState,

    #[error("population rho11 = {rho11} outside [0, 1]")]
    PopulationOutOfRange { rho11: f64 },

    #[error("positivity defect rho11*rho22 - |rho12|^2 = {defect} is negative")]
    PositivityViolated { defect: f64 },

    #[error("record has {len} samples, need at least {min}")]
    RecordTooShort { len: usize, min: usize },

    #[error("truth channel length {truth} does not match {samples} samples")]
    TruthLengthMismatch { samples: usize, truth: usize },

    #[error("record is missing the truth channels required by this analysis")]
    MissingTruthChannels,

    #[error(
        "analytic form needs the underdamped regime: omega = {omega} <= gamma_total/2 = {half}",
        half = 0.5 * gamma_total
    )]
    Overdamped { omega: f64, gamma_total: f64 },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed record file: {detail}")]
    Malformed { detail: String },
}
