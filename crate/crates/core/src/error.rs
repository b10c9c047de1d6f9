use thiserror::Error;

/// Errors produced by the modelling, integration and fatigue pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid cross section: wall thickness {thickness} m must satisfy 0 < 2t < a = {edge} m")]
    InvalidSection { edge: f64, thickness: f64 },

    #[error("station xi = {xi} m outside beam [0, {length}] m")]
    StationOutOfRange { xi: f64, length: f64 },

    #[error("mass matrix is not positive definite")]
    SingularMassMatrix,

    #[error("integration failed at t = {t} s: {reason}")]
    Integration { t: f64, reason: String },

    #[error("series is not alternating at index {0}")]
    NotAlternating(usize),

    #[error("cycle (mean {mean}, amplitude {amplitude}) outside the fixed binning range")]
    OutOfRange { mean: f64, amplitude: f64 },

    #[error("degenerate fatigue data: {0}")]
    DegenerateMaterial(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical integration (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integration { .. } | Error::SingularMassMatrix)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
