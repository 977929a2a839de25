//! Crate-wide error type. Every fallible operation reports one of these
//! variants; the CLI maps them onto machine-readable JSON.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff too small: captured norm {achieved:.17e} below required {required:.17e}")]
    CutoffTooSmall { achieved: f64, required: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ordering mismatch: expected {expected} table, got {got}")]
    OrderingMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("table degree {got} insufficient, need at least {need}")]
    InsufficientDegree { need: usize, got: usize },

    #[error("purity/overlap value {0} outside the domain of this operation")]
    OutOfDomain(f64),

    #[error("purity series not converged at max degree (last shell contributions {last:.3e}, {prev:.3e})")]
    PurityNotConverged { prev: f64, last: f64 },

    #[error("tomogram grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("degenerate direction: mu^2 + nu^2 = {0:.3e} below 1e-12")]
    DegenerateDirection(f64),

    #[error("gain too small: g = {g} leaves (g-1)^(-d/2) factors up to {amplification:.3e} at degree {degree}")]
    GainTooSmall {
        g: f64,
        degree: usize,
        amplification: f64,
    },

    #[error("singular system while solving the moment hierarchy: {0}")]
    SingularSystem(String),

    #[error("gamma = {0} outside the open interval (0, 1)")]
    InvalidGamma(f64),

    #[error("dimension mismatch: table degree {table} vs generator degree {generator}")]
    DimensionMismatch { table: usize, generator: usize },

    #[error("tomographic moments do not cover required angle {0}")]
    MissingAngles(f64),

    #[error("too few samples: {got} (need at least {need})")]
    TooFewSamples { need: usize, got: usize },

    #[error("amplified-tomogram map assumes g >> 1; got g = {0} < 10 (pass the low-gain override to proceed)")]
    GainBelowValidity(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
