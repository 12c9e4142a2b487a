//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index {index} out of range for alphabet of {generator_count} generators")]
    InvalidGenerator { index: usize, generator_count: usize },

    #[error("alphabet mismatch: words use {left} and {right} generators")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("no tabulated value at point {point}")]
    MissingValue { point: String },

    #[error("points {x} and {y} are at distance zero but carry different values; Lipschitz number is unbounded")]
    UnboundedNorm { x: String, y: String },

    #[error("distinct points {x} and {y} are at distance zero; pass the pseudometric flag to allow this")]
    ZeroDistance { x: String, y: String },

    #[error("metric oracle failed: {0}")]
    Oracle(String),

    #[error("element cap {cap} exceeded while enumerating")]
    ElementCap { cap: usize },

    #[error("enumeration budget exceeded: {what} needs m + n <= {limit}")]
    Budget { what: &'static str, limit: usize },

    #[error("{operation} is not supported on the {backend} backend")]
    UnsupportedBackend {
        operation: &'static str,
        backend: &'static str,
    },

    #[error("{operation} has no computable scope here: {reason}")]
    Scope {
        operation: &'static str,
        reason: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("action space axiom failed: {0}")]
    ActionSpace(String),

    #[error("metric is not right-invariant on the checked ball: d(gk, hk) != d(g, h) for g={g}, h={h}, k={k}")]
    NotBiInvariant { g: String, h: String, k: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("empirical constant undefined: every sample vector lies in the kernel")]
    UndefinedConstant,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
