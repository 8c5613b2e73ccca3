use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimMismatch { a: (usize, usize), b: (usize, usize) },

    #[error("ambiguous skeleton: {endpoints} endpoints")]
    AmbiguousSkeleton { endpoints: usize },

    #[error("skeleton too short: {pixels} pixels for {m} keypoints")]
    SkeletonTooShort { pixels: usize, m: usize },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{arm} arm cannot reach ({x:.4}, {y:.4})")]
    Reachability { arm: &'static str, x: f64, y: f64 },

    #[error("{arm} arm target ({x:.4}, {y:.4}) collides with contact {contact}")]
    Collision {
        arm: &'static str,
        x: f64,
        y: f64,
        contact: usize,
    },

    #[error("invalid action plan: {0}")]
    InvalidPlan(String),

    #[error("goal curve never enters the benchmark annulus of contact {contact}")]
    InfeasibleGoal { contact: usize },

    #[error("benchmark coincides with the center of contact {contact}")]
    DegenerateDirection { contact: usize },

    #[error("planning infeasible: {0}")]
    PlanningInfeasible(String),

    #[error("dataset generation failed for sample {index} after {retries} retries")]
    GenerationFailed { index: usize, retries: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
