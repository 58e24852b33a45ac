use std::path::PathBuf;

use crate::degrees::ModelKind;
use crate::dist::Distribution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("out-degree sum {out_sum} differs from in-degree sum {in_sum}")]
    MismatchedSums { out_sum: u64, in_sum: u64 },
    #[error("vertex {vertex} has degree {degree}; every degree must be at least 2")]
    DegreeTooSmall { vertex: usize, degree: u32 },
    #[error("vertex {vertex} has out-degree {degree} > n = {n}")]
    DegreeTooLarge { vertex: usize, degree: u32, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("expected a {expected} sequence, got {got}")]
    ModelMismatch { expected: ModelKind, got: ModelKind },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("step {step} from {from} to {to} has zero kernel mass")]
    ImpossibleStep { step: usize, from: usize, to: usize },
    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        residual: f64,
        iterations: usize,
        best: Box<Distribution>,
    },
    #[error("all {replicates} replicates failed to converge")]
    AllReplicatesFailed { replicates: usize },
    #[error("unknown theory curve {0:?}")]
    BadCurveName(String),
    #[error("operation budget exceeded: {required:.3e} multiply-adds requested, cap is {cap:.3e}")]
    BudgetExceeded { required: f64, cap: f64 },
    #[error("bad value: {0}")]
    BadValue(String),
    #[error("unknown flag: {0}")]
    UnknownFlag(String),
    #[error("bad generator syntax {0:?}")]
    BadGeneratorSyntax(String),
    /// Help or version text requested on the command line.
    #[error("{0}")]
    Usage(String),
    #[error("missing required field: {0}")]
    MissingRequired(&'static str),
    #[error("invalid digraph: {0}")]
    InvalidDigraph(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
