// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing dataset file {0}")]
    MissingFile(PathBuf),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("node index {index} out of range for graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("row count mismatch: {what} has {found} rows, expected {expected}")]
    RowMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("manifest mismatch on `{field}`: manifest says {expected}, data has {found}")]
    Manifest {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("electric charge q = {0} outside [0, 1/2]")]
    ChargeOutOfRange(f64),

    #[error("node {0} has zero degree; symmetric normalization undefined")]
    ZeroDegree(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix size {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("empty mask")]
    EmptyMask,

    #[error("split: {0}")]
    Split(String),

    #[error("bad cache file: {0}")]
    Cache(String),

    #[error("config: {0}")]
    Config(String),

    #[error("all {0} seeds failed")]
    AllSeedsFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
