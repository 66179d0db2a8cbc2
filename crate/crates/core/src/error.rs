// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error in {context}: {message}")]
    Schema { context: String, message: String },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unknown technology `{0}`")]
    UnknownTech(String),
    #[error("chiplet area {area:.3} mm^2 exceeds the {tech} reticle limit of {limit:.3} mm^2")]
    ReticleViolation { tech: String, area: f64, limit: f64 },
    #[error("eigen solver did not converge")]
    EigenSolver,
    #[error("chiplet count {k} out of range {min}..={max}")]
    ChipletCount { k: usize, min: usize, max: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
