// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong lengths, non-finite values, bad labels.
    #[error("validation error: {0}")]
    Validation(String),

    /// The request would exceed a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Blocks of a would-be matchgate have unequal determinants.
    #[error("matchgate violation: |det A - det B| = {mismatch:e}")]
    MatchgateViolation { mismatch: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
