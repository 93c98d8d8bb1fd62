// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of supported domain: {0}")]
    Domain(String),

    #[error("index {index} outside table range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("root finder failed: {0}")]
    Convergence(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-resonance violated: {} colliding frequency pairs (first: {})", .collisions.len(), .collisions.first().map(String::as_str).unwrap_or("-"))]
    Resonance {
        collisions: Vec<String>,
        min_gap: f64,
    },

    #[error("Gram matrix condition number {condition:.3e} exceeds {limit:.1e} (gap {gap:.4}, T = {horizon}, {count} frequencies); use a larger T or fewer frequencies")]
    Conditioning {
        condition: f64,
        limit: f64,
        gap: f64,
        horizon: f64,
        count: usize,
    },

    #[error("Gram matrix is not positive definite at this truncation")]
    NotPositiveDefinite,

    #[error("target not in the tangent space: Re<f, psi> = {0:.3e}")]
    NotTangent(f64),

    #[error("control signal is not admissible: {0}")]
    Inadmissible(String),

    #[error("moment constraint violated: {0}")]
    Constraint(String),

    #[error("steering diverged after {} iterations (last residual {:.3e})", .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    Divergence { history: Vec<f64> },

    #[error("internal numerical failure: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
