use thiserror::Error;

use crate::Point;

/// Errors produced by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({}, {}) lies outside the domain [0, {}] x [0, {}]", point[0], point[1], lengths[0], lengths[1])]
    DomainViolation { point: Point, lengths: [f64; 2] },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("map has no positive mass")]
    DegenerateMap,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown agent type {0}")]
    UnknownAgentType(u32),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("band {band} (agent type {type_id}) reconstructs to a nonpositive map")]
    DegenerateBand { band: usize, type_id: u32 },

    #[error("no start location is feasible for all agent types {types:?}")]
    Infeasible { types: Vec<u32> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
