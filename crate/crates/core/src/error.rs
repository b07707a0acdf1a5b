use std::path::PathBuf;

use thiserror::Error;

use crate::graph::{NodeId, TypeId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown type id `{0}`")]
    UnknownType(TypeId),

    #[error("unknown type name `{0}`")]
    UnknownTypeName(String),

    #[error("unknown method node {0}")]
    UnknownNode(NodeId),

    #[error("invalid type hierarchy: {}", format_violations(.0))]
    InvalidHierarchy(Vec<Violation>),

    #[error("no origin recorded for edge target {0}")]
    MissingOrigin(NodeId),

    #[error("invalid call graph: {0}")]
    InvalidCallGraph(String),

    #[error("malformed signature `{0}`")]
    MalformedSignature(String),

    #[error("schema version mismatch: file has version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("no eligible dependency nodes to mark as vulnerable")]
    NoEligibleNodes,

    #[error("reachability results come from different vulnerability assignments")]
    MismatchedAssignments,

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by inputs that fail validation (as opposed to
    /// environment failures such as I/O).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::UnknownType(_)
                | Error::UnknownTypeName(_)
                | Error::UnknownNode(_)
                | Error::MissingOrigin(_)
                | Error::InvalidHierarchy(_)
                | Error::InvalidCallGraph(_)
                | Error::MalformedSignature(_)
                | Error::SchemaVersion { .. }
                | Error::Format { .. }
                | Error::InvalidParams(_)
                | Error::NoEligibleNodes
        )
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
