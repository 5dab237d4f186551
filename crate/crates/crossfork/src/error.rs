//! Crate-wide error type.

use crate::export::Diagnostic;
use crate::ids::{OriginId, RevisionId, SnapshotId};
use crate::timestamp::Timestamp;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid url `{url}`: {reason}")]
    InvalidUrl { url: String, reason: String },

    #[error("unknown origin id {0}")]
    UnknownOrigin(OriginId),

    #[error("unknown origin url `{0}`")]
    UnknownOriginUrl(String),

    #[error("unknown snapshot {0}")]
    UnknownSnapshot(SnapshotId),

    #[error("missing parent revision {0}")]
    MissingParent(RevisionId),

    #[error("duplicate parent revision {0}")]
    DuplicateParent(RevisionId),

    #[error("revision digest mismatch: claimed {claimed}, computed {computed}")]
    DigestMismatch {
        claimed: RevisionId,
        computed: RevisionId,
    },

    #[error("visit date {date} precedes previous visit date {previous} of origin id {origin}")]
    VisitDateRegression {
        origin: OriginId,
        date: Timestamp,
        previous: Timestamp,
    },

    #[error("branch `{branch}` targets unknown revision {target}")]
    DanglingBranchTarget { branch: String, target: RevisionId },

    #[error("invalid timestamp `{0}`, expected ISO-8601 UTC (e.g. 2020-01-01T00:00:00Z)")]
    InvalidTimestamp(String),

    #[error("invalid digest `{0}`, expected 40 lowercase hex characters")]
    InvalidDigest(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("ingest rejected with {} diagnostic(s)", .0.len())]
    Rejected(Vec<Diagnostic>),

    #[error("truth file line {line}: {message}")]
    TruthFormat { line: usize, message: String },

    #[error("store corrupted: {0}")]
    Corrupt(String),

    #[error("invalid json: {0}")]
    InvalidJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Diagnostics attached to an ingest rejection, if any.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            Error::Rejected(d) => d,
            _ => &[],
        }
    }
}
