//! Domain objects held by the archive store.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::canonical;
use crate::error::Error;
use crate::ids::{OriginId, RevisionId, SnapshotId};
use crate::timestamp::Timestamp;

/// A crawled repository URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub id: OriginId,
    /// The URL exactly as first inserted.
    pub url: String,
    /// Lowercased registered host of `url`, port and userinfo stripped.
    pub host: String,
}

/// A commit object. `id` is the content digest of the remaining fields;
/// construct through [`Revision::new`] to keep them consistent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Revision {
    pub id: RevisionId,
    pub author: String,
    pub committer: String,
    pub author_date: Timestamp,
    pub commit_date: Timestamp,
    pub message: Vec<u8>,
    pub parents: Vec<RevisionId>,
}

impl Revision {
    pub fn new(
        author: impl Into<String>,
        committer: impl Into<String>,
        author_date: Timestamp,
        commit_date: Timestamp,
        message: impl Into<Vec<u8>>,
        parents: Vec<RevisionId>,
    ) -> Revision {
        let author = author.into();
        let committer = committer.into();
        let message = message.into();
        let id = canonical::revision_digest(
            &author,
            &committer,
            author_date,
            commit_date,
            &message,
            &parents,
        );
        Revision {
            id,
            author,
            committer,
            author_date,
            commit_date,
            message,
            parents,
        }
    }

    /// Recompute the content digest from the current field values.
    pub fn computed_id(&self) -> RevisionId {
        canonical::revision_digest(
            &self.author,
            &self.committer,
            self.author_date,
            self.commit_date,
            &self.message,
            &self.parents,
        )
    }
}

/// The content-addressed state of all branches of an origin at one visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub id: SnapshotId,
    pub branches: BTreeMap<String, RevisionId>,
}

impl Snapshot {
    pub fn new(branches: BTreeMap<String, RevisionId>) -> Snapshot {
        let id = canonical::snapshot_digest(&branches);
        Snapshot { id, branches }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VisitStatus {
    Full,
    Partial,
}

impl fmt::Display for VisitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VisitStatus::Full => write!(f, "full"),
            VisitStatus::Partial => write!(f, "partial"),
        }
    }
}

impl FromStr for VisitStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full" => Ok(VisitStatus::Full),
            "partial" => Ok(VisitStatus::Partial),
            other => Err(Error::Corrupt(format!("unknown visit status `{other}`"))),
        }
    }
}

/// One crawl of an origin. Sequences are 1-based and contiguous per origin,
/// with non-decreasing dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Visit {
    pub origin: OriginId,
    pub sequence: u64,
    pub date: Timestamp,
    pub status: VisitStatus,
    pub snapshot: SnapshotId,
}

/// Forge-page signals attached to an origin: at most one record per origin.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OriginMetadata {
    pub description: Option<String>,
    pub owner: Option<String>,
    pub mirror_declared: bool,
    pub last_activity: Option<Timestamp>,
}
