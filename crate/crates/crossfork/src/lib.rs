//! Cross-platform fork analysis over a deduplicated software archive.
//!
//! This crate models a multi-forge crawl archive the way large archival
//! datasets do: origins (repository URLs) are visited over time, each visit
//! captures a snapshot (the branch-to-commit map), and snapshots and
//! revisions are content-addressed so identical state is stored once no
//! matter how many repositories share it. That deduplication is what makes
//! fork detection cheap: repositories that share commits share digests.
//!
//! On top of the store sit four pieces:
//!
//! - [`export`] — a line-oriented text format for loading fixtures and
//!   simulated corpora into the store;
//! - [`detect`] — fork detection for a target URL by matching branch heads
//!   against the target's commit set, with a brute-force oracle;
//! - [`classify`] — heuristics assigning each detected cross-platform fork
//!   a motive category (mirror, contributor-owned, renamed, individual
//!   copy, continued development);
//! - [`sim`] — a deterministic multi-host forge simulator producing
//!   corpora with ground-truth labels for recall and accuracy evaluation.

pub mod canonical;
pub mod classify;
pub mod detect;
pub mod error;
pub mod export;
pub mod ids;
pub mod model;
pub mod report;
pub mod sim;
pub mod store;
pub mod timestamp;

pub use classify::{classify, ClassifiedFork, ClassifyConfig, MotiveCategory};
pub use detect::{
    cross_platform_filter, detect_forks, detect_forks_parallel, oracle::oracle_detect,
    CommitScope, ForkFinding, ScopeMode,
};
pub use error::{Error, Result};
pub use export::{ingest, validate, Diagnostic, DiagnosticKind, IngestSummary};
pub use ids::{OriginId, RevisionId, SnapshotId};
pub use model::{Origin, OriginMetadata, Revision, Snapshot, Visit, VisitStatus};
pub use report::DetectionReport;
pub use sim::{recall_report, simulate, GroundTruth, RecallReport, SimConfig};
pub use store::ArchiveStore;
pub use timestamp::Timestamp;
