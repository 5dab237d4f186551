//! Motive classification for detected cross-platform forks.
//!
//! Each fork gets exactly one category from signals in the store and the
//! origin metadata. The precedence chain runs structural evidence first —
//! divergent commits are the one signal that needs no metadata at all —
//! then mirror evidence, contributor ownership, renaming, and finally
//! inactivity:
//!
//! 1. any commit absent upstream → `ContinuedDevelopment`
//! 2. declared/described/observed mirroring → `Mirror`
//! 3. fork owner committed the latest shared head → `ContributorOwned`
//! 4. final URL path segment differs → `Renamed`
//! 5. no activity within the inactivity window → `IndividualCopy`
//! 6. otherwise → `Unknown`
//!
//! Every predicate that fired is recorded in the evidence list, so a
//! continued-development fork that was also renamed keeps both facts even
//! though only the first decides the category.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::{FindingRecord, ForkFinding};
use crate::error::{Error, Result};
use crate::ids::{OriginId, RevisionId};
use crate::model::VisitStatus;
use crate::store::ArchiveStore;
use crate::timestamp::Timestamp;

pub const DEFAULT_MIRROR_LAG_SECONDS: i64 = 10 * 60;
pub const DEFAULT_INACTIVITY_SECONDS: i64 = 365 * 24 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotiveCategory {
    Mirror,
    ContributorOwned,
    Renamed,
    IndividualCopy,
    ContinuedDevelopment,
    Unknown,
}

impl MotiveCategory {
    pub const ALL: [MotiveCategory; 6] = [
        MotiveCategory::Mirror,
        MotiveCategory::ContributorOwned,
        MotiveCategory::Renamed,
        MotiveCategory::IndividualCopy,
        MotiveCategory::ContinuedDevelopment,
        MotiveCategory::Unknown,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            MotiveCategory::Mirror => "mirror",
            MotiveCategory::ContributorOwned => "contributor-owned",
            MotiveCategory::Renamed => "renamed",
            MotiveCategory::IndividualCopy => "individual-copy",
            MotiveCategory::ContinuedDevelopment => "continued-development",
            MotiveCategory::Unknown => "unknown",
        }
    }
}

impl fmt::Display for MotiveCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MotiveCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<MotiveCategory> {
        MotiveCategory::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| Error::InvalidConfig(vec![format!("unknown category `{s}`")]))
    }
}

/// Classification thresholds and the reference clock.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyConfig {
    pub now: Timestamp,
    /// Median snapshot-copy lag at or below which visit history counts as
    /// mirroring.
    pub mirror_lag_seconds: i64,
    /// Activity strictly older than this makes a fork an individual copy.
    pub inactivity_seconds: i64,
}

impl ClassifyConfig {
    pub fn new(now: Timestamp) -> ClassifyConfig {
        ClassifyConfig {
            now,
            mirror_lag_seconds: DEFAULT_MIRROR_LAG_SECONDS,
            inactivity_seconds: DEFAULT_INACTIVITY_SECONDS,
        }
    }
}

/// A fork finding with its assigned category and the evidence behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedFork {
    pub finding: ForkFinding,
    pub category: MotiveCategory,
    pub evidence: Vec<String>,
    pub divergent_commits: BTreeSet<RevisionId>,
    pub sync_lag_seconds: Option<i64>,
}

/// Wire form: the finding fields extended with the classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub fork_url: String,
    pub matched_heads: Vec<RevisionId>,
    pub cross_platform: bool,
    pub category: MotiveCategory,
    pub evidence: Vec<String>,
    pub divergent_commits: Vec<RevisionId>,
    pub sync_lag_seconds: Option<i64>,
}

impl From<&ClassifiedFork> for ClassifiedRecord {
    fn from(classified: &ClassifiedFork) -> ClassifiedRecord {
        let finding = FindingRecord::from(&classified.finding);
        ClassifiedRecord {
            fork_url: finding.fork_url,
            matched_heads: finding.matched_heads,
            cross_platform: finding.cross_platform,
            category: classified.category,
            evidence: classified.evidence.clone(),
            divergent_commits: classified.divergent_commits.iter().copied().collect(),
            sync_lag_seconds: classified.sync_lag_seconds,
        }
    }
}

impl ClassifiedRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("classified record serializes")
    }
}

/// Revisions of `fork` that are absent from `upstream`'s history.
pub fn divergence(
    store: &ArchiveStore,
    fork: OriginId,
    upstream: OriginId,
) -> Result<BTreeSet<RevisionId>> {
    let fork_revisions = store.all_revisions_of(fork)?;
    let upstream_revisions = store.all_revisions_of(upstream)?;
    Ok(fork_revisions
        .difference(&upstream_revisions)
        .copied()
        .collect())
}

/// Result of the mirror check: whether it fired, why, and the measured
/// sync lag when the visit history supports one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorCheck {
    pub is_mirror: bool,
    pub evidence: Vec<String>,
    pub sync_lag_seconds: Option<i64>,
}

/// Mirror evidence: a declared mirror flag, a description mentioning
/// "mirror", or at least three visits whose snapshots each equal an earlier
/// upstream snapshot with a median lag inside the threshold. Callers must
/// have established that the fork does not diverge from the upstream.
pub fn is_mirror(
    store: &ArchiveStore,
    fork: OriginId,
    upstream: OriginId,
    mirror_lag_seconds: i64,
) -> Result<MirrorCheck> {
    let mut check = MirrorCheck {
        is_mirror: false,
        evidence: Vec::new(),
        sync_lag_seconds: None,
    };

    if let Some(metadata) = store.metadata_of(fork) {
        if metadata.mirror_declared {
            check.is_mirror = true;
            check.evidence.push("mirror flag declared in metadata".to_string());
        }
        if let Some(description) = &metadata.description {
            if contains_word_token(description, "mirror") {
                check.is_mirror = true;
                check
                    .evidence
                    .push(format!("description mentions mirroring: {description:?}"));
            }
        }
    }

    // visit-history evidence: every fork snapshot must have appeared
    // upstream strictly earlier or at the same instant
    let fork_visits = store.visits_of(fork)?;
    let upstream_visits = store.visits_of(upstream)?;
    if fork_visits.len() >= 3 {
        let mut lags = Vec::with_capacity(fork_visits.len());
        let mut all_matched = true;
        for visit in fork_visits {
            let matched = upstream_visits
                .iter()
                .filter(|up| up.snapshot == visit.snapshot && up.date <= visit.date)
                .map(|up| up.date)
                .max();
            match matched {
                Some(up_date) => lags.push(visit.date.seconds_since(up_date)),
                None => {
                    all_matched = false;
                    break;
                }
            }
        }
        if all_matched {
            lags.sort_unstable();
            let median = lags[(lags.len() - 1) / 2];
            if median <= mirror_lag_seconds {
                check.is_mirror = true;
                check.sync_lag_seconds = Some(median);
                check.evidence.push(format!(
                    "{} visits track upstream snapshots with median lag {median}s",
                    lags.len()
                ));
            }
        }
    }

    Ok(check)
}

/// Contributor-ownership evidence: the fork's metadata names an owner, the
/// latest branch head (by commit date) of its latest full visit exists in
/// the upstream history, and that revision's committer contains the owner
/// as an exact token.
pub fn is_contributor_owned(
    store: &ArchiveStore,
    fork: OriginId,
    upstream: OriginId,
) -> Result<Option<String>> {
    let Some(owner) = store
        .metadata_of(fork)
        .and_then(|m| m.owner.as_deref())
        .map(str::to_string)
    else {
        return Ok(None);
    };
    let Some(last_full) = store
        .visits_of(fork)?
        .iter()
        .rev()
        .find(|v| v.status == VisitStatus::Full)
    else {
        return Ok(None);
    };
    let snapshot = store
        .snapshot(last_full.snapshot)
        .expect("visit snapshot stored");
    let head = snapshot
        .branches
        .values()
        .map(|id| {
            let revision = store.revision(*id).expect("branch head stored");
            (revision.commit_date, *id)
        })
        .max();
    let Some((_, head)) = head else {
        return Ok(None);
    };
    if !store.all_revisions_of(upstream)?.contains(&head) {
        return Ok(None);
    }
    let committer = &store.revision(head).expect("head stored").committer;
    if account_tokens(committer).any(|token| token == owner) {
        Ok(Some(format!(
            "owner {owner:?} is the committer of the shared head {head}"
        )))
    } else {
        Ok(None)
    }
}

/// True when the final path segment (lowercased, `.git` stripped) differs.
pub fn is_renamed(fork_url: &str, upstream_url: &str) -> bool {
    repository_name(fork_url) != repository_name(upstream_url)
}

fn repository_name(url: &str) -> String {
    let without_fragment = url.split(['#', '?']).next().unwrap_or(url);
    let trimmed = without_fragment.trim_end_matches('/');
    let segment = trimmed.rsplit('/').next().unwrap_or(trimmed);
    let lower = segment.to_ascii_lowercase();
    lower.strip_suffix(".git").unwrap_or(&lower).to_string()
}

/// Inactivity evidence: the fork's most recent activity (metadata
/// last-activity or newest branch-head commit date) is strictly older than
/// the threshold.
pub fn is_individual_copy(
    store: &ArchiveStore,
    fork: OriginId,
    now: Timestamp,
    inactivity_seconds: i64,
) -> Result<Option<String>> {
    let meta_activity = store.metadata_of(fork).and_then(|m| m.last_activity);
    let head_activity = store
        .branch_heads(fork, false)?
        .into_iter()
        .map(|id| store.revision(id).expect("branch head stored").commit_date)
        .max();
    let Some(latest) = meta_activity.max(head_activity) else {
        return Ok(None);
    };
    let age = now.seconds_since(latest);
    if age > inactivity_seconds {
        Ok(Some(format!(
            "inactive since {latest}, {} days before the reference time",
            age / 86_400
        )))
    } else {
        Ok(None)
    }
}

/// Assign the finding one category through the precedence chain, collecting
/// evidence from every predicate that fired.
pub fn classify(
    store: &ArchiveStore,
    finding: &ForkFinding,
    target: OriginId,
    config: &ClassifyConfig,
) -> Result<ClassifiedFork> {
    let fork = finding.fork_origin;
    let target_origin = store.origin(target).ok_or(Error::UnknownOrigin(target))?;

    let divergent = divergence(store, fork, target)?;
    let mut evidence = Vec::new();
    let mut category = None;
    let mut sync_lag_seconds = None;

    if !divergent.is_empty() {
        evidence.push(format!(
            "{} commit(s) absent from the upstream history",
            divergent.len()
        ));
        category = Some(MotiveCategory::ContinuedDevelopment);
    } else {
        // the mirror check presumes an identical history
        let mirror = is_mirror(store, fork, target, config.mirror_lag_seconds)?;
        evidence.extend(mirror.evidence);
        sync_lag_seconds = mirror.sync_lag_seconds;
        if mirror.is_mirror {
            category = Some(MotiveCategory::Mirror);
        }
    }

    if let Some(reason) = is_contributor_owned(store, fork, target)? {
        evidence.push(reason);
        category.get_or_insert(MotiveCategory::ContributorOwned);
    }

    if is_renamed(&finding.fork_url, &target_origin.url) {
        evidence.push(format!(
            "named {:?}, upstream is {:?}",
            repository_name(&finding.fork_url),
            repository_name(&target_origin.url)
        ));
        category.get_or_insert(MotiveCategory::Renamed);
    }

    if let Some(reason) = is_individual_copy(store, fork, config.now, config.inactivity_seconds)? {
        evidence.push(reason);
        category.get_or_insert(MotiveCategory::IndividualCopy);
    }

    Ok(ClassifiedFork {
        finding: finding.clone(),
        category: category.unwrap_or(MotiveCategory::Unknown),
        evidence,
        divergent_commits: divergent,
        sync_lag_seconds,
    })
}

/// Case-insensitive word-token search: `needle` must appear as a maximal
/// alphanumeric run.
fn contains_word_token(haystack: &str, needle: &str) -> bool {
    haystack
        .split(|c: char| !c.is_ascii_alphanumeric())
        .any(|token| token.eq_ignore_ascii_case(needle))
}

/// Tokens that can be account names: maximal runs of `[A-Za-z0-9._-]`.
fn account_tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')))
        .filter(|token| !token.is_empty())
}
