//! Brute-force reference implementation of fork detection.
//!
//! Computes the same contract as [`detect_forks`](super::detect_forks) by
//! exhaustive scanning, for verification. It shares nothing with the
//! optimized path beyond the store's read accessors: the revision closure
//! is found by fixpoint scans over the whole revision table instead of
//! graph traversal, child expansion rescans the table per level instead of
//! using the child index, and matching walks every origin, every visit and
//! every branch explicitly. Keep it that way — its value is independence,
//! not speed.

use std::collections::BTreeSet;

use super::{CommitScope, ForkFinding, ScopeMode};
use crate::error::{Error, Result};
use crate::ids::RevisionId;
use crate::store::ArchiveStore;
use crate::model::VisitStatus;

pub fn oracle_detect(
    store: &ArchiveStore,
    target_url: &str,
    scope: &CommitScope,
) -> Result<Vec<ForkFinding>> {
    // resolve the target by linear scan, not by the url index
    let mut target = None;
    for origin in store.origins() {
        if origin.url == target_url {
            target = Some(origin);
            break;
        }
    }
    let target = target.ok_or_else(|| Error::UnknownOriginUrl(target_url.to_string()))?;

    // base commits, spelled out visit by visit
    let mut base: BTreeSet<RevisionId> = BTreeSet::new();
    for visit in store.visits_of(target.id)? {
        if visit.status != VisitStatus::Full {
            continue;
        }
        let snapshot = store.snapshot(visit.snapshot).expect("visit snapshot stored");
        base.extend(snapshot.branches.values().copied());
    }
    if scope.mode == ScopeMode::AllCommits {
        let mut heads: BTreeSet<RevisionId> = BTreeSet::new();
        for visit in store.visits_of(target.id)? {
            let snapshot = store.snapshot(visit.snapshot).expect("visit snapshot stored");
            heads.extend(snapshot.branches.values().copied());
        }
        // fixpoint closure: keep sweeping the revision table until no new
        // ancestor shows up
        let mut closure = heads;
        loop {
            let mut grew = false;
            for revision in store.revisions() {
                if closure.contains(&revision.id) {
                    for parent in &revision.parents {
                        if closure.insert(*parent) {
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        base = closure;
    }

    // child expansion: one full table scan per level
    let mut wanted = base.clone();
    let mut frontier = base;
    for _ in 0..scope.child_depth {
        let mut next: BTreeSet<RevisionId> = BTreeSet::new();
        for revision in store.revisions() {
            if revision.parents.iter().any(|p| frontier.contains(p)) {
                next.insert(revision.id);
            }
        }
        if next.is_empty() {
            break;
        }
        wanted.extend(next.iter().copied());
        frontier = next;
    }

    // scan everything: every origin, every visit, every branch
    let mut findings = Vec::new();
    for origin in store.origins() {
        if origin.id == target.id {
            continue;
        }
        let mut matched: BTreeSet<RevisionId> = BTreeSet::new();
        for visit in store.visits_of(origin.id)? {
            let snapshot = store.snapshot(visit.snapshot).expect("visit snapshot stored");
            for head in snapshot.branches.values() {
                if wanted.contains(head) {
                    matched.insert(*head);
                }
            }
        }
        if !matched.is_empty() {
            findings.push(ForkFinding {
                fork_origin: origin.id,
                fork_url: origin.url.clone(),
                matched_heads: matched,
                cross_platform: origin.host != target.host,
            });
        }
    }
    findings.sort_by(|a, b| a.fork_url.cmp(&b.fork_url));
    Ok(findings)
}
