//! The deduplicated, content-addressed archive store.
//!
//! Holds origins, visits, snapshots and revisions. Revisions and snapshots
//! are keyed by content digest, so byte-identical objects ingested from any
//! number of origins are stored once. Ingestion is single-writer; once a
//! store is saved (or freshly opened) every read method is safe to call from
//! any number of threads.

mod disk;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use url::Url;

use crate::error::{Error, Result};
use crate::ids::{OriginId, RevisionId, SnapshotId};
use crate::model::{Origin, OriginMetadata, Revision, Snapshot, Visit, VisitStatus};
use crate::timestamp::Timestamp;

#[derive(Debug, Default)]
pub struct ArchiveStore {
    origins: Vec<Origin>,
    origin_by_url: HashMap<String, OriginId>,
    visits: Vec<Vec<Visit>>,
    // (date, status, snapshot) -> sequence, for idempotent visit recording
    visit_seen: Vec<HashMap<(Timestamp, VisitStatus, SnapshotId), u64>>,
    revisions: HashMap<RevisionId, Revision>,
    revision_order: Vec<RevisionId>,
    snapshots: HashMap<SnapshotId, Snapshot>,
    snapshot_order: Vec<SnapshotId>,
    children: HashMap<RevisionId, Vec<RevisionId>>,
    metadata: BTreeMap<OriginId, OriginMetadata>,
}

/// Lowercased host of an absolute URL, with port and userinfo stripped.
pub fn derive_host(url: &str) -> Result<String> {
    let parsed = Url::parse(url).map_err(|e| Error::InvalidUrl {
        url: url.to_string(),
        reason: e.to_string(),
    })?;
    match parsed.host_str() {
        Some(host) if !host.is_empty() => Ok(host.to_ascii_lowercase()),
        _ => Err(Error::InvalidUrl {
            url: url.to_string(),
            reason: "missing host".to_string(),
        }),
    }
}

impl ArchiveStore {
    pub fn new() -> ArchiveStore {
        ArchiveStore::default()
    }

    fn index_of(&self, origin: OriginId) -> Result<usize> {
        let idx = origin.0.checked_sub(1).ok_or(Error::UnknownOrigin(origin))? as usize;
        if idx < self.origins.len() {
            Ok(idx)
        } else {
            Err(Error::UnknownOrigin(origin))
        }
    }

    /// Insert a URL, returning the existing id if it is already stored.
    pub fn put_origin(&mut self, url: &str) -> Result<OriginId> {
        if let Some(&id) = self.origin_by_url.get(url) {
            return Ok(id);
        }
        let host = derive_host(url)?;
        let id = OriginId(self.origins.len() as u64 + 1);
        self.origins.push(Origin {
            id,
            url: url.to_string(),
            host,
        });
        self.visits.push(Vec::new());
        self.visit_seen.push(HashMap::new());
        self.origin_by_url.insert(url.to_string(), id);
        Ok(id)
    }

    /// Attach (or replace) the metadata record of an origin.
    pub fn put_metadata(&mut self, origin: OriginId, metadata: OriginMetadata) -> Result<()> {
        self.index_of(origin)?;
        self.metadata.insert(origin, metadata);
        Ok(())
    }

    /// Insert a revision. All parents must already be present; re-inserting
    /// an identical revision is a no-op. The id is recomputed from the field
    /// values and must match the one the revision carries.
    pub fn put_revision(&mut self, revision: Revision) -> Result<RevisionId> {
        let mut seen = BTreeSet::new();
        for parent in &revision.parents {
            if !seen.insert(*parent) {
                return Err(Error::DuplicateParent(*parent));
            }
        }
        let computed = revision.computed_id();
        if computed != revision.id {
            return Err(Error::DigestMismatch {
                claimed: revision.id,
                computed,
            });
        }
        if self.revisions.contains_key(&computed) {
            return Ok(computed);
        }
        for parent in &revision.parents {
            if !self.revisions.contains_key(parent) {
                return Err(Error::MissingParent(*parent));
            }
        }
        for parent in &revision.parents {
            self.children.entry(*parent).or_default().push(computed);
        }
        self.revisions.insert(computed, revision);
        self.revision_order.push(computed);
        Ok(computed)
    }

    /// Insert a snapshot by branch map. Identical branch maps share one
    /// stored object, whichever origin they came from.
    pub fn put_snapshot(&mut self, branches: BTreeMap<String, RevisionId>) -> Result<SnapshotId> {
        for (name, target) in &branches {
            if !self.revisions.contains_key(target) {
                return Err(Error::DanglingBranchTarget {
                    branch: name.clone(),
                    target: *target,
                });
            }
        }
        let snapshot = Snapshot::new(branches);
        let id = snapshot.id;
        if let std::collections::hash_map::Entry::Vacant(slot) = self.snapshots.entry(id) {
            slot.insert(snapshot);
            self.snapshot_order.push(id);
        }
        Ok(id)
    }

    /// Append a visit with the next sequence number. Dates must be
    /// non-decreasing per origin. A visit identical in date, status and
    /// snapshot to one already recorded for the origin is a no-op and
    /// returns the existing visit.
    pub fn record_visit(
        &mut self,
        origin: OriginId,
        date: Timestamp,
        status: VisitStatus,
        snapshot: SnapshotId,
    ) -> Result<Visit> {
        let idx = self.index_of(origin)?;
        if !self.snapshots.contains_key(&snapshot) {
            return Err(Error::UnknownSnapshot(snapshot));
        }
        let key = (date, status, snapshot);
        if let Some(&sequence) = self.visit_seen[idx].get(&key) {
            return Ok(self.visits[idx][sequence as usize - 1]);
        }
        if let Some(last) = self.visits[idx].last() {
            if date < last.date {
                return Err(Error::VisitDateRegression {
                    origin,
                    date,
                    previous: last.date,
                });
            }
        }
        let visit = Visit {
            origin,
            sequence: self.visits[idx].len() as u64 + 1,
            date,
            status,
            snapshot,
        };
        self.visits[idx].push(visit);
        self.visit_seen[idx].insert(key, visit.sequence);
        Ok(visit)
    }

    /// Union of branch targets over the origin's visits; `full_only`
    /// restricts to visits with full status.
    pub fn branch_heads(&self, origin: OriginId, full_only: bool) -> Result<BTreeSet<RevisionId>> {
        let idx = self.index_of(origin)?;
        let mut heads = BTreeSet::new();
        for visit in &self.visits[idx] {
            if full_only && visit.status != VisitStatus::Full {
                continue;
            }
            let snapshot = self
                .snapshots
                .get(&visit.snapshot)
                .expect("visit references a stored snapshot");
            heads.extend(snapshot.branches.values().copied());
        }
        Ok(heads)
    }

    /// Every revision reachable over parent edges from any branch head of
    /// any visit of the origin, whatever the visit status.
    pub fn all_revisions_of(&self, origin: OriginId) -> Result<BTreeSet<RevisionId>> {
        let heads = self.branch_heads(origin, false)?;
        let mut seen: BTreeSet<RevisionId> = heads.iter().copied().collect();
        let mut stack: Vec<RevisionId> = heads.into_iter().collect();
        while let Some(id) = stack.pop() {
            let revision = self
                .revisions
                .get(&id)
                .expect("branch head references a stored revision");
            for parent in &revision.parents {
                if seen.insert(*parent) {
                    stack.push(*parent);
                }
            }
        }
        Ok(seen)
    }

    pub fn origin(&self, id: OriginId) -> Option<&Origin> {
        self.index_of(id).ok().map(|idx| &self.origins[idx])
    }

    pub fn origin_by_url(&self, url: &str) -> Option<&Origin> {
        self.origin_by_url.get(url).map(|id| &self.origins[id.0 as usize - 1])
    }

    pub fn origins(&self) -> impl Iterator<Item = &Origin> {
        self.origins.iter()
    }

    pub fn visits_of(&self, origin: OriginId) -> Result<&[Visit]> {
        Ok(&self.visits[self.index_of(origin)?])
    }

    pub fn revision(&self, id: RevisionId) -> Option<&Revision> {
        self.revisions.get(&id)
    }

    /// Stored revisions in insertion order (parents before children).
    pub fn revisions(&self) -> impl Iterator<Item = &Revision> {
        self.revision_order.iter().map(|id| &self.revisions[id])
    }

    pub fn snapshot(&self, id: SnapshotId) -> Option<&Snapshot> {
        self.snapshots.get(&id)
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.snapshot_order.iter().map(|id| &self.snapshots[id])
    }

    /// Direct children of a revision, in insertion order.
    pub fn children_of(&self, id: RevisionId) -> &[RevisionId] {
        self.children.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn metadata_of(&self, origin: OriginId) -> Option<&OriginMetadata> {
        self.metadata.get(&origin)
    }

    pub fn origin_count(&self) -> u64 {
        self.origins.len() as u64
    }

    pub fn visit_count(&self) -> u64 {
        self.visits.iter().map(|v| v.len() as u64).sum()
    }

    pub fn revision_count(&self) -> u64 {
        self.revisions.len() as u64
    }

    pub fn snapshot_count(&self) -> u64 {
        self.snapshots.len() as u64
    }

    pub fn metadata_count(&self) -> u64 {
        self.metadata.len() as u64
    }

    /// Date of the newest visit across all origins. Handy as a reference
    /// clock when classifying a finished corpus.
    pub fn latest_visit_date(&self) -> Option<Timestamp> {
        self.visits
            .iter()
            .filter_map(|visits| visits.last())
            .map(|visit| visit.date)
            .max()
    }

    /// Re-derive every content digest and referential invariant; errors on
    /// the first violation found.
    pub fn verify_integrity(&self) -> Result<()> {
        for revision in self.revisions.values() {
            if revision.computed_id() != revision.id {
                return Err(Error::Corrupt(format!(
                    "revision {} does not reproduce its digest",
                    revision.id
                )));
            }
            for parent in &revision.parents {
                if !self.revisions.contains_key(parent) {
                    return Err(Error::Corrupt(format!(
                        "revision {} has unknown parent {parent}",
                        revision.id
                    )));
                }
            }
        }
        for snapshot in self.snapshots.values() {
            if crate::canonical::snapshot_digest(&snapshot.branches) != snapshot.id {
                return Err(Error::Corrupt(format!(
                    "snapshot {} does not reproduce its digest",
                    snapshot.id
                )));
            }
            for (name, target) in &snapshot.branches {
                if !self.revisions.contains_key(target) {
                    return Err(Error::Corrupt(format!(
                        "snapshot {} branch `{name}` targets unknown revision {target}",
                        snapshot.id
                    )));
                }
            }
        }
        for (idx, visits) in self.visits.iter().enumerate() {
            let mut last: Option<Timestamp> = None;
            for (pos, visit) in visits.iter().enumerate() {
                if visit.sequence != pos as u64 + 1 || visit.origin.0 != idx as u64 + 1 {
                    return Err(Error::Corrupt(format!(
                        "visit sequence broken for origin id {}",
                        idx + 1
                    )));
                }
                if !self.snapshots.contains_key(&visit.snapshot) {
                    return Err(Error::Corrupt(format!(
                        "visit references unknown snapshot {}",
                        visit.snapshot
                    )));
                }
                if let Some(prev) = last {
                    if visit.date < prev {
                        return Err(Error::Corrupt(format!(
                            "visit dates regress for origin id {}",
                            idx + 1
                        )));
                    }
                }
                last = Some(visit.date);
            }
        }
        Ok(())
    }
}
