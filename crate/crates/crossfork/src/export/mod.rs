//! Parsing and loading of forge-export text into the archive store.
//!
//! Ingestion is all-or-nothing: the input is first parsed and resolved into
//! a fully checked plan (labels to content digests, referential checks,
//! visit-date monotonicity against both the file and the destination store),
//! and only a clean plan is applied. [`validate`] runs the same planning
//! pass and returns the diagnostics, so it is empty exactly when [`ingest`]
//! would succeed.
//!
//! Records may reference labels declared later in the file; planning orders
//! revisions before snapshots before visits and resolves parents
//! topologically. Labels are file-scoped aliases; the store only ever sees
//! content digests.

mod parse;

pub use parse::encode_message;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use parse::{LabelKind, LineParse, MetaField, RawRecord};

use crate::canonical;
use crate::error::{Error, Result};
use crate::ids::{RevisionId, SnapshotId};
use crate::model::{Revision, VisitStatus};
use crate::store::{derive_host, ArchiveStore};
use crate::timestamp::Timestamp;

/// What one ingest run did. Counts are newly stored objects; anything that
/// was already present (in the store or earlier in the same file) counts
/// into `duplicates_skipped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub origins: u64,
    pub visits: u64,
    pub snapshots: u64,
    pub revisions: u64,
    pub duplicates_skipped: u64,
}

impl IngestSummary {
    pub fn new_objects(&self) -> u64 {
        self.origins + self.visits + self.snapshots + self.revisions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    /// Malformed or invalid input: bad fields, bad values, duplicate
    /// declarations, out-of-order visit dates.
    Syntax,
    /// A reference to a label that is not declared anywhere in the file,
    /// or an unresolvable parent chain.
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Check `input` against the format and against `store` without changing
/// anything. Empty result means [`ingest`] of the same input would succeed.
pub fn validate(store: &ArchiveStore, input: &[u8]) -> Vec<Diagnostic> {
    Plan::build(store, input).diagnostics
}

/// Load `input` into `store`. Rejects the whole file (leaving the store
/// untouched) if any diagnostic is found.
pub fn ingest(store: &mut ArchiveStore, input: &[u8]) -> Result<IngestSummary> {
    let plan = Plan::build(store, input);
    if !plan.diagnostics.is_empty() {
        return Err(Error::Rejected(plan.diagnostics));
    }
    plan.apply(store)
}

struct PlannedRevision {
    label: String,
    author: String,
    committer: String,
    author_date: Timestamp,
    commit_date: Timestamp,
    message: Vec<u8>,
    parents: Vec<RevisionId>,
    digest: RevisionId,
}

struct Plan {
    diagnostics: Vec<Diagnostic>,
    origins: Vec<(String, String)>,                      // (label, url), declaration order
    metadata: Vec<(String, Vec<MetaField>)>,             // per origin label, field order preserved
    revisions: Vec<PlannedRevision>,                     // topological order
    snapshots: Vec<(String, BTreeMap<String, RevisionId>)>,
    visits: Vec<(String, Timestamp, VisitStatus, SnapshotId)>,
}

impl Plan {
    fn build(store: &ArchiveStore, input: &[u8]) -> Plan {
        let mut diagnostics = Vec::new();
        let mut poisoned: HashSet<(LabelKind, String)> = HashSet::new();
        let mut records: Vec<(usize, RawRecord)> = Vec::new();

        for (idx, raw_line) in input.split(|&b| b == b'\n').enumerate() {
            let line = idx + 1;
            match parse::parse_line(raw_line) {
                LineParse::Empty => {}
                LineParse::Record(record) => records.push((line, record)),
                LineParse::Failed { message, poisoned: label } => {
                    diagnostics.push(Diagnostic {
                        line,
                        kind: DiagnosticKind::Syntax,
                        message,
                    });
                    if let Some(entry) = label {
                        poisoned.insert(entry);
                    }
                }
            }
        }

        let mut plan = Plan {
            diagnostics,
            origins: Vec::new(),
            metadata: Vec::new(),
            revisions: Vec::new(),
            snapshots: Vec::new(),
            visits: Vec::new(),
        };

        // declaration pass: label tables, duplicate detection
        let mut origin_urls: HashMap<String, String> = HashMap::new();
        let mut revision_lines: Vec<(usize, &RawRecord)> = Vec::new();
        let mut revision_by_label: HashMap<String, usize> = HashMap::new(); // -> index in revision_lines
        let mut snapshot_labels: HashSet<String> = HashSet::new();
        let mut snapshot_order: Vec<String> = Vec::new();

        for (line, record) in &records {
            let Some((kind, label)) = record.declared_label() else {
                continue;
            };
            let dup = match kind {
                LabelKind::Origin => origin_urls.contains_key(label),
                LabelKind::Revision => revision_by_label.contains_key(label),
                LabelKind::Snapshot => snapshot_labels.contains(label),
            } || poisoned.contains(&(kind, label.to_string()));
            if dup {
                plan.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Syntax,
                    message: format!("duplicate {} label `{label}`", kind_name(kind)),
                });
                poisoned.insert((kind, label.to_string()));
                continue;
            }
            match (kind, record) {
                (LabelKind::Origin, RawRecord::Origin { label, url }) => {
                    if let Err(err) = derive_host(url) {
                        plan.diagnostics.push(Diagnostic {
                            line: *line,
                            kind: DiagnosticKind::Syntax,
                            message: err.to_string(),
                        });
                        poisoned.insert((LabelKind::Origin, label.clone()));
                    } else {
                        origin_urls.insert(label.clone(), url.clone());
                        plan.origins.push((label.clone(), url.clone()));
                    }
                }
                (LabelKind::Revision, record) => {
                    revision_by_label.insert(label.to_string(), revision_lines.len());
                    revision_lines.push((*line, record));
                }
                (LabelKind::Snapshot, _) => {
                    snapshot_labels.insert(label.to_string());
                    snapshot_order.push(label.to_string());
                }
                _ => unreachable!("declared_label matches the record kind"),
            }
        }

        let origin_poisoned =
            |poisoned: &HashSet<(LabelKind, String)>, label: &str| poisoned.contains(&(LabelKind::Origin, label.to_string()));

        // metadata: group per origin label, file order
        let mut meta_order: Vec<String> = Vec::new();
        let mut meta_fields: HashMap<String, Vec<MetaField>> = HashMap::new();
        for (line, record) in &records {
            let RawRecord::Meta { origin, field } = record else {
                continue;
            };
            if origin_poisoned(&poisoned, origin) {
                continue;
            }
            if !origin_urls.contains_key(origin) {
                plan.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Reference,
                    message: format!("unknown origin label `{origin}`"),
                });
                continue;
            }
            meta_fields
                .entry(origin.clone())
                .or_insert_with(|| {
                    meta_order.push(origin.clone());
                    Vec::new()
                })
                .push(field.clone());
        }
        for label in meta_order {
            let fields = meta_fields.remove(&label).unwrap();
            plan.metadata.push((label, fields));
        }

        plan.resolve_revisions(&revision_lines, &revision_by_label, &mut poisoned);

        // snapshots: attach branches, resolve targets
        let digests: HashMap<&str, RevisionId> = plan
            .revisions
            .iter()
            .map(|r| (r.label.as_str(), r.digest))
            .collect();
        let mut branch_maps: HashMap<String, BTreeMap<String, RevisionId>> = snapshot_order
            .iter()
            .map(|label| (label.clone(), BTreeMap::new()))
            .collect();
        let mut blocked_snapshots: HashSet<String> = HashSet::new();
        for (line, record) in &records {
            let RawRecord::Branch {
                snapshot,
                name,
                revision,
            } = record
            else {
                continue;
            };
            let snapshot_known = snapshot_labels.contains(snapshot);
            let snapshot_poisoned = poisoned.contains(&(LabelKind::Snapshot, snapshot.clone()));
            if !snapshot_known && !snapshot_poisoned {
                plan.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Reference,
                    message: format!("unknown snapshot label `{snapshot}`"),
                });
                continue;
            }
            let target = match digests.get(revision.as_str()) {
                Some(digest) => *digest,
                None => {
                    // declared-but-unresolvable revisions were already
                    // reported; only a genuinely unknown label is new
                    if !revision_by_label.contains_key(revision.as_str())
                        && !poisoned.contains(&(LabelKind::Revision, revision.clone()))
                    {
                        plan.diagnostics.push(Diagnostic {
                            line: *line,
                            kind: DiagnosticKind::Reference,
                            message: format!("unknown revision label `{revision}`"),
                        });
                    }
                    blocked_snapshots.insert(snapshot.clone());
                    continue;
                }
            };
            if snapshot_poisoned {
                continue;
            }
            let map = branch_maps.get_mut(snapshot).unwrap();
            if map.insert(name.clone(), target).is_some() {
                plan.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Syntax,
                    message: format!("duplicate branch `{name}` in snapshot `{snapshot}`"),
                });
                blocked_snapshots.insert(snapshot.clone());
            }
        }
        let mut snapshot_digests: HashMap<String, SnapshotId> = HashMap::new();
        for label in snapshot_order {
            if blocked_snapshots.contains(&label) {
                continue;
            }
            let branches = branch_maps.remove(&label).unwrap();
            snapshot_digests.insert(label.clone(), canonical::snapshot_digest(&branches));
            plan.snapshots.push((label, branches));
        }

        // visits: monotonic per URL, counting what the store already holds
        struct UrlState {
            seen: HashSet<(Timestamp, VisitStatus, SnapshotId)>,
            last: Option<Timestamp>,
        }
        let mut url_states: HashMap<String, UrlState> = HashMap::new();
        for (line, record) in &records {
            let RawRecord::Visit {
                origin,
                date,
                status,
                snapshot,
            } = record
            else {
                continue;
            };
            if origin_poisoned(&poisoned, origin) {
                continue;
            }
            let Some(url) = origin_urls.get(origin) else {
                plan.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Reference,
                    message: format!("unknown origin label `{origin}`"),
                });
                continue;
            };
            let snapshot_digest = match snapshot_digests.get(snapshot) {
                Some(digest) => *digest,
                None => {
                    if !snapshot_labels.contains(snapshot)
                        && !poisoned.contains(&(LabelKind::Snapshot, snapshot.clone()))
                    {
                        plan.diagnostics.push(Diagnostic {
                            line: *line,
                            kind: DiagnosticKind::Reference,
                            message: format!("unknown snapshot label `{snapshot}`"),
                        });
                    }
                    continue;
                }
            };
            let state = url_states.entry(url.clone()).or_insert_with(|| {
                match store.origin_by_url(url) {
                    Some(existing) => {
                        let visits = store
                            .visits_of(existing.id)
                            .expect("origin listed by url exists");
                        UrlState {
                            seen: visits
                                .iter()
                                .map(|v| (v.date, v.status, v.snapshot))
                                .collect(),
                            last: visits.last().map(|v| v.date),
                        }
                    }
                    None => UrlState {
                        seen: HashSet::new(),
                        last: None,
                    },
                }
            });
            let key = (*date, *status, snapshot_digest);
            if state.seen.contains(&key) {
                // re-recording an identical visit is a no-op at apply time
                plan.visits
                    .push((origin.clone(), *date, *status, snapshot_digest));
                continue;
            }
            if let Some(last) = state.last {
                if *date < last {
                    plan.diagnostics.push(Diagnostic {
                        line: *line,
                        kind: DiagnosticKind::Syntax,
                        message: format!(
                            "visit date {date} precedes previous visit date {last}; \
                             visit dates must be monotonically non-decreasing per origin"
                        ),
                    });
                    continue;
                }
            }
            state.seen.insert(key);
            state.last = Some(*date);
            plan.visits
                .push((origin.clone(), *date, *status, snapshot_digest));
        }

        plan.diagnostics.sort_by(|a, b| {
            (a.line, a.kind, &a.message).cmp(&(b.line, b.kind, &b.message))
        });
        plan
    }

    /// Order revisions parents-first and resolve their content digests.
    fn resolve_revisions(
        &mut self,
        revision_lines: &[(usize, &RawRecord)],
        revision_by_label: &HashMap<String, usize>,
        poisoned: &mut HashSet<(LabelKind, String)>,
    ) {
        let n = revision_lines.len();
        let mut pending_parents = vec![0usize; n];
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut unknown_parent: Vec<Option<String>> = vec![None; n];
        let mut blocked = vec![false; n];

        for (idx, (line, record)) in revision_lines.iter().enumerate() {
            let RawRecord::Revision { label, parents, .. } = record else {
                unreachable!()
            };
            let mut seen_labels = HashSet::new();
            for parent in parents {
                if !seen_labels.insert(parent.as_str()) {
                    self.diagnostics.push(Diagnostic {
                        line: *line,
                        kind: DiagnosticKind::Syntax,
                        message: format!("duplicate parent label `{parent}` in revision `{label}`"),
                    });
                    blocked[idx] = true;
                }
                match revision_by_label.get(parent.as_str()) {
                    Some(&parent_idx) => {
                        pending_parents[idx] += 1;
                        dependents[parent_idx].push(idx);
                    }
                    None if poisoned.contains(&(LabelKind::Revision, parent.clone())) => {
                        blocked[idx] = true;
                    }
                    None => {
                        unknown_parent[idx] = Some(parent.clone());
                    }
                }
            }
            if let Some(parent) = &unknown_parent[idx] {
                self.diagnostics.push(Diagnostic {
                    line: *line,
                    kind: DiagnosticKind::Reference,
                    message: format!(
                        "unknown revision label `{parent}` referenced as parent of `{label}`"
                    ),
                });
                blocked[idx] = true;
            }
        }

        let mut digests: HashMap<String, RevisionId> = HashMap::new();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending_parents[i] == 0).collect();
        let mut emitted = vec![false; n];
        while let Some(idx) = queue.pop_front() {
            emitted[idx] = true;
            let (line, record) = revision_lines[idx];
            let RawRecord::Revision {
                label,
                author,
                committer,
                author_date,
                commit_date,
                parents,
                message,
            } = record
            else {
                unreachable!()
            };
            if !blocked[idx] {
                let resolved: Vec<RevisionId> = parents
                    .iter()
                    .map(|p| digests.get(p.as_str()).copied())
                    .collect::<Option<_>>()
                    .unwrap_or_default();
                if resolved.len() != parents.len() {
                    // a parent failed to resolve; stay silent, the cause
                    // was already reported
                    blocked[idx] = true;
                } else {
                    let mut unique = HashSet::new();
                    let mut content_dup = None;
                    for digest in &resolved {
                        if !unique.insert(*digest) {
                            content_dup = Some(*digest);
                        }
                    }
                    if let Some(digest) = content_dup {
                        self.diagnostics.push(Diagnostic {
                            line,
                            kind: DiagnosticKind::Syntax,
                            message: format!(
                                "parents of `{label}` resolve to the same revision {digest}"
                            ),
                        });
                        blocked[idx] = true;
                    } else {
                        let digest = canonical::revision_digest(
                            author,
                            committer,
                            *author_date,
                            *commit_date,
                            message,
                            &resolved,
                        );
                        digests.insert(label.clone(), digest);
                        self.revisions.push(PlannedRevision {
                            label: label.clone(),
                            author: author.clone(),
                            committer: committer.clone(),
                            author_date: *author_date,
                            commit_date: *commit_date,
                            message: message.clone(),
                            parents: resolved,
                            digest,
                        });
                    }
                }
            }
            if blocked[idx] {
                poisoned.insert((LabelKind::Revision, label.clone()));
            }
            for &dependent in &dependents[idx] {
                // a blocked parent blocks the child silently
                if blocked[idx] {
                    blocked[dependent] = true;
                }
                pending_parents[dependent] -= 1;
                if pending_parents[dependent] == 0 {
                    queue.push_back(dependent);
                }
            }
        }

        for idx in 0..n {
            if emitted[idx] {
                continue;
            }
            let (line, record) = revision_lines[idx];
            let RawRecord::Revision { label, .. } = record else {
                unreachable!()
            };
            poisoned.insert((LabelKind::Revision, label.clone()));
            self.diagnostics.push(Diagnostic {
                line,
                kind: DiagnosticKind::Reference,
                message: format!("revision label `{label}` is part of a parent cycle"),
            });
        }
    }

    fn apply(self, store: &mut ArchiveStore) -> Result<IngestSummary> {
        let mut summary = IngestSummary {
            origins: 0,
            visits: 0,
            snapshots: 0,
            revisions: 0,
            duplicates_skipped: 0,
        };
        let mut origin_ids = HashMap::new();

        for (label, url) in &self.origins {
            let before = store.origin_count();
            let id = store.put_origin(url)?;
            origin_ids.insert(label.clone(), id);
            if store.origin_count() > before {
                summary.origins += 1;
            } else {
                summary.duplicates_skipped += 1;
            }
        }

        for (label, fields) in &self.metadata {
            let id = origin_ids[label];
            let mut record = store.metadata_of(id).cloned().unwrap_or_default();
            for field in fields {
                match field {
                    MetaField::Description(v) => record.description = Some(v.clone()),
                    MetaField::Owner(v) => record.owner = Some(v.clone()),
                    MetaField::Mirror(v) => record.mirror_declared = *v,
                    MetaField::LastActivity(v) => record.last_activity = Some(*v),
                }
            }
            store.put_metadata(id, record)?;
        }

        for planned in &self.revisions {
            let before = store.revision_count();
            let revision = Revision::new(
                planned.author.clone(),
                planned.committer.clone(),
                planned.author_date,
                planned.commit_date,
                planned.message.clone(),
                planned.parents.clone(),
            );
            debug_assert_eq!(revision.id, planned.digest);
            store.put_revision(revision)?;
            if store.revision_count() > before {
                summary.revisions += 1;
            } else {
                summary.duplicates_skipped += 1;
            }
        }

        for (_, branches) in &self.snapshots {
            let before = store.snapshot_count();
            store.put_snapshot(branches.clone())?;
            if store.snapshot_count() > before {
                summary.snapshots += 1;
            } else {
                summary.duplicates_skipped += 1;
            }
        }

        for (label, date, status, snapshot) in &self.visits {
            let before = store.visit_count();
            store.record_visit(origin_ids[label], *date, *status, *snapshot)?;
            if store.visit_count() > before {
                summary.visits += 1;
            } else {
                summary.duplicates_skipped += 1;
            }
        }

        Ok(summary)
    }
}

fn kind_name(kind: LabelKind) -> &'static str {
    match kind {
        LabelKind::Origin => "origin",
        LabelKind::Revision => "revision",
        LabelKind::Snapshot => "snapshot",
    }
}
