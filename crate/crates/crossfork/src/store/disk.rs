//! On-disk store layout.
//!
//! A store directory holds one append-only record log per object kind
//! (`origins.log`, `revisions.log`, `snapshots.log`, `visits.log`,
//! `meta.log`), a sidecar hash-indexed offset table per log (`*.idx`), and a
//! text `MANIFEST` carrying the format version and record counts.
//!
//! Log framing: each record is a little-endian u32 payload length followed
//! by the payload. Payloads:
//!
//! ```text
//! origins.log    u64 id | u32 url_len, url | u32 host_len, host
//! revisions.log  20-byte digest | canonical revision bytes
//! snapshots.log  20-byte digest | canonical snapshot bytes
//! visits.log     u64 origin | u64 sequence | i64 date | u8 status | 20-byte snapshot
//! meta.log       u64 origin | u8 flags | [u32 len, description]
//!                | [u32 len, owner] | u8 mirror | [i64 last_activity]
//! ```
//!
//! Index files: little-endian u64 entry count, then per record a 20-byte key
//! and the little-endian u64 offset of its length prefix in the log. Keys are
//! the content digest for revisions and snapshots, and a SHA-1 of the natural
//! lookup key elsewhere (url; origin id and sequence; origin id).
//!
//! Opening replays every log through the same insertion paths used at build
//! time, so digests, parent presence and visit ordering are re-checked on
//! every load, and the index files are verified byte-for-byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha1::{Digest, Sha1};

use super::ArchiveStore;
use crate::canonical;
use crate::error::{Error, Result};
use crate::ids::{OriginId, RevisionId, SnapshotId};
use crate::model::{OriginMetadata, Revision, VisitStatus};
use crate::timestamp::Timestamp;

pub const FORMAT_VERSION: u64 = 1;

const MANIFEST_FILE: &str = "MANIFEST";

const META_FLAG_DESCRIPTION: u8 = 1;
const META_FLAG_OWNER: u8 = 2;
const META_FLAG_LAST_ACTIVITY: u8 = 4;

struct LogWriter {
    data: Vec<u8>,
    index: Vec<([u8; 20], u64)>,
}

impl LogWriter {
    fn new() -> LogWriter {
        LogWriter {
            data: Vec::new(),
            index: Vec::new(),
        }
    }

    fn append(&mut self, key: [u8; 20], payload: &[u8]) {
        let offset = self.data.len() as u64;
        self.data.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        self.data.extend_from_slice(payload);
        self.index.push((key, offset));
    }

    fn write(&self, dir: &Path, name: &str) -> Result<()> {
        fs::write(dir.join(format!("{name}.log")), &self.data)?;
        fs::write(dir.join(format!("{name}.idx")), index_bytes(&self.index))?;
        Ok(())
    }
}

fn index_bytes(index: &[([u8; 20], u64)]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + index.len() * 28);
    out.extend_from_slice(&(index.len() as u64).to_le_bytes());
    for (key, offset) in index {
        out.extend_from_slice(key);
        out.extend_from_slice(&offset.to_le_bytes());
    }
    out
}

fn key_of(bytes: &[u8]) -> [u8; 20] {
    let mut hasher = Sha1::new();
    hasher.update(bytes);
    hasher.finalize().into()
}

fn visit_key(origin: OriginId, sequence: u64) -> [u8; 20] {
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&origin.0.to_le_bytes());
    bytes[8..].copy_from_slice(&sequence.to_le_bytes());
    key_of(&bytes)
}

fn meta_key(origin: OriginId) -> [u8; 20] {
    key_of(&origin.0.to_le_bytes())
}

struct LogReader {
    bytes: Vec<u8>,
    pos: usize,
    name: &'static str,
    index: Vec<([u8; 20], u64)>,
}

impl LogReader {
    fn open(dir: &Path, name: &'static str) -> Result<LogReader> {
        let bytes = fs::read(dir.join(format!("{name}.log")))
            .map_err(|e| Error::Corrupt(format!("cannot read {name}.log: {e}")))?;
        Ok(LogReader {
            bytes,
            pos: 0,
            name,
            index: Vec::new(),
        })
    }

    /// Next record as (offset of length prefix, payload bytes).
    fn next(&mut self) -> Result<(u64, Vec<u8>)> {
        let err = |what: &str, name: &str| Error::Corrupt(format!("{name}: {what}"));
        let offset = self.pos as u64;
        let head = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| err("truncated record length", self.name))?;
        let len = u32::from_le_bytes(head.try_into().unwrap()) as usize;
        let start = self.pos + 4;
        let payload = self
            .bytes
            .get(start..start + len)
            .ok_or_else(|| err("truncated record payload", self.name))?
            .to_vec();
        self.pos = start + len;
        Ok((offset, payload))
    }

    fn record_key(&mut self, key: [u8; 20], offset: u64) {
        self.index.push((key, offset));
    }

    fn finish(self, dir: &Path) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Corrupt(format!(
                "{}: trailing bytes after last record",
                self.name
            )));
        }
        let on_disk = fs::read(dir.join(format!("{}.idx", self.name)))
            .map_err(|e| Error::Corrupt(format!("cannot read {}.idx: {e}", self.name)))?;
        if on_disk != index_bytes(&self.index) {
            return Err(Error::Corrupt(format!(
                "{}.idx does not match its log",
                self.name
            )));
        }
        Ok(())
    }
}

struct PayloadReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        PayloadReader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let out = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Corrupt("truncated record field".to_string()))?;
        self.pos += n;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Corrupt("non-utf8 string field".to_string()))
    }

    fn digest(&mut self) -> Result<[u8; 20]> {
        Ok(self.take(20)?.try_into().unwrap())
    }

    fn done(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(Error::Corrupt("record has trailing bytes".to_string()))
        }
    }
}

fn manifest_text(store: &ArchiveStore) -> String {
    format!(
        "version {FORMAT_VERSION}\norigins {}\nvisits {}\nsnapshots {}\nrevisions {}\nmeta {}\n",
        store.origin_count(),
        store.visit_count(),
        store.snapshot_count(),
        store.revision_count(),
        store.metadata_count(),
    )
}

fn parse_manifest(text: &str) -> Result<BTreeMap<String, u64>> {
    let mut fields = BTreeMap::new();
    for line in text.lines() {
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| Error::Corrupt(format!("MANIFEST line `{line}`")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::Corrupt(format!("MANIFEST value in `{line}`")))?;
        fields.insert(key.to_string(), value);
    }
    for key in ["version", "origins", "visits", "snapshots", "revisions", "meta"] {
        if !fields.contains_key(key) {
            return Err(Error::Corrupt(format!("MANIFEST missing `{key}`")));
        }
    }
    Ok(fields)
}

impl ArchiveStore {
    /// Write the whole store into `dir`, creating it if needed. Existing
    /// store files in the directory are replaced.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;

        let mut origins = LogWriter::new();
        for origin in self.origins() {
            let mut payload = Vec::new();
            payload.extend_from_slice(&origin.id.0.to_le_bytes());
            payload.extend_from_slice(&(origin.url.len() as u32).to_le_bytes());
            payload.extend_from_slice(origin.url.as_bytes());
            payload.extend_from_slice(&(origin.host.len() as u32).to_le_bytes());
            payload.extend_from_slice(origin.host.as_bytes());
            origins.append(key_of(origin.url.as_bytes()), &payload);
        }
        origins.write(dir, "origins")?;

        let mut revisions = LogWriter::new();
        for revision in self.revisions() {
            let mut payload = Vec::new();
            payload.extend_from_slice(revision.id.as_bytes());
            payload.extend_from_slice(&canonical::encode_revision(
                &revision.author,
                &revision.committer,
                revision.author_date,
                revision.commit_date,
                &revision.message,
                &revision.parents,
            ));
            revisions.append(*revision.id.as_bytes(), &payload);
        }
        revisions.write(dir, "revisions")?;

        let mut snapshots = LogWriter::new();
        for snapshot in self.snapshots() {
            let mut payload = Vec::new();
            payload.extend_from_slice(snapshot.id.as_bytes());
            payload.extend_from_slice(&canonical::encode_snapshot(&snapshot.branches));
            snapshots.append(*snapshot.id.as_bytes(), &payload);
        }
        snapshots.write(dir, "snapshots")?;

        let mut visits = LogWriter::new();
        for origin in self.origins() {
            for visit in self.visits_of(origin.id)? {
                let mut payload = Vec::new();
                payload.extend_from_slice(&visit.origin.0.to_le_bytes());
                payload.extend_from_slice(&visit.sequence.to_le_bytes());
                payload.extend_from_slice(&visit.date.epoch_seconds().to_le_bytes());
                payload.push(match visit.status {
                    VisitStatus::Full => 0,
                    VisitStatus::Partial => 1,
                });
                payload.extend_from_slice(visit.snapshot.as_bytes());
                visits.append(visit_key(visit.origin, visit.sequence), &payload);
            }
        }
        visits.write(dir, "visits")?;

        let mut meta = LogWriter::new();
        for (&origin, record) in &self.metadata {
            let mut payload = Vec::new();
            payload.extend_from_slice(&origin.0.to_le_bytes());
            let mut flags = 0u8;
            if record.description.is_some() {
                flags |= META_FLAG_DESCRIPTION;
            }
            if record.owner.is_some() {
                flags |= META_FLAG_OWNER;
            }
            if record.last_activity.is_some() {
                flags |= META_FLAG_LAST_ACTIVITY;
            }
            payload.push(flags);
            if let Some(description) = &record.description {
                payload.extend_from_slice(&(description.len() as u32).to_le_bytes());
                payload.extend_from_slice(description.as_bytes());
            }
            if let Some(owner) = &record.owner {
                payload.extend_from_slice(&(owner.len() as u32).to_le_bytes());
                payload.extend_from_slice(owner.as_bytes());
            }
            payload.push(record.mirror_declared as u8);
            if let Some(last_activity) = record.last_activity {
                payload.extend_from_slice(&last_activity.epoch_seconds().to_le_bytes());
            }
            meta.append(meta_key(origin), &payload);
        }
        meta.write(dir, "meta")?;

        // written last so a partially written directory is never mistaken
        // for a complete store
        fs::write(dir.join(MANIFEST_FILE), manifest_text(self))?;
        Ok(())
    }

    /// Load a store directory, re-validating every record on the way in.
    pub fn open(dir: &Path) -> Result<ArchiveStore> {
        let manifest = fs::read_to_string(dir.join(MANIFEST_FILE)).map_err(|e| {
            Error::Corrupt(format!("cannot read MANIFEST in {}: {e}", dir.display()))
        })?;
        let counts = parse_manifest(&manifest)?;
        if counts["version"] != FORMAT_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported store format version {}",
                counts["version"]
            )));
        }

        let mut store = ArchiveStore::new();

        let mut reader = LogReader::open(dir, "origins")?;
        for _ in 0..counts["origins"] {
            let (offset, payload) = reader.next()?;
            let mut fields = PayloadReader::new(&payload);
            let id = fields.u64()?;
            let url = fields.string()?;
            let host = fields.string()?;
            fields.done()?;
            let assigned = store.put_origin(&url)?;
            if assigned.0 != id || store.origin(assigned).unwrap().host != host {
                return Err(Error::Corrupt(format!(
                    "origins.log: record for `{url}` is inconsistent"
                )));
            }
            reader.record_key(key_of(url.as_bytes()), offset);
        }
        reader.finish(dir)?;

        let mut reader = LogReader::open(dir, "revisions")?;
        for _ in 0..counts["revisions"] {
            let (offset, payload) = reader.next()?;
            let mut fields = PayloadReader::new(&payload);
            let stored = RevisionId::from_bytes(fields.digest()?);
            let decoded = canonical::decode_revision(&payload[20..])?;
            let revision = Revision::new(
                decoded.author,
                decoded.committer,
                decoded.author_date,
                decoded.commit_date,
                decoded.message,
                decoded.parents,
            );
            if revision.id != stored {
                return Err(Error::Corrupt(format!(
                    "revisions.log: stored digest {stored} does not match content {}",
                    revision.id
                )));
            }
            store.put_revision(revision)?;
            reader.record_key(*stored.as_bytes(), offset);
        }
        reader.finish(dir)?;

        let mut reader = LogReader::open(dir, "snapshots")?;
        for _ in 0..counts["snapshots"] {
            let (offset, payload) = reader.next()?;
            let mut fields = PayloadReader::new(&payload);
            let stored = SnapshotId::from_bytes(fields.digest()?);
            let branches = canonical::decode_snapshot(&payload[20..])?;
            let id = store.put_snapshot(branches)?;
            if id != stored {
                return Err(Error::Corrupt(format!(
                    "snapshots.log: stored digest {stored} does not match content {id}"
                )));
            }
            reader.record_key(*stored.as_bytes(), offset);
        }
        reader.finish(dir)?;

        let mut reader = LogReader::open(dir, "visits")?;
        for _ in 0..counts["visits"] {
            let (offset, payload) = reader.next()?;
            let mut fields = PayloadReader::new(&payload);
            let origin = OriginId(fields.u64()?);
            let sequence = fields.u64()?;
            let date = Timestamp::from_epoch_seconds(fields.i64()?)
                .map_err(|e| Error::Corrupt(format!("visits.log: {e}")))?;
            let status = match fields.u8()? {
                0 => VisitStatus::Full,
                1 => VisitStatus::Partial,
                other => {
                    return Err(Error::Corrupt(format!("visits.log: bad status byte {other}")))
                }
            };
            let snapshot = SnapshotId::from_bytes(fields.digest()?);
            fields.done()?;
            let visit = store.record_visit(origin, date, status, snapshot)?;
            if visit.sequence != sequence {
                return Err(Error::Corrupt(format!(
                    "visits.log: origin id {origin} visit out of sequence"
                )));
            }
            reader.record_key(visit_key(origin, sequence), offset);
        }
        reader.finish(dir)?;

        let mut reader = LogReader::open(dir, "meta")?;
        for _ in 0..counts["meta"] {
            let (offset, payload) = reader.next()?;
            let mut fields = PayloadReader::new(&payload);
            let origin = OriginId(fields.u64()?);
            let flags = fields.u8()?;
            let description = if flags & META_FLAG_DESCRIPTION != 0 {
                Some(fields.string()?)
            } else {
                None
            };
            let owner = if flags & META_FLAG_OWNER != 0 {
                Some(fields.string()?)
            } else {
                None
            };
            let mirror_declared = fields.u8()? != 0;
            let last_activity = if flags & META_FLAG_LAST_ACTIVITY != 0 {
                Some(
                    Timestamp::from_epoch_seconds(fields.i64()?)
                        .map_err(|e| Error::Corrupt(format!("meta.log: {e}")))?,
                )
            } else {
                None
            };
            fields.done()?;
            store.put_metadata(
                origin,
                OriginMetadata {
                    description,
                    owner,
                    mirror_declared,
                    last_activity,
                },
            )?;
            reader.record_key(meta_key(origin), offset);
        }
        reader.finish(dir)?;

        // duplicate records would be absorbed silently by the idempotent
        // insertion paths; the manifest counts catch them
        let loaded = [
            ("origins", store.origin_count()),
            ("visits", store.visit_count()),
            ("snapshots", store.snapshot_count()),
            ("revisions", store.revision_count()),
            ("meta", store.metadata_count()),
        ];
        for (name, count) in loaded {
            if counts[name] != count {
                return Err(Error::Corrupt(format!(
                    "MANIFEST says {} {name} records, loaded {count}",
                    counts[name]
                )));
            }
        }

        Ok(store)
    }
}
