//! Canonical object serialization and content digests.
//!
//! A revision or snapshot is digested over a canonical byte form so that
//! equal content always yields equal ids, regardless of who produced it.
//! The form is a flat sequence of length-prefixed fields in a fixed order:
//!
//! ```text
//! field(b)  = big-endian u64 length of b, then b
//! revision  = field("revision") field(author) field(committer)
//!             field(decimal author_date) field(decimal commit_date)
//!             field(message) field(parent digests, 20 raw bytes each, in order)
//! snapshot  = field("snapshot") then, per branch in byte-lexicographic
//!             name order: field(name) field(target digest, 20 raw bytes)
//! ```
//!
//! Timestamps are rendered as decimal UTC epoch seconds. The digest is
//! SHA-1 (160 bits) over the whole sequence; the leading kind tag keeps
//! revision and snapshot digests in separate namespaces.

use std::collections::BTreeMap;

use sha1::{Digest, Sha1};

use crate::error::{Error, Result};
use crate::ids::{RevisionId, SnapshotId};
use crate::timestamp::Timestamp;

const REVISION_TAG: &[u8] = b"revision";
const SNAPSHOT_TAG: &[u8] = b"snapshot";

fn push_field(buf: &mut Vec<u8>, bytes: &[u8]) {
    buf.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
    buf.extend_from_slice(bytes);
}

fn digest20(bytes: &[u8]) -> [u8; 20] {
    let mut hasher = Sha1::new();
    hasher.update(bytes);
    hasher.finalize().into()
}

pub fn encode_revision(
    author: &str,
    committer: &str,
    author_date: Timestamp,
    commit_date: Timestamp,
    message: &[u8],
    parents: &[RevisionId],
) -> Vec<u8> {
    let mut buf = Vec::with_capacity(
        7 * 8 + REVISION_TAG.len() + author.len() + committer.len() + 24 + message.len()
            + parents.len() * 20,
    );
    push_field(&mut buf, REVISION_TAG);
    push_field(&mut buf, author.as_bytes());
    push_field(&mut buf, committer.as_bytes());
    push_field(&mut buf, author_date.epoch_seconds().to_string().as_bytes());
    push_field(&mut buf, commit_date.epoch_seconds().to_string().as_bytes());
    push_field(&mut buf, message);
    let mut parent_bytes = Vec::with_capacity(parents.len() * 20);
    for parent in parents {
        parent_bytes.extend_from_slice(parent.as_bytes());
    }
    push_field(&mut buf, &parent_bytes);
    buf
}

pub fn revision_digest(
    author: &str,
    committer: &str,
    author_date: Timestamp,
    commit_date: Timestamp,
    message: &[u8],
    parents: &[RevisionId],
) -> RevisionId {
    RevisionId::from_bytes(digest20(&encode_revision(
        author,
        committer,
        author_date,
        commit_date,
        message,
        parents,
    )))
}

pub fn encode_snapshot(branches: &BTreeMap<String, RevisionId>) -> Vec<u8> {
    let mut buf = Vec::new();
    push_field(&mut buf, SNAPSHOT_TAG);
    for (name, target) in branches {
        push_field(&mut buf, name.as_bytes());
        push_field(&mut buf, target.as_bytes());
    }
    buf
}

pub fn snapshot_digest(branches: &BTreeMap<String, RevisionId>) -> SnapshotId {
    SnapshotId::from_bytes(digest20(&encode_snapshot(branches)))
}

/// Field values recovered from a canonical revision encoding.
pub struct DecodedRevision {
    pub author: String,
    pub committer: String,
    pub author_date: Timestamp,
    pub commit_date: Timestamp,
    pub message: Vec<u8>,
    pub parents: Vec<RevisionId>,
}

struct FieldReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> FieldReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        FieldReader { bytes, pos: 0 }
    }

    fn next(&mut self) -> Result<&'a [u8]> {
        let err = || Error::Corrupt("truncated canonical field".to_string());
        let end = self.pos.checked_add(8).ok_or_else(err)?;
        let head = self.bytes.get(self.pos..end).ok_or_else(err)?;
        let len = u64::from_be_bytes(head.try_into().unwrap()) as usize;
        let body_end = end.checked_add(len).ok_or_else(err)?;
        let body = self.bytes.get(end..body_end).ok_or_else(err)?;
        self.pos = body_end;
        Ok(body)
    }

    fn at_end(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

fn parse_decimal_timestamp(bytes: &[u8]) -> Result<Timestamp> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Corrupt("non-utf8 timestamp field".to_string()))?;
    let seconds: i64 = text
        .parse()
        .map_err(|_| Error::Corrupt(format!("bad decimal timestamp `{text}`")))?;
    Timestamp::from_epoch_seconds(seconds)
        .map_err(|_| Error::Corrupt(format!("timestamp out of range: {seconds}")))
}

pub fn decode_revision(bytes: &[u8]) -> Result<DecodedRevision> {
    let mut reader = FieldReader::new(bytes);
    if reader.next()? != REVISION_TAG {
        return Err(Error::Corrupt("revision record with wrong kind tag".to_string()));
    }
    let author = String::from_utf8(reader.next()?.to_vec())
        .map_err(|_| Error::Corrupt("non-utf8 author".to_string()))?;
    let committer = String::from_utf8(reader.next()?.to_vec())
        .map_err(|_| Error::Corrupt("non-utf8 committer".to_string()))?;
    let author_date = parse_decimal_timestamp(reader.next()?)?;
    let commit_date = parse_decimal_timestamp(reader.next()?)?;
    let message = reader.next()?.to_vec();
    let parent_bytes = reader.next()?;
    if parent_bytes.len() % 20 != 0 || !reader.at_end() {
        return Err(Error::Corrupt("malformed revision parent field".to_string()));
    }
    let parents = parent_bytes
        .chunks_exact(20)
        .map(|chunk| RevisionId::from_bytes(chunk.try_into().unwrap()))
        .collect();
    Ok(DecodedRevision {
        author,
        committer,
        author_date,
        commit_date,
        message,
        parents,
    })
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<BTreeMap<String, RevisionId>> {
    let mut reader = FieldReader::new(bytes);
    if reader.next()? != SNAPSHOT_TAG {
        return Err(Error::Corrupt("snapshot record with wrong kind tag".to_string()));
    }
    let mut branches = BTreeMap::new();
    let mut previous: Option<String> = None;
    while !reader.at_end() {
        let name = String::from_utf8(reader.next()?.to_vec())
            .map_err(|_| Error::Corrupt("non-utf8 branch name".to_string()))?;
        let target = reader.next()?;
        if target.len() != 20 {
            return Err(Error::Corrupt("branch target is not a 20-byte digest".to_string()));
        }
        if let Some(prev) = &previous {
            if prev >= &name {
                return Err(Error::Corrupt("snapshot branches out of order".to_string()));
            }
        }
        previous = Some(name.clone());
        branches.insert(name, RevisionId::from_bytes(target.try_into().unwrap()));
    }
    Ok(branches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        s.parse().unwrap()
    }

    // Independent oracle: assemble the canonical byte sequence by hand and
    // SHA-1 it directly, without going through the encoder.
    fn manual_field(buf: &mut Vec<u8>, bytes: &[u8]) {
        buf.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
        buf.extend_from_slice(bytes);
    }

    fn manual_revision_digest(message: &[u8]) -> RevisionId {
        let mut buf = Vec::new();
        manual_field(&mut buf, b"revision");
        manual_field(&mut buf, b"alice <alice@example.com>");
        manual_field(&mut buf, b"bob <bob@example.com>");
        manual_field(&mut buf, b"1577836800");
        manual_field(&mut buf, b"1577836860");
        manual_field(&mut buf, message);
        manual_field(&mut buf, b""); // no parents
        let mut hasher = Sha1::new();
        hasher.update(&buf);
        RevisionId::from_bytes(hasher.finalize().into())
    }

    #[test]
    fn revision_digest_matches_manual_bytes() {
        let got = revision_digest(
            "alice <alice@example.com>",
            "bob <bob@example.com>",
            ts("2020-01-01T00:00:00Z"),
            ts("2020-01-01T00:01:00Z"),
            b"initial import",
            &[],
        );
        assert_eq!(got, manual_revision_digest(b"initial import"));
    }

    #[test]
    fn message_change_changes_digest() {
        let a = manual_revision_digest(b"fix build");
        let b = manual_revision_digest(b"fix build\n");
        assert_ne!(a, b);
        // and the encoder agrees with both
        let enc_a = revision_digest(
            "alice <alice@example.com>",
            "bob <bob@example.com>",
            ts("2020-01-01T00:00:00Z"),
            ts("2020-01-01T00:01:00Z"),
            b"fix build",
            &[],
        );
        let enc_b = revision_digest(
            "alice <alice@example.com>",
            "bob <bob@example.com>",
            ts("2020-01-01T00:00:00Z"),
            ts("2020-01-01T00:01:00Z"),
            b"fix build\n",
            &[],
        );
        assert_eq!(enc_a, a);
        assert_eq!(enc_b, b);
    }

    #[test]
    fn parent_order_and_presence_affect_digest() {
        let p1: RevisionId = "11".repeat(20).parse().unwrap();
        let p2: RevisionId = "22".repeat(20).parse().unwrap();
        let base = |parents: &[RevisionId]| {
            revision_digest(
                "a",
                "c",
                ts("2020-01-01T00:00:00Z"),
                ts("2020-01-01T00:00:00Z"),
                b"m",
                parents,
            )
        };
        assert_ne!(base(&[]), base(&[p1]));
        assert_ne!(base(&[p1, p2]), base(&[p2, p1]));
    }

    #[test]
    fn field_boundaries_are_unambiguous() {
        // Without length prefixes these two would collide.
        let a = revision_digest("ab", "c", ts("1970-01-01T00:00:00Z"), ts("1970-01-01T00:00:00Z"), b"", &[]);
        let b = revision_digest("a", "bc", ts("1970-01-01T00:00:00Z"), ts("1970-01-01T00:00:00Z"), b"", &[]);
        assert_ne!(a, b);
    }

    #[test]
    fn snapshot_digest_matches_manual_bytes() {
        let target: RevisionId = "ab".repeat(20).parse().unwrap();
        let mut branches = BTreeMap::new();
        branches.insert("main".to_string(), target);

        let mut buf = Vec::new();
        manual_field(&mut buf, b"snapshot");
        manual_field(&mut buf, b"main");
        manual_field(&mut buf, target.as_bytes());
        let mut hasher = Sha1::new();
        hasher.update(&buf);
        let expected = SnapshotId::from_bytes(hasher.finalize().into());

        assert_eq!(snapshot_digest(&branches), expected);
    }

    #[test]
    fn branch_name_changes_digest() {
        let target: RevisionId = "ab".repeat(20).parse().unwrap();
        let mut a = BTreeMap::new();
        a.insert("main".to_string(), target);
        let mut b = BTreeMap::new();
        b.insert("master".to_string(), target);
        assert_ne!(snapshot_digest(&a), snapshot_digest(&b));
    }

    #[test]
    fn empty_snapshot_has_well_defined_digest() {
        let empty = BTreeMap::new();
        let mut buf = Vec::new();
        manual_field(&mut buf, b"snapshot");
        let mut hasher = Sha1::new();
        hasher.update(&buf);
        assert_eq!(
            snapshot_digest(&empty),
            SnapshotId::from_bytes(hasher.finalize().into())
        );
    }

    #[test]
    fn revision_round_trips_through_decode() {
        let p1: RevisionId = "11".repeat(20).parse().unwrap();
        let encoded = encode_revision(
            "alice",
            "bob",
            ts("2020-06-01T10:00:00Z"),
            ts("2020-06-01T10:05:00Z"),
            b"bytes \xff\x00 allowed",
            &[p1],
        );
        let decoded = decode_revision(&encoded).unwrap();
        assert_eq!(decoded.author, "alice");
        assert_eq!(decoded.committer, "bob");
        assert_eq!(decoded.author_date, ts("2020-06-01T10:00:00Z"));
        assert_eq!(decoded.commit_date, ts("2020-06-01T10:05:00Z"));
        assert_eq!(decoded.message, b"bytes \xff\x00 allowed");
        assert_eq!(decoded.parents, vec![p1]);
    }

    #[test]
    fn snapshot_round_trips_through_decode() {
        let t1: RevisionId = "11".repeat(20).parse().unwrap();
        let t2: RevisionId = "22".repeat(20).parse().unwrap();
        let mut branches = BTreeMap::new();
        branches.insert("dev".to_string(), t2);
        branches.insert("main".to_string(), t1);
        let decoded = decode_snapshot(&encode_snapshot(&branches)).unwrap();
        assert_eq!(decoded, branches);
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode_revision(b"not canonical").is_err());
        assert!(decode_snapshot(&encode_revision(
            "a",
            "b",
            Timestamp::MIN,
            Timestamp::MIN,
            b"",
            &[]
        ))
        .is_err());
    }
}
