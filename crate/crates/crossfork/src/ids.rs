//! Identifiers for archived objects.
//!
//! Origins get sequential numeric ids at first insertion. Revisions and
//! snapshots are content-addressed by a 160-bit digest of their canonical
//! serialization, rendered as 40 lowercase hex characters.

use std::fmt;
use std::str::FromStr;

use serde::de::Visitor;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Sequential id of an origin URL, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OriginId(pub u64);

impl fmt::Display for OriginId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! digest_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name([u8; 20]);

        impl $name {
            pub fn from_bytes(bytes: [u8; 20]) -> Self {
                Self(bytes)
            }

            pub fn as_bytes(&self) -> &[u8; 20] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for byte in &self.0 {
                    write!(f, "{byte:02x}")?;
                }
                Ok(())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                let bad = || Error::InvalidDigest(s.to_string());
                if s.len() != 40 {
                    return Err(bad());
                }
                let mut out = [0u8; 20];
                for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
                    let hi = hex_nibble(chunk[0]).ok_or_else(bad)?;
                    let lo = hex_nibble(chunk[1]).ok_or_else(bad)?;
                    out[i] = (hi << 4) | lo;
                }
                Ok(Self(out))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                struct HexVisitor;
                impl Visitor<'_> for HexVisitor {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        write!(f, "a 40-character lowercase hex digest")
                    }
                    fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<$name, E> {
                        v.parse().map_err(|_| E::custom("invalid digest"))
                    }
                }
                deserializer.deserialize_str(HexVisitor)
            }
        }
    };
}

// Lowercase-only: digests render lowercase and must round-trip byte-exactly.
fn hex_nibble(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        _ => None,
    }
}

digest_id! {
    /// Content digest of a revision's canonical serialization.
    RevisionId
}

digest_id! {
    /// Content digest of a snapshot's canonical branch map.
    SnapshotId
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let id = RevisionId::from_bytes([
            0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99, 0xaa, 0xbb, 0xcc, 0xdd,
            0xee, 0xff, 0x01, 0x23, 0x45, 0x67,
        ]);
        let hex = id.to_string();
        assert_eq!(hex.len(), 40);
        assert_eq!(hex.parse::<RevisionId>().unwrap(), id);
    }

    #[test]
    fn rejects_bad_hex() {
        assert!("short".parse::<RevisionId>().is_err());
        assert!("G".repeat(40).parse::<RevisionId>().is_err());
        // uppercase is not canonical
        assert!("AB".repeat(20).parse::<RevisionId>().is_err());
    }

    #[test]
    fn json_is_hex_string() {
        let id: SnapshotId = "00".repeat(20).parse().unwrap();
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", "0".repeat(40)));
        let back: SnapshotId = serde_json::from_str(&json).unwrap();
        assert_eq!(back, id);
    }
}
