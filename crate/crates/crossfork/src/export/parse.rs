//! Line parser for the forge-export text format.
//!
//! One record per line, fields tab-separated, `#` lines are comments:
//!
//! ```text
//! ORIGIN   <label> <url>
//! META     <origin-label> <key>=<value>     keys: description, owner,
//!                                           mirror (true/false),
//!                                           last_activity (ISO-8601 UTC)
//! REVISION <label> <author> <committer> <author-date> <commit-date>
//!          <comma-separated-parent-labels|-> <base64(message)>
//! SNAPSHOT <label>
//! BRANCH   <snapshot-label> <branch-name> <revision-label>
//! VISIT    <origin-label> <date> <full|partial> <snapshot-label>
//! ```

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;

use crate::model::VisitStatus;
use crate::timestamp::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum MetaField {
    Description(String),
    Owner(String),
    Mirror(bool),
    LastActivity(Timestamp),
}

#[derive(Debug, Clone)]
pub(super) enum RawRecord {
    Origin {
        label: String,
        url: String,
    },
    Meta {
        origin: String,
        field: MetaField,
    },
    Revision {
        label: String,
        author: String,
        committer: String,
        author_date: Timestamp,
        commit_date: Timestamp,
        parents: Vec<String>,
        message: Vec<u8>,
    },
    Snapshot {
        label: String,
    },
    Branch {
        snapshot: String,
        name: String,
        revision: String,
    },
    Visit {
        origin: String,
        date: Timestamp,
        status: VisitStatus,
        snapshot: String,
    },
}

impl RawRecord {
    /// The label this record declares, if any.
    pub(super) fn declared_label(&self) -> Option<(LabelKind, &str)> {
        match self {
            RawRecord::Origin { label, .. } => Some((LabelKind::Origin, label)),
            RawRecord::Revision { label, .. } => Some((LabelKind::Revision, label)),
            RawRecord::Snapshot { label } => Some((LabelKind::Snapshot, label)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(super) enum LabelKind {
    Origin,
    Revision,
    Snapshot,
}

/// Outcome of parsing one line: a record, nothing (blank or comment), or a
/// syntax message. On failure the declared label is still reported when it
/// is recoverable, so later references to it are not double-flagged.
pub(super) enum LineParse {
    Record(RawRecord),
    Empty,
    Failed {
        message: String,
        poisoned: Option<(LabelKind, String)>,
    },
}

pub(super) fn parse_line(raw: &[u8]) -> LineParse {
    let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
    let Ok(text) = std::str::from_utf8(raw) else {
        return LineParse::Failed {
            message: "line is not valid UTF-8".to_string(),
            poisoned: None,
        };
    };
    if text.trim().is_empty() || text.trim_start().starts_with('#') {
        return LineParse::Empty;
    }

    let fields: Vec<&str> = text.split('\t').collect();
    let kind = fields[0];
    let poison_kind = match kind {
        "ORIGIN" => Some(LabelKind::Origin),
        "REVISION" => Some(LabelKind::Revision),
        "SNAPSHOT" => Some(LabelKind::Snapshot),
        _ => None,
    };
    let fail = |message: String| {
        let poisoned = poison_kind.and_then(|k| {
            fields
                .get(1)
                .filter(|label| !label.is_empty())
                .map(|label| (k, label.to_string()))
        });
        LineParse::Failed { message, poisoned }
    };

    match kind {
        "ORIGIN" => {
            if fields.len() != 3 {
                return fail(format!("ORIGIN expects 2 fields, found {}", fields.len() - 1));
            }
            match nonempty(fields[1], "origin label") {
                Ok(label) => LineParse::Record(RawRecord::Origin {
                    label,
                    url: fields[2].to_string(),
                }),
                Err(message) => fail(message),
            }
        }
        "META" => {
            // value may contain tabs; only split off the first two fields
            let parts: Vec<&str> = text.splitn(3, '\t').collect();
            if parts.len() != 3 {
                return fail("META expects an origin label and key=value".to_string());
            }
            let origin = match nonempty(parts[1], "origin label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            let Some((key, value)) = parts[2].split_once('=') else {
                return fail(format!("META field `{}` is not key=value", parts[2]));
            };
            let field = match key {
                "description" => MetaField::Description(value.to_string()),
                "owner" => MetaField::Owner(value.to_string()),
                "mirror" => match value {
                    "true" => MetaField::Mirror(true),
                    "false" => MetaField::Mirror(false),
                    other => return fail(format!("mirror must be true or false, found `{other}`")),
                },
                "last_activity" => match value.parse::<Timestamp>() {
                    Ok(ts) => MetaField::LastActivity(ts),
                    Err(_) => return fail(format!("bad last_activity timestamp `{value}`")),
                },
                other => return fail(format!("unknown META key `{other}`")),
            };
            LineParse::Record(RawRecord::Meta { origin, field })
        }
        "REVISION" => {
            if fields.len() != 8 {
                return fail(format!("REVISION expects 7 fields, found {}", fields.len() - 1));
            }
            let label = match nonempty(fields[1], "revision label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            let author_date = match fields[4].parse::<Timestamp>() {
                Ok(ts) => ts,
                Err(_) => return fail(format!("bad author date `{}`", fields[4])),
            };
            let commit_date = match fields[5].parse::<Timestamp>() {
                Ok(ts) => ts,
                Err(_) => return fail(format!("bad commit date `{}`", fields[5])),
            };
            let parents = if fields[6] == "-" {
                Vec::new()
            } else {
                let labels: Vec<String> = fields[6].split(',').map(str::to_string).collect();
                if labels.iter().any(String::is_empty) {
                    return fail(format!("bad parent list `{}`", fields[6]));
                }
                labels
            };
            let message = match BASE64.decode(fields[7]) {
                Ok(bytes) => bytes,
                Err(_) => return fail(format!("message is not valid base64: `{}`", fields[7])),
            };
            LineParse::Record(RawRecord::Revision {
                label,
                author: fields[2].to_string(),
                committer: fields[3].to_string(),
                author_date,
                commit_date,
                parents,
                message,
            })
        }
        "SNAPSHOT" => {
            if fields.len() != 2 {
                return fail(format!("SNAPSHOT expects 1 field, found {}", fields.len() - 1));
            }
            match nonempty(fields[1], "snapshot label") {
                Ok(label) => LineParse::Record(RawRecord::Snapshot { label }),
                Err(message) => fail(message),
            }
        }
        "BRANCH" => {
            if fields.len() != 4 {
                return fail(format!("BRANCH expects 3 fields, found {}", fields.len() - 1));
            }
            let snapshot = match nonempty(fields[1], "snapshot label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            let name = match nonempty(fields[2], "branch name") {
                Ok(name) => name,
                Err(message) => return fail(message),
            };
            let revision = match nonempty(fields[3], "revision label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            LineParse::Record(RawRecord::Branch {
                snapshot,
                name,
                revision,
            })
        }
        "VISIT" => {
            if fields.len() != 5 {
                return fail(format!("VISIT expects 4 fields, found {}", fields.len() - 1));
            }
            let origin = match nonempty(fields[1], "origin label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            let date = match fields[2].parse::<Timestamp>() {
                Ok(ts) => ts,
                Err(_) => return fail(format!("bad visit date `{}`", fields[2])),
            };
            let status = match fields[3] {
                "full" => VisitStatus::Full,
                "partial" => VisitStatus::Partial,
                other => return fail(format!("visit status must be full or partial, found `{other}`")),
            };
            let snapshot = match nonempty(fields[4], "snapshot label") {
                Ok(label) => label,
                Err(message) => return fail(message),
            };
            LineParse::Record(RawRecord::Visit {
                origin,
                date,
                status,
                snapshot,
            })
        }
        other => fail(format!("unknown record kind `{other}`")),
    }
}

fn nonempty(field: &str, what: &str) -> Result<String, String> {
    if field.is_empty() {
        Err(format!("empty {what}"))
    } else {
        Ok(field.to_string())
    }
}

/// Encode a message for a REVISION line.
pub fn encode_message(message: &[u8]) -> String {
    BASE64.encode(message)
}
