//! Fork detection over the sealed archive store.
//!
//! A repository is reported as a fork of a target URL when at least one of
//! its recorded branch heads lies in the target's commit set. The commit
//! set is built from a base — either the target's interval commits (the
//! branch heads captured by its full visits) or its complete revision
//! closure — expanded by a configurable number of one-hop child steps.
//! Matching is head-based only: interior commits of a fork's history are
//! never compared, which is exactly the approximation whose recall the
//! simulator measures.

pub mod oracle;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{OriginId, RevisionId};
use crate::store::{derive_host, ArchiveStore};

/// Which commits of the target seed the search, and how far to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitScope {
    pub mode: ScopeMode,
    pub child_depth: u32,
}

impl Default for CommitScope {
    fn default() -> Self {
        CommitScope {
            mode: ScopeMode::Interval,
            child_depth: 1,
        }
    }
}

impl CommitScope {
    pub fn interval(child_depth: u32) -> CommitScope {
        CommitScope {
            mode: ScopeMode::Interval,
            child_depth,
        }
    }

    pub fn all_commits(child_depth: u32) -> CommitScope {
        CommitScope {
            mode: ScopeMode::AllCommits,
            child_depth,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}(child_depth={})", self.mode, self.child_depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeMode {
    /// Branch heads recorded by the target's full visits.
    Interval,
    /// Every revision reachable from any recorded branch head of the target.
    AllCommits,
}

impl fmt::Display for ScopeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopeMode::Interval => write!(f, "interval"),
            ScopeMode::AllCommits => write!(f, "all-commits"),
        }
    }
}

impl FromStr for ScopeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScopeMode> {
        match s {
            "interval" => Ok(ScopeMode::Interval),
            "all-commits" => Ok(ScopeMode::AllCommits),
            other => Err(Error::InvalidConfig(vec![format!(
                "unknown mode `{other}`, expected interval or all-commits"
            )])),
        }
    }
}

/// The commit set detection matches against: the scope base plus its child
/// expansion. `children` may overlap `base` (a child can itself be a branch
/// head); [`TargetCommitSet::merged`] is what matching consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetCommitSet {
    pub target: OriginId,
    pub base: BTreeSet<RevisionId>,
    pub children: BTreeSet<RevisionId>,
}

impl TargetCommitSet {
    pub fn merged(&self) -> BTreeSet<RevisionId> {
        self.base.union(&self.children).copied().collect()
    }
}

/// One detected fork of a target, with the branch heads that matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForkFinding {
    pub fork_origin: OriginId,
    pub fork_url: String,
    pub matched_heads: BTreeSet<RevisionId>,
    pub cross_platform: bool,
}

/// Wire form of a finding: one JSON object per line with exactly
/// `fork_url`, `matched_heads` (sorted 40-hex digests) and `cross_platform`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingRecord {
    pub fork_url: String,
    pub matched_heads: Vec<RevisionId>,
    pub cross_platform: bool,
}

impl From<&ForkFinding> for FindingRecord {
    fn from(finding: &ForkFinding) -> FindingRecord {
        FindingRecord {
            fork_url: finding.fork_url.clone(),
            matched_heads: finding.matched_heads.iter().copied().collect(),
            cross_platform: finding.cross_platform,
        }
    }
}

impl FindingRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("finding serializes")
    }

    pub fn from_json_line(line: &str) -> Result<FindingRecord> {
        serde_json::from_str(line).map_err(|e| Error::InvalidJson(e.to_string()))
    }
}

/// Branch heads recorded by the target's full visits.
pub fn interval_commits(store: &ArchiveStore, target: OriginId) -> Result<BTreeSet<RevisionId>> {
    store.branch_heads(target, true)
}

/// Revisions reachable from `base` in at most `depth` one-hop child steps,
/// excluding step zero: depth 0 is empty, depth 1 is all direct children of
/// `base`, depth k unions k successive frontier expansions. Nothing is
/// subtracted — a child that is also in `base` stays in the result.
pub fn child_commits(
    store: &ArchiveStore,
    base: &BTreeSet<RevisionId>,
    depth: u32,
) -> BTreeSet<RevisionId> {
    let mut result = BTreeSet::new();
    let mut frontier: Vec<RevisionId> = base.iter().copied().collect();
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for revision in &frontier {
            next.extend(store.children_of(*revision).iter().copied());
        }
        if next.is_empty() {
            break;
        }
        frontier = next.iter().copied().collect();
        result.append(&mut next);
    }
    result
}

/// Build the commit set a detection run matches against.
pub fn target_commit_set(
    store: &ArchiveStore,
    target: OriginId,
    scope: &CommitScope,
) -> Result<TargetCommitSet> {
    let base = match scope.mode {
        ScopeMode::Interval => interval_commits(store, target)?,
        ScopeMode::AllCommits => store.all_revisions_of(target)?,
    };
    let children = child_commits(store, &base, scope.child_depth);
    Ok(TargetCommitSet {
        target,
        base,
        children,
    })
}

/// Find every origin other than the target with a recorded branch head
/// (from visits of any status) inside the target commit set. Results are
/// sorted by fork URL.
pub fn detect_forks(
    store: &ArchiveStore,
    target_url: &str,
    scope: &CommitScope,
) -> Result<Vec<ForkFinding>> {
    detect_forks_parallel(store, target_url, scope, 1)
}

/// [`detect_forks`] with the origin scan partitioned across `threads`
/// workers. Output is identical for every thread count.
pub fn detect_forks_parallel(
    store: &ArchiveStore,
    target_url: &str,
    scope: &CommitScope,
    threads: usize,
) -> Result<Vec<ForkFinding>> {
    let target = store
        .origin_by_url(target_url)
        .ok_or_else(|| Error::UnknownOriginUrl(target_url.to_string()))?;
    let target_id = target.id;
    let target_host = target.host.clone();
    let commit_set = target_commit_set(store, target_id, scope)?;
    let wanted = commit_set.merged();

    let origins: Vec<&crate::model::Origin> = store.origins().collect();
    let threads = threads.max(1).min(origins.len().max(1));
    let chunk_size = origins.len().div_ceil(threads);

    let scan = |chunk: &[&crate::model::Origin]| -> Result<Vec<ForkFinding>> {
        let mut found = Vec::new();
        for origin in chunk {
            if origin.id == target_id {
                continue;
            }
            let heads = store.branch_heads(origin.id, false)?;
            let matched: BTreeSet<RevisionId> =
                heads.intersection(&wanted).copied().collect();
            if matched.is_empty() {
                continue;
            }
            found.push(ForkFinding {
                fork_origin: origin.id,
                fork_url: origin.url.clone(),
                matched_heads: matched,
                cross_platform: origin.host != target_host,
            });
        }
        Ok(found)
    };

    let mut findings = if threads <= 1 || origins.len() <= 1 {
        scan(&origins)?
    } else {
        let chunks: Vec<&[&crate::model::Origin]> = origins.chunks(chunk_size).collect();
        let results: Vec<Result<Vec<ForkFinding>>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| s.spawn(move || scan(chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("detection worker panicked"))
                .collect()
        });
        let mut merged = Vec::new();
        for result in results {
            merged.extend(result?);
        }
        merged
    };

    findings.sort_by(|a, b| a.fork_url.cmp(&b.fork_url));
    Ok(findings)
}

/// Keep only findings hosted elsewhere than the target.
///
/// With `strict_prefix` the comparison reproduces plain URL-prefix
/// filtering: a finding is dropped when its URL starts with the target's
/// scheme-and-authority substring. That misjudges URLs like
/// `https://github.com.evil.example/x` against a `https://github.com/...`
/// target; the default mode compares normalized hosts instead, which keeps
/// them. Input order is preserved.
pub fn cross_platform_filter(
    findings: Vec<ForkFinding>,
    target_url: &str,
    strict_prefix: bool,
) -> Vec<ForkFinding> {
    if strict_prefix {
        let prefix = scheme_and_authority(target_url);
        findings
            .into_iter()
            .filter(|finding| !finding.fork_url.starts_with(&prefix))
            .collect()
    } else {
        let target_host = derive_host(target_url).ok();
        findings
            .into_iter()
            .filter(|finding| derive_host(&finding.fork_url).ok() != target_host)
            .collect()
    }
}

/// The literal substring of `url` up to the end of its authority part.
fn scheme_and_authority(url: &str) -> String {
    let Some(scheme_end) = url.find("://") else {
        return url.to_string();
    };
    let rest = &url[scheme_end + 3..];
    let authority_len = rest
        .find(['/', '?', '#'])
        .unwrap_or(rest.len());
    url[..scheme_end + 3 + authority_len].to_string()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{Revision, VisitStatus};
    use crate::timestamp::Timestamp;

    fn ts(s: &str) -> Timestamp {
        s.parse().unwrap()
    }

    struct Fixture {
        store: ArchiveStore,
    }

    impl Fixture {
        fn new() -> Fixture {
            Fixture {
                store: ArchiveStore::new(),
            }
        }

        fn revision(&mut self, message: &str, parents: Vec<RevisionId>) -> RevisionId {
            self.store
                .put_revision(Revision::new(
                    "a <a@x>",
                    "a <a@x>",
                    ts("2020-01-01T00:00:00Z"),
                    ts("2020-01-01T00:00:00Z"),
                    message.as_bytes().to_vec(),
                    parents,
                ))
                .unwrap()
        }

        fn origin(&mut self, url: &str) -> OriginId {
            self.store.put_origin(url).unwrap()
        }

        fn visit(
            &mut self,
            origin: OriginId,
            date: &str,
            status: VisitStatus,
            branches: &[(&str, RevisionId)],
        ) {
            let map: BTreeMap<String, RevisionId> = branches
                .iter()
                .map(|(name, id)| (name.to_string(), *id))
                .collect();
            let snapshot = self.store.put_snapshot(map).unwrap();
            self.store
                .record_visit(origin, ts(date), status, snapshot)
                .unwrap();
        }
    }

    #[test]
    fn interval_commits_examples() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/t/t");
        let r5 = fx.revision("r5", vec![]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", r5)]);
        assert_eq!(
            interval_commits(&fx.store, target).unwrap(),
            [r5].into_iter().collect()
        );

        // three full visits with heads r5, r9, r9 dedupe to {r5, r9}
        let r9 = fx.revision("r9", vec![r5]);
        fx.visit(target, "2020-02-01T00:00:00Z", VisitStatus::Full, &[("main", r9)]);
        fx.visit(target, "2020-03-01T00:00:00Z", VisitStatus::Full, &[("main", r9)]);
        assert_eq!(
            interval_commits(&fx.store, target).unwrap(),
            [r5, r9].into_iter().collect()
        );
    }

    #[test]
    fn all_partial_visits_give_empty_interval() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/t/t");
        let r1 = fx.revision("r1", vec![]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Partial, &[("main", r1)]);
        assert!(interval_commits(&fx.store, target).unwrap().is_empty());
    }

    #[test]
    fn child_commits_direct_children() {
        let mut fx = Fixture::new();
        let r1 = fx.revision("r1", vec![]);
        let r2 = fx.revision("r2", vec![r1]);
        let r3 = fx.revision("r3", vec![r1]);
        let base: BTreeSet<_> = [r1].into_iter().collect();
        assert_eq!(
            child_commits(&fx.store, &base, 1),
            [r2, r3].into_iter().collect()
        );
    }

    #[test]
    fn child_commits_expands_frontier() {
        // chain r1 <- r2 <- r3, hand-expanded twice: {r2} then {r3}
        let mut fx = Fixture::new();
        let r1 = fx.revision("r1", vec![]);
        let r2 = fx.revision("r2", vec![r1]);
        let r3 = fx.revision("r3", vec![r2]);
        let base: BTreeSet<_> = [r1].into_iter().collect();
        assert_eq!(
            child_commits(&fx.store, &base, 2),
            [r2, r3].into_iter().collect()
        );
        assert_eq!(
            child_commits(&fx.store, &base, 1),
            [r2].into_iter().collect()
        );
    }

    #[test]
    fn child_commits_depth_zero_is_empty() {
        let mut fx = Fixture::new();
        let r1 = fx.revision("r1", vec![]);
        let _r2 = fx.revision("r2", vec![r1]);
        let base: BTreeSet<_> = [r1].into_iter().collect();
        assert!(child_commits(&fx.store, &base, 0).is_empty());
    }

    #[test]
    fn identical_head_is_detected() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/up/widget");
        let fork = fx.origin("https://gitlab.com/copy/widget");
        let r1 = fx.revision("r1", vec![]);
        let r2 = fx.revision("r2", vec![r1]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", r2)]);
        fx.visit(fork, "2020-01-02T00:00:00Z", VisitStatus::Full, &[("main", r2)]);

        let findings = detect_forks(
            &fx.store,
            "https://github.com/up/widget",
            &CommitScope::default(),
        )
        .unwrap();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].fork_origin, fork);
        assert_eq!(findings[0].matched_heads, [r2].into_iter().collect());
        assert!(findings[0].cross_platform);
    }

    #[test]
    fn target_never_appears_and_no_sharing_means_empty() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/up/widget");
        let other = fx.origin("https://github.com/other/thing");
        let r1 = fx.revision("widget r1", vec![]);
        let q1 = fx.revision("thing q1", vec![]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", r1)]);
        fx.visit(other, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", q1)]);

        let findings = detect_forks(
            &fx.store,
            "https://github.com/up/widget",
            &CommitScope::all_commits(3),
        )
        .unwrap();
        assert!(findings.is_empty());
    }

    #[test]
    fn fork_with_only_partial_visits_is_still_matched() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/up/widget");
        let fork = fx.origin("https://gitlab.com/copy/widget");
        let r1 = fx.revision("r1", vec![]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", r1)]);
        fx.visit(fork, "2020-01-02T00:00:00Z", VisitStatus::Partial, &[("main", r1)]);

        let findings = detect_forks(
            &fx.store,
            "https://github.com/up/widget",
            &CommitScope::default(),
        )
        .unwrap();
        assert_eq!(findings.len(), 1);
    }

    /// An interval-mode result that is a strict subset of the all-commits
    /// result: one fork sits on an interior commit that no full visit of
    /// the target ever recorded as a head.
    #[test]
    fn interval_finds_strict_subset_of_all_commits() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/up/widget");
        let tip_fork = fx.origin("https://gitlab.com/a/widget");
        let interior_fork = fx.origin("https://gitlab.com/b/widget");

        let c1 = fx.revision("c1", vec![]);
        let c2 = fx.revision("c2", vec![c1]);
        let c3 = fx.revision("c3", vec![c2]);
        let c4 = fx.revision("c4", vec![c3]);
        let c5 = fx.revision("c5", vec![c4]);

        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", c3)]);
        fx.visit(target, "2020-02-01T00:00:00Z", VisitStatus::Full, &[("main", c5)]);
        fx.visit(tip_fork, "2020-02-02T00:00:00Z", VisitStatus::Full, &[("main", c5)]);
        fx.visit(interior_fork, "2020-02-02T00:00:00Z", VisitStatus::Full, &[("main", c2)]);

        let url = "https://github.com/up/widget";
        let interval = detect_forks(&fx.store, url, &CommitScope::interval(1)).unwrap();
        let all = detect_forks(&fx.store, url, &CommitScope::all_commits(1)).unwrap();

        assert_eq!(interval.len(), 1);
        assert_eq!(all.len(), 2);
        let interval_urls: BTreeSet<_> = interval.iter().map(|f| &f.fork_url).collect();
        let all_urls: BTreeSet<_> = all.iter().map(|f| &f.fork_url).collect();
        assert!(interval_urls.is_subset(&all_urls));
    }

    #[test]
    fn unknown_target_is_rejected() {
        let fx = Fixture::new();
        assert!(matches!(
            detect_forks(&fx.store, "https://github.com/no/where", &CommitScope::default()),
            Err(Error::UnknownOriginUrl(_))
        ));
    }

    #[test]
    fn parallel_scan_matches_single_thread() {
        let mut fx = Fixture::new();
        let target = fx.origin("https://github.com/up/widget");
        let r1 = fx.revision("r1", vec![]);
        fx.visit(target, "2020-01-01T00:00:00Z", VisitStatus::Full, &[("main", r1)]);
        for i in 0..20 {
            let fork = fx.origin(&format!("https://gitlab.com/user{i}/widget"));
            fx.visit(fork, "2020-01-02T00:00:00Z", VisitStatus::Full, &[("main", r1)]);
        }
        let url = "https://github.com/up/widget";
        let single = detect_forks_parallel(&fx.store, url, &CommitScope::default(), 1).unwrap();
        for threads in [2, 3, 8, 64] {
            let parallel =
                detect_forks_parallel(&fx.store, url, &CommitScope::default(), threads).unwrap();
            assert_eq!(parallel, single, "threads={threads}");
        }
    }

    #[test]
    fn strict_prefix_differs_from_normalized_host() {
        let target_url = "https://github.com/up/widget";
        let make = |url: &str| ForkFinding {
            fork_origin: OriginId(7),
            fork_url: url.to_string(),
            matched_heads: BTreeSet::new(),
            cross_platform: true,
        };
        let findings = vec![
            make("https://github.com.evil.example/x"),
            make("https://github.com/some/fork"),
            make("https://gitlab.com/some/fork"),
        ];

        let strict = cross_platform_filter(findings.clone(), target_url, true);
        // the deceptive host shares the string prefix, so strict mode
        // (incorrectly) drops it
        assert_eq!(
            strict.iter().map(|f| f.fork_url.as_str()).collect::<Vec<_>>(),
            vec!["https://gitlab.com/some/fork"]
        );

        let normalized = cross_platform_filter(findings, target_url, false);
        assert_eq!(
            normalized.iter().map(|f| f.fork_url.as_str()).collect::<Vec<_>>(),
            vec![
                "https://github.com.evil.example/x",
                "https://gitlab.com/some/fork"
            ]
        );
    }

    #[test]
    fn same_host_findings_filter_to_empty() {
        let target_url = "https://github.com/up/widget";
        let findings = vec![ForkFinding {
            fork_origin: OriginId(2),
            fork_url: "https://github.com/fork/widget".to_string(),
            matched_heads: BTreeSet::new(),
            cross_platform: false,
        }];
        assert!(cross_platform_filter(findings.clone(), target_url, true).is_empty());
        assert!(cross_platform_filter(findings, target_url, false).is_empty());
    }

    #[test]
    fn finding_record_wire_shape() {
        let finding = ForkFinding {
            fork_origin: OriginId(3),
            fork_url: "https://gitlab.com/a/b".to_string(),
            matched_heads: ["ab".repeat(20).parse().unwrap()].into_iter().collect(),
            cross_platform: true,
        };
        let line = FindingRecord::from(&finding).to_json_line();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        let object = value.as_object().unwrap();
        assert_eq!(object.len(), 3);
        // key order on the wire is fixed
        let positions: Vec<usize> = ["\"fork_url\"", "\"matched_heads\"", "\"cross_platform\""]
            .iter()
            .map(|key| line.find(key).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
        let back = FindingRecord::from_json_line(&line).unwrap();
        assert_eq!(back.fork_url, finding.fork_url);
        assert_eq!(back.matched_heads.len(), 1);
    }
}
