//! Detection vs the brute-force oracle, plus the subset laws that make the
//! two scope modes and the depth parameter predictable.

mod common;

use std::collections::BTreeSet;

use crossfork::detect::{detect_forks, detect_forks_parallel, oracle::oracle_detect, CommitScope};
use crossfork::ForkFinding;

use common::{small_corpus_config, store_from_config, upstream_urls};

fn urls(findings: &[ForkFinding]) -> BTreeSet<&str> {
    findings.iter().map(|f| f.fork_url.as_str()).collect()
}

/// Fork-level containment including matched heads.
fn contained_in(smaller: &[ForkFinding], larger: &[ForkFinding]) -> bool {
    smaller.iter().all(|small| {
        larger.iter().any(|large| {
            large.fork_url == small.fork_url && small.matched_heads.is_subset(&large.matched_heads)
        })
    })
}

#[test]
fn oracle_agrees_on_simulated_corpora() {
    for seed in [3u64, 17, 64, 91] {
        let (store, truth) = store_from_config(&small_corpus_config(seed));
        for target in upstream_urls(&truth) {
            for depth in 0..=3 {
                for scope in [CommitScope::interval(depth), CommitScope::all_commits(depth)] {
                    let fast = detect_forks(&store, &target, &scope).unwrap();
                    let slow = oracle_detect(&store, &target, &scope).unwrap();
                    assert_eq!(fast, slow, "seed {seed} target {target} scope {scope:?}");
                }
            }
        }
    }
}

/// The oracle contract holds for any target, including fork origins.
#[test]
fn oracle_agrees_with_forks_as_targets() {
    let (store, _) = store_from_config(&small_corpus_config(5));
    let all_urls: Vec<String> = store.origins().map(|o| o.url.clone()).collect();
    for target in all_urls {
        for scope in [CommitScope::interval(1), CommitScope::all_commits(1)] {
            let fast = detect_forks(&store, &target, &scope).unwrap();
            let slow = oracle_detect(&store, &target, &scope).unwrap();
            assert_eq!(fast, slow, "target {target}");
        }
    }
}

#[test]
fn interval_results_are_contained_in_all_commits_results() {
    for seed in [2u64, 9, 33] {
        let (store, truth) = store_from_config(&small_corpus_config(seed));
        for target in upstream_urls(&truth) {
            for depth in 0..=3 {
                let interval =
                    detect_forks(&store, &target, &CommitScope::interval(depth)).unwrap();
                let all = detect_forks(&store, &target, &CommitScope::all_commits(depth)).unwrap();
                assert!(
                    urls(&interval).is_subset(&urls(&all)),
                    "seed {seed} target {target} depth {depth}"
                );
                assert!(contained_in(&interval, &all));
            }
        }
    }
}

#[test]
fn deeper_child_expansion_never_loses_findings() {
    for seed in [4u64, 21] {
        let (store, truth) = store_from_config(&small_corpus_config(seed));
        for target in upstream_urls(&truth) {
            let mut previous: Option<Vec<ForkFinding>> = None;
            for depth in 0..=4 {
                let current = detect_forks(&store, &target, &CommitScope::interval(depth)).unwrap();
                if let Some(previous) = previous {
                    assert!(
                        contained_in(&previous, &current),
                        "seed {seed} target {target} depth {depth}"
                    );
                }
                previous = Some(current);
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let (store, truth) = store_from_config(&small_corpus_config(8));
    let target = &upstream_urls(&truth)[0];
    let scope = CommitScope::default();
    let baseline = detect_forks_parallel(&store, target, &scope, 1).unwrap();
    assert!(!baseline.is_empty());
    for threads in [2, 3, 8] {
        assert_eq!(
            detect_forks_parallel(&store, target, &scope, threads).unwrap(),
            baseline
        );
    }
}

/// Soundness: every matched head really is a branch head of the reported
/// origin, and lies in the merged target commit set.
#[test]
fn findings_are_sound() {
    let (store, truth) = store_from_config(&small_corpus_config(12));
    for target in upstream_urls(&truth) {
        let scope = CommitScope::default();
        let target_id = store.origin_by_url(&target).unwrap().id;
        let commit_set =
            crossfork::detect::target_commit_set(&store, target_id, &scope).unwrap();
        let merged = commit_set.merged();
        for finding in detect_forks(&store, &target, &scope).unwrap() {
            assert_ne!(finding.fork_origin, target_id, "self-exclusion");
            assert!(!finding.matched_heads.is_empty());
            let heads = store.branch_heads(finding.fork_origin, false).unwrap();
            for head in &finding.matched_heads {
                assert!(merged.contains(head));
                assert!(heads.contains(head));
            }
        }
    }
}
