//! Ground-truth soundness of the simulator: the emitted labels must be
//! re-derivable from the generated graph, and the detectability flag must
//! predict detection exactly.

mod common;

use std::collections::BTreeSet;

use crossfork::classify::{
    divergence, is_contributor_owned, is_individual_copy, is_mirror, is_renamed,
    DEFAULT_INACTIVITY_SECONDS, DEFAULT_MIRROR_LAG_SECONDS,
};
use crossfork::detect::{detect_forks, CommitScope};
use crossfork::sim::{recall_report, SimConfig};
use crossfork::MotiveCategory;

use common::{corpus_now, store_from_config, upstream_urls};

#[test]
fn emitted_labels_are_rederivable() {
    for seed in [1u64, 6, 42] {
        let config = SimConfig {
            seed,
            upstream_projects: 6,
            revisions_per_project: 20,
            fork_rate: 4.0,
            head_drift_probability: 0.5,
            ..SimConfig::default()
        };
        let (store, truth) = store_from_config(&config);
        let now = corpus_now(&store);
        assert!(!truth.is_empty());

        for record in &truth {
            let fork = store.origin_by_url(&record.fork_url).unwrap().id;
            let upstream = store.origin_by_url(&record.upstream_url).unwrap().id;
            let diverged = divergence(&store, fork, upstream).unwrap();

            match record.category {
                MotiveCategory::ContinuedDevelopment => {
                    assert!(!diverged.is_empty(), "{}", record.fork_url);
                }
                MotiveCategory::Mirror => {
                    assert!(diverged.is_empty(), "{}", record.fork_url);
                    let check =
                        is_mirror(&store, fork, upstream, DEFAULT_MIRROR_LAG_SECONDS).unwrap();
                    assert!(check.is_mirror, "{}", record.fork_url);
                }
                MotiveCategory::ContributorOwned => {
                    assert!(diverged.is_empty());
                    assert!(
                        is_contributor_owned(&store, fork, upstream).unwrap().is_some(),
                        "{}",
                        record.fork_url
                    );
                }
                MotiveCategory::Renamed => {
                    assert!(diverged.is_empty());
                    assert!(is_renamed(&record.fork_url, &record.upstream_url));
                }
                MotiveCategory::IndividualCopy => {
                    assert!(diverged.is_empty());
                    assert!(
                        is_individual_copy(&store, fork, now, DEFAULT_INACTIVITY_SECONDS)
                            .unwrap()
                            .is_some(),
                        "{}",
                        record.fork_url
                    );
                }
                MotiveCategory::Unknown => panic!("simulator never labels Unknown"),
            }
        }
    }
}

/// The detectability flag equals actual interval-mode depth-1 detection,
/// fork by fork, and nothing outside the truth set is ever found.
#[test]
fn detectability_flag_predicts_detection_exactly() {
    for (seed, drift) in [(1u64, 0.0), (2, 0.35), (3, 1.0)] {
        let config = SimConfig {
            seed,
            upstream_projects: 8,
            revisions_per_project: 16,
            fork_rate: 3.0,
            head_drift_probability: drift,
            ..SimConfig::default()
        };
        let (store, truth) = store_from_config(&config);

        for target in upstream_urls(&truth) {
            let findings = detect_forks(&store, &target, &CommitScope::interval(1)).unwrap();
            let found: BTreeSet<&str> = findings.iter().map(|f| f.fork_url.as_str()).collect();
            let expected: BTreeSet<&str> = truth
                .iter()
                .filter(|t| t.upstream_url == target && t.detectable_at_depth_1)
                .map(|t| t.fork_url.as_str())
                .collect();
            assert_eq!(found, expected, "seed {seed} drift {drift} target {target}");
        }
    }
}

/// Aggregate recall equals the ground-truth detectable fraction, and the
/// all-commits mode recovers every fork the simulator generates.
#[test]
fn recall_matches_detectable_fraction() {
    let config = SimConfig {
        seed: 9,
        upstream_projects: 10,
        revisions_per_project: 18,
        fork_rate: 3.0,
        head_drift_probability: 0.6,
        ..SimConfig::default()
    };
    let (store, truth) = store_from_config(&config);

    let mut interval_findings = Vec::new();
    let mut all_commits_findings = Vec::new();
    for target in upstream_urls(&truth) {
        interval_findings
            .extend(detect_forks(&store, &target, &CommitScope::interval(1)).unwrap());
        all_commits_findings
            .extend(detect_forks(&store, &target, &CommitScope::all_commits(3)).unwrap());
    }

    let report = recall_report(&truth, &interval_findings);
    let detectable = truth.iter().filter(|t| t.detectable_at_depth_1).count();
    assert_eq!(report.recall, detectable as f64 / truth.len() as f64);
    assert_eq!(report.false_positives, 0);

    // every generated fork either keeps an upstream commit as a head or
    // diverges by at most three commits, so the all-commits base expanded
    // three hops catches them all
    let full = recall_report(&truth, &all_commits_findings);
    assert_eq!(full.recall, 1.0);
    assert_eq!(full.false_positives, 0);
}
