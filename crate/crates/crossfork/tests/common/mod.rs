//! Shared helpers for the integration suites.
#![allow(dead_code)] // not every suite uses every helper

use std::collections::BTreeSet;

use crossfork::sim::{simulate, GroundTruth, SimConfig};
use crossfork::{export, ArchiveStore, Timestamp};

/// Simulate a corpus and load it into a fresh store.
pub fn store_from_config(config: &SimConfig) -> (ArchiveStore, Vec<GroundTruth>) {
    let (text, truth) = simulate(config).expect("config is valid");
    let mut store = ArchiveStore::new();
    export::ingest(&mut store, text.as_bytes()).expect("simulated corpora ingest cleanly");
    (store, truth)
}

/// Distinct upstream URLs of a corpus, in order.
pub fn upstream_urls(truth: &[GroundTruth]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    truth
        .iter()
        .filter(|t| seen.insert(t.upstream_url.clone()))
        .map(|t| t.upstream_url.clone())
        .collect()
}

/// A reference clock one day past the corpus's newest visit.
pub fn corpus_now(store: &ArchiveStore) -> Timestamp {
    store
        .latest_visit_date()
        .expect("corpus has visits")
        .plus_seconds(86_400)
        .expect("in range")
}

/// Small corpora staying within 50 origins and 500 revisions: five
/// upstreams with exactly six forks each.
pub fn small_corpus_config(seed: u64) -> SimConfig {
    SimConfig {
        seed,
        upstream_projects: 5,
        revisions_per_project: 12,
        fork_rate: 6.0,
        // let half the sweep exercise undetectable heads
        head_drift_probability: if seed.is_multiple_of(2) { 0.5 } else { 0.0 },
        ..SimConfig::default()
    }
}
