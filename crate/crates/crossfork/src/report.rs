//! Detection run summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detect::{CommitScope, ForkFinding};
use crate::store::ArchiveStore;

/// Summary of one detection run over the unfiltered findings: total fork
/// count, how many sit on another host, and the per-host breakdown.
/// `cross_platform_total` always equals the sum of `per_host_counts` over
/// hosts other than the target's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub target_url: String,
    pub scope: String,
    pub forks_total: u64,
    pub cross_platform_total: u64,
    pub per_host_counts: BTreeMap<String, u64>,
    pub elapsed_ms: u64,
}

impl DetectionReport {
    pub fn new(
        store: &ArchiveStore,
        target_url: &str,
        scope: &CommitScope,
        findings: &[ForkFinding],
        elapsed_ms: u64,
    ) -> DetectionReport {
        let mut per_host_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut cross_platform_total = 0;
        for finding in findings {
            let host = store
                .origin(finding.fork_origin)
                .expect("finding references a stored origin")
                .host
                .clone();
            *per_host_counts.entry(host).or_insert(0) += 1;
            if finding.cross_platform {
                cross_platform_total += 1;
            }
        }
        DetectionReport {
            target_url: target_url.to_string(),
            scope: scope.describe(),
            forks_total: findings.len() as u64,
            cross_platform_total,
            per_host_counts,
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
