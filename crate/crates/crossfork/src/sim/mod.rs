//! Deterministic multi-host forge simulator.
//!
//! [`simulate`] turns a [`SimConfig`] into a forge-export text plus a
//! ground-truth record per generated fork. Output is a pure function of the
//! config: randomness comes from an in-tree xoshiro256** (see [`rng`]),
//! timestamps sit on a fixed 60-second grid starting 2020-01-01T00:00:00Z,
//! and every emitted collection iterates in a defined order.
//!
//! Every fork is constructed so that its category's defining signal holds
//! structurally: mirrors copy snapshots the upstream published earlier
//! (within one grid step), continued-development forks carry at least one
//! commit absent upstream, renamed forks differ in the final URL path
//! segment, individual copies have no activity in the early 45% of the
//! two-year corpus window, and contributor-owned forks name an owner who
//! committed their head. Commit messages embed project and counter, so
//! distinct projects never share a digest and detection across projects
//! cannot produce false positives.
//!
//! The `detectable_at_depth_1` flag is not sampled; it is recomputed from
//! the generated graph: a fork is detectable at depth 1 exactly when one of
//! its branch heads is an upstream full-visit head or a direct child of
//! one. `head_drift_probability` controls how often the generator *tries*
//! to place fork heads outside that set (stale interior copies, divergence
//! chains of length two or more).
//!
//! Classification-oriented corpora should be evaluated with a reference
//! time shortly after the last visit — see
//! [`ArchiveStore::latest_visit_date`](crate::store::ArchiveStore) — so
//! that "recent" and "inactive" mean what the generator intended.

pub mod rng;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use rng::Xoshiro256StarStar;

use crate::classify::MotiveCategory;
use crate::detect::ForkFinding;
use crate::error::{Error, Result};
use crate::export::encode_message;
use crate::timestamp::Timestamp;

/// Corpus start: 2020-01-01T00:00:00Z.
const EPOCH_BASE: i64 = 1_577_836_800;
/// All generated timestamps are multiples of this many seconds past the base.
const GRID_SECONDS: i64 = 60;
/// Upstream commit activity is spread over two years.
const SPAN_SECONDS: i64 = 730 * 24 * 3600;

/// Order of [`SimConfig::category_mix`] entries.
pub const MIX_ORDER: [MotiveCategory; 5] = [
    MotiveCategory::Mirror,
    MotiveCategory::ContributorOwned,
    MotiveCategory::Renamed,
    MotiveCategory::IndividualCopy,
    MotiveCategory::ContinuedDevelopment,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    /// Forge hosts; upstream projects live on the first, forks land on any.
    pub hosts: Vec<String>,
    pub upstream_projects: u32,
    /// Mean commits per upstream project (actual counts are uniform within
    /// ±50% of the mean).
    pub revisions_per_project: u32,
    /// Mean forks per upstream project.
    pub fork_rate: f64,
    /// Probability weights for the five fork categories, in [`MIX_ORDER`]
    /// order; must sum to 1.
    pub category_mix: [f64; 5],
    /// Spacing of repeat visits to unchanged repositories. Mirrors copy
    /// their upstream within one grid step regardless.
    pub visit_cadence_seconds: i64,
    /// Probability that a fork's head is placed outside the upstream's
    /// depth-1 commit set (where the category allows it).
    pub head_drift_probability: f64,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig {
            seed: 1,
            hosts: vec!["github.com".to_string(), "gitlab.com".to_string()],
            upstream_projects: 10,
            revisions_per_project: 20,
            fork_rate: 3.0,
            category_mix: [0.30, 0.15, 0.15, 0.25, 0.15],
            visit_cadence_seconds: 3600,
            head_drift_probability: 0.0,
        }
    }
}

impl SimConfig {
    /// Check every bound; all violations are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.hosts.len() < 2 {
            violations.push(format!(
                "hosts must list at least 2 hosts, found {}",
                self.hosts.len()
            ));
        }
        for host in &self.hosts {
            if crate::store::derive_host(&format!("https://{host}/probe")).is_err() {
                violations.push(format!("host `{host}` does not form a valid URL"));
            }
        }
        if self.upstream_projects < 1 {
            violations.push("upstream_projects must be >= 1".to_string());
        }
        if self.revisions_per_project < 1 {
            violations.push("revisions_per_project must be >= 1".to_string());
        }
        if self.revisions_per_project > 500_000 {
            violations.push("revisions_per_project must be <= 500000".to_string());
        }
        if !self.fork_rate.is_finite() || !(0.0..=100_000.0).contains(&self.fork_rate) {
            violations.push(format!(
                "fork_rate must be in [0, 100000], found {}",
                self.fork_rate
            ));
        }
        let mut sum = 0.0;
        for (weight, category) in self.category_mix.iter().zip(MIX_ORDER) {
            if !weight.is_finite() || !(0.0..=1.0).contains(weight) {
                violations.push(format!(
                    "category_mix[{category}] must be in [0, 1], found {weight}"
                ));
            }
            sum += weight;
        }
        if (sum - 1.0).abs() > 1e-9 {
            violations.push(format!("category_mix must sum to 1, found {sum}"));
        }
        if self.visit_cadence_seconds < GRID_SECONDS {
            violations.push(format!(
                "visit_cadence_seconds must be >= {GRID_SECONDS}"
            ));
        }
        if !self.head_drift_probability.is_finite()
            || !(0.0..=1.0).contains(&self.head_drift_probability)
        {
            violations.push(format!(
                "head_drift_probability must be in [0, 1], found {}",
                self.head_drift_probability
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    pub fn from_json_str(json: &str) -> Result<SimConfig> {
        serde_json::from_str(json).map_err(|e| Error::InvalidJson(e.to_string()))
    }
}

/// The label a generated fork was built to satisfy, plus whether its heads
/// land inside the upstream's depth-1 commit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub fork_url: String,
    pub upstream_url: String,
    pub category: MotiveCategory,
    pub detectable_at_depth_1: bool,
}

/// Serialize truth records, one `TRUTH` line per fork.
pub fn write_truth(records: &[GroundTruth]) -> String {
    let mut out = String::new();
    for record in records {
        let _ = writeln!(
            out,
            "TRUTH\t{}\t{}\t{}\t{}",
            record.fork_url, record.upstream_url, record.category, record.detectable_at_depth_1
        );
    }
    out
}

pub fn parse_truth(text: &str) -> Result<Vec<GroundTruth>> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let number = idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let fail = |message: String| Error::TruthFormat {
            line: number,
            message,
        };
        if fields.len() != 5 || fields[0] != "TRUTH" {
            return Err(fail("expected TRUTH <fork> <upstream> <category> <bool>".to_string()));
        }
        let category: MotiveCategory = fields[3]
            .parse()
            .map_err(|_| fail(format!("unknown category `{}`", fields[3])))?;
        let detectable = match fields[4] {
            "true" => true,
            "false" => false,
            other => return Err(fail(format!("expected true or false, found `{other}`"))),
        };
        records.push(GroundTruth {
            fork_url: fields[1].to_string(),
            upstream_url: fields[2].to_string(),
            category,
            detectable_at_depth_1: detectable,
        });
    }
    Ok(records)
}

/// Detection quality against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallReport {
    /// Detected ground-truth forks over all ground-truth forks. 1.0 for an
    /// empty truth set.
    pub recall: f64,
    pub per_category_recall: BTreeMap<MotiveCategory, f64>,
    /// Findings whose URL is in no truth record.
    pub false_positives: usize,
}

/// Compare findings (from one or several targets of the same corpus)
/// against truth records. Matching is by fork URL.
pub fn recall_report(truth: &[GroundTruth], findings: &[ForkFinding]) -> RecallReport {
    let truth_urls: std::collections::BTreeSet<&str> =
        truth.iter().map(|t| t.fork_url.as_str()).collect();
    let detected: std::collections::BTreeSet<&str> = findings
        .iter()
        .map(|f| f.fork_url.as_str())
        .filter(|url| truth_urls.contains(url))
        .collect();

    let mut per_category: BTreeMap<MotiveCategory, (usize, usize)> = BTreeMap::new();
    for record in truth {
        let entry = per_category.entry(record.category).or_insert((0, 0));
        entry.1 += 1;
        if detected.contains(record.fork_url.as_str()) {
            entry.0 += 1;
        }
    }

    let recall = if truth.is_empty() {
        1.0
    } else {
        detected.len() as f64 / truth.len() as f64
    };
    RecallReport {
        recall,
        per_category_recall: per_category
            .into_iter()
            .map(|(category, (hit, total))| (category, hit as f64 / total as f64))
            .collect(),
        false_positives: findings
            .iter()
            .filter(|f| !truth_urls.contains(f.fork_url.as_str()))
            .count(),
    }
}

/// Generate a corpus: the forge-export text and one truth record per fork.
/// Byte-identical for identical configs.
pub fn simulate(config: &SimConfig) -> Result<(String, Vec<GroundTruth>)> {
    config.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(config.seed);
    let mut world = World {
        config,
        export: String::from("# synthetic forge export\n"),
        truth: Vec::new(),
    };
    for project in 1..=config.upstream_projects {
        world.generate_project(project as u64, &mut rng);
    }
    Ok((world.export, world.truth))
}

struct World<'a> {
    config: &'a SimConfig,
    export: String,
    truth: Vec<GroundTruth>,
}

/// Everything later fork construction needs to know about an upstream.
struct Upstream {
    project: u64,
    name: String,
    url: String,
    commit_count: u64,
    /// Commit timestamps, 1-based position -> seconds.
    commit_time: Vec<i64>,
    /// Committer account (not the full signature) per 1-based position.
    committer: Vec<String>,
    /// Captured head position per visit, ascending; the last one is the tip.
    visit_positions: Vec<u64>,
    /// Visit dates, parallel to `visit_positions`.
    visit_dates: Vec<i64>,
}

impl Upstream {
    fn captured(&self, position: u64) -> Option<usize> {
        self.visit_positions.iter().position(|&p| p == position)
    }

    /// Is a head at `position` an upstream full-visit head or a direct
    /// child of one?
    fn position_detectable(&self, position: u64) -> bool {
        self.visit_positions.contains(&position)
            || (position >= 2 && self.visit_positions.contains(&(position - 1)))
    }

    /// An early uncaptured position whose parent is also uncaptured, if the
    /// history is long enough to have one.
    fn drift_position(&self) -> Option<u64> {
        let first = self.visit_positions[0];
        (first >= 2).then(|| first - 1)
    }

    fn last_visit_date(&self) -> i64 {
        *self.visit_dates.last().expect("at least one visit")
    }
}

/// One branch head of a generated fork, described structurally so
/// detectability can be recomputed from the graph.
enum Head {
    /// Head at an upstream commit position.
    Upstream(u64),
    /// Head at the end of a divergence chain of the given length.
    Divergent { chain_length: u64 },
}

impl<'a> World<'a> {
    fn line(&mut self, line: String) {
        self.export.push_str(&line);
        self.export.push('\n');
    }

    fn iso(seconds: i64) -> String {
        Timestamp::from_epoch_seconds(seconds)
            .expect("generated timestamps are in range")
            .to_string()
    }

    fn generate_project(&mut self, project: u64, rng: &mut Xoshiro256StarStar) {
        let upstream = self.emit_upstream(project, rng);

        let whole = self.config.fork_rate.floor();
        let mut fork_count = whole as u64;
        if rng.bernoulli(self.config.fork_rate - whole) {
            fork_count += 1;
        }

        for fork in 1..=fork_count {
            self.emit_fork(&upstream, fork, rng);
        }
    }

    fn emit_upstream(&mut self, project: u64, rng: &mut Xoshiro256StarStar) -> Upstream {
        let mean = self.config.revisions_per_project as u64;
        let commit_count = rng.range_inclusive((mean - mean / 2).max(1), mean + mean / 2);

        let name = format!("proj{project}");
        let url = format!("https://{}/org{project}/{name}", self.config.hosts[0]);
        self.line(format!("ORIGIN\to{project}\t{url}"));

        let accounts = [
            format!("dev{project}x0"),
            format!("dev{project}x1"),
            format!("dev{project}x2"),
        ];

        let mut commit_time = vec![0i64; commit_count as usize + 1];
        let mut committer = vec![String::new(); commit_count as usize + 1];
        for position in 1..=commit_count {
            let raw = (position as i64) * SPAN_SECONDS / (commit_count as i64 + 1);
            let time = EPOCH_BASE + raw - raw % GRID_SECONDS;
            commit_time[position as usize] = time;
            let account = rng.pick(&accounts).clone();
            let date = Self::iso(time);
            let parents = if position == 1 {
                "-".to_string()
            } else {
                format!("r{project}_{}", position - 1)
            };
            self.line(format!(
                "REVISION\tr{project}_{position}\t{account} <{account}@example.com>\t{account} <{account}@example.com>\t{date}\t{date}\t{parents}\t{}",
                encode_message(format!("p{project} commit {position}").as_bytes())
            ));
            committer[position as usize] = account;
        }

        // capture positions spaced at least three commits apart so that
        // uncaptured interior commits exist whenever drift needs them
        let visits = if commit_count >= 12 {
            4
        } else if commit_count >= 9 {
            3
        } else if commit_count >= 6 {
            2
        } else {
            1
        };
        let mut visit_positions = Vec::with_capacity(visits as usize);
        let mut visit_dates = Vec::with_capacity(visits as usize);
        for i in 1..=visits {
            let position = i * commit_count / visits;
            let date = commit_time[position as usize] + GRID_SECONDS;
            visit_positions.push(position);
            visit_dates.push(date);
            self.line(format!("SNAPSHOT\ts{project}_{i}"));
            self.line(format!("BRANCH\ts{project}_{i}\tmain\tr{project}_{position}"));
        }
        for (i, date) in visit_dates.iter().enumerate() {
            self.line(format!(
                "VISIT\to{project}\t{}\tfull\ts{project}_{}",
                Self::iso(*date),
                i + 1
            ));
        }

        Upstream {
            project,
            name,
            url,
            commit_count,
            commit_time,
            committer,
            visit_positions,
            visit_dates,
        }
    }

    fn emit_fork(&mut self, upstream: &Upstream, fork: u64, rng: &mut Xoshiro256StarStar) {
        let mut category = self.sample_category(rng);
        let wants_drift = category != MotiveCategory::Mirror
            && rng.bernoulli(self.config.head_drift_probability);
        let drift_position = upstream.drift_position();
        let drifted = wants_drift
            && (category == MotiveCategory::ContinuedDevelopment || drift_position.is_some());

        // an individual copy must freeze inside the early 45% of the corpus
        // window or its inactivity signal cannot hold; fall back to a
        // rename, which needs no timing at all
        if category == MotiveCategory::IndividualCopy {
            let capture = if drifted {
                drift_position.unwrap()
            } else {
                upstream.visit_positions[0]
            };
            let visit_date =
                upstream.commit_time[capture as usize] + 3 * GRID_SECONDS;
            if visit_date - EPOCH_BASE > SPAN_SECONDS * 45 / 100 {
                category = MotiveCategory::Renamed;
            }
        }

        let project = upstream.project;
        let host = rng.pick(&self.config.hosts).clone();
        let label = format!("f{project}_{fork}");

        let mut heads: Vec<Head> = Vec::new();
        match category {
            MotiveCategory::Mirror => {
                let name = &upstream.name;
                let url = format!("https://{host}/user{project}f{fork}/{name}");
                self.line(format!("ORIGIN\t{label}\t{url}"));

                // three flavors of mirror evidence
                let synced_possible = upstream.visit_positions.len() >= 3;
                let kind = rng.below(if synced_possible { 3 } else { 2 });
                let last_date;
                match kind {
                    2 => {
                        // track every upstream visit one grid step behind
                        for (i, date) in upstream.visit_dates.iter().enumerate() {
                            self.line(format!(
                                "VISIT\t{label}\t{}\tfull\ts{project}_{}",
                                Self::iso(date + GRID_SECONDS),
                                i + 1
                            ));
                            heads.push(Head::Upstream(upstream.visit_positions[i]));
                        }
                        self.line(format!(
                            "META\t{label}\tdescription=Automated copy of {}",
                            upstream.url
                        ));
                        last_date = upstream.last_visit_date() + GRID_SECONDS;
                    }
                    flavor => {
                        let first = upstream.last_visit_date() + GRID_SECONDS;
                        let snapshot = upstream.visit_positions.len();
                        self.line(format!(
                            "VISIT\t{label}\t{}\tfull\ts{project}_{snapshot}",
                            Self::iso(first)
                        ));
                        heads.push(Head::Upstream(*upstream.visit_positions.last().unwrap()));
                        let mut date = first;
                        if rng.bernoulli(0.5) {
                            date = first + self.config.visit_cadence_seconds;
                            self.line(format!(
                                "VISIT\t{label}\t{}\tfull\ts{project}_{snapshot}",
                                Self::iso(date)
                            ));
                        }
                        if flavor == 0 {
                            self.line(format!("META\t{label}\tmirror=true"));
                        } else {
                            self.line(format!(
                                "META\t{label}\tdescription=Mirror of {}",
                                upstream.url
                            ));
                        }
                        last_date = date;
                    }
                }
                self.line(format!(
                    "META\t{label}\tlast_activity={}",
                    Self::iso(last_date)
                ));
                self.push_truth(&url, upstream, category, &heads);
            }
            MotiveCategory::ContributorOwned => {
                let capture = if drifted {
                    drift_position.unwrap()
                } else {
                    *upstream.visit_positions.last().unwrap()
                };
                let owner = upstream.committer[capture as usize].clone();
                let name = &upstream.name;
                let url = format!("https://{host}/{owner}-f{fork}/{name}");
                self.line(format!("ORIGIN\t{label}\t{url}"));
                let visit_date = upstream.last_visit_date() + 2 * GRID_SECONDS;
                self.visit_at_position(upstream, &label, fork, capture, visit_date);
                self.line(format!("META\t{label}\towner={owner}"));
                self.line(format!(
                    "META\t{label}\tlast_activity={}",
                    Self::iso(visit_date)
                ));
                heads.push(Head::Upstream(capture));
                self.push_truth(&url, upstream, category, &heads);
            }
            MotiveCategory::Renamed => {
                let capture = if drifted {
                    drift_position.unwrap()
                } else {
                    let which = rng.below(upstream.visit_positions.len() as u64) as usize;
                    upstream.visit_positions[which]
                };
                let url = format!(
                    "https://{host}/user{project}f{fork}/{}-var{fork}",
                    upstream.name
                );
                self.line(format!("ORIGIN\t{label}\t{url}"));
                let visit_date = upstream.last_visit_date() + 2 * GRID_SECONDS;
                self.visit_at_position(upstream, &label, fork, capture, visit_date);
                if rng.bernoulli(0.5) {
                    self.line(format!("META\t{label}\towner=user{project}f{fork}"));
                }
                self.line(format!(
                    "META\t{label}\tlast_activity={}",
                    Self::iso(visit_date)
                ));
                heads.push(Head::Upstream(capture));
                self.push_truth(&url, upstream, category, &heads);
            }
            MotiveCategory::IndividualCopy => {
                let capture = if drifted {
                    drift_position.unwrap()
                } else {
                    upstream.visit_positions[0]
                };
                let name = &upstream.name;
                let url = format!("https://{host}/user{project}f{fork}/{name}");
                self.line(format!("ORIGIN\t{label}\t{url}"));
                let visit_date = upstream.commit_time[capture as usize] + 3 * GRID_SECONDS;
                self.visit_at_position(upstream, &label, fork, capture, visit_date);
                self.line(format!(
                    "META\t{label}\tlast_activity={}",
                    Self::iso(visit_date)
                ));
                heads.push(Head::Upstream(capture));
                self.push_truth(&url, upstream, category, &heads);
            }
            MotiveCategory::ContinuedDevelopment => {
                let tip = upstream.commit_count;
                let (chain_length, keep_upstream_branch) = if drifted {
                    (2 + rng.below(2), false)
                } else if rng.bernoulli(0.5) {
                    (1, false)
                } else {
                    (2 + rng.below(2), true)
                };
                let renamed = rng.bernoulli(0.5);
                let name = if renamed {
                    format!("{}-dev{fork}", upstream.name)
                } else {
                    upstream.name.clone()
                };
                let url = format!("https://{host}/user{project}f{fork}/{name}");
                self.line(format!("ORIGIN\t{label}\t{url}"));

                let account = format!("user{project}f{fork}");
                for step in 1..=chain_length {
                    let time = upstream.commit_time[tip as usize] + step as i64 * GRID_SECONDS;
                    let date = Self::iso(time);
                    let parent = if step == 1 {
                        format!("r{project}_{tip}")
                    } else {
                        format!("d{project}_{fork}_{}", step - 1)
                    };
                    self.line(format!(
                        "REVISION\td{project}_{fork}_{step}\t{account} <{account}@example.com>\t{account} <{account}@example.com>\t{date}\t{date}\t{parent}\t{}",
                        encode_message(
                            format!("p{project} fork{fork} divergent {step}").as_bytes()
                        )
                    ));
                }

                let snapshot_label = format!("fs{project}_{fork}");
                self.line(format!("SNAPSHOT\t{snapshot_label}"));
                self.line(format!(
                    "BRANCH\t{snapshot_label}\tmain\td{project}_{fork}_{chain_length}"
                ));
                if keep_upstream_branch {
                    self.line(format!(
                        "BRANCH\t{snapshot_label}\tupstream\tr{project}_{tip}"
                    ));
                }
                let newest_commit =
                    upstream.commit_time[tip as usize] + chain_length as i64 * GRID_SECONDS;
                let visit_date = newest_commit.max(upstream.last_visit_date()) + GRID_SECONDS;
                self.line(format!(
                    "VISIT\t{label}\t{}\tfull\t{snapshot_label}",
                    Self::iso(visit_date)
                ));
                self.line(format!(
                    "META\t{label}\tlast_activity={}",
                    Self::iso(visit_date)
                ));

                heads.push(Head::Divergent { chain_length });
                if keep_upstream_branch {
                    heads.push(Head::Upstream(tip));
                }
                self.push_truth(&url, upstream, category, &heads);
            }
            MotiveCategory::Unknown => unreachable!("the mix never samples Unknown"),
        }
    }

    /// Emit a single full visit of `label` capturing the upstream commit at
    /// `position`, reusing the upstream snapshot when that exact state was
    /// published, or declaring a fork-local snapshot otherwise.
    fn visit_at_position(
        &mut self,
        upstream: &Upstream,
        label: &str,
        fork: u64,
        position: u64,
        date: i64,
    ) {
        let project = upstream.project;
        let snapshot_label = match upstream.captured(position) {
            Some(i) => format!("s{project}_{}", i + 1),
            None => {
                let snapshot_label = format!("fs{project}_{fork}");
                self.line(format!("SNAPSHOT\t{snapshot_label}"));
                self.line(format!(
                    "BRANCH\t{snapshot_label}\tmain\tr{project}_{position}"
                ));
                snapshot_label
            }
        };
        self.line(format!(
            "VISIT\t{label}\t{}\tfull\t{snapshot_label}",
            Self::iso(date)
        ));
    }

    fn sample_category(&self, rng: &mut Xoshiro256StarStar) -> MotiveCategory {
        let draw = rng.f64_unit();
        let mut cumulative = 0.0;
        for (weight, category) in self.config.category_mix.iter().zip(MIX_ORDER) {
            cumulative += weight;
            if draw < cumulative {
                return category;
            }
        }
        MIX_ORDER[4]
    }

    fn push_truth(
        &mut self,
        fork_url: &str,
        upstream: &Upstream,
        category: MotiveCategory,
        heads: &[Head],
    ) {
        let detectable = heads.iter().any(|head| match head {
            Head::Upstream(position) => upstream.position_detectable(*position),
            // the first divergent commit is a direct child of the captured
            // tip; anything longer ends outside the depth-1 set
            Head::Divergent { chain_length } => *chain_length == 1,
        });
        self.truth.push(GroundTruth {
            fork_url: fork_url.to_string(),
            upstream_url: upstream.url.clone(),
            category,
            detectable_at_depth_1: detectable,
        });
    }
}
