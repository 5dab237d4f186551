//! `crossfork` — fork detection pipeline over a deduplicated archive store.
//!
//! Subcommands compose into a pipeline:
//!
//! ```text
//! crossfork simulate --seed 1 --out-export corpus.txt --out-truth truth.txt
//! crossfork ingest   --input corpus.txt --store store/
//! crossfork detect   --store store/ --target URL --mode interval > findings.jsonl
//! crossfork classify --store store/ --target URL --findings findings.jsonl
//! crossfork bench    --store store/ --targets targets.txt --repeat 5
//! ```
//!
//! Exit codes: 0 success, 2 input error (malformed files, bad config),
//! 3 reference error (unknown URLs or labels), 4 oracle mismatch.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crossfork::classify::{ClassifiedRecord, DEFAULT_MIRROR_LAG_SECONDS};
use crossfork::detect::{self, CommitScope, FindingRecord, ForkFinding, ScopeMode};
use crossfork::export;
use crossfork::sim::{self, SimConfig};
use crossfork::{
    classify, ArchiveStore, ClassifyConfig, DetectionReport, Diagnostic, DiagnosticKind, Error,
    Timestamp,
};

const EXIT_INPUT: u8 = 2;
const EXIT_REFERENCE: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "crossfork", version, about = "Cross-platform fork detection over a deduplicated archive store")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a forge-export file into a store directory
    Ingest {
        /// Forge-export text file
        #[arg(long)]
        input: PathBuf,
        /// Store directory (created or extended)
        #[arg(long)]
        store: PathBuf,
    },
    /// Detect forks of a target URL
    Detect {
        #[arg(long)]
        store: PathBuf,
        /// Target origin URL
        #[arg(long)]
        target: String,
        /// Commit base: interval (full-visit branch heads) or all-commits
        #[arg(long, default_value = "interval")]
        mode: String,
        /// How many one-hop child expansions to apply to the base
        #[arg(long, default_value_t = 1)]
        child_depth: u32,
        /// Only emit findings hosted away from the target
        #[arg(long)]
        cross_platform_only: bool,
        /// With --cross-platform-only: filter by literal URL prefix instead
        /// of normalized host
        #[arg(long)]
        strict_prefix: bool,
        /// Cross-check against the brute-force oracle; mismatch exits 4
        #[arg(long)]
        oracle: bool,
        /// Write findings here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads for the origin scan (output is identical for any
        /// count)
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Assign motive categories to detected forks
    Classify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        target: String,
        /// Findings file produced by detect (JSON lines)
        #[arg(long)]
        findings: PathBuf,
        /// Reference time (ISO-8601 UTC); defaults to the system clock
        #[arg(long)]
        now: Option<String>,
        /// Inactivity threshold for the individual-copy category
        #[arg(long, default_value_t = 365)]
        inactivity_days: i64,
        /// Median sync-lag threshold for the mirror category
        #[arg(long, default_value_t = DEFAULT_MIRROR_LAG_SECONDS / 60)]
        mirror_lag_minutes: i64,
    },
    /// Generate a synthetic corpus with ground-truth labels
    Simulate {
        /// Seed overriding the config file
        #[arg(long)]
        seed: Option<u64>,
        /// JSON config; omitted fields take defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the forge-export text
        #[arg(long)]
        out_export: PathBuf,
        /// Where to write the TRUTH records
        #[arg(long)]
        out_truth: PathBuf,
    },
    /// Time detection over a list of targets (TSV on standard output)
    Bench {
        #[arg(long)]
        store: PathBuf,
        /// File with one target URL per line (# comments allowed)
        #[arg(long)]
        targets: PathBuf,
        /// Detection runs per target; the median is reported
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Failure {
        let code = match &error {
            Error::Rejected(diagnostics) => rejection_code(diagnostics),
            Error::UnknownOriginUrl(_) | Error::UnknownOrigin(_) => EXIT_REFERENCE,
            Error::InvalidConfig(_)
            | Error::InvalidJson(_)
            | Error::InvalidUrl { .. }
            | Error::InvalidTimestamp(_)
            | Error::InvalidDigest(_)
            | Error::Corrupt(_)
            | Error::TruthFormat { .. } => EXIT_INPUT,
            _ => 1,
        };
        Failure::new(code, error.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(error: io::Error) -> Failure {
        Failure::new(1, error.to_string())
    }
}

fn rejection_code(diagnostics: &[Diagnostic]) -> u8 {
    if diagnostics.iter().any(|d| d.kind == DiagnosticKind::Syntax) {
        EXIT_INPUT
    } else {
        EXIT_REFERENCE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("crossfork: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest { input, store } => cmd_ingest(&input, &store),
        Command::Detect {
            store,
            target,
            mode,
            child_depth,
            cross_platform_only,
            strict_prefix,
            oracle,
            output,
            threads,
        } => cmd_detect(
            &store,
            &target,
            &mode,
            child_depth,
            cross_platform_only,
            strict_prefix,
            oracle,
            output.as_deref(),
            threads,
        ),
        Command::Classify {
            store,
            target,
            findings,
            now,
            inactivity_days,
            mirror_lag_minutes,
        } => cmd_classify(
            &store,
            &target,
            &findings,
            now.as_deref(),
            inactivity_days,
            mirror_lag_minutes,
        ),
        Command::Simulate {
            seed,
            config,
            out_export,
            out_truth,
        } => cmd_simulate(seed, config.as_deref(), &out_export, &out_truth),
        Command::Bench {
            store,
            targets,
            repeat,
        } => cmd_bench(&store, &targets, repeat),
    }
}

fn open_store(dir: &std::path::Path) -> Result<ArchiveStore, Failure> {
    Ok(ArchiveStore::open(dir)?)
}

fn cmd_ingest(input: &std::path::Path, store_dir: &std::path::Path) -> Result<(), Failure> {
    let bytes = fs::read(input)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", input.display())))?;
    let mut store = if store_dir.join("MANIFEST").exists() {
        open_store(store_dir)?
    } else {
        ArchiveStore::new()
    };
    match export::ingest(&mut store, &bytes) {
        Ok(summary) => {
            store.save(store_dir)?;
            let line = serde_json::to_string(&summary)
                .map_err(|e| Failure::new(1, e.to_string()))?;
            println!("{line}");
            Ok(())
        }
        Err(Error::Rejected(diagnostics)) => {
            for diagnostic in &diagnostics {
                eprintln!("{}: {diagnostic}", input.display());
            }
            Err(Failure::new(
                rejection_code(&diagnostics),
                format!("{} rejected, store unchanged", input.display()),
            ))
        }
        Err(other) => Err(other.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_detect(
    store_dir: &std::path::Path,
    target: &str,
    mode: &str,
    child_depth: u32,
    cross_platform_only: bool,
    strict_prefix: bool,
    oracle: bool,
    output: Option<&std::path::Path>,
    threads: usize,
) -> Result<(), Failure> {
    let store = open_store(store_dir)?;
    let scope = CommitScope {
        mode: mode.parse::<ScopeMode>()?,
        child_depth,
    };

    let started = Instant::now();
    let findings = detect::detect_forks_parallel(&store, target, &scope, threads)?;
    let elapsed_ms = started.elapsed().as_millis() as u64;

    if oracle {
        let reference = detect::oracle::oracle_detect(&store, target, &scope)?;
        if reference != findings {
            return Err(Failure::new(
                EXIT_ORACLE,
                format!(
                    "oracle mismatch for {target}: optimized found {} fork(s), oracle found {}",
                    findings.len(),
                    reference.len()
                ),
            ));
        }
    }

    let report = DetectionReport::new(&store, target, &scope, &findings, elapsed_ms);
    let emitted = if cross_platform_only {
        detect::cross_platform_filter(findings, target, strict_prefix)
    } else {
        findings
    };

    match output {
        Some(path) => {
            let mut file = BufWriter::new(fs::File::create(path)?);
            write_findings(&mut file, &emitted)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = BufWriter::new(stdout.lock());
            write_findings(&mut lock, &emitted)?;
            lock.flush()?;
        }
    }
    println!("{}", report.to_json());
    Ok(())
}

fn write_findings(out: &mut impl Write, findings: &[ForkFinding]) -> Result<(), Failure> {
    for finding in findings {
        writeln!(out, "{}", FindingRecord::from(finding).to_json_line())?;
    }
    Ok(())
}

fn cmd_classify(
    store_dir: &std::path::Path,
    target: &str,
    findings_path: &std::path::Path,
    now: Option<&str>,
    inactivity_days: i64,
    mirror_lag_minutes: i64,
) -> Result<(), Failure> {
    let store = open_store(store_dir)?;
    let target_origin = store
        .origin_by_url(target)
        .ok_or_else(|| Error::UnknownOriginUrl(target.to_string()))?
        .id;

    let now = match now {
        Some(text) => text
            .parse::<Timestamp>()
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?,
        None => system_now()?,
    };
    let config = ClassifyConfig {
        now,
        mirror_lag_seconds: mirror_lag_minutes * 60,
        inactivity_seconds: inactivity_days * 24 * 3600,
    };

    let text = fs::read_to_string(findings_path).map_err(|e| {
        Failure::new(
            EXIT_INPUT,
            format!("cannot read {}: {e}", findings_path.display()),
        )
    })?;

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut histogram: std::collections::BTreeMap<crossfork::MotiveCategory, u64> =
        crossfork::MotiveCategory::ALL.iter().map(|&c| (c, 0)).collect();

    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let record = FindingRecord::from_json_line(line)?;
        let fork_origin = store
            .origin_by_url(&record.fork_url)
            .ok_or_else(|| {
                Failure::new(
                    EXIT_REFERENCE,
                    format!("findings/store mismatch: unknown fork URL {}", record.fork_url),
                )
            })?
            .id;
        let finding = ForkFinding {
            fork_origin,
            fork_url: record.fork_url,
            matched_heads: record.matched_heads.into_iter().collect(),
            cross_platform: record.cross_platform,
        };
        let classified = classify(&store, &finding, target_origin, &config)?;
        *histogram.entry(classified.category).or_insert(0) += 1;
        writeln!(out, "{}", ClassifiedRecord::from(&classified).to_json_line())?;
    }
    out.flush()?;

    let histogram: std::collections::BTreeMap<String, u64> = histogram
        .into_iter()
        .map(|(category, count)| (category.token().to_string(), count))
        .collect();
    let line =
        serde_json::to_string(&histogram).map_err(|e| Failure::new(1, e.to_string()))?;
    println!("{line}");
    Ok(())
}

fn system_now() -> Result<Timestamp, Failure> {
    let seconds = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_err(|e| Failure::new(1, e.to_string()))?
        .as_secs() as i64;
    Ok(Timestamp::from_epoch_seconds(seconds)?)
}

fn cmd_simulate(
    seed: Option<u64>,
    config_path: Option<&std::path::Path>,
    out_export: &std::path::Path,
    out_truth: &std::path::Path,
) -> Result<(), Failure> {
    let mut config = match config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display()))
            })?;
            SimConfig::from_json_str(&text)?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let (export_text, truth) = sim::simulate(&config)?;
    fs::write(out_export, export_text)?;
    fs::write(out_truth, sim::write_truth(&truth))?;
    Ok(())
}

fn cmd_bench(
    store_dir: &std::path::Path,
    targets_path: &std::path::Path,
    repeat: usize,
) -> Result<(), Failure> {
    let store = open_store(store_dir)?;
    let text = fs::read_to_string(targets_path).map_err(|e| {
        Failure::new(
            EXIT_INPUT,
            format!("cannot read {}: {e}", targets_path.display()),
        )
    })?;
    let repeat = repeat.max(1);
    let scope = CommitScope::default();

    println!("target\tforks\tcross_platform\tmedian_ms");
    for line in text.lines() {
        let target = line.trim();
        if target.is_empty() || target.starts_with('#') {
            continue;
        }
        let mut timings = Vec::with_capacity(repeat);
        let mut last = Vec::new();
        for _ in 0..repeat {
            let started = Instant::now();
            last = detect::detect_forks(&store, target, &scope)?;
            timings.push(started.elapsed().as_millis() as u64);
        }
        timings.sort_unstable();
        let median = timings[(timings.len() - 1) / 2];
        let cross = last.iter().filter(|f| f.cross_platform).count();
        println!("{target}\t{}\t{cross}\t{median}", last.len());
    }
    Ok(())
}
