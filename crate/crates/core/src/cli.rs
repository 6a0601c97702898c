//! Command-line front end: `anonymize`, `ingest`, `bench`, `report`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clump::{self, ClumpConfig};
use crate::error::{AnonymizeError, OracleError};
use crate::lcg::{buig_lcg, ItemBag};
use crate::metrics::{build_report, csv_row, write_report, RunInfo, CSV_HEADER};
use crate::oracle::{brute_force_lcg, is_common_generalization};
use crate::par::{map_slice, with_threads, Parallelism};
use crate::partition::partition_anonymize;
use crate::release::{verify_k_anonymity, AnonymizedDb};
use crate::synth::{generate_transactions, SyntheticWorkload};
use crate::taxonomy::{generate_synthetic, SyntheticTaxonomy, TaxonomyTree};
use crate::translog::{
    ingest_query_log, parse_transactions, IngestOptions, ParseOptions, Transaction, TransactionDb,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Validation(_) => 5,
        }
    }
}

impl From<AnonymizeError> for CliError {
    fn from(e: AnonymizeError) -> Self {
        match e {
            AnonymizeError::KExceedsDatabase { .. } | AnonymizeError::InvalidConfig(_) => {
                CliError::Config(e.to_string())
            }
            AnonymizeError::Lcg(_) => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "txanon", version, about = "k-anonymize transaction data over an item taxonomy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads; results are identical for any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anonymize a transaction file.
    Anonymize(AnonymizeArgs),
    /// Convert a query log into a transaction file.
    Ingest(IngestArgs),
    /// Sweep database size, k and r; emit one CSV row per run.
    Bench(BenchArgs),
    /// Recompute the report for an existing release and audit map.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Clump,
    Partition,
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Public release; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Clump)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    /// Remove repeated items from each released transaction.
    #[arg(long)]
    pub dedup_output: bool,
    /// Cross-check up to 100 sampled groups against the brute-force oracle.
    #[arg(long)]
    pub validate: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the private tid-to-group map here. Never part of the public release.
    #[arg(long)]
    pub audit_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Ingestion statistics (JSON); stderr when omitted.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// One transaction per query row instead of one per AnonID.
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long)]
    pub keep_duplicates: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Taxonomy file; a synthetic tree is generated when omitted.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Transaction file whose prefixes are swept; synthetic when omitted.
    #[arg(long, requires = "taxonomy")]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub rs: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "clump")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long)]
    pub dedup_output: bool,
    #[arg(long, default_value_t = 2_000)]
    pub leaves: u32,
    #[arg(long, default_value_t = 2)]
    pub branching_min: u32,
    #[arg(long, default_value_t = 6)]
    pub branching_max: u32,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[arg(long, default_value_t = 5)]
    pub mean_len: usize,
    #[arg(long, default_value_t = 0.8)]
    pub locality: f64,
    /// Zipf exponent of item popularity; 0 is uniform.
    #[arg(long, default_value_t = 1.0)]
    pub skew: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable the data-parallel paths.
    #[arg(long)]
    pub sequential: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// The original transaction file.
    #[arg(long)]
    pub input: PathBuf,
    /// The public release.
    #[arg(long)]
    pub anonymized: PathBuf,
    #[arg(long)]
    pub audit_map: PathBuf,
    #[arg(long, default_value = "clump")]
    pub algorithm: String,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn load_taxonomy(path: &Path) -> Result<TaxonomyTree, CliError> {
    TaxonomyTree::load(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_transactions(path: &Path, taxonomy: &TaxonomyTree) -> Result<TransactionDb, CliError> {
    let (db, stats) = parse_transactions(&read(path)?, taxonomy, ParseOptions::default())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if stats.dropped_items > 0 || stats.dropped_empty_transactions > 0 {
        eprintln!(
            "warning: dropped {} unknown items and {} empty transactions from {}",
            stats.dropped_items,
            stats.dropped_empty_transactions,
            path.display()
        );
    }
    Ok(db)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    with_threads(cli.threads, move || match cli.command {
        Command::Anonymize(a) => run_anonymize(&a),
        Command::Ingest(a) => run_ingest(&a),
        Command::Bench(a) => run_bench(&a),
        Command::Report(a) => run_report(&a),
    })
}

/// Runs one algorithm and returns the release plus its wall time.
fn anonymize_with(
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    algorithm: Algorithm,
    cfg: &ClumpConfig,
) -> Result<(AnonymizedDb, std::time::Duration), CliError> {
    let start = Instant::now();
    let out = match algorithm {
        Algorithm::Clump => clump::run(db, taxonomy, cfg)?,
        Algorithm::Partition => partition_anonymize(db, taxonomy, cfg.k, cfg.parallelism)?,
    };
    Ok((out, start.elapsed()))
}

fn algorithm_name(algorithm: Algorithm, dedup: bool) -> &'static str {
    match (algorithm, dedup) {
        (Algorithm::Clump, false) => "clump1",
        (Algorithm::Clump, true) => "clump2",
        (Algorithm::Partition, _) => "partition",
    }
}

pub fn run_anonymize(args: &AnonymizeArgs) -> Result<(), CliError> {
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let db = load_transactions(&args.input, &taxonomy)?;
    let cfg = ClumpConfig {
        k: args.k,
        r: args.r,
        dedup_output: args.dedup_output,
        parallelism: Parallelism::Parallel,
    };
    cfg.validate()?;
    let (out, runtime) = anonymize_with(&db, &taxonomy, args.algorithm, &cfg)?;

    if args.validate {
        let exact_lcg = args.algorithm == Algorithm::Clump && !args.dedup_output;
        let summary = validate_release(&out, &db, &taxonomy, args.k, exact_lcg, args.seed)
            .map_err(CliError::Validation)?;
        eprintln!(
            "validation: {} groups checked, {} against the brute-force LCG",
            summary.checked, summary.brute_forced
        );
    }

    emit(args.output.as_deref(), &out.write_public(&taxonomy))?;
    if let Some(path) = &args.report {
        let run = RunInfo {
            algorithm: algorithm_name(args.algorithm, args.dedup_output).to_string(),
            k: args.k,
            r: (args.algorithm == Algorithm::Clump).then_some(args.r),
            runtime,
        };
        let report = build_report(&out, &db, &taxonomy, &run, Parallelism::Parallel);
        emit(Some(path), &write_report(&report))?;
    }
    if let Some(path) = &args.audit_map {
        emit(Some(path), &out.write_audit_map(&db))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationSummary {
    pub checked: usize,
    pub brute_forced: usize,
}

/// Checks k-anonymity of the whole release, then up to 100 groups sampled
/// with `seed`: each released transaction must generalize every member and,
/// when `exact_lcg` is set, equal the members' LCG both as recomputed and as
/// found by exhaustive search (where that search fits the guard).
pub fn validate_release(
    out: &AnonymizedDb,
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    k: usize,
    exact_lcg: bool,
    seed: u64,
) -> Result<ValidationSummary, String> {
    let check = verify_k_anonymity(out, k);
    if !check.ok {
        return Err(format!("{} released transactions occur fewer than {k} times", check.violations.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, out.len(), out.len().min(100)).into_vec();
    picked.sort_unstable();

    let results = map_slice(Parallelism::Parallel, &picked, |&gi| -> Result<bool, String> {
        let g = &out.groups()[gi];
        let members: Vec<&Transaction> = g.members.iter().map(|&i| db.get(i)).collect();
        if !is_common_generalization(taxonomy, g.generalized.items(), &members) {
            return Err(format!("group {gi} is not generalized by its released transaction"));
        }
        if !exact_lcg {
            return Ok(false);
        }
        let lcg = buig_lcg(taxonomy, &members).map_err(|e| e.to_string())?;
        if lcg != g.generalized {
            return Err(format!("group {gi}: released transaction differs from the recomputed LCG"));
        }
        match brute_force_lcg(taxonomy, &members) {
            Ok(b) if b == lcg => Ok(true),
            Ok(_) => Err(format!("group {gi}: LCG disagrees with exhaustive search")),
            Err(OracleError::GuardExceeded(_)) => Ok(false),
            Err(e) => Err(format!("group {gi}: {e}")),
        }
    });
    let mut summary = ValidationSummary {
        checked: 0,
        brute_forced: 0,
    };
    for r in results {
        summary.checked += 1;
        summary.brute_forced += usize::from(r?);
    }
    Ok(summary)
}

pub fn run_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let options = IngestOptions {
        merge_by_user: !args.no_merge,
        dedup_items: !args.keep_duplicates,
    };
    let (db, stats) = ingest_query_log(&read(&args.input)?, &taxonomy, options, Parallelism::Parallel)
        .map_err(|e| CliError::Data(e.to_string()))?;
    emit(Some(&args.output), &db.write(&taxonomy))?;
    let mut doc = serde_json::to_string_pretty(&stats).expect("stats serialize");
    doc.push('\n');
    match &args.stats {
        Some(p) => emit(Some(p), &doc),
        None => {
            eprint!("{doc}");
            Ok(())
        }
    }
}

pub fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.sizes.is_empty() || args.ks.is_empty() || args.rs.is_empty() || args.algorithms.is_empty() {
        return Err(CliError::Config("empty sweep".into()));
    }
    let max_size = *args.sizes.iter().max().unwrap();
    let taxonomy = match &args.taxonomy {
        Some(p) => load_taxonomy(p)?,
        None => generate_synthetic(&SyntheticTaxonomy {
            leaf_target: args.leaves,
            branching: (args.branching_min, args.branching_max),
            depth_target: args.depth,
            seed: args.seed,
        })
        .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let base = match &args.input {
        Some(p) => load_transactions(p, &taxonomy)?,
        None => generate_transactions(
            &taxonomy,
            &SyntheticWorkload {
                transactions: max_size,
                mean_len: args.mean_len,
                locality: args.locality,
                topic_lift: 2,
                popularity_skew: args.skew,
                seed: args.seed,
            },
        ),
    };
    if max_size > base.len() {
        return Err(CliError::Config(format!(
            "sweep asks for {max_size} transactions but only {} are available",
            base.len()
        )));
    }
    let parallelism = if args.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for &size in &args.sizes {
        let db = base.truncated(size);
        for &k in &args.ks {
            for &algorithm in &args.algorithms {
                let rs: &[usize] = if algorithm == Algorithm::Clump { &args.rs } else { &args.rs[..1] };
                for &r in rs {
                    let cfg = ClumpConfig {
                        k,
                        r,
                        dedup_output: args.dedup_output,
                        parallelism,
                    };
                    cfg.validate()?;
                    let (out, runtime) = anonymize_with(&db, &taxonomy, algorithm, &cfg)?;
                    let run = RunInfo {
                        algorithm: algorithm_name(algorithm, args.dedup_output).to_string(),
                        k,
                        r: (algorithm == Algorithm::Clump).then_some(r),
                        runtime,
                    };
                    csv.push_str(&csv_row(&build_report(&out, &db, &taxonomy, &run, parallelism)));
                    csv.push('\n');
                }
            }
        }
    }
    emit(args.output.as_deref(), &csv)
}

pub fn run_report(args: &ReportArgs) -> Result<(), CliError> {
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let db = load_transactions(&args.input, &taxonomy)?;
    let out = AnonymizedDb::from_release(&read(&args.anonymized)?, &read(&args.audit_map)?, &db, &taxonomy)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let run = RunInfo {
        algorithm: args.algorithm.clone(),
        k: args.k,
        r: args.r,
        runtime: std::time::Duration::ZERO,
    };
    let report = build_report(&out, &db, &taxonomy, &run, Parallelism::Parallel);
    emit(args.output.as_deref(), &write_report(&report))
}
