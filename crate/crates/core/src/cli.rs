//! Command-line front end.
//!
//! Exit codes: `0` success, `2` input or configuration error, `3` degenerate
//! data (all points identical, or no cluster with more than one point).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{generate_synthetic, load_dataset, write_dataset, CorpusManifest, Delimiter, LoadOptions, SyntheticSpec};
use crate::error::Error;
use crate::evaluate::{corpus_accuracy, evaluate, OutlierPolicy};
use crate::merge::ClusterCount;
use crate::pipeline::{self, PipelineConfig, Prepared, RunStatus};
use crate::preprocess::DEFAULT_BINS;
use crate::report::{
    BenchDoc, BenchRow, ClusterDoc, EntryStatus, EvaluateDoc, HistogramDoc, RunSummary, ScoresView, SweepDoc,
    SweepPoint, SweepRow, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pfclust", version, about = "Parameter-free affinity-threshold clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset.
    Cluster(ClusterArgs),
    /// Cluster one labelled dataset and score it against its labels.
    Evaluate(EvaluateArgs),
    /// Dump the affinity histogram and chosen threshold.
    Histogram(DatasetArgs),
    /// Re-run a corpus over a range of histogram bin counts.
    SweepBins(SweepArgs),
    /// Cluster and score every dataset of a corpus manifest.
    Bench(BenchArgs),
    /// Write a seeded synthetic blob dataset (labels in the last column).
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// comma, semicolon, tab or whitespace; detected when omitted.
    #[arg(long)]
    pub delimiter: Option<Delimiter>,
    /// 1-based column holding ground-truth labels.
    #[arg(long = "label-col")]
    pub label_col: Option<usize>,
    /// Skip the first data line.
    #[arg(long)]
    pub header: bool,
    /// Label value marking ground-truth noise.
    #[arg(long = "noise-label")]
    pub noise_label: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BINS, value_parser = parse_bins)]
    pub bins: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl DatasetArgs {
    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: self.delimiter,
            label_column: self.label_col,
            has_header: self.header,
            noise_label: self.noise_label.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// Include per-stage timings (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[arg(long = "outlier-policy", default_value = "singletons")]
    pub outlier_policy: OutlierPolicy,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS, value_parser = parse_bins)]
    pub bins: usize,
    #[arg(long = "outlier-policy", default_value = "singletons")]
    pub outlier_policy: OutlierPolicy,
    /// Include per-stage and total timings (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Bin counts: `lo-hi`, a comma list, or a single value.
    #[arg(long = "bin-range", default_value = "2-30", value_parser = parse_bin_range)]
    pub bin_range: BinRange,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub clusters: usize,
    /// Points per cluster: one value or a comma list with one per cluster.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub points: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Minimum centre distance in spread units.
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    /// Per-cluster standard deviation: one value or one per cluster.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub spread: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinRange(pub Vec<usize>);

fn parse_bins(s: &str) -> Result<usize, String> {
    let b: usize = s.parse().map_err(|_| format!("`{s}` is not a bin count"))?;
    if b < 2 {
        return Err("bins must be at least 2".into());
    }
    Ok(b)
}

fn parse_bin_range(s: &str) -> Result<BinRange, String> {
    let bins: Vec<usize> = if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi) = (parse_bins(lo.trim())?, parse_bins(hi.trim())?);
        if lo > hi {
            return Err(format!("empty bin range {s}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(|b| parse_bins(b.trim())).collect::<Result<_, _>>()?
    };
    Ok(BinRange(bins))
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) => EXIT_DEGENERATE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn emit(out: &OutputArgs, json: impl FnOnce() -> String, csv: impl FnOnce() -> String) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => {
            let mut s = json();
            s.push('\n');
            s
        }
        Format::Csv => csv(),
    };
    write_text(out.output.as_deref(), &text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::input(format!("cannot write output: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report types serialize")
}

fn degenerate_exit(status: RunStatus, name: &str) -> Result<i32, Failure> {
    match status {
        RunStatus::Ok => Ok(EXIT_OK),
        RunStatus::Degenerate => {
            eprintln!("pfclust: {name}: degenerate input, no cluster structure found");
            Ok(EXIT_DEGENERATE)
        }
    }
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<i32, Failure> {
    let ds = load_dataset(&args.dataset.input, &args.dataset.load_options())?;
    let result = pipeline::run(&ds, &PipelineConfig { bins: args.dataset.bins })?;
    let doc = ClusterDoc::new(&result, args.timings);
    emit(&args.dataset.out, || to_json(&doc), || doc.to_csv())?;
    degenerate_exit(result.status, ds.name())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32, Failure> {
    let opts = args.dataset.load_options();
    if opts.label_column.is_none() {
        return Err(Failure::input("evaluate needs ground-truth labels (--label-col)"));
    }
    let ds = load_dataset(&args.dataset.input, &opts)?;
    let truth = ds.labels().expect("label column requested");
    let truth_k = ds.truth_k().unwrap_or(0);
    let result = pipeline::run(&ds, &PipelineConfig { bins: args.dataset.bins })?;
    let report = evaluate(&result.assignment, truth, result.final_count, truth_k, args.outlier_policy)?;
    let doc = EvaluateDoc {
        schema_version: SCHEMA_VERSION,
        dataset: ds.name().to_string(),
        scores: ScoresView::new(&report, args.outlier_policy),
        run: (&result).into(),
    };
    emit(&args.dataset.out, || to_json(&doc), || doc.to_csv())?;
    degenerate_exit(result.status, ds.name())
}

pub fn cmd_histogram(args: &DatasetArgs) -> Result<i32, Failure> {
    let ds = load_dataset(&args.input, &args.load_options())?;
    let report = pipeline::histogram(&ds, args.bins)?;
    let doc = HistogramDoc::from(&report);
    emit(&args.out, || to_json(&doc), || doc.to_csv())?;
    Ok(EXIT_OK)
}

fn load_manifest(path: &Path) -> Result<CorpusManifest, Failure> {
    let manifest = CorpusManifest::load(path)?;
    if manifest.is_empty() {
        return Err(Failure::input(format!("{}: manifest lists no datasets", path.display())));
    }
    Ok(manifest)
}

/// Run a corpus benchmark. Missing files are skipped; load and run failures
/// become error rows that count as misses.
pub fn bench(manifest: &CorpusManifest, bins: usize, policy: OutlierPolicy, timings: bool) -> BenchDoc {
    let started = Instant::now();
    let config = PipelineConfig { bins };
    let mut rows = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let mut row = BenchRow {
            dataset: entry.name.clone(),
            status: EntryStatus::Skipped,
            message: None,
            truth_k: entry.truth_k,
            predicted_k: None,
            exact_match: false,
            run: None,
            scores: None,
            timings: None,
        };
        if !entry.is_available() {
            row.message = Some(format!("{} not found", entry.path.display()));
            rows.push(row);
            continue;
        }
        let outcome = load_dataset(&entry.path, &entry.load_options()).and_then(|ds| {
            let result = pipeline::run(&ds, &config)?;
            let scores = match ds.labels() {
                Some(truth) => Some(evaluate(&result.assignment, truth, result.final_count, entry.truth_k, policy)?),
                None => None,
            };
            Ok((result, scores))
        });
        match outcome {
            Ok((result, scores)) => {
                row.status = match result.status {
                    RunStatus::Ok => EntryStatus::Ok,
                    RunStatus::Degenerate => EntryStatus::Degenerate,
                };
                row.predicted_k = Some(result.final_count);
                row.exact_match = result.final_count == ClusterCount::Count(entry.truth_k);
                row.run = Some(RunSummary::from(&result));
                row.scores = scores.map(|s| ScoresView::new(&s, policy));
                row.timings = timings.then(|| (&result.timings).into());
            }
            Err(e) => {
                row.status = EntryStatus::Error;
                row.message = Some(e.to_string());
            }
        }
        rows.push(row);
    }
    let attempted: Vec<&BenchRow> = rows.iter().filter(|r| r.status != EntryStatus::Skipped).collect();
    let matches = attempted.iter().filter(|r| r.exact_match).count();
    let accuracy = corpus_accuracy(attempted.iter().map(|r| r.exact_match)).ok();
    BenchDoc {
        schema_version: SCHEMA_VERSION,
        bins,
        outlier_policy: policy,
        evaluated: attempted.len(),
        matches,
        accuracy,
        datasets: rows,
        wall_time_ms: timings.then(|| started.elapsed().as_secs_f64() * 1e3),
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32, Failure> {
    let manifest = load_manifest(&args.manifest)?;
    let doc = bench(&manifest, args.bins, args.outlier_policy, args.timings);
    emit(&args.out, || to_json(&doc), || doc.to_csv())?;
    Ok(EXIT_OK)
}

/// Sweep bin counts over a corpus. Each dataset's affinity matrix is built
/// once and re-binned for every count.
pub fn sweep_bins(manifest: &CorpusManifest, bins: &[usize]) -> SweepDoc {
    let mut skipped = Vec::new();
    let mut rows = Vec::new();
    for (idx, entry) in manifest.entries.iter().enumerate() {
        if !entry.is_available() {
            skipped.push(entry.name.clone());
            continue;
        }
        let ds = match load_dataset(&entry.path, &entry.load_options()) {
            Ok(ds) => ds,
            Err(e) => {
                eprintln!("pfclust: {}: {e}", entry.name);
                skipped.push(entry.name.clone());
                continue;
            }
        };
        let mut prepared = Prepared::new(&ds);
        for &b in bins {
            let predicted = prepared.run(&PipelineConfig { bins: b }).ok().map(|r| r.final_count);
            rows.push((
                b,
                idx,
                SweepRow {
                    bins: b,
                    dataset: entry.name.clone(),
                    predicted_k: predicted,
                    truth_k: entry.truth_k,
                    exact_match: predicted == Some(ClusterCount::Count(entry.truth_k)),
                },
            ));
        }
    }
    rows.sort_by_key(|(b, idx, _)| (*b, *idx));
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, _, r)| r).collect();
    let curve = bins
        .iter()
        .filter_map(|&b| {
            let at: Vec<&SweepRow> = rows.iter().filter(|r| r.bins == b).collect();
            let accuracy = corpus_accuracy(at.iter().map(|r| r.exact_match)).ok()?;
            Some(SweepPoint {
                bins: b,
                evaluated: at.len(),
                matches: at.iter().filter(|r| r.exact_match).count(),
                accuracy,
            })
        })
        .collect();
    SweepDoc {
        schema_version: SCHEMA_VERSION,
        skipped,
        rows,
        curve,
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32, Failure> {
    let manifest = load_manifest(&args.manifest)?;
    let doc = sweep_bins(&manifest, &args.bin_range.0);
    emit(&args.out, || to_json(&doc), || doc.to_csv())?;
    Ok(EXIT_OK)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32, Failure> {
    let spec = SyntheticSpec {
        cluster_count: args.clusters,
        points_per_cluster: args.points.clone(),
        dimension: args.dim,
        center_separation: args.separation,
        spreads: args.spread.clone(),
        noise_fraction: args.noise,
        seed: args.seed,
    };
    let ds = generate_synthetic(&spec)?;
    let mut buf = Vec::new();
    write_dataset(&ds, &mut buf).map_err(|e| Failure::input(e.to_string()))?;
    write_text(args.output.as_deref(), std::str::from_utf8(&buf).expect("ascii output"))?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Histogram(a) => cmd_histogram(a),
        Command::SweepBins(a) => cmd_sweep(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("pfclust: {}", f.message);
            f.code
        }
    }
}
