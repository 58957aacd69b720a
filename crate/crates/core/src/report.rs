//! Serializable views of run, evaluation, histogram, bench and sweep results.
//!
//! Floats are written with exactly six decimals in both JSON and CSV. Every
//! document carries `schema_version`.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::evaluate::{EvalReport, OutlierPolicy, PairCountTable};
use crate::merge::ClusterCount;
use crate::pipeline::{HistogramReport, RunResult, RunStatus, StageTimings};

pub const SCHEMA_VERSION: u32 = 1;

/// `x` with six decimals; non-finite values become `nan`/`inf` in text form.
pub fn fixed6(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.6}");
        if s == "-0.000000" {
            "0.000000".into()
        } else {
            s
        }
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn ser_f6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(fixed6(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn ser_opt_f6<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f6(v, s),
        None => s.serialize_none(),
    }
}

fn opt_text(x: Option<f64>) -> String {
    x.map(fixed6).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingsView {
    #[serde(serialize_with = "ser_f6")]
    pub normalize_ms: f64,
    #[serde(serialize_with = "ser_f6")]
    pub matrices_ms: f64,
    #[serde(serialize_with = "ser_f6")]
    pub detect_ms: f64,
    #[serde(serialize_with = "ser_f6")]
    pub merge_ms: f64,
}

impl From<&StageTimings> for TimingsView {
    fn from(t: &StageTimings) -> Self {
        Self {
            normalize_ms: t.normalize_ms,
            matrices_ms: t.matrices_ms,
            detect_ms: t.detect_ms,
            merge_ms: t.merge_ms,
        }
    }
}

/// Summary fields of a run, shared by `cluster`, `evaluate` and `bench`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub n: usize,
    pub dim: usize,
    pub bins: usize,
    #[serde(serialize_with = "ser_f6")]
    pub sigma_d: f64,
    #[serde(serialize_with = "ser_opt_f6")]
    pub threshold: Option<f64>,
    pub threshold_bin: Option<usize>,
    pub detected_count: usize,
    pub initial_count: usize,
    pub outlier_count: usize,
    pub k_estimate: usize,
    pub k_satisfied: bool,
    pub accepted: bool,
    pub final_count: ClusterCount,
    #[serde(serialize_with = "ser_opt_f6")]
    pub cost_before: Option<f64>,
    #[serde(serialize_with = "ser_opt_f6")]
    pub cost_after: Option<f64>,
}

impl From<&RunResult> for RunSummary {
    fn from(r: &RunResult) -> Self {
        Self {
            status: r.status,
            n: r.n,
            dim: r.dim,
            bins: r.bins,
            sigma_d: r.sigma_d,
            threshold: r.threshold,
            threshold_bin: r.threshold_bin,
            detected_count: r.detected_count,
            initial_count: r.initial_count,
            outlier_count: r.outlier_count,
            k_estimate: r.k_estimate,
            k_satisfied: r.k_satisfied,
            accepted: r.accepted,
            final_count: r.final_count,
            cost_before: r.cost_before,
            cost_after: r.cost_after,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoresView {
    #[serde(serialize_with = "ser_f6")]
    pub ari: f64,
    #[serde(serialize_with = "ser_f6")]
    pub jaccard: f64,
    #[serde(serialize_with = "ser_f6")]
    pub f1: f64,
    pub predicted_k: ClusterCount,
    pub truth_k: usize,
    pub exact_match: bool,
    pub outlier_policy: OutlierPolicy,
    pub pairs: PairCountTable,
}

impl ScoresView {
    pub fn new(r: &EvalReport, policy: OutlierPolicy) -> Self {
        Self {
            ari: r.ari,
            jaccard: r.jaccard,
            f1: r.f1,
            predicted_k: r.predicted_k,
            truth_k: r.truth_k,
            exact_match: r.exact_match,
            outlier_policy: policy,
            pairs: r.pairs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterDoc {
    pub schema_version: u32,
    pub dataset: String,
    #[serde(flatten)]
    pub summary: RunSummary,
    pub merge_steps: Vec<(usize, usize)>,
    pub assignment: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsView>,
}

impl ClusterDoc {
    pub fn new(r: &RunResult, with_timings: bool) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dataset: r.name.clone(),
            summary: r.into(),
            merge_steps: r.merge_steps.clone(),
            assignment: r.assignment.clone(),
            timings: with_timings.then(|| (&r.timings).into()),
        }
    }

    /// Comment header with the summary, then one `point,cluster` row per
    /// point (1-based point index, `0` marks an outlier).
    pub fn to_csv(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
        let _ = writeln!(out, "# dataset={}", self.dataset);
        let _ = writeln!(out, "# status={}", status_text(s.status));
        let _ = writeln!(out, "# threshold={}", opt_text(s.threshold));
        let _ = writeln!(out, "# initial_count={}", s.initial_count);
        let _ = writeln!(out, "# outlier_count={}", s.outlier_count);
        let _ = writeln!(out, "# k_estimate={}", s.k_estimate);
        let _ = writeln!(out, "# accepted={}", s.accepted);
        let _ = writeln!(out, "# final_count={}", s.final_count);
        let _ = writeln!(out, "# cost_before={}", opt_text(s.cost_before));
        let _ = writeln!(out, "# cost_after={}", opt_text(s.cost_after));
        if let Some(t) = &self.timings {
            let _ = writeln!(
                out,
                "# timings_ms=normalize:{},matrices:{},detect:{},merge:{}",
                fixed6(t.normalize_ms),
                fixed6(t.matrices_ms),
                fixed6(t.detect_ms),
                fixed6(t.merge_ms)
            );
        }
        out.push_str("point,cluster\n");
        for (i, a) in self.assignment.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, a);
        }
        out
    }
}

fn status_text(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Ok => "ok",
        RunStatus::Degenerate => "degenerate",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateDoc {
    pub schema_version: u32,
    pub dataset: String,
    #[serde(flatten)]
    pub scores: ScoresView,
    pub run: RunSummary,
}

impl EvaluateDoc {
    pub fn to_csv(&self) -> String {
        let s = &self.scores;
        format!(
            "# schema_version={SCHEMA_VERSION}\ndataset,ari,jaccard,f1,predicted_k,truth_k,exact_match\n{},{},{},{},{},{},{}\n",
            self.dataset,
            fixed6(s.ari),
            fixed6(s.jaccard),
            fixed6(s.f1),
            s.predicted_k,
            s.truth_k,
            s.exact_match
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramBin {
    pub bin: usize,
    #[serde(serialize_with = "ser_f6")]
    pub lower: f64,
    #[serde(serialize_with = "ser_f6")]
    pub upper: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramDoc {
    pub schema_version: u32,
    pub dataset: String,
    pub n: usize,
    pub bins: usize,
    #[serde(serialize_with = "ser_f6")]
    pub sigma_d: f64,
    pub threshold_bin: usize,
    #[serde(serialize_with = "ser_f6")]
    pub threshold: f64,
    pub histogram: Vec<HistogramBin>,
}

impl From<&HistogramReport> for HistogramDoc {
    fn from(h: &HistogramReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dataset: h.name.clone(),
            n: h.n,
            bins: h.bins,
            sigma_d: h.sigma_d,
            threshold_bin: h.threshold_bin,
            threshold: h.threshold,
            histogram: h
                .counts
                .iter()
                .enumerate()
                .map(|(i, &count)| {
                    let (lower, upper) = h.edges(i + 1);
                    HistogramBin {
                        bin: i + 1,
                        lower,
                        upper,
                        count,
                    }
                })
                .collect(),
        }
    }
}

impl HistogramDoc {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
        let _ = writeln!(out, "# dataset={}", self.dataset);
        let _ = writeln!(out, "# threshold_bin={}", self.threshold_bin);
        let _ = writeln!(out, "# threshold={}", fixed6(self.threshold));
        out.push_str("bin,lower,upper,count,selected\n");
        for b in &self.histogram {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.bin,
                fixed6(b.lower),
                fixed6(b.upper),
                b.count,
                b.bin == self.threshold_bin
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Ok,
    Degenerate,
    Error,
    Skipped,
}

/// One dataset row of a corpus benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub truth_k: usize,
    pub predicted_k: Option<ClusterCount>,
    pub exact_match: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoresView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchDoc {
    pub schema_version: u32,
    pub bins: usize,
    pub outlier_policy: OutlierPolicy,
    pub datasets: Vec<BenchRow>,
    /// Datasets that were attempted (everything not skipped).
    pub evaluated: usize,
    pub matches: usize,
    #[serde(serialize_with = "ser_opt_f6")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_f6")]
    pub wall_time_ms: Option<f64>,
}

impl BenchDoc {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
        let _ = writeln!(out, "# bins={}", self.bins);
        let _ = writeln!(
            out,
            "# evaluated={} matches={} accuracy={}",
            self.evaluated,
            self.matches,
            opt_text(self.accuracy)
        );
        if let Some(w) = self.wall_time_ms {
            let _ = writeln!(out, "# wall_time_ms={}", fixed6(w));
        }
        out.push_str("dataset,status,truth_k,predicted_k,exact_match,initial_count,outlier_count,k_estimate,accepted,cost_before,cost_after,ari,jaccard,f1\n");
        for r in &self.datasets {
            let run = r.run.as_ref();
            let sc = r.scores.as_ref();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.dataset,
                serde_plain(&r.status),
                r.truth_k,
                r.predicted_k.map(|k| k.to_string()).unwrap_or_default(),
                r.exact_match,
                run.map(|x| x.initial_count.to_string()).unwrap_or_default(),
                run.map(|x| x.outlier_count.to_string()).unwrap_or_default(),
                run.map(|x| x.k_estimate.to_string()).unwrap_or_default(),
                run.map(|x| x.accepted.to_string()).unwrap_or_default(),
                opt_text(run.and_then(|x| x.cost_before)),
                opt_text(run.and_then(|x| x.cost_after)),
                opt_text(sc.map(|x| x.ari)),
                opt_text(sc.map(|x| x.jaccard)),
                opt_text(sc.map(|x| x.f1)),
            );
        }
        out
    }
}

fn serde_plain(s: &EntryStatus) -> &'static str {
    match s {
        EntryStatus::Ok => "ok",
        EntryStatus::Degenerate => "degenerate",
        EntryStatus::Error => "error",
        EntryStatus::Skipped => "skipped",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub bins: usize,
    pub dataset: String,
    pub predicted_k: Option<ClusterCount>,
    pub truth_k: usize,
    pub exact_match: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub bins: usize,
    pub evaluated: usize,
    pub matches: usize,
    #[serde(serialize_with = "ser_f6")]
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub schema_version: u32,
    pub skipped: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub curve: Vec<SweepPoint>,
}

impl SweepDoc {
    /// The accuracy curve, one row per bin count.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
        if !self.skipped.is_empty() {
            let _ = writeln!(out, "# skipped={}", self.skipped.join(";"));
        }
        out.push_str("bins,evaluated,matches,accuracy\n");
        for p in &self.curve {
            let _ = writeln!(out, "{},{},{},{}", p.bins, p.evaluated, p.matches, fixed6(p.accuracy));
        }
        out
    }
}
