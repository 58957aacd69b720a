//! End-to-end composition: normalize, matrices, threshold, detection,
//! outlier extraction, k estimation, merge, and the reported count.

use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::detect::{find_clusters, split_outliers, Clustering};
use crate::error::Result;
use crate::merge::{estimate_and_merge, report_cluster_count, ClusterCount};
use crate::preprocess::{
    affinity_histogram, affinity_matrix, distance_matrix, normalize, select_threshold, AffinityModel,
    Dataset, NormalizedData, DEFAULT_BINS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// All points identical, or every detected cluster a singleton.
    Degenerate,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub normalize_ms: f64,
    pub matrices_ms: f64,
    pub detect_ms: f64,
    pub merge_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.normalize_ms + self.matrices_ms + self.detect_ms + self.merge_ms
    }
}

/// Everything one clustering run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub bins: usize,
    pub status: RunStatus,
    pub sigma_d: f64,
    /// `None` when the data has no spread.
    pub threshold: Option<f64>,
    pub threshold_bin: Option<usize>,
    /// Clusters found by the scan, singletons included.
    pub detected_count: usize,
    /// Clusters left after singleton removal.
    pub initial_count: usize,
    pub outlier_count: usize,
    pub k_estimate: usize,
    pub k_satisfied: bool,
    pub accepted: bool,
    pub merge_steps: Vec<(usize, usize)>,
    pub final_count: ClusterCount,
    pub cost_before: Option<f64>,
    pub cost_after: Option<f64>,
    /// 1-based cluster ids, `0` for outliers.
    pub assignment: Vec<usize>,
    pub timings: StageTimings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Normalized data and the bin-independent affinity matrix, reusable across
/// several bin counts.
pub struct Prepared {
    pub name: String,
    pub z: NormalizedData,
    pub sigma_d: f64,
    /// `None` when every point is identical.
    pub affinity: Option<Array2<f64>>,
    pub normalize_ms: f64,
    pub matrices_ms: f64,
}

impl Prepared {
    pub fn new(dataset: &Dataset) -> Self {
        let t = Instant::now();
        let z = normalize(dataset);
        let normalize_ms = ms(t);
        let t = Instant::now();
        let dm = distance_matrix(&z);
        let sigma_d = dm.sigma_d;
        let affinity = affinity_matrix(&dm).ok();
        drop(dm);
        let matrices_ms = ms(t);
        Self {
            name: dataset.name().to_string(),
            z,
            sigma_d,
            affinity,
            normalize_ms,
            matrices_ms,
        }
    }

    /// Run everything after the affinity matrix with the given bin count.
    pub fn run(&mut self, config: &PipelineConfig) -> Result<RunResult> {
        let n = self.z.n();
        let dim = self.z.z.ncols();
        let mut timings = StageTimings {
            normalize_ms: self.normalize_ms,
            matrices_ms: self.matrices_ms,
            ..Default::default()
        };
        let Some(a) = self.affinity.take() else {
            let single = Clustering::single(&self.z);
            return Ok(RunResult {
                name: self.name.clone(),
                n,
                dim,
                bins: config.bins,
                status: RunStatus::Degenerate,
                sigma_d: self.sigma_d,
                threshold: None,
                threshold_bin: None,
                detected_count: 1,
                initial_count: 1,
                outlier_count: 0,
                k_estimate: 1,
                k_satisfied: true,
                accepted: true,
                merge_steps: vec![],
                final_count: ClusterCount::Count(1),
                cost_before: None,
                cost_after: None,
                assignment: single.assignment,
                timings,
            });
        };

        let t = Instant::now();
        let histogram = match affinity_histogram(&a, config.bins) {
            Ok(h) => h,
            Err(e) => {
                self.affinity = Some(a);
                return Err(e);
            }
        };
        let model = AffinityModel {
            threshold: select_threshold(&histogram)?,
            a,
            histogram,
            bins: config.bins,
            sigma_d: self.sigma_d,
        };
        timings.matrices_ms += ms(t);

        let t = Instant::now();
        let detected = find_clusters(&self.z, &model);
        let AffinityModel { a, threshold, .. } = model;
        self.affinity = Some(a);
        let detected = detected?;
        let clustering = split_outliers(&detected);
        timings.detect_ms = ms(t);

        let base = RunResult {
            name: self.name.clone(),
            n,
            dim,
            bins: config.bins,
            status: RunStatus::Ok,
            sigma_d: self.sigma_d,
            threshold: Some(threshold.value),
            threshold_bin: Some(threshold.bin),
            detected_count: detected.cluster_count(),
            initial_count: clustering.cluster_count(),
            outlier_count: clustering.outliers.len(),
            k_estimate: 0,
            k_satisfied: false,
            accepted: false,
            merge_steps: vec![],
            final_count: ClusterCount::Count(0),
            cost_before: None,
            cost_after: None,
            assignment: clustering.assignment.clone(),
            timings,
        };
        if clustering.cluster_count() == 0 {
            return Ok(RunResult {
                status: RunStatus::Degenerate,
                ..base
            });
        }

        let t = Instant::now();
        let plan = estimate_and_merge(&self.z, &clustering)?;
        timings.merge_ms = ms(t);
        Ok(RunResult {
            k_estimate: plan.k_estimate,
            k_satisfied: plan.k_satisfied,
            accepted: plan.accepted,
            final_count: report_cluster_count(plan.final_count(), n),
            cost_before: Some(plan.cost_before),
            cost_after: Some(plan.cost_after),
            merge_steps: plan.steps,
            assignment: plan.final_assignment,
            timings,
            ..base
        })
    }
}

/// Cluster a dataset end to end.
pub fn run(dataset: &Dataset, config: &PipelineConfig) -> Result<RunResult> {
    Prepared::new(dataset).run(config)
}

/// Affinity histogram and threshold of a dataset, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramReport {
    pub name: String,
    pub n: usize,
    pub bins: usize,
    pub sigma_d: f64,
    pub counts: Vec<u64>,
    pub threshold_bin: usize,
    pub threshold: f64,
}

impl HistogramReport {
    /// `(lower, upper]` edges of 1-based bin `b`.
    pub fn edges(&self, b: usize) -> (f64, f64) {
        ((b - 1) as f64 / self.bins as f64, b as f64 / self.bins as f64)
    }
}

pub fn histogram(dataset: &Dataset, bins: usize) -> Result<HistogramReport> {
    let z = normalize(dataset);
    let dm = distance_matrix(&z);
    let model = AffinityModel::build(&dm, bins)?;
    Ok(HistogramReport {
        name: dataset.name().to_string(),
        n: dataset.len(),
        bins,
        sigma_d: dm.sigma_d,
        counts: model.histogram,
        threshold_bin: model.threshold.bin,
        threshold: model.threshold.value,
    })
}
