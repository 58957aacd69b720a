//! Final cluster-count estimation from the detected size distribution and
//! cost-checked closest-centroid merging.

use std::fmt;

use ndarray::{Array2, Axis};
use serde::Serialize;

use crate::detect::Clustering;
use crate::error::{Error, Result};
use crate::preprocess::{squared_distance_slice, NormalizedData};

/// Exact per-cluster means of `z` for assignment ids `1..=p` (id 0 ignored).
/// Returns `(centroids, sizes)`.
pub fn exact_centroids(z: &NormalizedData, assignment: &[usize], p: usize) -> (Array2<f64>, Vec<usize>) {
    let dim = z.z.ncols();
    let mut sums = Array2::<f64>::zeros((p, dim));
    let mut sizes = vec![0usize; p];
    for (i, &a) in assignment.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let mut row = sums.row_mut(a - 1);
        row += &z.z.row(i);
        sizes[a - 1] += 1;
    }
    for (mut row, &s) in sums.axis_iter_mut(Axis(0)).zip(&sizes) {
        if s > 0 {
            row /= s as f64;
        }
    }
    (sums, sizes)
}

fn cluster_count(assignment: &[usize]) -> usize {
    assignment.iter().copied().max().unwrap_or(0)
}

fn per_cluster_ss(z: &NormalizedData, assignment: &[usize]) -> Result<(Vec<f64>, Vec<usize>)> {
    if assignment.len() != z.n() {
        return Err(Error::Contract(format!(
            "assignment has {} entries for {} points",
            assignment.len(),
            z.n()
        )));
    }
    let p = cluster_count(assignment);
    if p == 0 {
        return Err(Error::Degenerate("no clusters to evaluate".into()));
    }
    let (centroids, sizes) = exact_centroids(z, assignment, p);
    let mut ss = vec![0.0; p];
    for (i, &a) in assignment.iter().enumerate() {
        if a != 0 {
            let d: f64 = z
                .z
                .row(i)
                .iter()
                .zip(centroids.row(a - 1))
                .map(|(x, c)| (x - c) * (x - c))
                .sum();
            ss[a - 1] += d;
        }
    }
    Ok((ss, sizes))
}

/// Size-normalized within-cluster cost: `sum_j (1/s_j) * sum_{i in j} |z_i - c_j|^2`.
/// Centroids are recomputed from members; outliers (id 0) are ignored.
pub fn cost_w(z: &NormalizedData, assignment: &[usize]) -> Result<f64> {
    let (ss, sizes) = per_cluster_ss(z, assignment)?;
    Ok(ss
        .iter()
        .zip(&sizes)
        .filter(|(_, &s)| s > 0)
        .map(|(v, &s)| v / s as f64)
        .sum())
}

/// Plain within-cluster sum of squares, reported as a diagnostic.
pub fn cost_ssw(z: &NormalizedData, assignment: &[usize]) -> Result<f64> {
    let (ss, _) = per_cluster_ss(z, assignment)?;
    Ok(ss.iter().sum())
}

/// Outcome of the size-distribution rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KEstimate {
    pub k: usize,
    /// `false` when no `k` satisfied the inequality and `k` fell back to `p`.
    pub satisfied: bool,
}

/// Smallest `k` in `2..=p` such that
/// `sum_{i<k} (s_i - s_k) s_i > sum_{j>k} (s_k - s_j) s_j`
/// for sizes sorted in descending order. Falls back to `p` (no merge).
pub fn estimate_k(sizes_desc: &[usize]) -> KEstimate {
    let p = sizes_desc.len();
    if p <= 1 {
        return KEstimate {
            k: p.max(1),
            satisfied: p == 1,
        };
    }
    let s: Vec<u128> = sizes_desc.iter().map(|&v| v as u128).collect();
    for k in 2..=p {
        let sk = s[k - 1];
        let larger: u128 = s[..k - 1].iter().map(|&si| (si - sk) * si).sum();
        let smaller: u128 = s[k..].iter().map(|&sj| (sk - sj) * sj).sum();
        if larger > smaller {
            return KEstimate { k, satisfied: true };
        }
    }
    KEstimate {
        k: p,
        satisfied: false,
    }
}

/// Cluster sizes in descending order, ties kept in detection order.
pub fn sorted_sizes(sizes: &[usize]) -> Vec<usize> {
    let mut sorted = sizes.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    sorted
}

/// Record of the merge stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MergePlan {
    /// Clusters after outlier removal.
    pub initial_count: usize,
    pub k_estimate: usize,
    pub k_satisfied: bool,
    /// Merged id pairs `(a, b)` with `a < b`, in the ids current at each
    /// step (the merged cluster keeps `a`).
    pub steps: Vec<(usize, usize)>,
    pub cost_before: f64,
    pub cost_after: f64,
    pub accepted: bool,
    pub final_assignment: Vec<usize>,
}

impl MergePlan {
    pub fn final_count(&self) -> usize {
        if self.accepted {
            self.k_estimate
        } else {
            self.initial_count
        }
    }
}

struct ActiveClusters {
    dim: usize,
    centroids: Vec<f64>,
    sizes: Vec<usize>,
    active: Vec<bool>,
    /// For row `i`: nearest active `j > i` as `(squared distance, j)`.
    nearest: Vec<Option<(f64, usize)>>,
}

impl ActiveClusters {
    fn new(centroids: &Array2<f64>, sizes: &[usize]) -> Self {
        let dim = centroids.ncols();
        let p = sizes.len();
        let mut this = Self {
            dim,
            centroids: centroids.as_standard_layout().iter().copied().collect(),
            sizes: sizes.to_vec(),
            active: vec![true; p],
            nearest: vec![None; p],
        };
        for i in 0..p {
            this.refresh_row(i);
        }
        this
    }

    fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        squared_distance_slice(self.centroid(i), self.centroid(j))
    }

    fn refresh_row(&mut self, i: usize) {
        let mut best: Option<(f64, usize)> = None;
        for j in i + 1..self.sizes.len() {
            if !self.active[j] {
                continue;
            }
            let d = self.dist(i, j);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        self.nearest[i] = best;
    }

    /// Closest active pair, ties broken by smallest `(a, b)`.
    fn closest_pair(&self) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, nn) in self.nearest.iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            if let Some((d, j)) = *nn {
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        best.map(|(_, a, b)| (a, b))
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (sa, sb) = (self.sizes[a] as f64, self.sizes[b] as f64);
        let dim = self.dim;
        for t in 0..dim {
            let ca = self.centroids[a * dim + t];
            let cb = self.centroids[b * dim + t];
            self.centroids[a * dim + t] = (sa * ca + sb * cb) / (sa + sb);
        }
        self.sizes[a] += self.sizes[b];
        self.sizes[b] = 0;
        self.active[b] = false;
        self.nearest[b] = None;

        for i in 0..self.sizes.len() {
            if !self.active[i] {
                continue;
            }
            if i == a {
                self.refresh_row(i);
                continue;
            }
            match self.nearest[i] {
                Some((_, j)) if j == a || j == b => self.refresh_row(i),
                Some((bd, j)) if i < a => {
                    let d = self.dist(i, a);
                    if d < bd || (d == bd && a < j) {
                        self.nearest[i] = Some((d, a));
                    }
                }
                None if i < a => self.nearest[i] = Some((self.dist(i, a), a)),
                _ => {}
            }
        }
    }
}

/// Merge the closest pair of clusters (centroid linkage) `p - k` times, then
/// keep the merge only if the size-normalized cost does not increase.
///
/// `clustering` must already have its outliers removed. Outliers stay at id
/// `0`; merged ids are relabelled `1..=k` in ascending order of the surviving
/// original id.
pub fn merge_clusters(z: &NormalizedData, clustering: &Clustering, k: usize) -> Result<MergePlan> {
    let p = clustering.cluster_count();
    if p == 0 {
        return Err(Error::Degenerate("no clusters to merge".into()));
    }
    if k == 0 || k > p {
        return Err(Error::Contract(format!(
            "target cluster count {k} outside 1..={p}"
        )));
    }
    let (centroids, sizes) = exact_centroids(z, &clustering.assignment, p);
    let mut active = ActiveClusters::new(&centroids, &sizes);

    // owner[c] = surviving 0-based cluster that original cluster c now belongs to
    let mut owner: Vec<usize> = (0..p).collect();
    let mut steps = Vec::with_capacity(p - k);
    for _ in 0..p - k {
        let (a, b) = active
            .closest_pair()
            .expect("at least two active clusters remain");
        active.merge(a, b);
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
        steps.push((a + 1, b + 1));
    }

    let mut relabel = vec![0usize; p];
    let mut next = 0;
    for (c, &alive) in active.active.iter().enumerate() {
        if alive {
            next += 1;
            relabel[c] = next;
        }
    }
    let merged: Vec<usize> = clustering
        .assignment
        .iter()
        .map(|&a| if a == 0 { 0 } else { relabel[owner[a - 1]] })
        .collect();

    let cost_before = cost_w(z, &clustering.assignment)?;
    let cost_after = if steps.is_empty() {
        cost_before
    } else {
        cost_w(z, &merged)?
    };
    let accepted = !(cost_after > cost_before);
    Ok(MergePlan {
        initial_count: p,
        k_estimate: k,
        k_satisfied: true,
        steps,
        cost_before,
        cost_after,
        accepted,
        final_assignment: if accepted {
            merged
        } else {
            clustering.assignment.clone()
        },
    })
}

/// Estimate `k` from the sorted sizes and run [`merge_clusters`].
pub fn estimate_and_merge(z: &NormalizedData, clustering: &Clustering) -> Result<MergePlan> {
    let estimate = estimate_k(&sorted_sizes(&clustering.sizes));
    let mut plan = merge_clusters(z, clustering, estimate.k)?;
    plan.k_satisfied = estimate.satisfied;
    Ok(plan)
}

/// Reported cluster count; `NotAvailable` when more than `sqrt(n)` clusters
/// survive, which signals the data has no usable structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterCount {
    Count(usize),
    NotAvailable,
}

impl ClusterCount {
    pub fn count(self) -> Option<usize> {
        match self {
            Self::Count(k) => Some(k),
            Self::NotAvailable => None,
        }
    }
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Count(k) => write!(f, "{k}"),
            Self::NotAvailable => f.write_str("na"),
        }
    }
}

impl Serialize for ClusterCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Count(k) => s.serialize_u64(*k as u64),
            Self::NotAvailable => s.serialize_str("na"),
        }
    }
}

pub fn report_cluster_count(final_count: usize, n: usize) -> ClusterCount {
    // k > sqrt(n)  <=>  k^2 > n for integers
    if (final_count as u128) * (final_count as u128) > n as u128 {
        ClusterCount::NotAvailable
    } else {
        ClusterCount::Count(final_count)
    }
}
