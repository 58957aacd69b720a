//! Sequential cluster detection against the affinity threshold, with
//! incremental centroids and singleton-outlier extraction.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::preprocess::{squared_distance_slice, AffinityModel, NormalizedData};

/// Growable set of clusters with incrementally maintained centroids.
///
/// Cluster ids are 1-based. Removing the last member of a cluster leaves it
/// empty; empty clusters keep their id until [`CentroidSet::compact`].
#[derive(Debug, Clone)]
pub struct CentroidSet {
    dim: usize,
    centroids: Vec<f64>,
    sizes: Vec<usize>,
}

impl CentroidSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            centroids: Vec::new(),
            sizes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of ids handed out, including emptied clusters.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Open a new cluster containing one point and return its id.
    pub fn open(&mut self, point: ArrayView1<'_, f64>) -> usize {
        self.centroids.extend(point.iter());
        self.sizes.push(1);
        self.sizes.len()
    }

    pub fn size(&self, id: usize) -> usize {
        self.sizes[id - 1]
    }

    pub fn centroid(&self, id: usize) -> &[f64] {
        let start = (id - 1) * self.dim;
        &self.centroids[start..start + self.dim]
    }

    /// `c <- (s*c + z) / (s + 1)`, `s <- s + 1`.
    pub fn add(&mut self, id: usize, point: ArrayView1<'_, f64>) {
        let s = self.sizes[id - 1] as f64;
        let start = (id - 1) * self.dim;
        for (c, z) in self.centroids[start..start + self.dim]
            .iter_mut()
            .zip(point.iter())
        {
            *c = (s * *c + z) / (s + 1.0);
        }
        self.sizes[id - 1] += 1;
    }

    /// `c <- (s*c - z) / (s - 1)`, `s <- s - 1`. Removing the only member
    /// empties the cluster instead of dividing by zero.
    pub fn remove(&mut self, id: usize, point: ArrayView1<'_, f64>) {
        let size = self.sizes[id - 1];
        assert!(size > 0, "remove from empty cluster {id}");
        let start = (id - 1) * self.dim;
        let centroid = &mut self.centroids[start..start + self.dim];
        if size == 1 {
            centroid.fill(0.0);
        } else {
            let s = size as f64;
            for (c, z) in centroid.iter_mut().zip(point.iter()) {
                *c = (s * *c - z) / (s - 1.0);
            }
        }
        self.sizes[id - 1] -= 1;
    }

    /// Drop empty clusters. Returns the old-id to new-id map (index 0 unused,
    /// `0` for dropped ids).
    pub fn compact(&mut self) -> Vec<usize> {
        let mut remap = vec![0; self.sizes.len() + 1];
        let mut sizes = Vec::with_capacity(self.sizes.len());
        let mut centroids = Vec::with_capacity(self.centroids.len());
        for (idx, &s) in self.sizes.iter().enumerate() {
            if s > 0 {
                sizes.push(s);
                centroids.extend_from_slice(&self.centroids[idx * self.dim..(idx + 1) * self.dim]);
                remap[idx + 1] = sizes.len();
            }
        }
        self.sizes = sizes;
        self.centroids = centroids;
        remap
    }

    fn into_matrix(self) -> Array2<f64> {
        let p = self.sizes.len();
        Array2::from_shape_vec((p, self.dim), self.centroids).expect("centroid buffer shape")
    }
}

/// Per-point cluster assignment with sizes and centroids.
///
/// `assignment[i]` is `0` for an outlier (or, before extraction, an
/// unassigned point) and `1..=p` otherwise. Outlier indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    pub centroids: Array2<f64>,
    pub outliers: Vec<usize>,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    /// Every point in one cluster; used when the data has no spread at all.
    pub fn single(z: &NormalizedData) -> Self {
        let n = z.n();
        let centroid = z.z.mean_axis(ndarray::Axis(0)).expect("n >= 1");
        Self {
            assignment: vec![1; n],
            sizes: vec![n],
            centroids: centroid.insert_axis(ndarray::Axis(0)),
            outliers: Vec::new(),
        }
    }
}

/// Scan points in input order, opening a cluster at each unassigned point and
/// then sweeping all points once: unassigned points whose affinity to the
/// growing centroid exceeds the threshold join it, and assigned points that
/// are strictly closer to it than to their own centroid move into it.
///
/// Clusters emptied by moves are dropped and ids compacted in creation order.
/// Singletons are still present in the result; see [`extract_outliers`].
pub fn find_clusters(z: &NormalizedData, model: &AffinityModel) -> Result<Clustering> {
    let n = z.n();
    if n < 2 {
        return Err(Error::Contract(format!("need at least 2 points, got {n}")));
    }
    if !(model.sigma_d > 0.0) {
        return Ok(Clustering::single(z));
    }
    let threshold = model.threshold.value;
    let rows = z.z.as_standard_layout();
    let dim = rows.ncols();
    let row = |i: usize| rows.row(i);
    let row_slice = |i: usize| &rows.as_slice().expect("standard layout")[i * dim..(i + 1) * dim];

    let mut set = CentroidSet::new(dim);
    let mut assignment = vec![0usize; n];

    for i in 0..n {
        if assignment[i] != 0 {
            continue;
        }
        let k = set.open(row(i));
        assignment[i] = k;

        for j in 0..n {
            let current = assignment[j];
            if current == k {
                continue;
            }
            let zj = row_slice(j);
            let to_new = squared_distance_slice(set.centroid(k), zj);
            if current == 0 {
                if model.affinity(to_new) > threshold {
                    set.add(k, row(j));
                    assignment[j] = k;
                }
            } else if to_new < squared_distance_slice(set.centroid(current), zj) {
                set.remove(current, row(j));
                set.add(k, row(j));
                assignment[j] = k;
            }
        }
    }

    let remap = set.compact();
    for a in assignment.iter_mut() {
        *a = remap[*a];
    }
    let sizes = set.sizes.clone();
    Ok(Clustering {
        assignment,
        sizes,
        centroids: set.into_matrix(),
        outliers: Vec::new(),
    })
}

/// Move every singleton cluster's point to the outlier list and re-index the
/// remaining clusters `1..=p`, keeping detection order.
///
/// Fails with [`Error::Degenerate`] when every cluster is a singleton; the
/// returned error carries no clustering, so callers that need the all-outlier
/// result should use [`split_outliers`].
pub fn extract_outliers(clustering: &Clustering) -> Result<Clustering> {
    let out = split_outliers(clustering);
    if out.cluster_count() == 0 {
        return Err(Error::Degenerate(
            "every detected cluster is a singleton".into(),
        ));
    }
    Ok(out)
}

/// Like [`extract_outliers`] but returns the empty clustering (`p = 0`,
/// every point an outlier) instead of failing.
pub fn split_outliers(clustering: &Clustering) -> Clustering {
    let old_p = clustering.sizes.len();
    let mut remap = vec![0usize; old_p + 1];
    let mut sizes = Vec::new();
    let mut keep_rows = Vec::new();
    for (idx, &s) in clustering.sizes.iter().enumerate() {
        if s > 1 {
            sizes.push(s);
            keep_rows.push(idx);
            remap[idx + 1] = sizes.len();
        }
    }
    let mut outliers = clustering.outliers.clone();
    let assignment: Vec<usize> = clustering
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let new = remap[a];
            if new == 0 && a != 0 {
                outliers.push(i);
            }
            new
        })
        .collect();
    outliers.sort_unstable();
    let centroids = clustering.centroids.select(ndarray::Axis(0), &keep_rows);
    Clustering {
        assignment,
        sizes,
        centroids,
        outliers,
    }
}
