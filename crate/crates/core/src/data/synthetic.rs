use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::preprocess::Dataset;

/// Parameters for a seeded Gaussian-blob dataset with uniform background noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub cluster_count: usize,
    /// One entry per cluster, or a single entry shared by all.
    pub points_per_cluster: Vec<usize>,
    pub dimension: usize,
    /// Minimum distance between two centres, in units of the larger of the
    /// two clusters' spreads.
    pub center_separation: f64,
    /// Per-coordinate standard deviation; one entry per cluster or one shared.
    pub spreads: Vec<f64>,
    /// Extra uniform noise points as a fraction of the clustered points.
    pub noise_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn blobs(cluster_count: usize, points: usize, dimension: usize, separation: f64, seed: u64) -> Self {
        Self {
            cluster_count,
            points_per_cluster: vec![points],
            dimension,
            center_separation: separation,
            spreads: vec![1.0],
            noise_fraction: 0.0,
            seed,
        }
    }

    fn per_cluster<T: Copy>(&self, values: &[T], what: &str) -> Result<Vec<T>> {
        match values.len() {
            1 => Ok(vec![values[0]; self.cluster_count]),
            l if l == self.cluster_count => Ok(values.to_vec()),
            l => Err(Error::Contract(format!(
                "{what}: expected 1 or {} entries, got {l}",
                self.cluster_count
            ))),
        }
    }

    fn validate(&self) -> Result<(Vec<usize>, Vec<f64>)> {
        if self.cluster_count == 0 || self.dimension == 0 {
            return Err(Error::Contract("cluster count and dimension must be positive".into()));
        }
        let counts = self.per_cluster(&self.points_per_cluster, "points_per_cluster")?;
        let spreads = self.per_cluster(&self.spreads, "spreads")?;
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::Contract("every cluster needs at least one point".into()));
        }
        if spreads.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Contract("spreads must be positive and finite".into()));
        }
        if !(0.0..=0.5).contains(&self.noise_fraction) {
            return Err(Error::Contract("noise_fraction must lie in [0, 0.5]".into()));
        }
        if !(self.center_separation >= 0.0 && self.center_separation.is_finite()) {
            return Err(Error::Contract("center_separation must be non-negative".into()));
        }
        Ok((counts, spreads))
    }
}

fn place_centers(rng: &mut ChaCha8Rng, spec: &SyntheticSpec, spreads: &[f64]) -> Vec<Vec<f64>> {
    let k = spec.cluster_count;
    let d = spec.dimension;
    let max_spread = spreads.iter().cloned().fold(0.0, f64::max);
    let mut side = spec.center_separation.max(1.0) * max_spread * (k as f64).powf(1.0 / d as f64).max(1.0) * 2.0;
    loop {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut attempts = 0;
        while centers.len() < k && attempts < 2000 * k {
            attempts += 1;
            let candidate: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..side)).collect();
            let c = centers.len();
            let ok = centers.iter().enumerate().all(|(j, other)| {
                let min = spec.center_separation * spreads[c].max(spreads[j]);
                let dist2: f64 = candidate.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum();
                dist2 >= min * min
            });
            if ok {
                centers.push(candidate);
            }
        }
        if centers.len() == k {
            return centers;
        }
        side *= 1.25;
    }
}

/// Generate the dataset described by `spec`. Cluster points get labels
/// `1..=k`, noise points label `0`. Rows are shuffled with the same seed, so
/// the output is a pure function of the spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let (counts, spreads) = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dimension;
    let centers = place_centers(&mut rng, spec, &spreads);

    let mut rows: Vec<(Vec<f64>, usize)> = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..counts[c] {
            let p = center
                .iter()
                .map(|&m| m + spreads[c] * rng.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push((p, c + 1));
        }
    }

    let base = rows.len();
    let noise = (spec.noise_fraction * base as f64).round() as usize;
    if noise > 0 {
        // uniform over the clusters' bounding box, padded by one separation unit
        let pad = spec.center_separation * spreads.iter().cloned().fold(0.0, f64::max);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (p, _) in &rows {
            for t in 0..d {
                lo[t] = lo[t].min(p[t]);
                hi[t] = hi[t].max(p[t]);
            }
        }
        for _ in 0..noise {
            let p = (0..d).map(|t| rng.gen_range(lo[t] - pad..hi[t] + pad)).collect();
            rows.push((p, 0));
        }
    }
    rows.shuffle(&mut rng);

    let n = rows.len();
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (p, l) in rows {
        values.extend(p);
        labels.push(l);
    }
    let points = Array2::from_shape_vec((n, d), values).expect("row width equals dimension");
    Dataset::new(
        format!("synthetic-k{}-d{}-s{}", spec.cluster_count, d, spec.seed),
        points,
        Some(labels),
    )
}
