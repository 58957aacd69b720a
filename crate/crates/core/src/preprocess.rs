//! Normalization, pairwise distances, Gaussian affinities and the affinity
//! histogram that yields the clustering threshold.
//!
//! Every stage here is a pure function of its input. The two `n x n` matrices
//! are built row-parallel; reductions are done per row and combined in row
//! order so results do not depend on the thread schedule.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default number of histogram bins.
pub const DEFAULT_BINS: usize = 10;

/// An `n x d` numeric dataset with optional ground-truth labels.
///
/// Labels use `0` for points that the ground truth marks as noise and
/// `1..` for cluster ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    points: Array2<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        points: Array2<f64>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let (n, d) = points.dim();
        if n < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 points, found {n}"
            )));
        }
        if d < 1 {
            return Err(Error::InvalidDataset("need at least 1 feature column".into()));
        }
        if let Some(((row, col), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                row + 1,
                col + 1
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {n} points",
                    labels.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            points,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Number of distinct non-noise ground-truth clusters.
    pub fn truth_k(&self) -> Option<usize> {
        self.labels.as_ref().map(|labels| {
            let mut ids: Vec<usize> = labels.iter().copied().filter(|&l| l != 0).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.len()
        })
    }
}

/// Column-wise z-scores of a dataset.
#[derive(Debug, Clone)]
pub struct NormalizedData {
    pub z: Array2<f64>,
    pub column_means: Array1<f64>,
    pub column_stds: Array1<f64>,
}

impl NormalizedData {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.z.row(i)
    }
}

/// Z-score every column using the population standard deviation.
/// Constant columns become all-zero.
pub fn normalize(data: &Dataset) -> NormalizedData {
    let x = data.points();
    let n = x.nrows() as f64;
    let mut z = x.clone();
    let mut means = Array1::zeros(x.ncols());
    let mut stds = Array1::zeros(x.ncols());
    for (j, mut col) in z.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        means[j] = mean;
        stds[j] = sd;
        if sd > 0.0 {
            col.mapv_inplace(|v| (v - mean) / sd);
        } else {
            col.fill(0.0);
        }
    }
    NormalizedData {
        z,
        column_means: means,
        column_stds: stds,
    }
}

/// Squared Euclidean distance between two equal-length vectors.
#[inline]
pub fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn squared_distance_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairwise Euclidean distances and the population standard deviation of all
/// `n^2` entries (diagonal included).
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub d: Array2<f64>,
    pub sigma_d: f64,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.d.nrows()
    }
}

pub fn distance_matrix(z: &NormalizedData) -> DistanceMatrix {
    let n = z.n();
    let rows = &z.z;
    let mut d = Array2::<f64>::zeros((n, n));
    d.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut out)| {
            let zi = rows.row(i);
            for (j, cell) in out.iter_mut().enumerate() {
                *cell = squared_distance(zi, rows.row(j)).sqrt();
            }
        });
    let sigma_d = population_sd(&d);
    DistanceMatrix { d, sigma_d }
}

/// Population standard deviation of every entry of a matrix, reduced row by
/// row in a fixed order.
fn population_sd(m: &Array2<f64>) -> f64 {
    let count = m.len() as f64;
    let row_sums: Vec<f64> = m
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| row.sum())
        .collect();
    let mean = row_sums.iter().sum::<f64>() / count;
    let row_sq: Vec<f64> = m
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
        .collect();
    (row_sq.iter().sum::<f64>() / count).sqrt()
}

/// Gaussian kernel whose squared width is `sigma_d` itself, i.e. the width
/// parameter is the square root of the distance dispersion.
#[inline]
pub fn gaussian_affinity(squared_dist: f64, sigma_d: f64) -> f64 {
    (-squared_dist / (2.0 * sigma_d)).exp()
}

pub fn affinity_matrix(dm: &DistanceMatrix) -> Result<Array2<f64>> {
    let sigma_d = dm.sigma_d;
    if !(sigma_d > 0.0) {
        return Err(Error::Degenerate(
            "distance dispersion is zero (all points identical)".into(),
        ));
    }
    let mut a = dm.d.clone();
    a.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| {
        row.mapv_inplace(|dist| gaussian_affinity(dist * dist, sigma_d));
    });
    Ok(a)
}

/// 1-based bin of an affinity value: `ceil(v * bins)` clamped to `[1, bins]`.
#[inline]
pub fn affinity_bin(value: f64, bins: usize) -> usize {
    let raw = (value * bins as f64).ceil();
    if raw < 1.0 {
        1
    } else if raw > bins as f64 {
        bins
    } else {
        raw as usize
    }
}

/// Count every entry of the affinity matrix into `bins` equal-width bins.
/// Index `0` of the returned vector holds bin 1.
pub fn affinity_histogram(a: &Array2<f64>, bins: usize) -> Result<Vec<u64>> {
    if bins < 2 {
        return Err(Error::Contract(format!("bins must be >= 2, got {bins}")));
    }
    let hist = a
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| {
            let mut h = vec![0u64; bins];
            for &v in row {
                h[affinity_bin(v, bins) - 1] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; bins],
            |mut acc, h| {
                acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
                acc
            },
        );
    Ok(hist)
}

/// The bin after which the affinity count rises most steeply, and the
/// corresponding threshold at that bin's centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// 1-based bin index `k` in `1..bins`.
    pub bin: usize,
    pub value: f64,
}

pub fn select_threshold(histogram: &[u64]) -> Result<Threshold> {
    let bins = histogram.len();
    if bins < 2 {
        return Err(Error::Contract(format!(
            "histogram needs at least 2 bins, got {bins}"
        )));
    }
    let mut best_bin = 1;
    let mut best_jump = i128::MIN;
    for i in 1..bins {
        // H(i+1) - H(i) with 1-based bins
        let jump = histogram[i] as i128 - histogram[i - 1] as i128;
        if jump > best_jump {
            best_jump = jump;
            best_bin = i;
        }
    }
    Ok(Threshold {
        bin: best_bin,
        value: ((best_bin - 1) as f64 + 0.5) / bins as f64,
    })
}

/// Affinity matrix, its histogram and the derived threshold.
#[derive(Debug, Clone)]
pub struct AffinityModel {
    pub a: Array2<f64>,
    pub histogram: Vec<u64>,
    pub threshold: Threshold,
    pub bins: usize,
    /// Distance dispersion used as the kernel's squared width.
    pub sigma_d: f64,
}

impl AffinityModel {
    pub fn build(dm: &DistanceMatrix, bins: usize) -> Result<Self> {
        let a = affinity_matrix(dm)?;
        let histogram = affinity_histogram(&a, bins)?;
        let threshold = select_threshold(&histogram)?;
        Ok(Self {
            a,
            histogram,
            threshold,
            bins,
            sigma_d: dm.sigma_d,
        })
    }

    /// Affinity between a point (or centroid) and another point.
    #[inline]
    pub fn affinity(&self, squared_dist: f64) -> f64 {
        gaussian_affinity(squared_dist, self.sigma_d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(points: Array2<f64>) -> Dataset {
        Dataset::new("t", points, None).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.gen_range(-5.0..5.0))
    }

    #[test]
    fn rejects_bad_datasets() {
        assert!(Dataset::new("x", array![[1.0]], None).is_err());
        assert!(Dataset::new("x", array![[1.0], [f64::NAN]], None).is_err());
        assert!(Dataset::new("x", array![[1.0], [f64::INFINITY]], None).is_err());
        assert!(Dataset::new("x", array![[1.0], [2.0]], Some(vec![1])).is_err());
        assert!(Dataset::new("x", Array2::zeros((3, 0)), None).is_err());
    }

    #[test]
    fn normalize_two_point_column() {
        let nd = normalize(&dataset(array![[-1.0], [1.0]]));
        assert_eq!(nd.column_means[0], 0.0);
        assert_eq!(nd.column_stds[0], 1.0);
        assert_eq!(nd.z, array![[-1.0], [1.0]]);
    }

    #[test]
    fn normalize_constant_column_is_zero() {
        let nd = normalize(&dataset(array![[5.0], [5.0], [5.0]]));
        assert_eq!(nd.z, array![[0.0], [0.0], [0.0]]);
        assert_eq!(nd.column_stds[0], 0.0);
    }

    #[test]
    fn normalize_random_matrix_has_unit_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let nd = normalize(&dataset(random_points(&mut rng, 6, 3)));
        for col in nd.z.axis_iter(Axis(1)) {
            // recompute directly
            let mean: f64 = col.iter().sum::<f64>() / 6.0;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0).sqrt();
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(sd, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn distance_three_four_five() {
        let nd = NormalizedData {
            z: array![[0.0, 0.0], [3.0, 4.0]],
            column_means: array![0.0, 0.0],
            column_stds: array![1.0, 1.0],
        };
        let dm = distance_matrix(&nd);
        assert_eq!(dm.d[[0, 1]], 5.0);
        assert_eq!(dm.d[[1, 0]], 5.0);
        assert_eq!(dm.d[[0, 0]], 0.0);
        // entries 0,5,5,0: mean 2.5, population sd 2.5
        assert_abs_diff_eq!(dm.sigma_d, 2.5, epsilon = 1e-15);
    }

    #[test]
    fn distance_matrix_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nd = normalize(&dataset(random_points(&mut rng, 5, 2)));
        let dm = distance_matrix(&nd);
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..2 {
                    let diff = nd.z[[i, k]] - nd.z[[j, k]];
                    s += diff * diff;
                }
                assert_abs_diff_eq!(dm.d[[i, j]], s.sqrt(), epsilon = 1e-12);
            }
        }
        assert_eq!(dm.d, dm.d.t());
        assert!((0..5).all(|i| dm.d[[i, i]] == 0.0));
    }

    #[test]
    fn affinity_analytic_points() {
        let sigma = 0.7;
        assert_eq!(gaussian_affinity(0.0, sigma), 1.0);
        assert_abs_diff_eq!(
            gaussian_affinity(2.0 * sigma, sigma),
            (-1.0f64).exp(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(gaussian_affinity(2.0 * sigma, sigma), 0.367879, epsilon = 1e-6);
    }

    #[test]
    fn affinity_matrix_matches_scalar_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nd = normalize(&dataset(random_points(&mut rng, 5, 3)));
        let dm = distance_matrix(&nd);
        let a = affinity_matrix(&dm).unwrap();
        for i in 0..5 {
            assert_eq!(a[[i, i]], 1.0);
            for j in 0..5 {
                let expect = (-(dm.d[[i, j]].powi(2)) / (2.0 * dm.sigma_d)).exp();
                assert_abs_diff_eq!(a[[i, j]], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn affinity_rejects_zero_dispersion() {
        let nd = normalize(&dataset(array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]));
        let dm = distance_matrix(&nd);
        assert_eq!(dm.sigma_d, 0.0);
        assert!(matches!(affinity_matrix(&dm), Err(Error::Degenerate(_))));
    }

    #[test]
    fn single_self_affinity_lands_in_top_bin() {
        let h = affinity_histogram(&array![[1.0]], 10).unwrap();
        assert_eq!(h, vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn bin_of_value_follows_ceiling() {
        assert_eq!(affinity_bin(0.85, 10), 9);
        assert_eq!(affinity_bin(1.0, 10), 10);
        assert_eq!(affinity_bin(0.9, 10), 9);
        assert_eq!(affinity_bin(0.0, 10), 1);
        assert_eq!(affinity_bin(1e-300, 10), 1);
    }

    #[test]
    fn histogram_matches_bruteforce_bucketing() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let nd = normalize(&dataset(random_points(&mut rng, 4, 2)));
        let dm = distance_matrix(&nd);
        let a = affinity_matrix(&dm).unwrap();
        let h = affinity_histogram(&a, 10).unwrap();
        let mut oracle = [0u64; 10];
        for v in a.iter() {
            // lower < v <= upper
            let idx = (0..10)
                .find(|&b| *v > b as f64 / 10.0 && *v <= (b + 1) as f64 / 10.0)
                .unwrap_or(0);
            oracle[idx] += 1;
        }
        assert_eq!(h, oracle.to_vec());
        assert_eq!(h.iter().sum::<u64>(), 16);
    }

    #[test]
    fn histogram_rejects_single_bin() {
        assert!(affinity_histogram(&array![[1.0]], 1).is_err());
    }

    #[test]
    fn threshold_single_jump() {
        let t = select_threshold(&[0, 0, 0, 0, 0, 0, 0, 0, 10, 90]).unwrap();
        assert_eq!(t.bin, 9);
        assert_abs_diff_eq!(t.value, 0.85, epsilon = 1e-15);
    }

    #[test]
    fn threshold_ties_pick_smallest_bin() {
        let t = select_threshold(&[0, 5, 5, 10, 10]).unwrap();
        assert_eq!(t.bin, 1);
        assert_abs_diff_eq!(t.value, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn threshold_all_negative_differences() {
        let t = select_threshold(&[50, 40, 20, 19]).unwrap();
        // jumps -10, -20, -1
        assert_eq!(t.bin, 3);
        assert!(select_threshold(&[4]).is_err());
    }
}
