//! Independent reference implementations used as oracles. Written for
//! clarity over speed: plain vectors, batch means, full pair enumeration.

#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.outer_iter().map(|r| r.to_vec()).collect()
}

pub fn naive_zscore(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x[0].len();
    let mut out = x.to_vec();
    for j in 0..d {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for r in out.iter_mut() {
            r[j] = if sd > 0.0 { (r[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn mean_of(z: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; z[0].len()];
    for &m in members {
        for (cj, v) in c.iter_mut().zip(&z[m]) {
            *cj += v;
        }
    }
    c.iter().map(|v| v / members.len() as f64).collect()
}

pub struct NaiveModel {
    pub sigma_d: f64,
    pub histogram: Vec<u64>,
    pub bin: usize,
    pub threshold: f64,
}

pub fn naive_model(z: &[Vec<f64>], bins: usize) -> NaiveModel {
    let n = z.len();
    let mut dists = Vec::with_capacity(n * n);
    for a in z {
        for b in z {
            dists.push(sq(a, b).sqrt());
        }
    }
    let m = dists.len() as f64;
    let mean = dists.iter().sum::<f64>() / m;
    let sigma_d = (dists.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
    let mut histogram = vec![0u64; bins];
    for dist in &dists {
        let a = (-dist * dist / (2.0 * sigma_d)).exp();
        let b = ((a * bins as f64).ceil() as usize).clamp(1, bins);
        histogram[b - 1] += 1;
    }
    let mut bin = 1;
    let mut best = i128::MIN;
    for i in 1..bins {
        let jump = histogram[i] as i128 - histogram[i - 1] as i128;
        if jump > best {
            best = jump;
            bin = i;
        }
    }
    NaiveModel {
        sigma_d,
        histogram,
        bin,
        threshold: (bin as f64 - 0.5) / bins as f64,
    }
}

/// The detection scan with centroids recomputed as batch means after every
/// move. Returns 1-based compacted ids in order of first opening.
pub fn naive_scan(z: &[Vec<f64>], sigma_d: f64, threshold: f64) -> Vec<usize> {
    let n = z.len();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if owner[i].is_some() {
            continue;
        }
        let k = members.len();
        members.push(vec![i]);
        owner[i] = Some(k);
        for j in 0..n {
            if owner[j] == Some(k) {
                continue;
            }
            let ck = mean_of(z, &members[k]);
            let to_new = sq(&ck, &z[j]);
            match owner[j] {
                None => {
                    if (-to_new / (2.0 * sigma_d)).exp() > threshold {
                        members[k].push(j);
                        owner[j] = Some(k);
                    }
                }
                Some(c) => {
                    let to_old = sq(&mean_of(z, &members[c]), &z[j]);
                    if to_new < to_old {
                        members[c].retain(|&m| m != j);
                        members[k].push(j);
                        owner[j] = Some(k);
                    }
                }
            }
        }
    }
    let mut remap = vec![0; members.len()];
    let mut next = 0;
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() {
            next += 1;
            remap[c] = next;
        }
    }
    owner.iter().map(|o| remap[o.unwrap()]).collect()
}

/// Brute-force k estimate straight from the inequality.
pub fn naive_estimate_k(sizes_desc: &[usize]) -> usize {
    let p = sizes_desc.len();
    if p <= 1 {
        return 1;
    }
    for k in 2..=p {
        let sk = sizes_desc[k - 1] as f64;
        let mut left = 0.0;
        let mut right = 0.0;
        for (i, &s) in sizes_desc.iter().enumerate() {
            let s = s as f64;
            if i < k - 1 {
                left += (s - sk) * s;
            } else if i > k - 1 {
                right += (sk - s) * s;
            }
        }
        if left > right {
            return k;
        }
    }
    p
}

pub struct Pairs {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

/// Pair counts by enumerating every unordered pair.
pub fn enumerate_pairs(a: &[usize], b: &[usize]) -> Pairs {
    let mut p = Pairs { tp: 0, fp: 0, fn_: 0, tn: 0 };
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => p.tp += 1,
                (true, false) => p.fp += 1,
                (false, true) => p.fn_ += 1,
                (false, false) => p.tn += 1,
            }
        }
    }
    p
}

/// ARI via the Hubert-Arabie pair-count form.
pub fn pair_ari(p: &Pairs) -> f64 {
    let (a, b, c, d) = (p.tp as f64, p.fp as f64, p.fn_ as f64, p.tn as f64);
    let denom = (a + b) * (b + d) + (a + c) * (c + d);
    if denom == 0.0 {
        return if b == 0.0 && c == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (a * d - b * c) / denom
}

pub fn pair_jaccard(p: &Pairs) -> f64 {
    let denom = p.tp + p.fp + p.fn_;
    if denom == 0 {
        1.0
    } else {
        p.tp as f64 / denom as f64
    }
}

pub fn pair_f1(p: &Pairs) -> f64 {
    if p.fp == 0 && p.fn_ == 0 {
        return 1.0;
    }
    2.0 * p.tp as f64 / (2 * p.tp + p.fp + p.fn_) as f64
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, max_label: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(1..=max_label)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Within-cluster sum of squares and size-weighted cost from members.
pub fn naive_costs(z: &[Vec<f64>], assignment: &[usize]) -> (f64, f64) {
    let p = assignment.iter().copied().max().unwrap_or(0);
    let mut ssw = 0.0;
    let mut w = 0.0;
    for c in 1..=p {
        let m: Vec<usize> = (0..z.len()).filter(|&i| assignment[i] == c).collect();
        if m.is_empty() {
            continue;
        }
        let centre = mean_of(z, &m);
        let s: f64 = m.iter().map(|&i| sq(&z[i], &centre)).sum();
        ssw += s;
        w += s / m.len() as f64;
    }
    (ssw, w)
}
