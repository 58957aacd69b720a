//! External validity indices: pair counts, Adjusted Rand Index, Jaccard,
//! pairwise F1, and corpus-level exact-k accuracy.

use std::collections::HashMap;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::merge::ClusterCount;

/// How points labelled `0` (predicted outliers, ground-truth noise) enter the
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierPolicy {
    /// Each such point is its own cluster.
    #[default]
    Singletons,
    /// Such points are dropped before counting.
    Exclude,
}

impl FromStr for OutlierPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "singletons" => Ok(Self::Singletons),
            "exclude" => Ok(Self::Exclude),
            other => Err(format!("unknown outlier policy `{other}`")),
        }
    }
}

/// Label vectors made total over the same point set.
fn prepare(predicted: &[usize], truth: &[usize], policy: OutlierPolicy) -> Result<(Vec<usize>, Vec<usize>)> {
    if predicted.len() != truth.len() {
        return Err(Error::Contract(format!(
            "partition lengths differ: predicted {}, truth {}",
            predicted.len(),
            truth.len()
        )));
    }
    let mut next_pred = predicted.iter().copied().max().unwrap_or(0);
    let mut next_truth = truth.iter().copied().max().unwrap_or(0);
    let mut pred = Vec::with_capacity(predicted.len());
    let mut tru = Vec::with_capacity(truth.len());
    for (&p, &t) in predicted.iter().zip(truth) {
        match policy {
            OutlierPolicy::Exclude if p == 0 || t == 0 => continue,
            _ => {}
        }
        pred.push(if p == 0 {
            next_pred += 1;
            next_pred
        } else {
            p
        });
        tru.push(if t == 0 {
            next_truth += 1;
            next_truth
        } else {
            t
        });
    }
    Ok((pred, tru))
}

#[inline]
fn comb2(v: u64) -> u64 {
    v * v.saturating_sub(1) / 2
}

/// Contingency table between two total partitions.
#[derive(Debug, Clone)]
pub struct Contingency {
    n: u64,
    cells: HashMap<(usize, usize), u64>,
    predicted_sizes: HashMap<usize, u64>,
    truth_sizes: HashMap<usize, u64>,
}

impl Contingency {
    pub fn new(predicted: &[usize], truth: &[usize], policy: OutlierPolicy) -> Result<Self> {
        let (pred, tru) = prepare(predicted, truth, policy)?;
        let mut cells = HashMap::new();
        let mut predicted_sizes = HashMap::new();
        let mut truth_sizes = HashMap::new();
        for (&p, &t) in pred.iter().zip(&tru) {
            *cells.entry((p, t)).or_insert(0) += 1;
            *predicted_sizes.entry(p).or_insert(0) += 1;
            *truth_sizes.entry(t).or_insert(0) += 1;
        }
        Ok(Self {
            n: pred.len() as u64,
            cells,
            predicted_sizes,
            truth_sizes,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn pair_counts(&self) -> PairCountTable {
        let both: u64 = self.cells.values().map(|&c| comb2(c)).sum();
        let pred: u64 = self.predicted_sizes.values().map(|&c| comb2(c)).sum();
        let truth: u64 = self.truth_sizes.values().map(|&c| comb2(c)).sum();
        let total = comb2(self.n);
        PairCountTable {
            tp: both,
            fp: pred - both,
            fn_: truth - both,
            tn: total + both - pred - truth,
        }
    }

    /// Adjusted Rand Index under the permutation model. When the adjustment's
    /// denominator vanishes the result is 1 for identical partitions, else 0.
    pub fn adjusted_rand_index(&self) -> f64 {
        let index: f64 = self.cells.values().map(|&c| comb2(c) as f64).sum();
        let sum_pred: f64 = self.predicted_sizes.values().map(|&c| comb2(c) as f64).sum();
        let sum_truth: f64 = self.truth_sizes.values().map(|&c| comb2(c) as f64).sum();
        let total = comb2(self.n) as f64;
        let identical = self.pair_counts().identical();
        if total == 0.0 {
            return if identical { 1.0 } else { 0.0 };
        }
        let expected = sum_pred * sum_truth / total;
        let max = 0.5 * (sum_pred + sum_truth);
        let denom = max - expected;
        if denom == 0.0 {
            return if identical { 1.0 } else { 0.0 };
        }
        (index - expected) / denom
    }
}

/// Pair counts between a predicted and a ground-truth partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCountTable {
    /// Co-clustered in both.
    pub tp: u64,
    /// Co-clustered in the prediction only.
    pub fp: u64,
    /// Co-clustered in the truth only.
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Separated in both.
    pub tn: u64,
}

impl PairCountTable {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The partitions are equal as set partitions.
    pub fn identical(&self) -> bool {
        self.fp == 0 && self.fn_ == 0
    }

    pub fn jaccard(&self) -> f64 {
        let denom = self.tp + self.fp + self.fn_;
        if denom == 0 {
            return if self.identical() { 1.0 } else { 0.0 };
        }
        self.tp as f64 / denom as f64
    }

    pub fn f1(&self) -> f64 {
        if self.identical() {
            return 1.0;
        }
        if self.tp == 0 {
            return 0.0;
        }
        let precision = self.tp as f64 / (self.tp + self.fp) as f64;
        let recall = self.tp as f64 / (self.tp + self.fn_) as f64;
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn pair_counts(predicted: &[usize], truth: &[usize], policy: OutlierPolicy) -> Result<PairCountTable> {
    Ok(Contingency::new(predicted, truth, policy)?.pair_counts())
}

pub fn adjusted_rand_index(predicted: &[usize], truth: &[usize], policy: OutlierPolicy) -> Result<f64> {
    Ok(Contingency::new(predicted, truth, policy)?.adjusted_rand_index())
}

/// External scores for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub ari: f64,
    pub jaccard: f64,
    pub f1: f64,
    pub predicted_k: ClusterCount,
    pub truth_k: usize,
    pub exact_match: bool,
    pub pairs: PairCountTable,
}

pub fn evaluate(
    predicted: &[usize],
    truth: &[usize],
    predicted_k: ClusterCount,
    truth_k: usize,
    policy: OutlierPolicy,
) -> Result<EvalReport> {
    let table = Contingency::new(predicted, truth, policy)?;
    let pairs = table.pair_counts();
    Ok(EvalReport {
        ari: table.adjusted_rand_index(),
        jaccard: pairs.jaccard(),
        f1: pairs.f1(),
        predicted_k,
        truth_k,
        exact_match: predicted_k == ClusterCount::Count(truth_k),
        pairs,
    })
}

/// Exact-k match flags summarised as a percentage. `na` never matches.
pub fn corpus_accuracy<I>(matches: I) -> Result<f64>
where
    I: IntoIterator<Item = bool>,
{
    let (hits, total) = matches
        .into_iter()
        .fold((0usize, 0usize), |(h, t), m| (h + m as usize, t + 1));
    if total == 0 {
        return Err(Error::Contract("accuracy over an empty corpus".into()));
    }
    Ok(100.0 * hits as f64 / total as f64)
}

/// Percentage truncated to one decimal, the way accuracy figures are quoted.
pub fn truncate_one_decimal(pct: f64) -> f64 {
    (pct * 10.0 + 1e-9).floor() / 10.0
}
