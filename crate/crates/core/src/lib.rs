//! Parameter-free clustering.
//!
//! Points are z-scored, pairwise Euclidean distances are passed through a
//! Gaussian kernel whose squared width is the standard deviation of all
//! distances, and the affinity histogram picks a threshold at the bin after
//! which affinity counts rise most steeply. A single ordered scan grows
//! clusters around that threshold; singletons become outliers. The final
//! count is estimated from the size distribution of the detected clusters,
//! and the closest clusters are merged down to it only if the size-normalized
//! within-cluster cost does not grow.
//!
//! ```
//! use ndarray::array;
//! use pfclust::{run, Dataset, PipelineConfig};
//!
//! let data = Dataset::new(
//!     "pairs",
//!     array![[0.0, 0.0], [0.0, 0.1], [9.0, 9.0], [9.1, 9.0]],
//!     None,
//! )
//! .unwrap();
//! let result = run(&data, &PipelineConfig::default()).unwrap();
//! assert_eq!(result.assignment, vec![1, 1, 2, 2]);
//! ```

pub mod cli;
pub mod data;
pub mod detect;
pub mod error;
pub mod evaluate;
pub mod merge;
pub mod pipeline;
pub mod preprocess;
pub mod report;

pub use detect::{extract_outliers, find_clusters, CentroidSet, Clustering};
pub use error::{Error, Result};
pub use evaluate::{evaluate, EvalReport, OutlierPolicy, PairCountTable};
pub use merge::{cost_ssw, cost_w, estimate_k, merge_clusters, report_cluster_count, ClusterCount, MergePlan};
pub use pipeline::{run, PipelineConfig, RunResult, RunStatus};
pub use preprocess::{AffinityModel, Dataset, DistanceMatrix, NormalizedData};
