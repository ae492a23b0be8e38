//! Spectral two-sample testing and change-point detection for populations
//! of networks.
//!
//! The test standardizes the entrywise difference of two samples' mean
//! adjacency matrices with plug-in link-probability estimates, and compares
//! the scaled largest singular value against Tracy-Widom quantiles. The
//! change-point detector slides the same statistic over a dynamic series
//! and thresholds its local maximizers.

pub mod changepoint;
pub mod error;
pub mod estimators;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scenarios;
pub mod tw1;
pub mod twosample;

pub use changepoint::{
    detect_changepoints, ChangePointResult, DynamicNetworkSeries, ScanConfig,
};
pub use error::{Error, Result};
pub use estimators::{Estimator, MnbsConfig, SbmEstimateConfig};
pub use linalg::{largest_singular_value, DenseSymMatrix};
pub use metrics::{
    boysen_distances, changepoint_benchmark, estimate_rejection_rate, BenchmarkReport,
    TestMethod,
};
pub use model::{
    AdjacencyMatrix, ChangeKind, GraphonFamily, LinkProbabilityMatrix, NetworkSample,
};
pub use scenarios::{ChangeScenario, PopulationModel, SeriesScenario, TwoSampleScenario};
pub use tw1::Tw1Table;
pub use twosample::{chi2_test, n_type_test, tw1_test, TestFamily, TestResult};
