//! Goodness-of-fit testing for large, partitioned datasets.
//!
//! The centerpiece is a two-sample Kolmogorov-Smirnov workflow that avoids
//! pooling and re-sorting everything: build an [`EmpiricalCdf`] for the
//! reference data once (partition by partition, merged without a global
//! sort), map each comparison window through it, and check the mapped
//! values for uniformity with a one-sample test. The reference can be
//! persisted and reused, which suits drift and anomaly monitoring where one
//! large "normal state" sample is compared against many small windows.
//!
//! The crate also ships the classic one- and two-sample KS tests, KS
//! confidence bands, seeded reference distributions, and a Monte-Carlo
//! harness for estimating empirical power functions of the tests.

pub mod distributions;
pub mod ecdf;
pub mod error;
pub mod hypothesis;
pub mod kolmogorov;
pub mod simulation;
pub mod special;

pub use distributions::{ContinuousDist, SeededRng};
pub use ecdf::{EcdfPartition, EmpiricalCdf, TransformReport};
pub use error::{Error, Result};
pub use hypothesis::{
    ks_confidence_band, ks_one_sample, ks_one_sample_uniform, ks_transform_test, ks_two_sample,
    ConfidenceBand, KsResult,
};
pub use kolmogorov::{kolmogorov_cdf, kolmogorov_quantile, kolmogorov_sf, KolmogorovDist};
pub use simulation::{
    estimate_power, exponential_variant, power_gap, write_power_csv, Method, PowerCurve,
    PowerPoint, SimulationConfig,
};
