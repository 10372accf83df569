//! Simulation models, noise laws and evaluation metrics for the Monte Carlo benchmarks.

mod bench;
mod generate;
mod metrics;
mod noise;
pub mod rng;

pub use bench::{run_bench, run_replication, BenchReport, BenchRow, BenchSettings, Method, MethodOutcome, Summary};
pub use generate::{ar_covariance, generate, BetaPattern, SimModel, SimSpec, TruthVector, CANONICAL_SLOPES};
pub use metrics::{evaluate, Metrics};
pub use noise::{expectile_root, NoiseDistribution};
