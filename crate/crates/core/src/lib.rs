//! Batch-vectorized evolutionary algorithms, benchmark problems, quality
//! metrics and an experiment harness with serial and data-parallel backends.

pub mod algorithm;
pub mod backend;
pub mod budget;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod moea;
pub mod operators;
pub mod population;
pub mod problems;
pub mod rng;
pub mod soea;

pub use algorithm::{AlgorithmConfig, AlgorithmId, Optimizer, StepContext};
pub use backend::{Backend, BackendKind, BackendSpec};
pub use budget::{budget_exhausted, Budget, Clock, RealClock, VirtualClock};
pub use error::{Error, Result};
pub use population::{clamp_to_bounds, Bounds, Population};
pub use problems::{ProblemId, ProblemInstance};
pub use rng::RngStream;
pub use harness::{aggregate, run, run_sweep, AggregateStats, ExperimentSpec, RunRecord, SweepSpec};
