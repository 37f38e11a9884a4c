//! Experiment orchestration: runs, sweeps, aggregation, persistence and plots.

mod aggregate;
mod export;
mod plot;
mod sweep;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algorithm::{initial_population, AlgorithmConfig, AlgorithmId, Optimizer, StepContext};
use crate::backend::{Backend, BackendSpec};
use crate::budget::{Budget, Clock, RealClock};
use crate::error::{Error, Result};
use crate::metrics::{diversity_with, hypervolume, igd_with, nadir_point, reference_from_nadir};
use crate::problems::{Cec2022Transform, ProblemId, ProblemInstance, DEFAULT_REFERENCE_POINTS};
use crate::rng::RngStream;

pub use aggregate::{aggregate, AggregatePoint, AggregateStats, Stat};
pub use export::{
    export_aggregate_json, export_csv, export_json, export_sweep_json, import_csv, import_json, read_document, CsvRow,
    Document, ExperimentFile, SweepFile, SCHEMA_VERSION,
};
pub use plot::{emit_plot, plot_series, render_svg, write_series_csv, PlotKind, PlotSeries};
pub use sweep::{default_sweep_values, run_sweep, run_sweep_with_clock, SweepAxis, SweepRow, SweepSpec};

fn default_reps() -> usize {
    15
}

fn default_true() -> bool {
    true
}

/// One experiment: an algorithm on a problem under a budget, repeated `reps` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub algorithm: AlgorithmId,
    /// JSON object merged onto the algorithm's default configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub problem: ProblemId,
    pub dim: usize,
    pub objectives: usize,
    pub pop: usize,
    pub budget: Budget,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub backend: BackendSpec,
    pub seed: u64,
    /// Generations between history samples; `None` picks a default from the budget.
    #[serde(default)]
    pub stride: Option<u64>,
    /// Whether history points carry the population's decision-space diversity.
    #[serde(default = "default_true")]
    pub track_diversity: bool,
    /// Shift/rotation file for CEC 2022 problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Problem defaults for dimension and objectives, 15 repetitions, serial backend.
    pub fn new(algorithm: AlgorithmId, problem: ProblemId, pop: usize, budget: Budget, seed: u64) -> Self {
        Self {
            algorithm,
            config: None,
            problem,
            dim: problem.default_dim(),
            objectives: problem.default_objectives(),
            pop,
            budget,
            reps: default_reps(),
            backend: BackendSpec::serial(),
            seed,
            stride: None,
            track_diversity: true,
            transform: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.pop == 0 {
            return Err(Error::Config("population size must be at least 1".into()));
        }
        if self.stride == Some(0) {
            return Err(Error::Config("history stride must be positive".into()));
        }
        self.budget.validate()?;
        self.backend.validate()?;
        Ok(())
    }

    pub fn instance(&self) -> Result<ProblemInstance> {
        let p = ProblemInstance::new(self.problem, self.dim, self.objectives)?;
        match &self.transform {
            Some(path) => p.with_transform(Cec2022Transform::from_file(path, self.dim)?),
            None => Ok(p),
        }
    }

    pub fn resolved_config(&self) -> Result<AlgorithmConfig> {
        AlgorithmConfig::resolve(self.algorithm, self.config.as_ref())
    }

    /// Generations between recorded history points.
    pub fn history_stride(&self) -> u64 {
        if let Some(s) = self.stride {
            return s;
        }
        let gens = match self.budget {
            Budget::Generations(g) => g,
            Budget::Evaluations(limit) => limit / self.pop.max(1) as u64,
            Budget::WallTime(_) => 0,
        };
        if gens <= 1000 {
            1
        } else {
            gens.div_ceil(1000)
        }
    }
}

/// One sample of a run's trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub gen: u64,
    pub nfe: u64,
    pub elapsed_s: f64,
    /// Best-so-far fitness for single-objective runs, IGD for multi-objective runs.
    pub quality: f64,
    pub diversity: Option<f64>,
}

/// End-of-run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub generations: u64,
    pub nfe: u64,
    pub elapsed_s: f64,
    pub quality: f64,
    /// Exact hypervolume of the result set against 1.1× the analytic nadir.
    #[serde(default)]
    pub hypervolume: Option<f64>,
    pub throughput: f64,
}

/// Everything recorded about one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: usize,
    pub seed: u64,
    pub stream_id: u64,
    /// `best_fitness` or `igd`.
    pub quality_kind: String,
    pub config_hash: String,
    #[serde(default)]
    pub transform_hash: Option<String>,
    /// Initialization is counted in `elapsed_s`.
    pub elapsed_includes_init: bool,
    pub series: Vec<HistoryPoint>,
    #[serde(rename = "final")]
    pub summary: RunSummary,
}

struct Quality {
    reference: Option<ndarray::Array2<f64>>,
    hv_reference: Option<Vec<f64>>,
}

impl Quality {
    fn new(problem: &ProblemInstance) -> Result<Self> {
        if problem.objectives() >= 2 {
            let front = problem.pareto_front_reference(DEFAULT_REFERENCE_POINTS)?;
            let hv_reference = reference_from_nadir(&nadir_point(front.view()));
            Ok(Self {
                reference: Some(front),
                hv_reference: Some(hv_reference),
            })
        } else {
            Ok(Self {
                reference: None,
                hv_reference: None,
            })
        }
    }

    fn kind(&self) -> &'static str {
        if self.reference.is_some() {
            "igd"
        } else {
            "best_fitness"
        }
    }

    fn measure(&self, backend: &Backend, opt: &dyn Optimizer) -> Result<f64> {
        match &self.reference {
            Some(r) => igd_with(backend, opt.result_objectives().view(), r.view()),
            None => Ok(opt.best_fitness()),
        }
    }
}

/// Runs every repetition of `spec` against the wall clock.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    run_with_clock(spec, &|| Box::new(RealClock::new()))
}

/// Runs every repetition, each measured against a fresh clock from `clock`.
pub fn run_with_clock(spec: &ExperimentSpec, clock: &dyn Fn() -> Box<dyn Clock>) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let problem = spec.instance()?;
    let config = spec.resolved_config()?;
    spec.algorithm.check_arity(&problem)?;
    let backend = Backend::new(spec.backend)?;
    let quality = Quality::new(&problem)?;
    let streams = RngStream::new(spec.seed, 0).split(spec.reps);
    streams
        .into_iter()
        .enumerate()
        .map(|(rep, stream)| {
            let c = clock();
            run_once(spec, rep, stream, &problem, &config, &backend, &quality, c.as_ref())
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_once(
    spec: &ExperimentSpec,
    rep: usize,
    stream: RngStream,
    problem: &ProblemInstance,
    config: &AlgorithmConfig,
    backend: &Backend,
    quality: &Quality,
    clock: &dyn Clock,
) -> Result<RunRecord> {
    let stream_id = stream.stream_id();
    let mut parts = stream.split(2).into_iter();
    let mut init_rng = parts.next().expect("two streams");
    let mut rng = parts.next().expect("two streams");
    let stride = spec.history_stride();

    let t0 = clock.now();
    let mut ctx = StepContext::new(problem, backend);
    let initial = initial_population(problem, spec.pop, &mut ctx, &mut init_rng)?;
    let mut opt = config.build(problem, initial)?;
    let mut gen = 0u64;
    let mut elapsed = clock.now() - t0;

    let best = std::cell::Cell::new(f64::INFINITY);
    let sample = |opt: &dyn Optimizer, gen: u64, nfe: u64, elapsed: f64| -> Result<HistoryPoint> {
        let q = quality.measure(backend, opt)?;
        let q = if quality.reference.is_some() {
            q
        } else {
            best.set(best.get().min(q));
            best.get()
        };
        Ok(HistoryPoint {
            gen,
            nfe,
            elapsed_s: elapsed,
            quality: q,
            diversity: spec
                .track_diversity
                .then(|| diversity_with(backend, opt.population().x.view())),
        })
    };
    let mut series = vec![sample(opt.as_ref(), 0, ctx.nfe, elapsed)?];
    while !spec.budget.exhausted(gen, ctx.nfe, elapsed) {
        ctx.generation = gen;
        ctx.progress = spec.budget.progress(gen, ctx.nfe, elapsed);
        opt.step(&mut ctx, &mut rng)?;
        gen += 1;
        elapsed = clock.now() - t0;
        if quality.reference.is_none() {
            best.set(best.get().min(opt.best_fitness()));
        }
        if gen.is_multiple_of(stride) {
            series.push(sample(opt.as_ref(), gen, ctx.nfe, elapsed)?);
        }
    }
    if series.last().map(|p| p.gen) != Some(gen) {
        series.push(sample(opt.as_ref(), gen, ctx.nfe, elapsed)?);
    }
    let last = series.last().expect("at least the initial point");
    let hv = match &quality.hv_reference {
        Some(r) => Some(hypervolume(opt.result_objectives().view(), r)?),
        None => None,
    };
    let summary = RunSummary {
        generations: gen,
        nfe: ctx.nfe,
        elapsed_s: elapsed,
        quality: last.quality,
        hypervolume: hv,
        throughput: crate::metrics::throughput(ctx.nfe, elapsed),
    };
    Ok(RunRecord {
        rep,
        seed: spec.seed,
        stream_id,
        quality_kind: quality.kind().to_string(),
        config_hash: config.hash(),
        transform_hash: problem.transform_hash(),
        elapsed_includes_init: true,
        series,
        summary,
    })
}
