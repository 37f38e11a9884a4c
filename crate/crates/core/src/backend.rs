//! Serial and data-parallel batch evaluation.
//!
//! Rows are evaluated independently and written back by index, so the result
//! is bit-identical for every worker count and chunk size. Only evaluation is
//! parallelised; selection and sorting stay sequential.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Clock;
use crate::error::{Error, Result};
use crate::problems::{ProblemId, ProblemInstance};

/// Overrides the worker count of parallel backends.
pub const WORKERS_ENV: &str = "EVOBENCH_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendKind {
    Serial,
    Parallel { workers: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub kind: BackendKind,
    /// Rows per task; `None` picks `⌈N / (4·workers)⌉` per batch.
    #[serde(default)]
    pub chunk: Option<usize>,
}

impl BackendSpec {
    pub fn serial() -> Self {
        Self {
            kind: BackendKind::Serial,
            chunk: None,
        }
    }

    pub fn parallel(workers: usize) -> Self {
        Self {
            kind: BackendKind::Parallel { workers },
            chunk: None,
        }
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = Some(chunk);
        self
    }

    pub fn workers(&self) -> usize {
        match self.kind {
            BackendKind::Serial => 1,
            BackendKind::Parallel { workers } => workers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers() == 0 {
            return Err(Error::Config("a parallel backend needs at least one worker".into()));
        }
        if self.chunk == Some(0) {
            return Err(Error::Config("chunk size must be positive".into()));
        }
        Ok(())
    }

    /// Applies a worker-count override (the value of [`WORKERS_ENV`]) to parallel specs.
    pub fn with_worker_override(self, value: Option<&str>) -> Result<Self> {
        match (self.kind, value) {
            (BackendKind::Parallel { .. }, Some(v)) => {
                let workers: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v} is not a worker count")))?;
                Ok(Self {
                    kind: BackendKind::Parallel { workers },
                    ..self
                })
            }
            _ => Ok(self),
        }
    }

    /// Reads [`WORKERS_ENV`] from the process environment.
    pub fn resolve_env(self) -> Result<Self> {
        let v = std::env::var(WORKERS_ENV).ok();
        self.with_worker_override(v.as_deref())
    }

    pub fn chunk_for(&self, rows: usize) -> usize {
        self.chunk
            .unwrap_or_else(|| rows.div_ceil(4 * self.workers()))
            .max(1)
    }
}

/// An execution substrate for batch work.
pub struct Backend {
    spec: BackendSpec,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Backend").field("spec", &self.spec).finish()
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "worker panicked".to_string()
    }
}

impl Backend {
    pub fn new(spec: BackendSpec) -> Result<Self> {
        spec.validate()?;
        let pool = match spec.kind {
            BackendKind::Serial => None,
            BackendKind::Parallel { workers } => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("evobench-worker-{i}"))
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            ),
        };
        Ok(Self { spec, pool })
    }

    pub fn serial() -> Self {
        Self {
            spec: BackendSpec::serial(),
            pool: None,
        }
    }

    pub fn spec(&self) -> BackendSpec {
        self.spec
    }

    /// Applies `kernel(row_in, row_out)` to every row of `x`, producing an N×`width` matrix.
    /// A panic inside the kernel becomes [`Error::Evaluation`] naming the failed row range.
    pub fn map_rows<F>(&self, x: ArrayView2<'_, f64>, width: usize, kernel: F) -> Result<Array2<f64>>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let (n, d) = x.dim();
        let mut out = Array2::zeros((n, width));
        if n == 0 {
            return Ok(out);
        }
        if width == 0 {
            return Ok(out);
        }
        let input = x.as_standard_layout();
        let input = input.as_slice().expect("standard layout");
        let chunk = self.spec.chunk_for(n);
        let out_slice = out.as_slice_mut().expect("fresh array");

        let run_chunk = |(c, dst): (usize, &mut [f64])| -> Result<()> {
            let start = c * chunk;
            let end = (start + chunk).min(n);
            catch_unwind(AssertUnwindSafe(|| {
                for (k, row_out) in dst.chunks_mut(width.max(1)).enumerate() {
                    let i = start + k;
                    kernel(&input[i * d..(i + 1) * d], row_out);
                }
            }))
            .map_err(|p| Error::Evaluation {
                start,
                end,
                message: panic_message(p),
            })
        };

        match &self.pool {
            None => out_slice
                .chunks_mut(chunk * width)
                .enumerate()
                .try_for_each(run_chunk)?,
            Some(pool) => pool.install(|| {
                out_slice
                    .par_chunks_mut(chunk * width)
                    .enumerate()
                    .map(run_chunk)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .collect::<Result<()>>()
            })?,
        }
        Ok(out)
    }

    /// Objective values for every row of `x`.
    pub fn evaluate(&self, problem: &ProblemInstance, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != problem.dim() {
            return Err(Error::DimensionMismatch {
                context: "backend evaluate",
                expected: problem.dim(),
                found: x.ncols(),
            });
        }
        self.map_rows(x, problem.objectives(), |row, out| problem.evaluate_into(row, out))
    }

    /// Like [`Backend::evaluate`], also returning the wall time in seconds.
    pub fn evaluate_timed(
        &self,
        problem: &ProblemInstance,
        x: ArrayView2<'_, f64>,
    ) -> Result<(Array2<f64>, f64)> {
        let t0 = Instant::now();
        let f = self.evaluate(problem, x)?;
        Ok((f, t0.elapsed().as_secs_f64()))
    }

    /// Runs `f(i)` for `i in 0..n` and collects the results in index order.
    pub fn map_indices<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}

/// One line of a backend timing profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    pub d: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

/// Times batch evaluation of `problem` at each `(N, D)` size, `reps` times per size.
pub fn profile_backend(
    backend: &Backend,
    problem: ProblemId,
    sizes: &[(usize, usize)],
    reps: usize,
    clock: &dyn Clock,
) -> Result<Vec<ProfileRow>> {
    let mut rng = crate::rng::RngStream::new(0x5eed, 0);
    let mut rows = Vec::with_capacity(sizes.len());
    for &(n, d) in sizes {
        let p = ProblemInstance::new(problem, d, problem.default_objectives())?;
        let x = p.bounds().sample(n, &mut rng);
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps.max(1) {
            let t0 = clock.now();
            backend.evaluate(&p, x.view())?;
            times.push(clock.now() - t0);
        }
        let (mean_s, std_s) = crate::metrics::mean_std(&times);
        rows.push(ProfileRow { n, d, mean_s, std_s });
    }
    Ok(rows)
}
