//! Stopping criteria and the clocks they are measured against.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// When a run stops: after a number of generations, evaluations, or seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "limit", rename_all = "snake_case")]
pub enum Budget {
    Generations(u64),
    Evaluations(u64),
    WallTime(f64),
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            // Zero generations is allowed: the run records only its initial population.
            Budget::Generations(_) => Ok(()),
            Budget::Evaluations(0) => Err(Error::Config("evaluation budget must be positive".into())),
            Budget::Evaluations(_) => Ok(()),
            Budget::WallTime(s) if s > 0.0 && s.is_finite() => Ok(()),
            Budget::WallTime(s) => Err(Error::Config(format!("invalid time budget {s}"))),
        }
    }

    /// True once the budget's own axis reaches its limit. The other axes are ignored.
    pub fn exhausted(&self, generation: u64, nfe: u64, elapsed_s: f64) -> bool {
        match *self {
            Budget::Generations(limit) => generation >= limit,
            Budget::Evaluations(limit) => nfe >= limit,
            Budget::WallTime(limit) => elapsed_s >= limit,
        }
    }

    /// Fraction of the budget consumed, clipped to `[0, 1]`.
    pub fn progress(&self, generation: u64, nfe: u64, elapsed_s: f64) -> f64 {
        let p = match *self {
            Budget::Generations(0) => 1.0,
            Budget::Generations(limit) => generation as f64 / limit as f64,
            Budget::Evaluations(limit) => nfe as f64 / limit as f64,
            Budget::WallTime(limit) => elapsed_s / limit,
        };
        p.clamp(0.0, 1.0)
    }

    /// Estimated total generation count of the run, for schedules keyed on `t / t_max`.
    ///
    /// Generation budgets are exact, evaluation budgets divide by the per-generation
    /// cost, and time budgets extrapolate the generation rate observed so far.
    pub fn estimated_generations(
        &self,
        generation: u64,
        elapsed_s: f64,
        evals_per_generation: usize,
    ) -> f64 {
        let est = match *self {
            Budget::Generations(limit) => limit as f64,
            Budget::Evaluations(limit) => limit as f64 / evals_per_generation.max(1) as f64,
            Budget::WallTime(limit) => {
                if generation == 0 || elapsed_s <= 0.0 {
                    f64::INFINITY
                } else {
                    generation as f64 * limit / elapsed_s
                }
            }
        };
        est.max(1.0)
    }
}

pub fn budget_exhausted(budget: &Budget, generation: u64, nfe: u64, elapsed_s: f64) -> bool {
    budget.exhausted(generation, nfe, elapsed_s)
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Generations(g) => write!(f, "gen:{g}"),
            Budget::Evaluations(n) => write!(f, "fe:{n}"),
            Budget::WallTime(s) => write!(f, "time:{s}"),
        }
    }
}

impl FromStr for Budget {
    type Err = Error;

    /// Parses `gen:100`, `fe:1000000` or `time:30`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("budget `{s}` is not of the form kind:limit")))?;
        let bad = |_| Error::Config(format!("budget `{s}` has an invalid limit"));
        let budget = match kind {
            "gen" | "generations" => Budget::Generations(value.parse().map_err(bad)?),
            "fe" | "nfe" | "evaluations" => Budget::Evaluations(value.parse().map_err(bad)?),
            "time" | "seconds" => {
                Budget::WallTime(value.parse().map_err(|_| Error::Config(format!("budget `{s}` has an invalid limit")))?)
            }
            other => return Err(Error::Config(format!("unknown budget kind `{other}`"))),
        };
        budget.validate()?;
        Ok(budget)
    }
}

/// Source of elapsed seconds.
pub trait Clock: Send + Sync {
    fn now(&self) -> f64;
}

/// Monotonic wall clock.
#[derive(Debug)]
pub struct RealClock {
    origin: Instant,
}

impl RealClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for RealClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for RealClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Deterministic clock for tests: every reading advances time by a fixed tick.
#[derive(Debug)]
pub struct VirtualClock {
    state: Mutex<f64>,
    tick: f64,
}

impl VirtualClock {
    pub fn new(tick: f64) -> Self {
        Self {
            state: Mutex::new(0.0),
            tick,
        }
    }

    /// A clock that only moves when [`VirtualClock::advance`] is called.
    pub fn frozen() -> Self {
        Self::new(0.0)
    }

    pub fn advance(&self, seconds: f64) {
        *self.state.lock().unwrap() += seconds;
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> f64 {
        let mut t = self.state.lock().unwrap();
        let now = *t;
        *t += self.tick;
        now
    }
}
