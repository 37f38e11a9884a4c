//! CMA-ES with increasing-population restarts.

use serde::{Deserialize, Serialize};

use super::cmaes::{CmaConfig, CmaState};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::population::Population;
use crate::problems::ProblemInstance;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IpopConfig {
    pub cma: CmaConfig,
    /// Generations without sufficient improvement before a restart.
    pub stagnation: u32,
    pub tol_fun: f64,
    pub min_sigma: f64,
    pub lambda_factor: usize,
}

impl Default for IpopConfig {
    fn default() -> Self {
        Self {
            cma: CmaConfig::default(),
            stagnation: 50,
            tol_fun: 1e-12,
            min_sigma: 1e-12,
            lambda_factor: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartDecision {
    Continue,
    Restart { lambda: usize },
}

/// Counts consecutive generations whose best fails to improve by more than `tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct StagnationCounter {
    best: f64,
    flat: u32,
}

impl Default for StagnationCounter {
    fn default() -> Self {
        Self {
            best: f64::INFINITY,
            flat: 0,
        }
    }
}

impl StagnationCounter {
    pub fn observe(&mut self, generation_best: f64, tol: f64) -> u32 {
        if self.best.is_infinite() || self.best - generation_best > tol {
            self.flat = 0;
        } else {
            self.flat += 1;
        }
        self.best = self.best.min(generation_best);
        self.flat
    }

    pub fn flat(&self) -> u32 {
        self.flat
    }
}

/// Restart rule over the per-generation best values since the last restart.
pub fn ipop_restart_policy(
    history: &[f64],
    sigma: f64,
    lambda: usize,
    cfg: &IpopConfig,
) -> RestartDecision {
    let mut counter = StagnationCounter::default();
    let mut flat = 0;
    for &b in history {
        flat = counter.observe(b, cfg.tol_fun);
    }
    if flat >= cfg.stagnation || sigma < cfg.min_sigma {
        RestartDecision::Restart {
            lambda: lambda * cfg.lambda_factor,
        }
    } else {
        RestartDecision::Continue
    }
}

#[derive(Clone, Debug)]
pub struct IpopCmaEs {
    pub cfg: IpopConfig,
    pub state: CmaState,
    pub pop: Population,
    pub restarts: u32,
    counter: StagnationCounter,
    best: f64,
}

impl IpopCmaEs {
    pub fn new(cfg: IpopConfig, problem: &ProblemInstance, initial: Population) -> Result<Self> {
        let bounds = problem.bounds();
        let lambda = cfg.cma.lambda.unwrap_or(initial.len()).max(2);
        let state = CmaState::new(bounds.midpoint(), cfg.cma.sigma0 * bounds.max_width(), lambda, cfg.cma.cm);
        let best = crate::metrics::best_fitness(&initial);
        Ok(Self {
            cfg,
            state,
            pop: initial,
            restarts: 0,
            counter: StagnationCounter::default(),
            best,
        })
    }

    pub fn lambda(&self) -> usize {
        self.state.lambda
    }
}

impl Optimizer for IpopCmaEs {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::IpopCmaEs
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let bounds = ctx.problem.bounds();
        let x = self.state.sample(bounds, rng);
        let f = ctx.evaluate(x.view())?;
        let col: Vec<f64> = f.column(0).to_vec();
        self.state.update(&x, &col);
        let gen_best = col.iter().copied().fold(f64::INFINITY, f64::min);
        self.best = self.best.min(gen_best);
        self.pop = Population::new(x, f, ctx.nfe)?;

        let flat = self.counter.observe(gen_best, self.cfg.tol_fun);
        if flat >= self.cfg.stagnation || self.state.sigma < self.cfg.min_sigma {
            let lambda = self.state.lambda * self.cfg.lambda_factor;
            let mean: Vec<f64> = (0..bounds.dim())
                .map(|j| rng.uniform_in(bounds.lower()[j], bounds.upper()[j]))
                .collect();
            self.state = CmaState::new(mean, self.cfg.cma.sigma0 * bounds.max_width(), lambda, self.cfg.cma.cm);
            self.counter = StagnationCounter::default();
            self.restarts += 1;
        }
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.state.lambda as u64
    }

    fn best_fitness(&self) -> f64 {
        self.best
    }
}
