//! Self-adaptive differential evolution with a four-strategy pool.

use std::collections::VecDeque;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::de::{binomial_crossover, greedy_replace, require_population};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::population::Population;
use crate::rng::RngStream;

pub const STRATEGIES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SadeConfig {
    /// Learning period in generations.
    pub lp: usize,
    pub f_mean: f64,
    pub f_std: f64,
    pub cr_init: f64,
    pub cr_std: f64,
    /// Added to every success rate so no strategy dies out.
    pub epsilon: f64,
    /// Kept as published; not used by the strategy pool.
    pub differential_vectors: usize,
}

impl Default for SadeConfig {
    fn default() -> Self {
        Self {
            lp: 50,
            f_mean: 0.5,
            f_std: 0.3,
            cr_init: 0.5,
            cr_std: 0.1,
            epsilon: 0.01,
            differential_vectors: 9,
        }
    }
}

/// Strategy probabilities from summed success and failure counts:
/// `p_k ∝ ns_k / (ns_k + nf_k) + ε`.
pub fn strategy_probabilities(ns: &[u64], nf: &[u64], epsilon: f64) -> Vec<f64> {
    let s: Vec<f64> = ns
        .iter()
        .zip(nf)
        .map(|(&a, &b)| {
            let total = a + b;
            let rate = if total == 0 { 0.0 } else { a as f64 / total as f64 };
            rate + epsilon
        })
        .collect();
    let sum: f64 = s.iter().sum();
    s.iter().map(|v| v / sum).collect()
}

#[derive(Clone, Debug)]
struct Generation {
    success: [u64; STRATEGIES],
    failure: [u64; STRATEGIES],
    cr: [Vec<f64>; STRATEGIES],
}

#[derive(Clone, Debug)]
pub struct Sade {
    pub cfg: SadeConfig,
    pub pop: Population,
    probs: [f64; STRATEGIES],
    cr_mean: [f64; STRATEGIES],
    memory: VecDeque<Generation>,
    generation: usize,
}

impl Sade {
    pub fn new(cfg: SadeConfig, pop: Population) -> Result<Self> {
        require_population(AlgorithmId::Sade, pop.len())?;
        Ok(Self {
            probs: [1.0 / STRATEGIES as f64; STRATEGIES],
            cr_mean: [cfg.cr_init; STRATEGIES],
            memory: VecDeque::new(),
            generation: 0,
            cfg,
            pop,
        })
    }

    pub fn probabilities(&self) -> &[f64; STRATEGIES] {
        &self.probs
    }

    pub fn cr_means(&self) -> &[f64; STRATEGIES] {
        &self.cr_mean
    }

    fn roulette(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        STRATEGIES - 1
    }

    fn adapt(&mut self) {
        if self.generation < self.cfg.lp {
            return;
        }
        let mut ns = [0u64; STRATEGIES];
        let mut nf = [0u64; STRATEGIES];
        for g in &self.memory {
            for k in 0..STRATEGIES {
                ns[k] += g.success[k];
                nf[k] += g.failure[k];
            }
        }
        let p = strategy_probabilities(&ns, &nf, self.cfg.epsilon);
        self.probs.copy_from_slice(&p);
        for k in 0..STRATEGIES {
            let mut crs: Vec<f64> = self.memory.iter().flat_map(|g| g.cr[k].iter().copied()).collect();
            if !crs.is_empty() {
                crs.sort_by(f64::total_cmp);
                let m = crs.len();
                self.cr_mean[k] = if m % 2 == 1 {
                    crs[m / 2]
                } else {
                    0.5 * (crs[m / 2 - 1] + crs[m / 2])
                };
            }
        }
    }
}

impl Optimizer for Sade {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Sade
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let (n, d) = self.pop.x.dim();
        require_population(AlgorithmId::Sade, n)?;
        self.adapt();
        let bounds = ctx.problem.bounds();
        let best = self.pop.best_index();
        let x = &self.pop.x;
        let mut trials = Array2::zeros((n, d));
        let mut chosen = Vec::with_capacity(n);
        for i in 0..n {
            let k = self.roulette(rng);
            let f = self.cfg.f_mean + self.cfg.f_std * rng.normal();
            let cr = (self.cr_mean[k] + self.cfg.cr_std * rng.normal()).clamp(0.0, 1.0);
            let r = rng.distinct_indices(n, 5, &[i]);
            let target = x.row(i).to_vec();
            let trial = match k {
                0 => {
                    let v: Vec<f64> = (0..d)
                        .map(|j| x[[r[0], j]] + f * (x[[r[1], j]] - x[[r[2], j]]))
                        .collect();
                    binomial_crossover(&target, &v, cr, bounds, rng)
                }
                1 => {
                    let v: Vec<f64> = (0..d)
                        .map(|j| {
                            let xi = x[[i, j]];
                            xi + f * (x[[best, j]] - xi)
                                + f * (x[[r[0], j]] - x[[r[1], j]])
                                + f * (x[[r[2], j]] - x[[r[3], j]])
                        })
                        .collect();
                    binomial_crossover(&target, &v, cr, bounds, rng)
                }
                2 => {
                    let v: Vec<f64> = (0..d)
                        .map(|j| {
                            x[[r[0], j]]
                                + f * (x[[r[1], j]] - x[[r[2], j]])
                                + f * (x[[r[3], j]] - x[[r[4], j]])
                        })
                        .collect();
                    binomial_crossover(&target, &v, cr, bounds, rng)
                }
                _ => {
                    let kk = rng.uniform();
                    (0..d)
                        .map(|j| {
                            let xi = x[[i, j]];
                            let v = xi + kk * (x[[r[0], j]] - xi) + f * (x[[r[1], j]] - x[[r[2], j]]);
                            bounds.clamp_coord(j, v)
                        })
                        .collect()
                }
            };
            trials.row_mut(i).assign(&ndarray::ArrayView1::from(&trial));
            chosen.push((k, cr));
        }
        let ft = ctx.evaluate(trials.view())?;
        let replaced = greedy_replace(&mut self.pop, &trials, &ft);
        let mut record = Generation {
            success: [0; STRATEGIES],
            failure: [0; STRATEGIES],
            cr: Default::default(),
        };
        for (i, &(k, cr)) in chosen.iter().enumerate() {
            if replaced[i] {
                record.success[k] += 1;
                record.cr[k].push(cr);
            } else {
                record.failure[k] += 1;
            }
        }
        self.memory.push_back(record);
        while self.memory.len() > self.cfg.lp.max(1) {
            self.memory.pop_front();
        }
        self.generation += 1;
        self.pop.nfe_stamp = ctx.nfe;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }
}
