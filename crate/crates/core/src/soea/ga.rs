//! Generational GA with binary tournament and (μ+λ) truncation.

use ndarray::{concatenate, Axis};
use serde::{Deserialize, Serialize};

use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::operators::{binary_tournament, Crossover, Mutation, Variation};
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub crossover: Crossover,
    pub mutation: Mutation,
}

impl Default for GaConfig {
    fn default() -> Self {
        let v = Variation::sbx_pm();
        Self {
            crossover: v.crossover,
            mutation: v.mutation,
        }
    }
}

impl GaConfig {
    pub fn variation(&self) -> Variation {
        Variation {
            crossover: self.crossover,
            mutation: self.mutation,
        }
    }
}

/// Indices of the `n` smallest first-objective values, ties by index.
pub fn truncate_best(f: &ndarray::Array2<f64>, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.nrows()).collect();
    order.sort_by(|&a, &b| f[[a, 0]].total_cmp(&f[[b, 0]]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

#[derive(Clone, Debug)]
pub struct Ga {
    id: AlgorithmId,
    pub cfg: GaConfig,
    pub pop: Population,
}

impl Ga {
    pub fn new(id: AlgorithmId, cfg: GaConfig, pop: Population) -> Self {
        Self { id, cfg, pop }
    }
}

impl Optimizer for Ga {
    fn id(&self) -> AlgorithmId {
        self.id
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let f = &self.pop.f;
        let mating = binary_tournament(n, n, rng, |a, b| f[[a, 0]] < f[[b, 0]]);
        let parents = self.pop.x.select(Axis(0), &mating);
        let children = self.cfg.variation().offspring(parents.view(), ctx.problem.bounds(), rng);
        let fc = ctx.evaluate(children.view())?;
        let x = concatenate(Axis(0), &[self.pop.x.view(), children.view()]).expect("same width");
        let fall = concatenate(Axis(0), &[self.pop.f.view(), fc.view()]).expect("same width");
        let keep = truncate_best(&fall, n);
        self.pop = Population::new(x.select(Axis(0), &keep), fall.select(Axis(0), &keep), ctx.nfe)?;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::initial_population;
    use crate::backend::Backend;
    use crate::problems::{ProblemId, ProblemInstance};

    fn run(id: AlgorithmId, cfg: GaConfig, n: usize, gens: usize, seed: u64) -> Vec<f64> {
        let problem = ProblemInstance::new(ProblemId::Sphere, 2, 1).unwrap();
        let backend = Backend::serial();
        let mut ctx = StepContext::new(&problem, &backend);
        let mut rng = RngStream::new(seed, 0);
        let init = initial_population(&problem, n, &mut ctx, &mut rng).unwrap();
        let mut ga = Ga::new(id, cfg, init);
        let mut best = vec![ga.best_fitness()];
        for _ in 0..gens {
            let before = ctx.nfe;
            ga.step(&mut ctx, &mut rng).unwrap();
            assert_eq!(ctx.nfe - before, n as u64);
            assert_eq!(ga.pop.len(), n);
            best.push(ga.best_fitness());
        }
        best
    }

    #[test]
    fn sbx_pm_converges_on_small_sphere() {
        let best = run(AlgorithmId::GaSbxPm, GaConfig::default(), 16, 300, 1);
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
        assert!(*best.last().unwrap() < 1e-2, "{}", best.last().unwrap());
    }

    #[test]
    fn uniform_gaussian_is_elitist() {
        let cfg = GaConfig {
            crossover: Crossover::Uniform { prob: 1.0 },
            mutation: Mutation::Gaussian { sigma: 0.1, prob: None },
        };
        let best = run(AlgorithmId::GaUrGm, cfg, 10, 50, 2);
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
    }
}
