//! Competitive swarm optimizer: pairwise winner/loser learning.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsoConfig {
    /// Weight of the pull toward the population mean.
    pub phi: f64,
}

impl Default for CsoConfig {
    fn default() -> Self {
        Self { phi: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct Cso {
    pub cfg: CsoConfig,
    pub pop: Population,
    pub v: Array2<f64>,
    best: f64,
}

impl Cso {
    pub fn new(cfg: CsoConfig, pop: Population) -> Self {
        let best = crate::metrics::best_fitness(&pop);
        Self {
            v: Array2::zeros(pop.x.raw_dim()),
            cfg,
            pop,
            best,
        }
    }
}

/// Random disjoint pairs as `(winner, loser)`; with odd `n` one index sits out.
pub(crate) fn compete(
    n: usize,
    rng: &mut RngStream,
    better: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let perm = rng.permutation(n);
    perm.chunks_exact(2)
        .map(|p| {
            if better(p[1], p[0]) {
                (p[1], p[0])
            } else {
                (p[0], p[1])
            }
        })
        .collect()
}

impl Optimizer for Cso {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Cso
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let (n, d) = self.pop.x.dim();
        let bounds = ctx.problem.bounds();
        let mean = self.pop.x.mean_axis(Axis(0)).expect("non-empty population");
        let f = &self.pop.f;
        let pairs = compete(n, rng, |a, b| f[[a, 0]] < f[[b, 0]]);
        let mut moved = Array2::zeros((pairs.len(), d));
        for (k, &(w, l)) in pairs.iter().enumerate() {
            for j in 0..d {
                let (r1, r2, r3) = (rng.uniform(), rng.uniform(), rng.uniform());
                let xl = self.pop.x[[l, j]];
                let v = r1 * self.v[[l, j]]
                    + r2 * (self.pop.x[[w, j]] - xl)
                    + self.cfg.phi * r3 * (mean[j] - xl);
                self.v[[l, j]] = v;
                moved[[k, j]] = bounds.clamp_coord(j, xl + v);
            }
        }
        let fl = ctx.evaluate(moved.view())?;
        for (k, &(_, l)) in pairs.iter().enumerate() {
            self.pop.x.row_mut(l).assign(&moved.row(k));
            self.pop.f.row_mut(l).assign(&fl.row(k));
            self.best = self.best.min(fl[[k, 0]]);
        }
        self.pop.nfe_stamp = ctx.nfe;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        (self.pop.len() / 2) as u64
    }

    fn best_fitness(&self) -> f64 {
        self.best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::initial_population;
    use crate::backend::Backend;
    use crate::problems::{ProblemId, ProblemInstance};

    #[test]
    fn identical_individuals_stay_put() {
        let problem = ProblemInstance::new(ProblemId::Ackley, 4, 1).unwrap();
        let backend = Backend::serial();
        let mut ctx = StepContext::new(&problem, &backend);
        let x = Array2::from_elem((6, 4), 1.25);
        let f = problem.evaluate_batch(x.view()).unwrap();
        let mut cso = Cso::new(CsoConfig { phi: 0.3 }, Population::new(x.clone(), f, 6).unwrap());
        let mut rng = RngStream::new(1, 0);
        cso.step(&mut ctx, &mut rng).unwrap();
        assert_eq!(cso.pop.x, x);
    }

    #[test]
    fn counts_and_monotone_best() {
        let problem = ProblemInstance::new(ProblemId::Rosenbrock, 6, 1).unwrap();
        let backend = Backend::serial();
        for n in [7usize, 10] {
            let mut ctx = StepContext::new(&problem, &backend);
            let mut rng = RngStream::new(n as u64, 0);
            let init = initial_population(&problem, n, &mut ctx, &mut rng).unwrap();
            let mut cso = Cso::new(CsoConfig::default(), init);
            let mut prev = crate::metrics::best_fitness(&cso.pop);
            for _ in 0..40 {
                let before = ctx.nfe;
                cso.step(&mut ctx, &mut rng).unwrap();
                assert_eq!(ctx.nfe - before, (n / 2) as u64);
                let now = crate::metrics::best_fitness(&cso.pop);
                assert!(now <= prev);
                prev = now;
            }
        }
    }
}
