//! Differential evolution, rand/1/bin with greedy replacement.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::{Error, Result};
use crate::population::{Bounds, Population};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    pub f: f64,
    pub cr: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { f: 0.5, cr: 0.9 }
    }
}

pub(crate) fn require_population(algorithm: AlgorithmId, n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InsufficientPopulation {
            algorithm: algorithm.as_str(),
            needed: 4,
            got: n,
        });
    }
    Ok(())
}

/// `x[r1] + f·(x[r2] − x[r3])`.
pub fn mutant_rand_1(x: ArrayView2<'_, f64>, r: [usize; 3], f: f64) -> Vec<f64> {
    (0..x.ncols())
        .map(|j| x[[r[0], j]] + f * (x[[r[1], j]] - x[[r[2], j]]))
        .collect()
}

/// Binomial crossover with one forced mutant coordinate; the result is clamped.
pub fn binomial_crossover(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Vec<f64> {
    let d = target.len();
    let jrand = rng.below(d);
    (0..d)
        .map(|j| {
            let take = rng.uniform() < cr || j == jrand;
            bounds.clamp_coord(j, if take { mutant[j] } else { target[j] })
        })
        .collect()
}

/// Keeps each trial whose fitness is no worse than its parent's; returns the replaced mask.
pub(crate) fn greedy_replace(pop: &mut Population, trials: &Array2<f64>, ft: &Array2<f64>) -> Vec<bool> {
    (0..pop.len())
        .map(|i| {
            let better = ft[[i, 0]] <= pop.f[[i, 0]];
            if better {
                pop.x.row_mut(i).assign(&trials.row(i));
                pop.f.row_mut(i).assign(&ft.row(i));
            }
            better
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct De {
    pub cfg: DeConfig,
    pub pop: Population,
}

impl De {
    pub fn new(cfg: DeConfig, pop: Population) -> Result<Self> {
        require_population(AlgorithmId::De, pop.len())?;
        Ok(Self { cfg, pop })
    }
}

impl Optimizer for De {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::De
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let (n, d) = self.pop.x.dim();
        require_population(AlgorithmId::De, n)?;
        let bounds = ctx.problem.bounds();
        let mut trials = Array2::zeros((n, d));
        for i in 0..n {
            let r = rng.distinct_indices(n, 3, &[i]);
            let mutant = mutant_rand_1(self.pop.x.view(), [r[0], r[1], r[2]], self.cfg.f);
            let target = self.pop.x.row(i).to_vec();
            let trial = binomial_crossover(&target, &mutant, self.cfg.cr, bounds, rng);
            trials.row_mut(i).assign(&ndarray::ArrayView1::from(&trial));
        }
        let ft = ctx.evaluate(trials.view())?;
        greedy_replace(&mut self.pop, &trials, &ft);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::initial_population;
    use crate::backend::Backend;
    use crate::problems::{ProblemId, ProblemInstance};
    use ndarray::array;

    #[test]
    fn zero_scale_gives_base_vector() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]];
        assert_eq!(mutant_rand_1(x.view(), [2, 0, 3], 0.0), vec![5.0, 6.0]);
        assert_eq!(mutant_rand_1(x.view(), [0, 3, 1], 0.5), vec![3.0, 4.0]);
    }

    #[test]
    fn full_crossover_copies_clamped_mutant() {
        let b = Bounds::uniform(5, -1.0, 1.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let target = [0.0; 5];
        let mutant = [0.5, 2.0, -3.0, 0.9, -0.1];
        let trial = binomial_crossover(&target, &mutant, 1.0, &b, &mut rng);
        for j in 0..5 {
            assert_eq!(trial[j], mutant[j].clamp(-1.0, 1.0));
        }
        let trial = binomial_crossover(&target, &mutant, 0.0, &b, &mut rng);
        assert_eq!(trial.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn small_population_is_rejected() {
        let pop = Population::new(Array2::zeros((3, 2)), Array2::zeros((3, 1)), 3).unwrap();
        assert!(matches!(
            De::new(DeConfig::default(), pop),
            Err(Error::InsufficientPopulation { needed: 4, got: 3, .. })
        ));
    }

    #[test]
    fn selection_never_worsens_an_individual() {
        let problem = ProblemInstance::new(ProblemId::Griewank, 8, 1).unwrap();
        let backend = Backend::serial();
        let mut ctx = StepContext::new(&problem, &backend);
        let mut rng = RngStream::new(6, 0);
        let init = initial_population(&problem, 12, &mut ctx, &mut rng).unwrap();
        let mut de = De::new(DeConfig::default(), init).unwrap();
        for _ in 0..30 {
            let before = de.pop.f.clone();
            de.step(&mut ctx, &mut rng).unwrap();
            for i in 0..12 {
                assert!(de.pop.f[[i, 0]] <= before[[i, 0]]);
            }
        }
        assert_eq!(ctx.nfe, 12 * 31);
    }
}
