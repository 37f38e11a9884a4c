//! SPEA2: strength-based fitness with k-th nearest neighbour density.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::common::{breed, mating_pool, merge, row, subset, Mating};
use super::dominates;
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spea2Config {
    pub variation: Variation,
    pub mating: Mating,
}

impl Default for Spea2Config {
    fn default() -> Self {
        Self {
            variation: Variation::sbx_pm(),
            mating: Mating::Tournament,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Raw fitness `R(i)`: summed strengths of every row dominating `i`.
pub fn spea2_raw_fitness(f: &Array2<f64>) -> Vec<f64> {
    let n = f.nrows();
    let mut strength = vec![0u64; n];
    let mut dominators: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(row(f, i), row(f, j)) {
                strength[i] += 1;
                dominators[j].push(i);
            }
        }
    }
    dominators
        .iter()
        .map(|ds| ds.iter().map(|&d| strength[d] as f64).sum())
        .collect()
}

/// `R(i) + 1 / (σ_k(i) + 2)` with `k = ⌊√n⌋`.
pub fn spea2_fitness(f: &Array2<f64>) -> Vec<f64> {
    let n = f.nrows();
    let raw = spea2_raw_fitness(f);
    let k = ((n as f64).sqrt() as usize).max(1);
    let mut dists = Vec::with_capacity(n);
    (0..n)
        .map(|i| {
            dists.clear();
            dists.extend((0..n).filter(|&j| j != i).map(|j| distance(row(f, i), row(f, j))));
            let sigma = if dists.is_empty() {
                0.0
            } else {
                let kk = (k - 1).min(dists.len() - 1);
                *dists.select_nth_unstable_by(kk, f64::total_cmp).1
            };
            raw[i] + 1.0 / (sigma + 2.0)
        })
        .collect()
}

/// Iteratively drops the candidate whose sorted neighbour-distance list is
/// lexicographically smallest until `n` remain.
pub fn spea2_truncate(f: &Array2<f64>, candidates: &[usize], n: usize) -> Vec<usize> {
    let c = candidates.len();
    if c <= n {
        return candidates.to_vec();
    }
    let lists: Vec<Vec<(f64, usize)>> = (0..c)
        .map(|a| {
            let mut l: Vec<(f64, usize)> = (0..c)
                .filter(|&b| b != a)
                .map(|b| (distance(row(f, candidates[a]), row(f, candidates[b])), b))
                .collect();
            l.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            l
        })
        .collect();
    let mut alive = vec![true; c];
    // Per-candidate offset of the first live entry, advanced lazily.
    let mut start = vec![0usize; c];
    let mut remaining = c;
    while remaining > n {
        for a in 0..c {
            if alive[a] {
                while start[a] < lists[a].len() && !alive[lists[a][start[a]].1] {
                    start[a] += 1;
                }
            }
        }
        let less = |a: usize, b: usize| -> bool {
            let (la, lb) = (&lists[a], &lists[b]);
            let (mut i, mut j) = (start[a], start[b]);
            loop {
                while i < la.len() && !alive[la[i].1] {
                    i += 1;
                }
                while j < lb.len() && !alive[lb[j].1] {
                    j += 1;
                }
                match (i < la.len(), j < lb.len()) {
                    (true, true) => {
                        if la[i].0 < lb[j].0 {
                            return true;
                        }
                        if la[i].0 > lb[j].0 {
                            return false;
                        }
                        i += 1;
                        j += 1;
                    }
                    _ => return false,
                }
            }
        };
        let mut worst = usize::MAX;
        for a in 0..c {
            if !alive[a] {
                continue;
            }
            if worst == usize::MAX || less(a, worst) {
                worst = a;
            }
        }
        alive[worst] = false;
        remaining -= 1;
    }
    (0..c).filter(|&a| alive[a]).map(|a| candidates[a]).collect()
}

/// Environmental selection: non-dominated rows (fitness < 1), filled by fitness
/// or truncated by neighbour distance to exactly `n`.
pub fn spea2_select(f: &Array2<f64>, n: usize) -> (Vec<usize>, Vec<f64>) {
    let fit = spea2_fitness(f);
    let nd: Vec<usize> = (0..f.nrows()).filter(|&i| fit[i] < 1.0).collect();
    let keep = if nd.len() > n {
        spea2_truncate(f, &nd, n)
    } else {
        let mut order: Vec<usize> = (0..f.nrows()).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        order.truncate(n);
        order
    };
    let kept_fit = keep.iter().map(|&i| fit[i]).collect();
    (keep, kept_fit)
}

#[derive(Clone, Debug)]
pub struct Spea2 {
    pub cfg: Spea2Config,
    pub pop: Population,
    fitness: Vec<f64>,
}

impl Spea2 {
    pub fn new(cfg: Spea2Config, pop: Population) -> Self {
        let fitness = spea2_fitness(&pop.f);
        Self { cfg, pop, fitness }
    }
}

impl Optimizer for Spea2 {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Spea2
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let fit = &self.fitness;
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| fit[a] < fit[b]);
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let (keep, kept_fit) = spea2_select(&f, n);
        self.pop = subset(&x, &f, &keep, ctx.nfe);
        self.fitness = kept_fit;
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
    use ndarray::array;

    #[test]
    fn chain_raw_fitness() {
        let f = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert_eq!(spea2_raw_fitness(&f), vec![0.0, 2.0, 3.0]);
        let fit = spea2_fitness(&f);
        assert!(fit[0] < 1.0);
    }

    #[test]
    fn non_dominated_rows_have_fitness_below_one() {
        let f = array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0]];
        let fit = spea2_fitness(&f);
        for i in 0..3 {
            assert!(fit[i] < 1.0);
        }
        assert!(fit[3] >= 1.0);
    }

    #[test]
    fn truncation_drops_duplicates_first() {
        let f = array![[0.0, 1.0], [0.5, 0.5], [0.5, 0.5], [1.0, 0.0], [0.25, 0.75]];
        let keep = spea2_truncate(&f, &[0, 1, 2, 3, 4], 4);
        assert_eq!(keep.len(), 4);
        assert!(keep.contains(&1) ^ keep.contains(&2));
        let keep = spea2_select(&f, 3).0;
        assert_eq!(keep.len(), 3);
    }

    #[test]
    fn dominating_point_survives() {
        let f = array![[0.0, 0.0], [1.0, 2.0], [2.0, 1.0], [1.5, 1.5], [3.0, 0.5]];
        for n in 1..=5 {
            let (keep, _) = spea2_select(&f, n);
            assert_eq!(keep.len(), n);
            assert!(keep.contains(&0));
        }
    }
}
