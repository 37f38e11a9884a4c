//! NSGA-II: rank and crowding-distance selection.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::common::{breed, fill_by_fronts, mating_pool, merge, subset, Mating};
use super::{crowding_distance, non_dominated_sort};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Nsga2Config {
    pub variation: Variation,
    pub mating: Mating,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            variation: Variation::sbx_pm(),
            mating: Mating::Tournament,
        }
    }
}

/// Survivors of a merged pool: whole fronts first, the split front by descending
/// crowding distance. Returns survivor indices with their ranks and crowding.
pub fn nsga2_select(f: &Array2<f64>, n: usize) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let fronts = non_dominated_sort(f.view());
    let mut rank = vec![0; f.nrows()];
    let mut crowd = vec![0.0; f.nrows()];
    let mut filled = 0;
    for (r, front) in fronts.iter().enumerate() {
        let sub = f.select(Axis(0), front);
        for (k, d) in crowding_distance(sub.view()).into_iter().enumerate() {
            rank[front[k]] = r;
            crowd[front[k]] = d;
        }
        filled += front.len();
        if filled >= n {
            break;
        }
    }
    let (mut chosen, last) = fill_by_fronts(&fronts, n);
    if let Some(mut last) = last {
        last.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
        chosen.extend_from_slice(&last[..n - chosen.len()]);
    }
    let r = chosen.iter().map(|&i| rank[i]).collect();
    let c = chosen.iter().map(|&i| crowd[i]).collect();
    (chosen, r, c)
}

#[derive(Clone, Debug)]
pub struct Nsga2 {
    pub cfg: Nsga2Config,
    pub pop: Population,
    rank: Vec<usize>,
    crowd: Vec<f64>,
}

impl Nsga2 {
    pub fn new(cfg: Nsga2Config, pop: Population) -> Self {
        let n = pop.len();
        let (keep, rank, crowd) = nsga2_select(&pop.f, n);
        let pop = pop.select(&keep);
        Self { cfg, pop, rank, crowd }
    }
}

impl Optimizer for Nsga2 {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Nsga2
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let (rank, crowd) = (&self.rank, &self.crowd);
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| {
            rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b])
        });
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let (keep, rank, crowd) = nsga2_select(&f, n);
        self.pop = subset(&x, &f, &keep, ctx.nfe);
        self.rank = rank;
        self.crowd = crowd;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }
}
