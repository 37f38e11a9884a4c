//! NSGA-III: reference-point niching on the split front.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::common::{breed, fill_by_fronts, mating_pool, merge, subset, Mating};
use super::{das_dennis_vectors, divisions_for, non_dominated_sort};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Nsga3Config {
    pub variation: Variation,
    pub mating: Mating,
    /// Lattice divisions; `None` picks the largest lattice not exceeding N.
    pub divisions: Option<usize>,
}

impl Default for Nsga3Config {
    fn default() -> Self {
        Self {
            variation: Variation::sbx_pm(),
            mating: Mating::Random,
            divisions: None,
        }
    }
}

/// Normalizes objectives by the ideal point and the hyperplane through the
/// achievement-scalarizing extreme points; falls back to per-objective maxima.
pub fn normalize(f: &Array2<f64>) -> Array2<f64> {
    let (n, m) = f.dim();
    let ideal: Vec<f64> = (0..m).map(|j| f.column(j).fold(f64::INFINITY, |a, &b| a.min(b))).collect();
    let shifted = Array2::from_shape_fn((n, m), |(i, j)| f[[i, j]] - ideal[j]);
    let mut extremes = DMatrix::zeros(m, m);
    for axis in 0..m {
        let mut best = (f64::INFINITY, 0);
        for i in 0..n {
            let asf = (0..m)
                .map(|j| shifted[[i, j]] / if j == axis { 1.0 } else { 1e-6 })
                .fold(f64::NEG_INFINITY, f64::max);
            if asf < best.0 {
                best = (asf, i);
            }
        }
        for j in 0..m {
            extremes[(axis, j)] = shifted[[best.1, j]];
        }
    }
    let maxima: Vec<f64> = (0..m)
        .map(|j| shifted.column(j).fold(0.0f64, |a, &b| a.max(b)))
        .collect();
    let intercepts = extremes
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .map(|a| a.iter().map(|v| 1.0 / v).collect::<Vec<f64>>())
        .filter(|icp| icp.iter().all(|v| v.is_finite() && *v > 1e-10));
    let intercepts = intercepts.unwrap_or_else(|| maxima.iter().map(|&v| if v > 1e-10 { v } else { 1.0 }).collect());
    Array2::from_shape_fn((n, m), |(i, j)| shifted[[i, j]] / intercepts[j])
}

/// Nearest reference line (by perpendicular distance) for every row, with that distance.
pub fn associate(fn_: &Array2<f64>, refs: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    let norms: Vec<f64> = refs.rows().into_iter().map(|r| r.dot(&r)).collect();
    let mut which = Vec::with_capacity(fn_.nrows());
    let mut dist = Vec::with_capacity(fn_.nrows());
    for p in fn_.rows() {
        let pp = p.dot(&p);
        let mut best = (f64::INFINITY, 0);
        for (k, w) in refs.rows().into_iter().enumerate() {
            let t = p.dot(&w);
            let d2 = (pp - t * t / norms[k]).max(0.0);
            if d2 < best.0 {
                best = (d2, k);
            }
        }
        which.push(best.1);
        dist.push(best.0.sqrt());
    }
    (which, dist)
}

/// NSGA-III environmental selection of `n` rows from `f`.
pub fn nsga3_select(f: &Array2<f64>, n: usize, refs: &Array2<f64>, rng: &mut RngStream) -> Vec<usize> {
    let fronts = non_dominated_sort(f.view());
    let (mut chosen, last) = fill_by_fronts(&fronts, n);
    let Some(last) = last else {
        return chosen;
    };
    let mut considered = chosen.clone();
    considered.extend_from_slice(&last);
    let fn_ = normalize(&f.select(Axis(0), &considered));
    let (which, dist) = associate(&fn_, refs);
    let k = refs.nrows();
    let mut niche = vec![0usize; k];
    for &w in &which[..chosen.len()] {
        niche[w] += 1;
    }
    let offset = chosen.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (p, _) in last.iter().enumerate() {
        members[which[offset + p]].push(p);
    }
    let mut active: Vec<bool> = vec![true; k];
    while chosen.len() < n {
        let min = (0..k).filter(|&j| active[j]).map(|j| niche[j]).min().expect("some niche left");
        let candidates: Vec<usize> = (0..k).filter(|&j| active[j] && niche[j] == min).collect();
        let j = candidates[rng.below(candidates.len())];
        if members[j].is_empty() {
            active[j] = false;
            continue;
        }
        let pick = if niche[j] == 0 {
            let (pos, _) = members[j]
                .iter()
                .enumerate()
                .min_by(|a, b| dist[offset + *a.1].total_cmp(&dist[offset + *b.1]))
                .expect("non-empty");
            pos
        } else {
            rng.below(members[j].len())
        };
        let p = members[j].swap_remove(pick);
        chosen.push(last[p]);
        niche[j] += 1;
    }
    chosen
}

#[derive(Clone, Debug)]
pub struct Nsga3 {
    pub cfg: Nsga3Config,
    pub pop: Population,
    refs: Option<Array2<f64>>,
}

impl Nsga3 {
    pub fn new(cfg: Nsga3Config, pop: Population) -> Self {
        Self { cfg, pop, refs: None }
    }

    fn reference_points(&mut self) -> &Array2<f64> {
        let (n, m) = (self.pop.len(), self.pop.objectives());
        let h = self.cfg.divisions.unwrap_or_else(|| divisions_for(m, n));
        self.refs.get_or_insert_with(|| das_dennis_vectors(m, h).into_matrix())
    }
}

impl Optimizer for Nsga3 {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Nsga3
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let ranks = super::pareto_ranks(self.pop.f.view());
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| ranks[a] < ranks[b]);
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let refs = self.reference_points().clone();
        let keep = nsga3_select(&f, n, &refs, rng);
        self.pop = subset(&x, &f, &keep, ctx.nfe);
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }
}
