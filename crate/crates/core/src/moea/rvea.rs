//! RVEA: reference-vector guided selection by angle-penalized distance.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::common::{breed, mating_pool, merge, subset, Mating};
use super::{das_dennis_vectors, divisions_for};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::metrics::{ideal_point, nadir_point};
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RveaConfig {
    pub alpha: f64,
    /// Reference vectors are rescaled every `fr` fraction of the budget.
    pub fr: f64,
    pub variation: Variation,
    pub mating: Mating,
}

impl Default for RveaConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            fr: 0.1,
            variation: Variation::sbx_pm(),
            mating: Mating::Random,
        }
    }
}

pub(crate) fn unit_rows(a: &Array2<f64>) -> Array2<f64> {
    let mut out = a.clone();
    for mut r in out.rows_mut() {
        let n = r.dot(&r).sqrt();
        if n > 0.0 {
            r.mapv_inplace(|v| v / n);
        }
    }
    out
}

/// Index of the unit vector with the largest cosine to each row, and that cosine.
pub fn associate_by_angle(fp: &Array2<f64>, unit: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    let mut which = Vec::with_capacity(fp.nrows());
    let mut cos = Vec::with_capacity(fp.nrows());
    for p in fp.rows() {
        let norm = p.dot(&p).sqrt();
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, v) in unit.rows().into_iter().enumerate() {
            let c = if norm > 0.0 { p.dot(&v) / norm } else { 1.0 };
            if c > best.0 {
                best = (c, k);
            }
        }
        which.push(best.1);
        cos.push(best.0.clamp(-1.0, 1.0));
    }
    (which, cos)
}

/// Smallest angle from each vector to any other.
pub fn min_neighbor_angles(unit: &Array2<f64>) -> Vec<f64> {
    let k = unit.nrows();
    (0..k)
        .map(|i| {
            let mut best: f64 = -1.0;
            for j in 0..k {
                if j != i {
                    best = best.max(unit.row(i).dot(&unit.row(j)));
                }
            }
            if k < 2 {
                1.0
            } else {
                best.clamp(-1.0, 1.0).acos().max(1e-12)
            }
        })
        .collect()
}

/// Angle-penalized distance of every row to its associated vector.
pub fn apd(f: &Array2<f64>, unit: &Array2<f64>, progress: f64, alpha: f64) -> (Vec<usize>, Vec<f64>) {
    let m = f.ncols() as f64;
    let z = ideal_point(f.view());
    let fp = Array2::from_shape_fn(f.raw_dim(), |(i, j)| f[[i, j]] - z[j]);
    let (which, cos) = associate_by_angle(&fp, unit);
    let gamma = min_neighbor_angles(unit);
    let penalty = m * progress.clamp(0.0, 1.0).powf(alpha);
    let values = (0..f.nrows())
        .map(|i| {
            let theta = cos[i].acos();
            let r = fp.row(i);
            (1.0 + penalty * theta / gamma[which[i]]) * r.dot(&r).sqrt()
        })
        .collect();
    (which, values)
}

/// One minimal-APD survivor per occupied niche, then refilled to `n` with the
/// remaining rows in ascending APD order.
pub fn rvea_select(f: &Array2<f64>, unit: &Array2<f64>, progress: f64, alpha: f64, n: usize) -> Vec<usize> {
    let (which, values) = apd(f, unit, progress, alpha);
    let mut best: Vec<Option<usize>> = vec![None; unit.nrows()];
    for i in 0..f.nrows() {
        let slot = &mut best[which[i]];
        if slot.is_none_or(|b| values[i] < values[b]) {
            *slot = Some(i);
        }
    }
    let mut chosen: Vec<usize> = best.into_iter().flatten().collect();
    let mut taken = vec![false; f.nrows()];
    for &i in &chosen {
        taken[i] = true;
    }
    if chosen.len() > n {
        chosen.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        chosen.truncate(n);
    } else if chosen.len() < n {
        let mut rest: Vec<usize> = (0..f.nrows()).filter(|&i| !taken[i]).collect();
        rest.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        chosen.extend(rest.into_iter().take(n - chosen.len()));
    }
    chosen
}

/// Lattice vectors and their unit-length adapted copy.
#[derive(Clone, Debug)]
pub(crate) struct AdaptiveVectors {
    base: Array2<f64>,
    pub unit: Array2<f64>,
    bucket: i64,
}

impl AdaptiveVectors {
    pub fn new(m: usize, n: usize) -> Self {
        let base = das_dennis_vectors(m, divisions_for(m, n)).into_matrix();
        let unit = unit_rows(&base);
        Self { base, unit, bucket: 0 }
    }

    /// Rescales by the objective ranges of `f` whenever progress enters a new `fr` bucket.
    pub fn maybe_adapt(&mut self, f: &Array2<f64>, progress: f64, fr: f64) {
        if fr <= 0.0 {
            return;
        }
        let bucket = (progress / fr).floor() as i64;
        if bucket <= self.bucket {
            return;
        }
        self.bucket = bucket;
        let lo = ideal_point(f.view());
        let hi = nadir_point(f.view());
        let scaled = Array2::from_shape_fn(self.base.raw_dim(), |(k, j)| {
            self.base[[k, j]] * (hi[j] - lo[j]).max(1e-12)
        });
        self.unit = unit_rows(&scaled);
    }
}

#[derive(Clone, Debug)]
pub struct Rvea {
    pub cfg: RveaConfig,
    pub pop: Population,
    vectors: Option<AdaptiveVectors>,
}

impl Rvea {
    pub fn new(cfg: RveaConfig, pop: Population) -> Self {
        Self { cfg, pop, vectors: None }
    }

    pub fn reference_vectors(&self) -> Option<&Array2<f64>> {
        self.vectors.as_ref().map(|v| &v.unit)
    }
}

impl Optimizer for Rvea {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Rvea
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let vectors = self
            .vectors
            .get_or_insert_with(|| AdaptiveVectors::new(self.pop.objectives(), n));
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| a < b);
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let keep = rvea_select(&f, &vectors.unit, ctx.progress, self.cfg.alpha, n);
        self.pop = subset(&x, &f, &keep, ctx.nfe);
        vectors.maybe_adapt(&self.pop.f, ctx.progress, self.cfg.fr);
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
    fn zero_progress_is_pure_distance() {
        let f = array![[1.0, 3.0], [2.0, 2.0], [4.0, 1.0]];
        let unit = unit_rows(&das_dennis_vectors(2, 3).into_matrix());
        let (_, values) = apd(&f, &unit, 0.0, 2.0);
        let z = [1.0, 1.0];
        for i in 0..3 {
            let d = ((f[[i, 0]] - z[0]).powi(2) + (f[[i, 1]] - z[1]).powi(2)).sqrt();
            assert!((values[i] - d).abs() < 1e-12);
        }
    }

    #[test]
    fn association_matches_min_angle() {
        let mut rng = RngStream::new(6, 0);
        let unit = unit_rows(&das_dennis_vectors(3, 5).into_matrix());
        let p = Array2::from_shape_fn((50, 3), |_| rng.uniform());
        let (which, _) = associate_by_angle(&p, &unit);
        for i in 0..50 {
            let r = p.row(i);
            let angle = |k: usize| {
                let v = unit.row(k);
                (r.dot(&v) / (r.dot(&r).sqrt() * v.dot(&v).sqrt())).clamp(-1.0, 1.0).acos()
            };
            let brute = (0..unit.nrows()).min_by(|&a, &b| angle(a).total_cmp(&angle(b))).unwrap();
            assert!((angle(which[i]) - angle(brute)).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_niches_are_refilled() {
        // Everything sits near one direction; only one niche is occupied.
        let f = array![[0.0, 1.0], [0.01, 1.1], [0.02, 1.2], [0.03, 1.3]];
        let unit = unit_rows(&das_dennis_vectors(2, 3).into_matrix());
        let keep = rvea_select(&f, &unit, 0.5, 2.0, 3);
        assert_eq!(keep.len(), 3);
        assert_eq!(keep[0], 0);
    }
}
