//! HypE: Monte Carlo hypervolume-contribution fitness.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::common::{breed, fill_by_fronts, mating_pool, merge, subset, Mating};
use super::non_dominated_sort;
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::metrics::{nadir_point, reference_from_nadir};
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypeConfig {
    pub samples: usize,
    pub variation: Variation,
    pub mating: Mating,
}

impl Default for HypeConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            variation: Variation::sbx_pm(),
            mating: Mating::Tournament,
        }
    }
}

/// `α_i = (1/i) · Π_{l=1}^{i−1} (k − l) / (n − l)` for `i = 1..=k`.
fn alphas(n: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let mut prod = 1.0;
    for i in 1..=k.min(n) {
        if i > 1 {
            let l = (i - 1) as f64;
            prod *= (k as f64 - l) / (n as f64 - l);
        }
        out[i] = prod / i as f64;
    }
    out
}

/// Monte Carlo estimate of each row's expected hypervolume loss when `k` rows are
/// removed at random: samples from the box between the rows' ideal point and
/// `reference` are credited `α_c` to each of their `c` dominators.
pub fn hype_fitness(f: &Array2<f64>, reference: &[f64], k: usize, samples: usize, rng: &mut RngStream) -> Vec<f64> {
    let (n, m) = f.dim();
    let mut fit = vec![0.0; n];
    let inside: Vec<usize> = (0..n)
        .filter(|&i| (0..m).all(|j| f[[i, j]] < reference[j]))
        .collect();
    if inside.is_empty() || samples == 0 {
        return fit;
    }
    let lower: Vec<f64> = (0..m)
        .map(|j| inside.iter().map(|&i| f[[i, j]]).fold(f64::INFINITY, f64::min))
        .collect();
    let volume: f64 = (0..m).map(|j| reference[j] - lower[j]).product();
    let alpha = alphas(n, k);
    let pts: Vec<Vec<f64>> = inside.iter().map(|&i| f.row(i).to_vec()).collect();
    let mut s = vec![0.0; m];
    let mut hit = Vec::with_capacity(pts.len());
    for _ in 0..samples {
        for j in 0..m {
            s[j] = rng.uniform_in(lower[j], reference[j]);
        }
        hit.clear();
        for (p, pt) in pts.iter().enumerate() {
            if pt.iter().zip(&s).all(|(a, b)| a <= b) {
                hit.push(p);
            }
        }
        let c = hit.len();
        if c > 0 && c <= k {
            for &p in &hit {
                fit[inside[p]] += alpha[c];
            }
        }
    }
    let w = volume / samples as f64;
    fit.iter_mut().for_each(|v| *v *= w);
    fit
}

/// Whole fronts first; the split front loses its lowest-fitness member one at a time.
pub fn hype_select(f: &Array2<f64>, n: usize, samples: usize, rng: &mut RngStream) -> Vec<usize> {
    let fronts = non_dominated_sort(f.view());
    let (mut chosen, last) = fill_by_fronts(&fronts, n);
    if let Some(mut last) = last {
        let reference = reference_from_nadir(&nadir_point(f.view()));
        let need = n - chosen.len();
        while last.len() > need {
            let sub = f.select(ndarray::Axis(0), &last);
            let fit = hype_fitness(&sub, &reference, last.len() - need, samples, rng);
            let worst = (0..last.len())
                .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)))
                .expect("non-empty");
            last.remove(worst);
        }
        chosen.extend(last);
    }
    chosen
}

#[derive(Clone, Debug)]
pub struct Hype {
    pub cfg: HypeConfig,
    pub pop: Population,
}

impl Hype {
    pub fn new(cfg: HypeConfig, pop: Population) -> Self {
        Self { cfg, pop }
    }
}

impl Optimizer for Hype {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Hype
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let reference = reference_from_nadir(&nadir_point(self.pop.f.view()));
        let fit = hype_fitness(&self.pop.f, &reference, n, self.cfg.samples, rng);
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| fit[a] > fit[b]);
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let keep = hype_select(&f, n, self.cfg.samples, rng);
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

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn singleton_gets_its_dominated_volume() {
        let f = array![[0.2, 0.5]];
        let mut rng = RngStream::new(1, 0);
        let fit = hype_fitness(&f, &[1.0, 1.0], 1, 10_000, &mut rng);
        let exact = 0.8 * 0.5;
        // The sampling box is the dominated rectangle itself, so the estimate is exact.
        assert!((fit[0] - exact).abs() < 1e-12);
        // A point beyond the reference point earns nothing.
        let f = array![[0.2, 0.5], [1.5, 0.1]];
        let fit = hype_fitness(&f, &[1.0, 1.0], 2, 10_000, &mut rng);
        assert_eq!(fit[1], 0.0);
    }

    #[test]
    fn monte_carlo_share_within_three_sigma() {
        // Two incomparable points: exclusive parts plus half of the overlap each.
        let f = array![[0.0, 0.5], [0.5, 0.0]];
        let reference = [1.0, 1.0];
        let samples = 100_000;
        let mut rng = RngStream::new(2, 0);
        let fit = hype_fitness(&f, &reference, 2, samples, &mut rng);
        let exact = 0.25 + 0.5 * 0.25;
        let p: f64 = exact / 1.0;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((fit[0] - exact).abs() <= 3.0 * sigma, "{}", fit[0]);
    }

    #[test]
    fn duplicate_halves_the_share() {
        let mut rng = RngStream::new(3, 0);
        let single = hype_fitness(&array![[0.3, 0.4]], &[1.0, 1.0], 2, 5000, &mut rng);
        let twin = hype_fitness(&array![[0.3, 0.4], [0.3, 0.4]], &[1.0, 1.0], 2, 5000, &mut rng);
        assert!((twin[0] - single[0] / 2.0).abs() < 1e-12);
        assert_eq!(twin[0], twin[1]);
    }

    #[test]
    fn dominating_point_survives() {
        let f = array![[0.0, 0.0], [0.5, 1.0], [1.0, 0.5], [0.8, 0.8], [0.2, 2.0]];
        let mut rng = RngStream::new(4, 0);
        for n in 1..=5 {
            let keep = hype_select(&f, n, 2000, &mut rng);
            assert_eq!(keep.len(), n);
            assert!(keep.contains(&0));
        }
    }
}
