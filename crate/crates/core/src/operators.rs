//! Variation and mating-selection operators shared by the GA family.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::population::Bounds;
use crate::rng::RngStream;

/// SBX spread factor for a uniform draw `u`.
#[inline]
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    }
}

/// Simulated binary crossover. Each coordinate is recombined with probability 0.5 and
/// the two resulting values are exchanged between the children with probability 0.5;
/// the children are symmetric about the parents' midpoint before clamping.
pub fn sbx_crossover(
    p1: &[f64],
    p2: &[f64],
    eta: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for j in 0..p1.len() {
        if !rng.bernoulli(0.5) || (p1[j] - p2[j]).abs() <= 1e-14 {
            continue;
        }
        let beta = sbx_beta(rng.uniform(), eta);
        let (a, b) = (p1[j], p2[j]);
        let lo = bounds.clamp_coord(j, 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b));
        let hi = bounds.clamp_coord(j, 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b));
        if rng.bernoulli(0.5) {
            (c1[j], c2[j]) = (hi, lo);
        } else {
            (c1[j], c2[j]) = (lo, hi);
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation, in place. Each gene mutates with probability `pm`.
pub fn polynomial_mutation(x: &mut [f64], eta: f64, pm: f64, bounds: &Bounds, rng: &mut RngStream) {
    let pow = 1.0 / (eta + 1.0);
    for (j, v) in x.iter_mut().enumerate() {
        if !rng.bernoulli(pm) {
            continue;
        }
        let (lo, hi) = (bounds.lower()[j], bounds.upper()[j]);
        let width = hi - lo;
        let d1 = (*v - lo) / width;
        let d2 = (hi - *v) / width;
        let u = rng.uniform();
        let dq = if u < 0.5 {
            let xy = 1.0 - d1;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let xy = 1.0 - d2;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = bounds.clamp_coord(j, *v + dq * width);
    }
}

/// With probability `pc`, swaps each gene between the parents with probability 0.5.
pub fn uniform_crossover(p1: &[f64], p2: &[f64], pc: f64, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.bernoulli(pc) {
        for j in 0..p1.len() {
            if rng.bernoulli(0.5) {
                std::mem::swap(&mut c1[j], &mut c2[j]);
            }
        }
    }
    (c1, c2)
}

/// Adds `N(0, (sigma · width_j)²)` noise to each gene with probability `pm`, in place.
pub fn gaussian_mutation(x: &mut [f64], sigma: f64, pm: f64, bounds: &Bounds, rng: &mut RngStream) {
    for (j, v) in x.iter_mut().enumerate() {
        if rng.bernoulli(pm) {
            *v = bounds.clamp_coord(j, *v + sigma * bounds.width(j) * rng.normal());
        }
    }
}

/// Binary tournament: `n` winners, `better(a, b)` true when `a` beats `b`.
pub fn binary_tournament(
    n: usize,
    pool: usize,
    rng: &mut RngStream,
    better: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let a = rng.below(pool);
            let b = rng.below(pool);
            if better(b, a) {
                b
            } else {
                a
            }
        })
        .collect()
}

/// `n` parents drawn uniformly with replacement.
pub fn random_mating(n: usize, pool: usize, rng: &mut RngStream) -> Vec<usize> {
    (0..n).map(|_| rng.below(pool)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossover {
    Sbx { eta: f64, prob: f64 },
    Uniform { prob: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mutation {
    /// `prob: None` means `1 / D`.
    Polynomial { eta: f64, prob: Option<f64> },
    /// `sigma` is relative to each coordinate's width.
    Gaussian { sigma: f64, prob: Option<f64> },
}

/// A crossover followed by a mutation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variation {
    pub crossover: Crossover,
    pub mutation: Mutation,
}

impl Variation {
    /// SBX (η = 20, p = 1) with polynomial mutation (η = 20, p = 1/D).
    pub fn sbx_pm() -> Self {
        Self {
            crossover: Crossover::Sbx { eta: 20.0, prob: 1.0 },
            mutation: Mutation::Polynomial { eta: 20.0, prob: None },
        }
    }

    /// Uniform crossover with Gaussian mutation (σ = 0.1·width, p = 1/D).
    pub fn uniform_gaussian() -> Self {
        Self {
            crossover: Crossover::Uniform { prob: 1.0 },
            mutation: Mutation::Gaussian { sigma: 0.1, prob: None },
        }
    }

    pub fn mutate(&self, x: &mut [f64], bounds: &Bounds, rng: &mut RngStream) {
        let d = x.len() as f64;
        match self.mutation {
            Mutation::Polynomial { eta, prob } => {
                polynomial_mutation(x, eta, prob.unwrap_or(1.0 / d), bounds, rng)
            }
            Mutation::Gaussian { sigma, prob } => {
                gaussian_mutation(x, sigma, prob.unwrap_or(1.0 / d), bounds, rng)
            }
        }
    }

    pub fn cross(&self, p1: &[f64], p2: &[f64], bounds: &Bounds, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        match self.crossover {
            Crossover::Sbx { eta, prob } => {
                if rng.bernoulli(prob) {
                    sbx_crossover(p1, p2, eta, bounds, rng)
                } else {
                    (p1.to_vec(), p2.to_vec())
                }
            }
            Crossover::Uniform { prob } => uniform_crossover(p1, p2, prob, rng),
        }
    }

    /// One child per parent row; rows `2i` and `2i+1` are mated. An odd last
    /// row is mated with row 0 and only its first child kept.
    pub fn offspring(&self, parents: ArrayView2<'_, f64>, bounds: &Bounds, rng: &mut RngStream) -> Array2<f64> {
        let (n, d) = parents.dim();
        let mut out = Array2::zeros((n, d));
        let row = |i: usize| parents.row(i).to_vec();
        let mut i = 0;
        while i < n {
            let partner = if i + 1 < n { i + 1 } else { 0 };
            let (mut c1, mut c2) = self.cross(&row(i), &row(partner), bounds, rng);
            self.mutate(&mut c1, bounds, rng);
            out.row_mut(i).assign(&ndarray::ArrayView1::from(&c1));
            if i + 1 < n {
                self.mutate(&mut c2, bounds, rng);
                out.row_mut(i + 1).assign(&ndarray::ArrayView1::from(&c2));
            }
            i += 2;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box(d: usize) -> Bounds {
        Bounds::uniform(d, 0.0, 1.0).unwrap()
    }

    #[test]
    fn sbx_identical_parents() {
        let mut rng = RngStream::new(1, 1);
        let p = vec![0.3, 0.6, 0.9];
        let (a, b) = sbx_crossover(&p, &p, 20.0, &unit_box(3), &mut rng);
        assert_eq!(a, p);
        assert_eq!(b, p);
    }

    #[test]
    fn sbx_spread_shrinks_with_eta() {
        let b = Bounds::uniform(1, -1e6, 1e6).unwrap();
        let spread = |eta: f64| {
            let mut rng = RngStream::new(77, eta as u64);
            let mut acc = 0.0;
            let n = 10_000;
            for _ in 0..n {
                let (c1, _) = sbx_crossover(&[-1.0], &[1.0], eta, &b, &mut rng);
                acc += c1[0] * c1[0];
            }
            acc / n as f64
        };
        let (v2, v20) = (spread(2.0), spread(20.0));
        assert!(v2 > v20, "variance eta=2 {v2} vs eta=20 {v20}");
    }

    #[test]
    fn sbx_exchanges_half_of_the_crossed_genes() {
        let d = 20_000;
        let b = Bounds::uniform(d, -10.0, 10.0).unwrap();
        let mut rng = RngStream::new(9, 0);
        let (c1, _) = sbx_crossover(&vec![-1.0; d], &vec![1.0; d], 20.0, &b, &mut rng);
        let crossed = c1.iter().filter(|&&v| v != -1.0).count() as f64 / d as f64;
        let exchanged = c1.iter().filter(|&&v| v > 0.0).count() as f64 / d as f64;
        assert!((crossed - 0.5).abs() < 0.02, "{crossed}");
        assert!((exchanged - 0.25).abs() < 0.02, "{exchanged}");
    }

    #[test]
    fn zero_mutation_rate_is_identity() {
        let mut rng = RngStream::new(2, 2);
        let b = unit_box(5);
        let x = vec![0.1, 0.2, 0.3, 0.4, 0.5];
        let mut y = x.clone();
        polynomial_mutation(&mut y, 20.0, 0.0, &b, &mut rng);
        assert_eq!(x, y);
        gaussian_mutation(&mut y, 0.1, 0.0, &b, &mut rng);
        assert_eq!(x, y);
    }

    fn mutation_rate(mutate: impl Fn(&mut [f64], &mut RngStream)) -> f64 {
        let mut rng = RngStream::new(31, 0);
        let d = 100;
        let mut changed = 0usize;
        for _ in 0..1000 {
            let mut x = vec![0.5; d];
            mutate(&mut x, &mut rng);
            changed += x.iter().filter(|&&v| v != 0.5).count();
        }
        changed as f64 / 1e5
    }

    #[test]
    fn empirical_mutation_rates_match_pm() {
        let b = unit_box(100);
        let pm = 0.05;
        let sigma3 = 3.0 * (pm * (1.0 - pm) / 1e5f64).sqrt();
        let poly = mutation_rate(|x, r| polynomial_mutation(x, 20.0, pm, &b, r));
        let gauss = mutation_rate(|x, r| gaussian_mutation(x, 0.1, pm, &b, r));
        assert!((poly - pm).abs() <= sigma3, "{poly}");
        assert!((gauss - pm).abs() <= sigma3, "{gauss}");
    }

    #[test]
    fn uniform_crossover_swap_rate() {
        let mut rng = RngStream::new(8, 0);
        let p1 = vec![0.0; 100];
        let p2 = vec![1.0; 100];
        let mut swapped = 0usize;
        for _ in 0..1000 {
            let (c1, c2) = uniform_crossover(&p1, &p2, 1.0, &mut rng);
            swapped += c1.iter().filter(|&&v| v == 1.0).count();
            assert!(c1.iter().zip(&c2).all(|(a, b)| a + b == 1.0));
        }
        let rate = swapped as f64 / 1e5;
        assert!((rate - 0.5).abs() <= 3.0 * (0.25 / 1e5f64).sqrt());
        let (c1, _) = uniform_crossover(&p1, &p2, 0.0, &mut rng);
        assert_eq!(c1, p1);
    }

    #[test]
    fn offspring_count_matches_parents() {
        let mut rng = RngStream::new(4, 4);
        let b = unit_box(3);
        for n in [1, 2, 5, 8] {
            let parents = b.sample(n, &mut rng);
            for v in [Variation::sbx_pm(), Variation::uniform_gaussian()] {
                let kids = v.offspring(parents.view(), &b, &mut rng);
                assert_eq!(kids.dim(), (n, 3));
            }
        }
    }

    #[test]
    fn tournament_prefers_better() {
        let mut rng = RngStream::new(6, 0);
        let fitness = [5.0, 1.0, 3.0];
        let picks = binary_tournament(3000, 3, &mut rng, |a, b| fitness[a] < fitness[b]);
        let count = |i| picks.iter().filter(|&&p| p == i).count();
        assert!(count(1) > count(2) && count(2) > count(0));
    }

    proptest! {
        #[test]
        fn sbx_preserves_midpoint_without_clamping(
            p1 in proptest::collection::vec(-10.0f64..10.0, 6),
            p2 in proptest::collection::vec(-10.0f64..10.0, 6),
            seed in any::<u64>(),
        ) {
            let b = Bounds::uniform(6, -1e12, 1e12).unwrap();
            let mut rng = RngStream::new(seed, 0);
            let (c1, c2) = sbx_crossover(&p1, &p2, 2.0, &b, &mut rng);
            for j in 0..6 {
                let lhs = 0.5 * (c1[j] + c2[j]);
                let rhs = 0.5 * (p1[j] + p2[j]);
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn operators_stay_in_bounds(seed in any::<u64>()) {
            let b = Bounds::new(vec![-1.0, 0.0, 5.0], vec![1.0, 0.1, 6.0]).unwrap();
            let mut rng = RngStream::new(seed, 0);
            let parents = b.sample(6, &mut rng);
            for v in [Variation::sbx_pm(), Variation::uniform_gaussian()] {
                let mut hot = v;
                hot.mutation = match v.mutation {
                    Mutation::Polynomial { eta, .. } => Mutation::Polynomial { eta: eta / 10.0, prob: Some(1.0) },
                    Mutation::Gaussian { .. } => Mutation::Gaussian { sigma: 5.0, prob: Some(1.0) },
                };
                let kids = hot.offspring(parents.view(), &b, &mut rng);
                for r in kids.rows() {
                    prop_assert!(b.contains(r.as_slice().unwrap()));
                }
            }
        }
    }
}
