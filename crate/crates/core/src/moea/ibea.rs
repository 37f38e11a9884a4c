//! IBEA: indicator-based environmental selection.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::common::{breed, mating_pool, merge, subset, Mating};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::backend::Backend;
use crate::error::Result;
use crate::operators::Variation;
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    /// Additive epsilon indicator.
    Epsilon,
    /// Pairwise hypervolume difference.
    Hypervolume,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbeaConfig {
    pub kappa: f64,
    pub indicator: Indicator,
    pub variation: Variation,
    pub mating: Mating,
}

impl Default for IbeaConfig {
    fn default() -> Self {
        Self {
            kappa: 0.05,
            indicator: Indicator::Epsilon,
            variation: Variation::sbx_pm(),
            mating: Mating::Tournament,
        }
    }
}

/// `e^x`, accurate to about 1e-13 relative, written so loops over it vectorize.
#[inline(always)]
pub(crate) fn fast_exp(x: f64) -> f64 {
    let x = x.clamp(-700.0, 700.0);
    let t = x * std::f64::consts::LOG2_E;
    let k = t.round();
    let r = (t - k) * std::f64::consts::LN_2;
    // Taylor series of e^r for |r| <= ln2/2.
    let mut p = 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let scale = f64::from_bits(((k as i64 + 1023) as u64) << 52);
    p * scale
}

/// Objectives rescaled to `[0, 1]` per column, stored column-major for the pair loops.
struct Normalized {
    cols: Vec<Vec<f64>>,
    n: usize,
}

impl Normalized {
    fn new(f: &Array2<f64>) -> Self {
        let (n, m) = f.dim();
        let cols = (0..m)
            .map(|j| {
                let c = f.column(j);
                let lo = c.fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = c.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let w = if hi > lo { hi - lo } else { 1.0 };
                c.iter().map(|v| (v - lo) / w).collect()
            })
            .collect();
        Self { cols, n }
    }

    #[inline]
    fn eps(&self, a: usize, b: usize) -> f64 {
        let mut e = f64::NEG_INFINITY;
        for c in &self.cols {
            e = e.max(c[a] - c[b]);
        }
        e
    }

    fn volume(&self, a: usize) -> f64 {
        self.cols.iter().map(|c| 1.1 - c[a]).product()
    }

    fn hv_indicator(&self, a: usize, b: usize) -> f64 {
        let a_dominates = self.cols.iter().all(|c| c[a] <= c[b]);
        if a_dominates {
            self.volume(b) - self.volume(a)
        } else {
            let joint: f64 = self.cols.iter().map(|c| 1.1 - c[a].max(c[b])).product();
            let union = self.volume(a) + self.volume(b) - joint;
            union - self.volume(a)
        }
    }

    fn indicator(&self, kind: Indicator, a: usize, b: usize) -> f64 {
        match kind {
            Indicator::Epsilon => self.eps(a, b),
            Indicator::Hypervolume => self.hv_indicator(a, b),
        }
    }
}

/// Branch-free minimum that compiles to a packed min instruction.
#[inline(always)]
fn min2(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

/// Per-column factors for the additive ε indicator. With `s < 0`,
/// `exp(s · max_k(a_k − b_k)) = min_k exp(s·a_k) · exp(−s·b_k)`, so every pairwise
/// term is a product of precomputed exponentials.
struct EpsTables {
    e: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
}

impl EpsTables {
    fn new(norm: &Normalized, scale: f64) -> Option<Self> {
        // Normalized values lie in [0, 1]; keep both factors representable.
        if !(scale.abs() <= 600.0) {
            return None;
        }
        let e = norm.cols.iter().map(|c| c.iter().map(|&v| (scale * v).exp()).collect()).collect();
        let a = norm.cols.iter().map(|c| c.iter().map(|&v| (-scale * v).exp()).collect()).collect();
        Some(Self { e, a })
    }

    /// `exp(scale · I(j, i))`.
    #[inline]
    fn term(&self, j: usize, i: usize) -> f64 {
        self.e
            .iter()
            .zip(&self.a)
            .map(|(e, a)| e[j] * a[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_j exp(scale · I(j, i))` over all `j`.
    fn column_sum(&self, i: usize) -> f64 {
        if self.e.len() == 2 {
            let (e0, e1) = (&self.e[0], &self.e[1]);
            let (a0, a1) = (self.a[0][i], self.a[1][i]);
            let mut lanes = [0.0f64; 8];
            let (c0, c1) = (e0.chunks_exact(8), e1.chunks_exact(8));
            let tail: f64 = c0
                .remainder()
                .iter()
                .zip(c1.remainder())
                .map(|(&x, &y)| (x * a0).min(y * a1))
                .sum();
            for (x, y) in c0.zip(c1) {
                for k in 0..8 {
                    lanes[k] += min2(x[k] * a0, y[k] * a1);
                }
            }
            lanes.iter().sum::<f64>() + tail
        } else {
            (0..self.e[0].len()).map(|j| self.term(j, i)).sum()
        }
    }

    /// Adds `exp(scale · I(w, i))` to every `fit[i]` and returns the new minimum's index.
    fn remove(&self, w: usize, fit: &mut [f64]) -> usize {
        let mut best = 0;
        let mut best_v = f64::INFINITY;
        if self.e.len() == 2 {
            let (ew0, ew1) = (self.e[0][w], self.e[1][w]);
            let (a0, a1) = (&self.a[0], &self.a[1]);
            for ((v, &x), &y) in fit.iter_mut().zip(a0).zip(a1) {
                *v += min2(ew0 * x, ew1 * y);
            }
            let mut lanes = [f64::INFINITY; 8];
            let chunks = fit.chunks_exact(8);
            for &v in chunks.remainder() {
                best_v = best_v.min(v);
            }
            for c in chunks {
                for k in 0..8 {
                    lanes[k] = if c[k] < lanes[k] { c[k] } else { lanes[k] };
                }
            }
            best_v = lanes.iter().fold(best_v, |a, &b| a.min(b));
            best = fit.iter().position(|&v| v == best_v).unwrap_or(0);
        } else {
            for (i, v) in fit.iter_mut().enumerate() {
                *v += self.term(w, i);
                if *v < best_v {
                    best_v = *v;
                    best = i;
                }
            }
        }
        best
    }
}

/// Indicator fitness `F(i) = Σ_{j≠i} −exp(−I(j, i) / (c·κ))` of every row and the scale `c`.
pub fn ibea_fitness(f: &Array2<f64>, kappa: f64, indicator: Indicator) -> (Vec<f64>, f64) {
    ibea_fitness_with(&Backend::serial(), f, kappa, indicator)
}

pub fn ibea_fitness_with(
    backend: &Backend,
    f: &Array2<f64>,
    kappa: f64,
    indicator: Indicator,
) -> (Vec<f64>, f64) {
    let norm = Normalized::new(f);
    let (fit, c, _) = fitness_and_tables(backend, &norm, kappa, indicator);
    (fit, c)
}

fn scale_of(norm: &Normalized, backend: &Backend, kappa: f64, indicator: Indicator) -> (f64, f64) {
    let n = norm.n;
    let c = match indicator {
        // Over all pairs, max |max_k (a_k − b_k)| is the largest column range.
        Indicator::Epsilon => norm
            .cols
            .iter()
            .map(|col| {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max),
        Indicator::Hypervolume => backend
            .map_indices(n, |i| {
                (0..n).map(|j| norm.indicator(indicator, j, i).abs()).fold(0.0, f64::max)
            })
            .into_iter()
            .fold(0.0, f64::max),
    };
    let scale = if c > 0.0 { -1.0 / (c * kappa) } else { 0.0 };
    (c, scale)
}

fn fitness_and_tables(
    backend: &Backend,
    norm: &Normalized,
    kappa: f64,
    indicator: Indicator,
) -> (Vec<f64>, f64, Option<EpsTables>) {
    let (c, scale) = scale_of(norm, backend, kappa, indicator);
    let tables = match indicator {
        Indicator::Epsilon => EpsTables::new(norm, scale),
        Indicator::Hypervolume => None,
    };
    let fit = match &tables {
        Some(t) => backend.map_indices(norm.n, |i| -(t.column_sum(i) - t.term(i, i))),
        None => backend.map_indices(norm.n, |i| fitness_of(norm, indicator, i, scale)),
    };
    (fit, c, tables)
}

fn fitness_of(norm: &Normalized, indicator: Indicator, i: usize, scale: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..norm.n {
        acc -= fast_exp(norm.indicator(indicator, j, i) * scale);
    }
    // Remove the j = i term.
    acc + fast_exp(norm.indicator(indicator, i, i) * scale)
}

/// Removes the worst-fitness row one at a time, updating the others, until `n` remain.
pub fn ibea_select(backend: &Backend, f: &Array2<f64>, n: usize, kappa: f64, indicator: Indicator) -> (Vec<usize>, Vec<f64>) {
    let total = f.nrows();
    let norm = Normalized::new(f);
    let (mut fit, c, tables) = fitness_and_tables(backend, &norm, kappa, indicator);
    if total <= n {
        return ((0..total).collect(), fit);
    }
    let scale = if c > 0.0 { -1.0 / (c * kappa) } else { 0.0 };
    let mut alive = vec![true; total];
    let argmin = |fit: &[f64]| (0..fit.len()).fold(0, |b, i| if fit[i] < fit[b] { i } else { b });
    let mut worst = argmin(&fit);
    for step in 0..(total - n) {
        alive[worst] = false;
        // Removed rows sit at +inf so they are never the minimum again.
        fit[worst] = f64::INFINITY;
        let next = match &tables {
            Some(t) => t.remove(worst, &mut fit),
            None => {
                for (i, v) in fit.iter_mut().enumerate() {
                    *v += fast_exp(norm.indicator(indicator, worst, i) * scale);
                }
                argmin(&fit)
            }
        };
        if step + 1 < total - n {
            worst = next;
        }
    }
    let keep: Vec<usize> = (0..total).filter(|&i| alive[i]).collect();
    let kept = keep.iter().map(|&i| fit[i]).collect();
    (keep, kept)
}

#[derive(Clone, Debug)]
pub struct Ibea {
    pub cfg: IbeaConfig,
    pub pop: Population,
    fitness: Vec<f64>,
}

impl Ibea {
    pub fn new(cfg: IbeaConfig, pop: Population) -> Self {
        let (fitness, _) = ibea_fitness(&pop.f, cfg.kappa, cfg.indicator);
        Self { cfg, pop, fitness }
    }
}

impl Optimizer for Ibea {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Ibea
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let n = self.pop.len();
        let fit = &self.fitness;
        let parents = mating_pool(self.cfg.mating, n, rng, |a, b| fit[a] > fit[b]);
        let xo = breed(&self.pop, &parents, &self.cfg.variation, ctx.problem.bounds(), rng);
        let fo = ctx.evaluate(xo.view())?;
        let (x, f) = merge(&self.pop, &xo, &fo);
        let (keep, kept) = ibea_select(ctx.backend, &f, n, self.cfg.kappa, self.cfg.indicator);
        self.pop = subset(&x, &f, &keep, ctx.nfe);
        self.fitness = kept;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }
}
