//! LMOCSO: competitive swarm with an external non-dominated archive.

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::common::{non_dominated_indices, pbi_scalarize, row};
use super::rvea::{associate_by_angle, rvea_select, AdaptiveVectors};
use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::metrics::ideal_point;
use crate::operators::polynomial_mutation;
use crate::population::Population;
use crate::rng::RngStream;
use crate::soea::compete;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmocsoConfig {
    /// APD exponent of the reference-vector guided selection.
    pub alpha: f64,
    pub fr: f64,
    /// PBI penalty of the convergence score used in pairwise competitions.
    pub theta: f64,
    pub eta_m: f64,
    /// Per-gene mutation probability; `None` means `1 / D`.
    pub pm: Option<f64>,
}

impl Default for LmocsoConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            fr: 0.1,
            theta: 5.0,
            eta_m: 20.0,
            pm: None,
        }
    }
}

/// PBI of each row along its nearest (by angle) reference direction.
pub fn convergence_scores(f: &Array2<f64>, unit: &Array2<f64>, theta: f64) -> Vec<f64> {
    let z = ideal_point(f.view());
    let fp = Array2::from_shape_fn(f.raw_dim(), |(i, j)| f[[i, j]] - z[j]);
    let (which, _) = associate_by_angle(&fp, unit);
    (0..f.nrows())
        .map(|i| pbi_scalarize(row(f, i), row(unit, which[i]), &z, theta))
        .collect()
}

/// Non-dominated merge of `x`/`f` rows into the archive, truncated to `capacity`
/// by repeatedly thinning the most crowded reference niche.
pub fn update_archive(archive: &Population, x: &Array2<f64>, f: &Array2<f64>, unit: &Array2<f64>, capacity: usize) -> Population {
    let ax = concatenate(Axis(0), &[archive.x.view(), x.view()]).expect("same width");
    let af = concatenate(Axis(0), &[archive.f.view(), f.view()]).expect("same width");
    // Drop exact duplicates so the archive holds distinct objective vectors.
    let mut nd = non_dominated_indices(af.view());
    nd.sort_by(|&a, &b| {
        row(&af, a)
            .iter()
            .zip(row(&af, b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    nd.dedup_by(|a, b| row(&af, *a) == row(&af, *b));
    nd.sort_unstable();
    if nd.len() > capacity {
        let sub = af.select(Axis(0), &nd);
        let z = ideal_point(sub.view());
        let fp = Array2::from_shape_fn(sub.raw_dim(), |(i, j)| sub[[i, j]] - z[j]);
        let (which, _) = associate_by_angle(&fp, unit);
        let dist: Vec<f64> = fp.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
        let mut niches: Vec<Vec<usize>> = vec![Vec::new(); unit.nrows()];
        for (i, &w) in which.iter().enumerate() {
            niches[w].push(i);
        }
        for members in &mut niches {
            members.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        }
        let mut remaining = nd.len();
        while remaining > capacity {
            let (k, _) = niches
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
                .expect("niches exist");
            niches[k].pop();
            remaining -= 1;
        }
        let mut keep: Vec<usize> = niches.into_iter().flatten().map(|i| nd[i]).collect();
        keep.sort_unstable();
        nd = keep;
    }
    Population {
        x: ax.select(Axis(0), &nd),
        f: af.select(Axis(0), &nd),
        nfe_stamp: archive.nfe_stamp,
    }
}

#[derive(Clone, Debug)]
pub struct Lmocso {
    pub cfg: LmocsoConfig,
    pub pop: Population,
    pub v: Array2<f64>,
    pub archive: Population,
    vectors: Option<AdaptiveVectors>,
}

impl Lmocso {
    pub fn new(cfg: LmocsoConfig, pop: Population) -> Self {
        let nd = non_dominated_indices(pop.f.view());
        let archive = pop.select(&nd);
        Self {
            v: Array2::zeros(pop.x.raw_dim()),
            cfg,
            pop,
            archive,
            vectors: None,
        }
    }
}

impl Optimizer for Lmocso {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Lmocso
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let (n, d) = self.pop.x.dim();
        let bounds = ctx.problem.bounds();
        let vectors = self
            .vectors
            .get_or_insert_with(|| AdaptiveVectors::new(self.pop.objectives(), n));
        let score = convergence_scores(&self.pop.f, &vectors.unit, self.cfg.theta);
        let pairs = compete(n, rng, |a, b| score[a] < score[b]);
        let pm = self.cfg.pm.unwrap_or(1.0 / d as f64);
        let mut moved_x = Array2::zeros((pairs.len(), d));
        let mut moved_v = Array2::zeros((pairs.len(), d));
        for (k, &(w, l)) in pairs.iter().enumerate() {
            let mut x_new = vec![0.0; d];
            for j in 0..d {
                let (r0, r1) = (rng.uniform(), rng.uniform());
                let v_old = self.v[[l, j]];
                let v = r0 * v_old + r1 * (self.pop.x[[w, j]] - self.pop.x[[l, j]]);
                moved_v[[k, j]] = v;
                x_new[j] = bounds.clamp_coord(j, self.pop.x[[l, j]] + v + r0 * (v - v_old));
            }
            polynomial_mutation(&mut x_new, self.cfg.eta_m, pm, bounds, rng);
            moved_x.row_mut(k).assign(&ndarray::ArrayView1::from(&x_new));
        }
        let moved_f = ctx.evaluate(moved_x.view())?;

        let px = concatenate(Axis(0), &[self.pop.x.view(), moved_x.view()]).expect("same width");
        let pf = concatenate(Axis(0), &[self.pop.f.view(), moved_f.view()]).expect("same width");
        let pv = concatenate(Axis(0), &[self.v.view(), moved_v.view()]).expect("same width");
        let keep = rvea_select(&pf, &vectors.unit, ctx.progress, self.cfg.alpha, n);
        self.pop = Population {
            x: px.select(Axis(0), &keep),
            f: pf.select(Axis(0), &keep),
            nfe_stamp: ctx.nfe,
        };
        self.v = pv.select(Axis(0), &keep);
        self.archive = update_archive(&self.archive, &moved_x, &moved_f, &vectors.unit, n);
        self.archive.nfe_stamp = ctx.nfe;
        vectors.maybe_adapt(&self.pop.f, ctx.progress, self.cfg.fr);
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        (self.pop.len() / 2) as u64
    }

    fn result_objectives(&self) -> Array2<f64> {
        self.archive.f.clone()
    }
}
