//! Particle swarm optimization with inertia weight.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::population::{Bounds, Population};
use crate::problems::ProblemInstance;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    /// Velocity limit as a fraction of each coordinate's width.
    pub velocity_clamp: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            w: 0.6,
            c1: 2.5,
            c2: 0.8,
            velocity_clamp: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pso {
    pub cfg: PsoConfig,
    pub pop: Population,
    pub v: Array2<f64>,
    pub pbest_x: Array2<f64>,
    pub pbest_f: Array1<f64>,
    pub gbest_x: Array1<f64>,
    pub gbest_f: f64,
    vmax: Vec<f64>,
    bounds: Bounds,
}

impl Pso {
    pub fn new(cfg: PsoConfig, problem: &ProblemInstance, pop: Population) -> Result<Self> {
        let bounds = problem.bounds().clone();
        let vmax = (0..bounds.dim()).map(|j| cfg.velocity_clamp * bounds.width(j)).collect();
        let best = pop.best_index();
        Ok(Self {
            v: Array2::zeros(pop.x.raw_dim()),
            pbest_x: pop.x.clone(),
            pbest_f: pop.f.column(0).to_owned(),
            gbest_x: pop.x.row(best).to_owned(),
            gbest_f: pop.f[[best, 0]],
            cfg,
            pop,
            vmax,
            bounds,
        })
    }
}

impl Optimizer for Pso {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::Pso
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let (n, d) = self.pop.x.dim();
        let PsoConfig { w, c1, c2, .. } = self.cfg;
        for i in 0..n {
            for j in 0..d {
                let x = self.pop.x[[i, j]];
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                let vmax = self.vmax[j];
                let v = w * self.v[[i, j]]
                    + c1 * r1 * (self.pbest_x[[i, j]] - x)
                    + c2 * r2 * (self.gbest_x[j] - x);
                let v = v.clamp(-vmax, vmax);
                self.v[[i, j]] = v;
                self.pop.x[[i, j]] = self.bounds.clamp_coord(j, x + v);
            }
        }
        self.pop.f = ctx.evaluate(self.pop.x.view())?;
        self.pop.nfe_stamp = ctx.nfe;
        for i in 0..n {
            let fi = self.pop.f[[i, 0]];
            if fi <= self.pbest_f[i] {
                self.pbest_f[i] = fi;
                self.pbest_x.row_mut(i).assign(&self.pop.x.row(i));
            }
        }
        let (bi, bf) = self
            .pbest_f
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &f)| if f < acc.1 { (i, f) } else { acc });
        if bf <= self.gbest_f {
            self.gbest_f = bf;
            self.gbest_x.assign(&self.pbest_x.index_axis(Axis(0), bi));
        }
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.pop.len() as u64
    }

    fn best_fitness(&self) -> f64 {
        self.gbest_f
    }
}
