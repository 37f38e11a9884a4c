//! Covariance matrix adaptation evolution strategy.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::algorithm::{AlgorithmId, Optimizer, StepContext};
use crate::error::Result;
use crate::population::{Bounds, Population};
use crate::problems::ProblemInstance;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaConfig {
    /// Learning rate of the mean.
    pub cm: f64,
    /// Initial step size as a fraction of the widest coordinate.
    pub sigma0: f64,
    /// Offspring per generation; `None` uses the population size.
    pub lambda: Option<usize>,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self {
            cm: 1.0,
            sigma0: 0.3,
            lambda: None,
        }
    }
}

/// Log-decreasing positive weights `ln(μ + ½) − ln i`, normalized to sum 1.
pub fn recombination_weights(mu: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// Distribution state of one CMA-ES instance.
#[derive(Clone, Debug)]
pub struct CmaState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub c: DMatrix<f64>,
    pub p_sigma: DVector<f64>,
    pub p_c: DVector<f64>,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub lambda: usize,
    pub cm: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c1: f64,
    c_mu: f64,
    chi_n: f64,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    generation: u64,
}

impl CmaState {
    pub fn new(mean: Vec<f64>, sigma: f64, lambda: usize, cm: f64) -> Self {
        let n = mean.len();
        let nf = n as f64;
        let mu = (lambda / 2).max(1);
        let weights = recombination_weights(mu);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            mean: DVector::from_vec(mean),
            sigma,
            c: DMatrix::identity(n, n),
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            weights,
            mu_eff,
            lambda,
            cm,
            c_sigma,
            d_sigma,
            c_c,
            c1,
            c_mu,
            chi_n,
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            generation: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Floor applied to covariance eigenvalues after every update.
    pub fn eigen_floor(&self) -> f64 {
        1e-14 * self.c.trace() / self.dim() as f64
    }

    fn reset_covariance(&mut self) {
        let n = self.dim();
        self.c = DMatrix::identity(n, n);
        self.basis = DMatrix::identity(n, n);
        self.scales = DVector::from_element(n, 1.0);
        self.p_sigma.fill(0.0);
        self.p_c.fill(0.0);
    }

    /// Symmetrizes `C`, floors its spectrum and refreshes the sampling basis.
    fn decompose(&mut self) {
        if !self.c.iter().all(|v| v.is_finite()) {
            self.reset_covariance();
            return;
        }
        self.c = (&self.c + self.c.transpose()) * 0.5;
        let floor = self.eigen_floor().max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(self.c.clone());
        let vals = eig.eigenvalues.map(|v| v.max(floor));
        if !vals.iter().all(|v| v.is_finite()) || !eig.eigenvectors.iter().all(|v| v.is_finite()) {
            self.reset_covariance();
            return;
        }
        self.c = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        self.c = (&self.c + self.c.transpose()) * 0.5;
        self.basis = eig.eigenvectors;
        self.scales = vals.map(f64::sqrt);
    }

    /// Draws `λ` points `m + σ·B·D·z`, clamped into `bounds`.
    pub fn sample(&self, bounds: &Bounds, rng: &mut RngStream) -> Array2<f64> {
        let n = self.dim();
        let mut x = Array2::zeros((self.lambda, n));
        let mut z = DVector::zeros(n);
        for k in 0..self.lambda {
            for j in 0..n {
                z[j] = self.scales[j] * rng.normal();
            }
            let y = &self.basis * &z;
            for j in 0..n {
                x[[k, j]] = bounds.clamp_coord(j, self.mean[j] + self.sigma * y[j]);
            }
        }
        x
    }

    /// Updates the distribution from evaluated samples.
    pub fn update(&mut self, x: &Array2<f64>, f: &[f64]) {
        let n = self.dim();
        let mu = self.weights.len();
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        let ys: Vec<DVector<f64>> = order[..mu]
            .iter()
            .map(|&k| DVector::from_iterator(n, (0..n).map(|j| (x[[k, j]] - self.mean[j]) / self.sigma)))
            .collect();
        let mut y_w = DVector::zeros(n);
        for (w, y) in self.weights.iter().zip(&ys) {
            y_w.axpy(*w, y, 1.0);
        }
        self.mean.axpy(self.cm * self.sigma, &y_w, 1.0);

        let inv_scales = self.scales.map(|s| 1.0 / s);
        let c_inv_sqrt_y = &self.basis * inv_scales.component_mul(&(self.basis.transpose() * &y_w));
        let cs = self.c_sigma;
        self.p_sigma = &self.p_sigma * (1.0 - cs) + c_inv_sqrt_y * (cs * (2.0 - cs) * self.mu_eff).sqrt();
        let g = (self.generation + 1) as f64;
        let ps_norm = self.p_sigma.norm();
        let hsig = ps_norm / (1.0 - (1.0 - cs).powf(2.0 * g)).sqrt() / self.chi_n < 1.4 + 2.0 / (n as f64 + 1.0);
        let cc = self.c_c;
        let h = if hsig { 1.0 } else { 0.0 };
        self.p_c = &self.p_c * (1.0 - cc) + &y_w * (h * (cc * (2.0 - cc) * self.mu_eff).sqrt());

        let mut rank_mu = DMatrix::zeros(n, n);
        for (w, y) in self.weights.iter().zip(&ys) {
            rank_mu.ger(*w, y, y, 1.0);
        }
        let rank_one = &self.p_c * self.p_c.transpose();
        let delta = (1.0 - h) * cc * (2.0 - cc);
        self.c = &self.c * (1.0 - self.c1 - self.c_mu + self.c1 * delta) + rank_one * self.c1 + rank_mu * self.c_mu;

        self.sigma *= ((cs / self.d_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        if !self.sigma.is_finite() {
            self.sigma = f64::MAX.sqrt();
        }
        self.generation += 1;
        self.decompose();
    }
}

#[derive(Clone, Debug)]
pub struct CmaEs {
    pub cfg: CmaConfig,
    pub state: CmaState,
    pub pop: Population,
    best: f64,
}

impl CmaEs {
    pub fn new(cfg: CmaConfig, problem: &ProblemInstance, initial: Population) -> Result<Self> {
        let bounds = problem.bounds();
        let lambda = cfg.lambda.unwrap_or(initial.len()).max(2);
        let state = CmaState::new(bounds.midpoint(), cfg.sigma0 * bounds.max_width(), lambda, cfg.cm);
        let best = crate::metrics::best_fitness(&initial);
        Ok(Self {
            cfg,
            state,
            pop: initial,
            best,
        })
    }
}

impl Optimizer for CmaEs {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::CmaEs
    }

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()> {
        let x = self.state.sample(ctx.problem.bounds(), rng);
        let f = ctx.evaluate(x.view())?;
        let col: Vec<f64> = f.column(0).to_vec();
        self.state.update(&x, &col);
        self.best = col.iter().copied().fold(self.best, f64::min);
        self.pop = Population::new(x, f, ctx.nfe)?;
        Ok(())
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn evaluations_per_step(&self) -> u64 {
        self.state.lambda as u64
    }

    fn best_fitness(&self) -> f64 {
        self.best
    }
}
