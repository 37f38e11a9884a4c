//! Common optimizer interface, algorithm identifiers and configuration.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::moea::{
    HypeConfig, IbeaConfig, LmocsoConfig, MoeadConfig, Nsga2Config, Nsga3Config, RveaConfig,
    Spea2Config,
};
use crate::operators::{Crossover, Mutation};
use crate::population::Population;
use crate::problems::ProblemInstance;
use crate::rng::RngStream;
use crate::soea::{CmaConfig, CsoConfig, DeConfig, GaConfig, IpopConfig, PsoConfig, SadeConfig};

/// Everything a step needs besides its own state and random stream.
pub struct StepContext<'a> {
    pub problem: &'a ProblemInstance,
    pub backend: &'a Backend,
    /// Generations completed before this step.
    pub generation: u64,
    /// Cumulative evaluations, advanced by [`StepContext::evaluate`].
    pub nfe: u64,
    /// Fraction of the budget consumed, in `[0, 1]`.
    pub progress: f64,
}

impl<'a> StepContext<'a> {
    pub fn new(problem: &'a ProblemInstance, backend: &'a Backend) -> Self {
        Self {
            problem,
            backend,
            generation: 0,
            nfe: 0,
            progress: 0.0,
        }
    }

    /// Evaluates rows of `x` on the backend and charges them to the FE counter.
    pub fn evaluate(&mut self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let f = self.backend.evaluate(self.problem, x)?;
        self.nfe += x.nrows() as u64;
        Ok(f)
    }
}

/// A population-based optimizer advanced one generation at a time.
pub trait Optimizer: Send {
    fn id(&self) -> AlgorithmId;

    fn step(&mut self, ctx: &mut StepContext<'_>, rng: &mut RngStream) -> Result<()>;

    /// Current working population.
    fn population(&self) -> &Population;

    /// Evaluations the next call to `step` will spend.
    fn evaluations_per_step(&self) -> u64;

    /// Best objective value seen so far (single-objective algorithms).
    fn best_fitness(&self) -> f64 {
        crate::metrics::best_fitness(self.population())
    }

    /// Objective vectors reported as the algorithm's result set.
    fn result_objectives(&self) -> Array2<f64> {
        self.population().f.clone()
    }
}

macro_rules! algorithm_ids {
    ($($variant:ident => $name:literal, $multi:literal;)*) => {
        /// The sixteen implemented algorithms.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(into = "String", try_from = "String")]
        pub enum AlgorithmId {
            $($variant,)*
        }

        impl AlgorithmId {
            pub const ALL: [AlgorithmId; 16] = [$(AlgorithmId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(AlgorithmId::$variant => $name,)*
                }
            }

            pub fn is_multi_objective(self) -> bool {
                match self {
                    $(AlgorithmId::$variant => $multi,)*
                }
            }
        }
    };
}

algorithm_ids! {
    Pso => "pso", false;
    Cso => "cso", false;
    De => "de", false;
    Sade => "sade", false;
    CmaEs => "cmaes", false;
    IpopCmaEs => "ipop-cmaes", false;
    GaSbxPm => "ga-sbx-pm", false;
    GaUrGm => "ga-ur-gm", false;
    Nsga2 => "nsga2", true;
    Nsga3 => "nsga3", true;
    Rvea => "rvea", true;
    Moead => "moead", true;
    Hype => "hype", true;
    Lmocso => "lmocso", true;
    Spea2 => "spea2", true;
    Ibea => "ibea", true;
}

impl AlgorithmId {
    /// Fails when the algorithm cannot optimize a problem with `objectives` objectives.
    pub fn check_arity(self, problem: &ProblemInstance) -> Result<()> {
        let multi = problem.objectives() >= 2;
        if multi != self.is_multi_objective() {
            return Err(Error::IncompatibleArity {
                algorithm: self.as_str().to_string(),
                problem: problem.id().as_str().to_string(),
                objectives: problem.objectives(),
            });
        }
        Ok(())
    }

    /// Smallest population the algorithm accepts.
    pub fn min_population(self) -> usize {
        match self {
            AlgorithmId::De | AlgorithmId::Sade => 4,
            AlgorithmId::Cso | AlgorithmId::Lmocso | AlgorithmId::CmaEs | AlgorithmId::IpopCmaEs => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = match key.as_str() {
            "cma-es" => "cmaes",
            "ipop" | "ipop-cma-es" | "ipopcmaes" => "ipop-cmaes",
            "nsga-ii" => "nsga2",
            "nsga-iii" => "nsga3",
            "moea/d" | "moea-d" => "moead",
            other => other,
        }
        .to_string();
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == key)
            .ok_or(Error::UnknownId {
                kind: "algorithm",
                id: s.to_string(),
            })
    }
}

impl From<AlgorithmId> for String {
    fn from(a: AlgorithmId) -> Self {
        a.as_str().to_string()
    }
}

impl TryFrom<String> for AlgorithmId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Resolved per-algorithm configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    Pso(PsoConfig),
    Cso(CsoConfig),
    De(DeConfig),
    Sade(SadeConfig),
    Cmaes(CmaConfig),
    IpopCmaes(IpopConfig),
    GaSbxPm(GaConfig),
    GaUrGm(GaConfig),
    Nsga2(Nsga2Config),
    Nsga3(Nsga3Config),
    Rvea(RveaConfig),
    Moead(MoeadConfig),
    Hype(HypeConfig),
    Lmocso(LmocsoConfig),
    Spea2(Spea2Config),
    Ibea(IbeaConfig),
}

impl AlgorithmConfig {
    pub fn defaults(id: AlgorithmId) -> Self {
        match id {
            AlgorithmId::Pso => Self::Pso(PsoConfig::default()),
            AlgorithmId::Cso => Self::Cso(CsoConfig::default()),
            AlgorithmId::De => Self::De(DeConfig::default()),
            AlgorithmId::Sade => Self::Sade(SadeConfig::default()),
            AlgorithmId::CmaEs => Self::Cmaes(CmaConfig::default()),
            AlgorithmId::IpopCmaEs => Self::IpopCmaes(IpopConfig::default()),
            AlgorithmId::GaSbxPm => Self::GaSbxPm(GaConfig::default()),
            AlgorithmId::GaUrGm => Self::GaUrGm(GaConfig {
                crossover: Crossover::Uniform { prob: 1.0 },
                mutation: Mutation::Gaussian {
                    sigma: 0.1,
                    prob: None,
                },
            }),
            AlgorithmId::Nsga2 => Self::Nsga2(Nsga2Config::default()),
            AlgorithmId::Nsga3 => Self::Nsga3(Nsga3Config::default()),
            AlgorithmId::Rvea => Self::Rvea(RveaConfig::default()),
            AlgorithmId::Moead => Self::Moead(MoeadConfig::default()),
            AlgorithmId::Hype => Self::Hype(HypeConfig::default()),
            AlgorithmId::Lmocso => Self::Lmocso(LmocsoConfig::default()),
            AlgorithmId::Spea2 => Self::Spea2(Spea2Config::default()),
            AlgorithmId::Ibea => Self::Ibea(IbeaConfig::default()),
        }
    }

    /// Defaults for `id` with the keys of `overrides` (a JSON object) merged on top.
    pub fn resolve(id: AlgorithmId, overrides: Option<&Value>) -> Result<Self> {
        let mut base = serde_json::to_value(Self::defaults(id))?;
        if let Some(ov) = overrides {
            match ov {
                Value::Null => {}
                Value::Object(map) => {
                    let obj = base.as_object_mut().expect("tagged config is an object");
                    for (k, v) in map {
                        if k == "algorithm" {
                            continue;
                        }
                        if !obj.contains_key(k) {
                            return Err(Error::Config(format!(
                                "unknown parameter `{k}` for {id}"
                            )));
                        }
                        obj.insert(k.clone(), v.clone());
                    }
                }
                _ => return Err(Error::Config("config overrides must be a JSON object".into())),
            }
        }
        serde_json::from_value(base).map_err(|e| Error::Config(format!("{id}: {e}")))
    }

    pub fn id(&self) -> AlgorithmId {
        match self {
            Self::Pso(_) => AlgorithmId::Pso,
            Self::Cso(_) => AlgorithmId::Cso,
            Self::De(_) => AlgorithmId::De,
            Self::Sade(_) => AlgorithmId::Sade,
            Self::Cmaes(_) => AlgorithmId::CmaEs,
            Self::IpopCmaes(_) => AlgorithmId::IpopCmaEs,
            Self::GaSbxPm(_) => AlgorithmId::GaSbxPm,
            Self::GaUrGm(_) => AlgorithmId::GaUrGm,
            Self::Nsga2(_) => AlgorithmId::Nsga2,
            Self::Nsga3(_) => AlgorithmId::Nsga3,
            Self::Rvea(_) => AlgorithmId::Rvea,
            Self::Moead(_) => AlgorithmId::Moead,
            Self::Hype(_) => AlgorithmId::Hype,
            Self::Lmocso(_) => AlgorithmId::Lmocso,
            Self::Spea2(_) => AlgorithmId::Spea2,
            Self::Ibea(_) => AlgorithmId::Ibea,
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        crate::problems::sha256_hex(text.as_bytes())
    }

    /// Builds an optimizer around an already evaluated initial population.
    pub fn build(
        &self,
        problem: &ProblemInstance,
        initial: Population,
    ) -> Result<Box<dyn Optimizer>> {
        let id = self.id();
        id.check_arity(problem)?;
        if initial.len() < id.min_population() {
            return Err(Error::InsufficientPopulation {
                algorithm: id.as_str(),
                needed: id.min_population(),
                got: initial.len(),
            });
        }
        use crate::{moea, soea};
        Ok(match self {
            Self::Pso(c) => Box::new(soea::Pso::new(c.clone(), problem, initial)?),
            Self::Cso(c) => Box::new(soea::Cso::new(c.clone(), initial)),
            Self::De(c) => Box::new(soea::De::new(c.clone(), initial)?),
            Self::Sade(c) => Box::new(soea::Sade::new(c.clone(), initial)?),
            Self::Cmaes(c) => Box::new(soea::CmaEs::new(c.clone(), problem, initial)?),
            Self::IpopCmaes(c) => Box::new(soea::IpopCmaEs::new(c.clone(), problem, initial)?),
            Self::GaSbxPm(c) => Box::new(soea::Ga::new(AlgorithmId::GaSbxPm, c.clone(), initial)),
            Self::GaUrGm(c) => Box::new(soea::Ga::new(AlgorithmId::GaUrGm, c.clone(), initial)),
            Self::Nsga2(c) => Box::new(moea::Nsga2::new(c.clone(), initial)),
            Self::Nsga3(c) => Box::new(moea::Nsga3::new(c.clone(), initial)),
            Self::Rvea(c) => Box::new(moea::Rvea::new(c.clone(), initial)),
            Self::Moead(c) => Box::new(moea::Moead::new(c.clone(), problem, initial)?),
            Self::Hype(c) => Box::new(moea::Hype::new(c.clone(), initial)),
            Self::Lmocso(c) => Box::new(moea::Lmocso::new(c.clone(), initial)),
            Self::Spea2(c) => Box::new(moea::Spea2::new(c.clone(), initial)),
            Self::Ibea(c) => Box::new(moea::Ibea::new(c.clone(), initial)),
        })
    }
}

/// Fills `x` with uniform samples, evaluates them and wraps the result.
pub fn initial_population(
    problem: &ProblemInstance,
    n: usize,
    ctx: &mut StepContext<'_>,
    rng: &mut RngStream,
) -> Result<Population> {
    let x = problem.bounds().sample(n, rng);
    let f = ctx.evaluate(x.view())?;
    Population::new(x, f, ctx.nfe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemId;

    #[test]
    fn ids_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.as_str().parse::<AlgorithmId>().unwrap(), id);
            let v = serde_json::to_value(id).unwrap();
            assert_eq!(serde_json::from_value::<AlgorithmId>(v).unwrap(), id);
            assert_eq!(AlgorithmConfig::defaults(id).id(), id);
        }
        assert_eq!("NSGA-II".parse::<AlgorithmId>().unwrap(), AlgorithmId::Nsga2);
        assert!("sa".parse::<AlgorithmId>().is_err());
        assert_eq!(AlgorithmId::ALL.iter().filter(|a| a.is_multi_objective()).count(), 8);
    }

    #[test]
    fn overrides_merge_onto_defaults() {
        let ov = serde_json::json!({"w": 1.0, "c1": 0.0});
        let AlgorithmConfig::Pso(c) = AlgorithmConfig::resolve(AlgorithmId::Pso, Some(&ov)).unwrap()
        else {
            panic!("wrong variant")
        };
        assert_eq!((c.w, c.c1, c.c2), (1.0, 0.0, 0.8));
        let bad = serde_json::json!({"omega": 1.0});
        assert!(AlgorithmConfig::resolve(AlgorithmId::Pso, Some(&bad)).is_err());
        assert!(AlgorithmConfig::resolve(AlgorithmId::Pso, Some(&serde_json::json!([1]))).is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = AlgorithmConfig::defaults(AlgorithmId::De);
        let b = AlgorithmConfig::resolve(AlgorithmId::De, Some(&serde_json::json!({"f": 0.7}))).unwrap();
        assert_eq!(a.hash(), AlgorithmConfig::defaults(AlgorithmId::De).hash());
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn arity_is_checked() {
        let sphere = ProblemInstance::with_defaults(ProblemId::Sphere);
        let zdt = ProblemInstance::with_defaults(ProblemId::Zdt1);
        assert!(AlgorithmId::Pso.check_arity(&sphere).is_ok());
        assert!(AlgorithmId::Pso.check_arity(&zdt).is_err());
        assert!(AlgorithmId::Nsga2.check_arity(&sphere).is_err());
    }

    #[test]
    fn every_algorithm_builds_and_steps() {
        let backend = Backend::serial();
        for id in AlgorithmId::ALL {
            let problem = if id.is_multi_objective() {
                ProblemInstance::new(ProblemId::Dtlz2, 8, 3).unwrap()
            } else {
                ProblemInstance::new(ProblemId::Sphere, 5, 1).unwrap()
            };
            let mut rng = RngStream::new(11, 0);
            let mut ctx = StepContext::new(&problem, &backend);
            let init = initial_population(&problem, 12, &mut ctx, &mut rng).unwrap();
            let mut opt = AlgorithmConfig::defaults(id).build(&problem, init).unwrap();
            for g in 0..5 {
                ctx.generation = g;
                let before = ctx.nfe;
                let declared = opt.evaluations_per_step();
                opt.step(&mut ctx, &mut rng).unwrap();
                assert_eq!(ctx.nfe - before, declared, "{id}");
                let pop = opt.population();
                for row in pop.x.rows() {
                    assert!(problem.bounds().contains(row.as_slice().unwrap()), "{id}");
                }
                assert_eq!(pop.f.ncols(), problem.objectives());
            }
        }
    }
}
