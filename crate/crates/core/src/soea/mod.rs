//! Single-objective algorithms.

mod cmaes;
mod cso;
mod de;
mod ga;
mod ipop;
mod pso;
mod sade;

pub use cmaes::{recombination_weights, CmaConfig, CmaEs, CmaState};
pub use cso::{Cso, CsoConfig};
pub(crate) use cso::compete;
pub use de::{binomial_crossover, mutant_rand_1, De, DeConfig};
pub use ga::{truncate_best, Ga, GaConfig};
pub use ipop::{ipop_restart_policy, IpopCmaEs, IpopConfig, RestartDecision, StagnationCounter};
pub use pso::{Pso, PsoConfig};
pub use sade::{strategy_probabilities, Sade, SadeConfig, STRATEGIES};
