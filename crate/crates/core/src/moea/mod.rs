//! Multi-objective algorithms and their shared selection machinery.

mod common;
mod dominance;
mod hype;
mod ibea;
mod lmocso;
mod moead;
mod nsga2;
mod nsga3;
mod refvec;
mod rvea;
mod spea2;

pub use common::{non_dominated_indices, pbi_scalarize, Mating};
pub use dominance::{crowding_distance, dominates, non_dominated_sort, pareto_ranks};
pub use hype::{hype_fitness, hype_select, Hype, HypeConfig};
pub use ibea::{ibea_fitness, ibea_fitness_with, ibea_select, Ibea, IbeaConfig, Indicator};
pub use lmocso::{convergence_scores, update_archive, Lmocso, LmocsoConfig};
pub use moead::{Moead, MoeadConfig};
pub use nsga2::{nsga2_select, Nsga2, Nsga2Config};
pub use nsga3::{associate, normalize, nsga3_select, Nsga3, Nsga3Config};
pub use refvec::{das_dennis_count, das_dennis_vectors, divisions_for, ReferenceVectors};
pub use rvea::{apd, associate_by_angle, min_neighbor_angles, rvea_select, Rvea, RveaConfig};
pub use spea2::{spea2_fitness, spea2_raw_fitness, spea2_select, spea2_truncate, Spea2, Spea2Config};
