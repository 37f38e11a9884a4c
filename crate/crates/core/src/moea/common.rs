//! Scalarizations and selection pieces shared by several algorithms.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::non_dominated_sort;
use crate::operators::{binary_tournament, random_mating, Variation};
use crate::population::Population;
use crate::rng::RngStream;

/// Penalty-based boundary intersection `d1 + θ·d2` of `fv` along direction `lambda`.
pub fn pbi_scalarize(fv: &[f64], lambda: &[f64], z_star: &[f64], theta: f64) -> f64 {
    let norm = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
    let mut d1 = 0.0;
    for k in 0..fv.len() {
        d1 += (fv[k] - z_star[k]) * lambda[k];
    }
    let d1 = d1.abs() / norm;
    let mut d2 = 0.0;
    for k in 0..fv.len() {
        let t = fv[k] - z_star[k] - d1 * lambda[k] / norm;
        d2 += t * t;
    }
    d1 + theta * d2.sqrt()
}

/// How parents are drawn for variation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mating {
    Tournament,
    Random,
}

/// Picks `n` parents either by binary tournament under `better` or uniformly.
pub(crate) fn mating_pool(
    mating: Mating,
    n: usize,
    rng: &mut RngStream,
    better: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    match mating {
        Mating::Tournament => binary_tournament(n, n, rng, better),
        Mating::Random => random_mating(n, n, rng),
    }
}

/// Offspring of the selected parents, one per parent row.
pub(crate) fn breed(
    pop: &Population,
    parents: &[usize],
    variation: &Variation,
    bounds: &crate::population::Bounds,
    rng: &mut RngStream,
) -> Array2<f64> {
    let p = pop.x.select(Axis(0), parents);
    variation.offspring(p.view(), bounds, rng)
}

/// Stacks the current population on top of the offspring.
pub(crate) fn merge(pop: &Population, x: &Array2<f64>, f: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    (
        concatenate(Axis(0), &[pop.x.view(), x.view()]).expect("same width"),
        concatenate(Axis(0), &[pop.f.view(), f.view()]).expect("same width"),
    )
}

pub(crate) fn subset(x: &Array2<f64>, f: &Array2<f64>, keep: &[usize], nfe: u64) -> Population {
    Population {
        x: x.select(Axis(0), keep),
        f: f.select(Axis(0), keep),
        nfe_stamp: nfe,
    }
}

/// Whole fronts that fit into `n`, plus the front that has to be split (if any).
pub(crate) fn fill_by_fronts(fronts: &[Vec<usize>], n: usize) -> (Vec<usize>, Option<Vec<usize>>) {
    let mut chosen = Vec::with_capacity(n);
    for front in fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend_from_slice(front);
            if chosen.len() == n {
                return (chosen, None);
            }
        } else {
            return (chosen, Some(front.clone()));
        }
    }
    (chosen, None)
}

/// Indices of the rows of `f` that no other row dominates.
pub fn non_dominated_indices(f: ArrayView2<'_, f64>) -> Vec<usize> {
    non_dominated_sort(f).into_iter().next().unwrap_or_default()
}

#[inline]
pub(crate) fn row(a: &Array2<f64>, i: usize) -> &[f64] {
    a.row(i).to_slice().expect("standard layout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pbi_hand_values() {
        assert_eq!(pbi_scalarize(&[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0], 5.0), 6.0);
        let on_ray = pbi_scalarize(&[2.0, 2.0], &[1.0, 1.0], &[0.0, 0.0], 5.0);
        assert!((on_ray - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn front_filling() {
        let fronts = vec![vec![0, 3], vec![1], vec![2, 4]];
        assert_eq!(fill_by_fronts(&fronts, 3), (vec![0, 3, 1], None));
        assert_eq!(fill_by_fronts(&fronts, 4), (vec![0, 3, 1], Some(vec![2, 4])));
        assert_eq!(fill_by_fronts(&fronts, 1), (vec![], Some(vec![0, 3])));
    }

    proptest! {
        #[test]
        fn pbi_matches_geometric_projection(
            f in prop::collection::vec(-5.0f64..5.0, 3),
            l in prop::collection::vec(0.01f64..1.0, 3),
            z in prop::collection::vec(-1.0f64..1.0, 3),
            theta in 0.0f64..10.0,
        ) {
            // Projection of (f - z) onto the unit direction, then the orthogonal residual.
            let n = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
            let u: Vec<f64> = l.iter().map(|v| v / n).collect();
            let d: Vec<f64> = (0..3).map(|k| f[k] - z[k]).collect();
            let t: f64 = (0..3).map(|k| d[k] * u[k]).sum();
            let foot: Vec<f64> = u.iter().map(|v| v * t.abs()).collect();
            let d2 = (0..3).map(|k| (d[k] - foot[k]).powi(2)).sum::<f64>().sqrt();
            let expect = t.abs() + theta * d2;
            prop_assert!((pbi_scalarize(&f, &l, &z, theta) - expect).abs() < 1e-9);
        }
    }
}
