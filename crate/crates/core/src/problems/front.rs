//! Samples of the analytic Pareto fronts, used as IGD references.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::{Array2, Axis};

use super::multi::{dtlz, Zdt};
use crate::moea::{das_dennis_vectors, non_dominated_sort};

/// Reference density used when callers do not ask for a specific size.
pub const DEFAULT_REFERENCE_POINTS: usize = 1000;

fn first_front(points: Array2<f64>) -> Array2<f64> {
    let fronts = non_dominated_sort(points.view());
    let mut keep = fronts.into_iter().next().unwrap_or_default();
    keep.sort_unstable();
    points.select(Axis(0), &keep)
}

fn lattice_divisions(m: usize, n: usize) -> usize {
    if m == 2 {
        return n.saturating_sub(1).max(1);
    }
    // Smallest lattice holding at least 99% of the requested count.
    let target = (0.99 * n as f64).ceil() as usize;
    let mut h = 1;
    while crate::moea::das_dennis_count(m, h) < target {
        h += 1;
    }
    h
}

fn simplex(m: usize, n: usize) -> Array2<f64> {
    das_dennis_vectors(m, lattice_divisions(m, n)).into_matrix()
}

fn linspace(n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

pub(crate) fn zdt_front(variant: Zdt, n: usize) -> Array2<f64> {
    match variant {
        Zdt::One | Zdt::Two => {
            let rows: Vec<f64> = linspace(n)
                .flat_map(|f1| {
                    let f2 = if variant == Zdt::One { 1.0 - f1.sqrt() } else { 1.0 - f1 * f1 };
                    [f1, f2]
                })
                .collect();
            Array2::from_shape_vec((rows.len() / 2, 2), rows).unwrap()
        }
        Zdt::Three => {
            const REGIONS: [(f64, f64); 5] = [
                (0.0, 0.083_001_534_9),
                (0.182_228_780, 0.257_762_363_4),
                (0.409_313_674_8, 0.453_882_104_1),
                (0.618_396_794_4, 0.652_511_703_8),
                (0.823_331_798_3, 0.851_832_865_4),
            ];
            let total: f64 = REGIONS.iter().map(|(a, b)| b - a).sum();
            let mut rows = Vec::with_capacity(2 * n);
            for (a, b) in REGIONS {
                let k = ((b - a) / total * n as f64).round().max(2.0) as usize;
                for t in linspace(k) {
                    let f1 = a + (b - a) * t;
                    rows.push(f1);
                    rows.push(1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin());
                }
            }
            first_front(Array2::from_shape_vec((rows.len() / 2, 2), rows).unwrap())
        }
    }
}

pub(crate) fn dtlz_front(variant: u8, m: usize, n: usize) -> Array2<f64> {
    match variant {
        1 => simplex(m, n).mapv(|v| 0.5 * v),
        2..=4 => {
            let mut p = simplex(m, n);
            for mut row in p.rows_mut() {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                row.mapv_inplace(|v| v / norm);
            }
            p
        }
        5 | 6 => {
            let mut rows = Vec::with_capacity(n * m);
            let mut theta = vec![FRAC_PI_4; m - 1];
            let mut out = vec![0.0; m];
            for t in linspace(n) {
                theta[0] = t * FRAC_PI_2;
                spherical_unit(&theta, &mut out);
                rows.extend_from_slice(&out);
            }
            Array2::from_shape_vec((rows.len() / m, m), rows).unwrap()
        }
        7 => {
            // Grid over the first m-1 objectives, then keep the non-dominated part.
            let per_axis = ((4 * n) as f64).powf(1.0 / (m - 1) as f64).ceil() as usize;
            let axis: Vec<f64> = linspace(per_axis).collect();
            let mut rows = Vec::new();
            let mut idx = vec![0usize; m - 1];
            let mut x = vec![0.0; m];
            let mut out = vec![0.0; m];
            loop {
                for (j, &i) in idx.iter().enumerate() {
                    x[j] = axis[i];
                }
                // Distance variable at its optimum (g = 1).
                x[m - 1] = 0.0;
                dtlz(7, &x, &mut out);
                rows.extend_from_slice(&out);
                let mut carry = 0;
                while carry < m - 1 {
                    idx[carry] += 1;
                    if idx[carry] < per_axis {
                        break;
                    }
                    idx[carry] = 0;
                    carry += 1;
                }
                if carry == m - 1 {
                    break;
                }
            }
            first_front(Array2::from_shape_vec((rows.len() / m, m), rows).unwrap())
        }
        _ => unreachable!("DTLZ variant {variant}"),
    }
}

fn spherical_unit(theta: &[f64], out: &mut [f64]) {
    let m = out.len();
    for i in 0..m {
        let mut v = 1.0;
        for t in &theta[..m - 1 - i] {
            v *= t.cos();
        }
        if i > 0 {
            v *= theta[m - 1 - i].sin();
        }
        out[i] = v;
    }
}
