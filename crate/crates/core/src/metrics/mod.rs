//! Solution-quality and efficiency indicators.

mod hypervolume;

use ndarray::{ArrayView2, Axis};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::population::Population;

pub use hypervolume::{hypervolume, hypervolume_mc};

/// Minimum of the first objective column.
pub fn best_fitness(pop: &Population) -> f64 {
    pop.f.column(0).iter().copied().fold(f64::INFINITY, f64::min)
}

/// Mean distance from each reference point to its nearest solution.
///
/// An empty solution set has infinite IGD.
pub fn igd(solutions: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<f64> {
    igd_with(&Backend::serial(), solutions, reference)
}

/// [`igd`] with the per-reference-point scan spread over `backend`.
pub fn igd_with(
    backend: &Backend,
    solutions: ArrayView2<'_, f64>,
    reference: ArrayView2<'_, f64>,
) -> Result<f64> {
    if solutions.ncols() != reference.ncols() {
        return Err(Error::DimensionMismatch {
            context: "igd objectives",
            expected: reference.ncols(),
            found: solutions.ncols(),
        });
    }
    if reference.nrows() == 0 {
        return Ok(0.0);
    }
    if solutions.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    let sol = solutions.as_standard_layout();
    let m = sol.ncols();
    let flat = sol.as_slice().expect("standard layout");
    let nearest = backend.map_indices(reference.nrows(), |r| {
        let z = reference.row(r);
        let mut best = f64::INFINITY;
        for s in flat.chunks_exact(m) {
            let mut d2 = 0.0;
            for (a, b) in s.iter().zip(z.iter()) {
                d2 += (a - b) * (a - b);
            }
            best = best.min(d2);
        }
        best.sqrt()
    });
    // Summation in index order keeps the value independent of the backend.
    Ok(nearest.iter().sum::<f64>() / reference.nrows() as f64)
}

/// Mean pairwise Euclidean distance between rows of `x`; zero below two rows.
pub fn diversity(x: ArrayView2<'_, f64>) -> f64 {
    diversity_with(&Backend::serial(), x)
}

/// [`diversity`] with rows distributed over `backend`.
pub fn diversity_with(backend: &Backend, x: ArrayView2<'_, f64>) -> f64 {
    let n = x.nrows();
    if n < 2 {
        return 0.0;
    }
    let x = x.as_standard_layout();
    let d = x.ncols();
    let flat = x.as_slice().expect("standard layout");
    let partial = backend.map_indices(n, |i| {
        let a = &flat[i * d..(i + 1) * d];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let b = &flat[j * d..(j + 1) * d];
            let mut d2 = 0.0;
            for k in 0..d {
                let t = a[k] - b[k];
                d2 += t * t;
            }
            acc += d2.sqrt();
        }
        acc
    });
    let pairs = (n * (n - 1) / 2) as f64;
    partial.iter().sum::<f64>() / pairs
}

/// Reference time over test time.
pub fn speedup(t_ref: f64, t_test: f64) -> f64 {
    t_ref / t_test
}

/// Evaluations per second within a time window.
pub fn throughput(nfe: u64, window_s: f64) -> f64 {
    if nfe == 0 {
        0.0
    } else {
        nfe as f64 / window_s
    }
}

/// Mean and population standard deviation, computed in two passes.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Column-wise ideal (minimum) point of an objective matrix.
pub fn ideal_point(f: ArrayView2<'_, f64>) -> Vec<f64> {
    f.fold_axis(Axis(0), f64::INFINITY, |a, &b| a.min(b)).to_vec()
}

/// Column-wise nadir (maximum) point of an objective matrix.
pub fn nadir_point(f: ArrayView2<'_, f64>) -> Vec<f64> {
    f.fold_axis(Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b)).to_vec()
}

/// Reference point at 1.1 times the analytic nadir, offset for non-positive components.
pub fn reference_from_nadir(nadir: &[f64]) -> Vec<f64> {
    nadir.iter().map(|&z| z + 0.1 * z.abs().max(1e-12)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use ndarray::{array, Array2};

    fn brute_igd(s: &Array2<f64>, r: &Array2<f64>) -> f64 {
        let mut total = 0.0;
        for z in r.rows() {
            let mut best = f64::INFINITY;
            for p in s.rows() {
                let d = p.iter().zip(z.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                best = best.min(d);
            }
            total += best;
        }
        total / r.nrows() as f64
    }

    #[test]
    fn best_fitness_scan() {
        let x = Array2::zeros((1, 2));
        let p = Population::new(x, array![[3.5]], 1).unwrap();
        assert_eq!(best_fitness(&p), 3.5);
        let p = Population::new(Array2::zeros((3, 1)), array![[2.0], [2.0], [2.0]], 3).unwrap();
        assert_eq!(best_fitness(&p), 2.0);
        let mut rng = RngStream::new(5, 0);
        let f = Array2::from_shape_fn((40, 1), |_| rng.normal());
        let scan = f.iter().copied().fold(f64::INFINITY, f64::min);
        let p = Population::new(Array2::zeros((40, 1)), f, 40).unwrap();
        assert_eq!(best_fitness(&p), scan);
    }

    #[test]
    fn igd_cases() {
        let s = array![[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(igd(s.view(), s.view()).unwrap(), 0.0);
        assert_eq!(igd(array![[3.0, 4.0]].view(), array![[0.0, 0.0]].view()).unwrap(), 5.0);
        assert!(igd(Array2::zeros((0, 2)).view(), s.view()).unwrap().is_infinite());
        assert!(igd(array![[1.0]].view(), s.view()).is_err());
        let mut rng = RngStream::new(9, 0);
        for _ in 0..20 {
            let a = Array2::from_shape_fn((17, 3), |_| rng.uniform());
            let b = Array2::from_shape_fn((31, 3), |_| rng.uniform());
            let par = Backend::new(crate::backend::BackendSpec::parallel(3)).unwrap();
            let fast = igd_with(&par, a.view(), b.view()).unwrap();
            assert!((fast - brute_igd(&a, &b)).abs() < 1e-12);
            assert_eq!(fast, igd(a.view(), b.view()).unwrap());
        }
    }

    #[test]
    fn diversity_cases() {
        assert_eq!(diversity(Array2::from_elem((5, 3), 1.5).view()), 0.0);
        assert_eq!(diversity(array![[0.0, 0.0], [3.0, 4.0]].view()), 5.0);
        let mut rng = RngStream::new(2, 0);
        let x = Array2::from_shape_fn((20, 4), |_| rng.normal());
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                if i < j {
                    total += (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt();
                    pairs += 1.0;
                }
            }
        }
        let d = diversity(x.view());
        assert!((d - total / pairs).abs() < 1e-12);
        let shifted = x.mapv(|v| v + 7.0);
        assert!((diversity(shifted.view()) - d).abs() < 1e-10);
        let scaled = x.mapv(|v| v * 3.0);
        assert!((diversity(scaled.view()) - 3.0 * d).abs() < 1e-10);
    }

    #[test]
    fn efficiency_ratios() {
        assert!((speedup(14.34, 8.36) - 1.715).abs() < 1e-3);
        assert_eq!(speedup(2.0, 2.0), 1.0);
        assert_eq!(speedup(1.0, 2.0), 0.5);
        assert_eq!(throughput(0, 30.0), 0.0);
        assert_eq!(throughput(3_000_000, 30.0), 1e5);
    }

    #[test]
    fn mean_std_two_pass() {
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
        let (m, s) = mean_std(&[3.0, 7.0]);
        assert_eq!((m, s), (5.0, 2.0));
        let mut rng = RngStream::new(4, 0);
        let v: Vec<f64> = (0..100).map(|_| rng.normal() * 3.0 + 1.0).collect();
        let (m, s) = mean_std(&v);
        let mut sum = 0.0;
        for x in &v {
            sum += x;
        }
        let mean = sum / 100.0;
        let mut ss = 0.0;
        for x in &v {
            ss += (x - mean) * (x - mean);
        }
        assert!((m - mean).abs() < 1e-12);
        assert!((s - (ss / 100.0).sqrt()).abs() < 1e-12);
    }
}
