//! Population matrices and box bounds.

use ndarray::{concatenate, Array2, ArrayView2, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Per-coordinate box constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Contract("bounds must have at least one dimension".into()));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::Contract(format!(
                "bounds: lower[{i}] = {} is not below upper[{i}] = {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval in every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }

    /// `n` points drawn uniformly inside the box, row by row.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Array2<f64> {
        let d = self.dim();
        Array2::from_shape_fn((n, d), |(_, j)| rng.uniform_in(self.lower[j], self.upper[j]))
    }

    #[inline]
    pub fn clamp_row(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = clamp_scalar(*v, self.lower[j], self.upper[j]);
        }
    }

    #[inline]
    pub fn clamp_coord(&self, j: usize, v: f64) -> f64 {
        clamp_scalar(v, self.lower[j], self.upper[j])
    }
}

// NaN is pushed to the lower bound so the in-bounds invariant survives degenerate arithmetic.
#[inline]
fn clamp_scalar(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo || v.is_nan() {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Clips every entry of `x` into the box. Entries already inside are returned unchanged.
pub fn clamp_to_bounds(x: ArrayView2<'_, f64>, bounds: &Bounds) -> Result<Array2<f64>> {
    let mut out = x.to_owned();
    clamp_in_place(out.view_mut(), bounds)?;
    Ok(out)
}

pub fn clamp_in_place(mut x: ArrayViewMut2<'_, f64>, bounds: &Bounds) -> Result<()> {
    if x.ncols() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            context: "clamp_to_bounds",
            expected: bounds.dim(),
            found: x.ncols(),
        });
    }
    for mut row in x.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = clamp_scalar(*v, bounds.lower[j], bounds.upper[j]);
        }
    }
    Ok(())
}

/// Decision matrix `x` (N×D) with its objective matrix `f` (N×M).
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub x: Array2<f64>,
    pub f: Array2<f64>,
    /// Cumulative evaluation count at the time `f` was computed.
    pub nfe_stamp: u64,
}

impl Population {
    pub fn new(x: Array2<f64>, f: Array2<f64>, nfe_stamp: u64) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Contract("population must hold at least one individual".into()));
        }
        if x.nrows() != f.nrows() {
            return Err(Error::DimensionMismatch {
                context: "population rows",
                expected: x.nrows(),
                found: f.nrows(),
            });
        }
        Ok(Self { x, f, nfe_stamp })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn objectives(&self) -> usize {
        self.f.ncols()
    }

    /// Index of the smallest first objective; earliest index wins ties.
    pub fn best_index(&self) -> usize {
        let col = self.f.column(0);
        let mut best = 0;
        for (i, &v) in col.iter().enumerate() {
            if v < col[best] {
                best = i;
            }
        }
        best
    }

    pub fn select(&self, indices: &[usize]) -> Population {
        Population {
            x: self.x.select(Axis(0), indices),
            f: self.f.select(Axis(0), indices),
            nfe_stamp: self.nfe_stamp,
        }
    }

    /// Row-wise concatenation; the stamp of the newer half is kept.
    pub fn merge(&self, other: &Population) -> Population {
        Population {
            x: concatenate![Axis(0), self.x, other.x],
            f: concatenate![Axis(0), self.f, other.f],
            nfe_stamp: self.nfe_stamp.max(other.nfe_stamp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn clamp_forces_out_of_range_entries() {
        let b = Bounds::uniform(1, -1.0, 1.0).unwrap();
        assert_eq!(clamp_to_bounds(array![[5.0]].view(), &b).unwrap(), array![[1.0]]);
        assert_eq!(clamp_to_bounds(array![[-5.0]].view(), &b).unwrap(), array![[-1.0]]);
    }

    #[test]
    fn clamp_keeps_inside_entries_bit_identical() {
        let b = Bounds::uniform(1, -1.0, 1.0).unwrap();
        let out = clamp_to_bounds(array![[0.3]].view(), &b).unwrap();
        assert_eq!(out[[0, 0]].to_bits(), 0.3f64.to_bits());
    }

    #[test]
    fn clamp_scan_on_gaussian_matrix() {
        let b = Bounds::uniform(10, -1.0, 1.0).unwrap();
        let mut rng = RngStream::new(11, 0);
        // Entries spread over roughly [-2σ, 2σ] with σ = 1.
        let x = Array2::from_shape_fn((100, 10), |_| rng.normal());
        let out = clamp_to_bounds(x.view(), &b).unwrap();
        for (o, i) in out.iter().zip(x.iter()) {
            assert!((-1.0..=1.0).contains(o));
            if (-1.0..=1.0).contains(i) {
                assert_eq!(o.to_bits(), i.to_bits());
            }
        }
    }

    #[test]
    fn clamp_rejects_dimension_mismatch() {
        let b = Bounds::uniform(2, -1.0, 1.0).unwrap();
        assert!(matches!(
            clamp_to_bounds(array![[0.0]].view(), &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bounds_require_strict_order() {
        assert!(Bounds::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Bounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn population_needs_rows() {
        assert!(Population::new(Array2::zeros((0, 2)), Array2::zeros((0, 1)), 0).is_err());
        assert!(Population::new(Array2::zeros((2, 2)), Array2::zeros((3, 1)), 0).is_err());
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent(vals in proptest::collection::vec(-1e3f64..1e3, 12)) {
            let b = Bounds::new(vec![-1.0, 0.0, -100.0], vec![1.0, 5.0, 100.0]).unwrap();
            let x = Array2::from_shape_vec((4, 3), vals).unwrap();
            let once = clamp_to_bounds(x.view(), &b).unwrap();
            let twice = clamp_to_bounds(once.view(), &b).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
