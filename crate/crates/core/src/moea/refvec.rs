//! Das–Dennis simplex-lattice weight vectors.

use ndarray::{Array2, ArrayView1};

/// Lattice weight vectors, optionally with a nearest-neighbour table.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceVectors {
    weights: Array2<f64>,
    neighbors: Vec<Vec<usize>>,
}

/// `C(h + m - 1, m - 1)`, the number of lattice points.
pub fn das_dennis_count(m: usize, h: usize) -> usize {
    let (n, k) = (h + m - 1, m - 1);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as usize
}

/// Largest lattice resolution whose point count does not exceed `n` (at least 1).
pub fn divisions_for(m: usize, n: usize) -> usize {
    let mut h = 1;
    while das_dennis_count(m, h + 1) <= n {
        h += 1;
    }
    h
}

/// All points with coordinates in `{0, 1/h, …, 1}` summing to one.
pub fn das_dennis_vectors(m: usize, h: usize) -> ReferenceVectors {
    assert!(m >= 1 && h >= 1, "lattice needs m >= 1 and h >= 1");
    let mut rows = Vec::with_capacity(das_dennis_count(m, h) * m);
    let mut current = vec![0usize; m];
    fn fill(level: usize, left: usize, current: &mut [usize], rows: &mut Vec<f64>, h: usize) {
        let m = current.len();
        if level == m - 1 {
            current[level] = left;
            rows.extend(current.iter().map(|&c| c as f64 / h as f64));
            return;
        }
        for c in 0..=left {
            current[level] = c;
            fill(level + 1, left - c, current, rows, h);
        }
    }
    fill(0, h, &mut current, &mut rows, h);
    let k = rows.len() / m;
    ReferenceVectors {
        weights: Array2::from_shape_vec((k, m), rows).unwrap(),
        neighbors: Vec::new(),
    }
}

impl ReferenceVectors {
    pub fn from_weights(weights: Array2<f64>) -> Self {
        Self {
            weights,
            neighbors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn objectives(&self) -> usize {
        self.weights.ncols()
    }

    /// Rows summing to one.
    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> ArrayView1<'_, f64> {
        self.weights.row(i)
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.weights
    }

    /// Rows scaled to unit Euclidean norm.
    pub fn unit(&self) -> Array2<f64> {
        normalize_rows(&self.weights)
    }

    /// Repeats the lattice cyclically until it has `n` rows.
    pub fn padded_to(&self, n: usize) -> Self {
        let k = self.len();
        let m = self.objectives();
        let weights = Array2::from_shape_fn((n.max(k), m), |(i, j)| self.weights[[i % k, j]]);
        Self::from_weights(weights)
    }

    /// Builds the table of the `t` nearest weight vectors (self included) by Euclidean distance.
    pub fn with_neighbors(mut self, t: usize) -> Self {
        let k = self.len();
        let t = t.min(k);
        self.neighbors = (0..k)
            .map(|i| {
                let wi = self.weights.row(i);
                let mut d: Vec<(f64, usize)> = (0..k)
                    .map(|j| {
                        let wj = self.weights.row(j);
                        let dist: f64 = wi.iter().zip(wj.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                        (dist, j)
                    })
                    .collect();
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if t < k {
                    d.select_nth_unstable_by(t, cmp);
                    d.truncate(t + 1);
                }
                d.sort_by(cmp);
                // Self first even when duplicated weights tie at distance zero.
                let mut out = vec![i];
                out.extend(d.into_iter().map(|(_, j)| j).filter(|&j| j != i).take(t - 1));
                out
            })
            .collect();
        self
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
}

pub(crate) fn normalize_rows(a: &Array2<f64>) -> Array2<f64> {
    let mut out = a.clone();
    for mut row in out.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_objective_lattice() {
        let v = das_dennis_vectors(2, 4);
        assert_eq!(v.len(), 5);
        let rows: Vec<Vec<f64>> = v.weights().rows().into_iter().map(|r| r.to_vec()).collect();
        assert!(rows.contains(&vec![0.0, 1.0]));
        assert!(rows.contains(&vec![0.25, 0.75]));
    }

    #[test]
    fn three_objective_count() {
        // C(14, 2) = 91.
        assert_eq!(das_dennis_vectors(3, 12).len(), 91);
        assert_eq!(das_dennis_count(3, 12), 91);
        assert_eq!(das_dennis_count(3, 43), 990);
    }

    #[test]
    fn rows_sum_to_one_and_unit_rows_have_norm_one() {
        for (m, h) in [(2, 7), (3, 12), (4, 5)] {
            let v = das_dennis_vectors(m, h);
            assert_eq!(v.len(), das_dennis_count(m, h));
            for r in v.weights().rows() {
                assert!((r.sum() - 1.0).abs() <= 1e-12);
                assert!(r.iter().all(|&x| x >= 0.0));
            }
            for r in v.unit().rows() {
                assert!((r.dot(&r) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn divisions_fit_population() {
        assert_eq!(divisions_for(2, 100), 99);
        assert_eq!(divisions_for(3, 100), 12);
        assert!(das_dennis_count(3, divisions_for(3, 1000)) <= 1000);
    }

    #[test]
    fn neighbor_table_starts_with_self() {
        let v = das_dennis_vectors(2, 9).with_neighbors(3);
        assert_eq!(v.neighbors(0), &[0, 1, 2]);
        assert_eq!(v.neighbors(5).len(), 3);
        assert_eq!(v.neighbors(5)[0], 5);
    }
}
