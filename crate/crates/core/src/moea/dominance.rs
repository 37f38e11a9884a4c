//! Pareto dominance, non-dominated sorting and crowding distance.

use std::cmp::Ordering;

use ndarray::ArrayView2;

/// `a` dominates `b` under minimization: no worse anywhere, strictly better somewhere.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Partitions the rows of `f` into successive non-dominated fronts.
///
/// Rows are processed in lexicographic order, so a row can only be dominated
/// by rows seen before it; each row is placed by binary search over the
/// fronts built so far. Indices inside each front are ascending.
pub fn non_dominated_sort(f: ArrayView2<'_, f64>) -> Vec<Vec<usize>> {
    let n = f.nrows();
    if n == 0 {
        return Vec::new();
    }
    let m = f.ncols();
    let owned;
    let data: &[f64] = match f.as_slice() {
        Some(s) => s,
        None => {
            owned = f.iter().copied().collect::<Vec<_>>();
            &owned
        }
    };
    let row = |i: usize| &data[i * m..(i + 1) * m];

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(row(a), row(b)).then(a.cmp(&b)));

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    for &p in &order {
        let pr = row(p);
        let dominated_by_front = |front: &Vec<usize>| -> bool {
            if m == 2 {
                // The last member has the smallest second objective in its front.
                let q = row(*front.last().unwrap());
                q[1] < pr[1] || (q[1] == pr[1] && q[0] < pr[0])
            } else {
                front.iter().rev().any(|&q| dominates(row(q), pr))
            }
        };
        let (mut lo, mut hi) = (0usize, fronts.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if dominated_by_front(&fronts[mid]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == fronts.len() {
            fronts.push(vec![p]);
        } else {
            fronts[lo].push(p);
        }
    }
    for front in &mut fronts {
        front.sort_unstable();
    }
    fronts
}

/// Rank of every row (0 = first front).
pub fn pareto_ranks(f: ArrayView2<'_, f64>) -> Vec<usize> {
    let mut ranks = vec![0; f.nrows()];
    for (r, front) in non_dominated_sort(f).iter().enumerate() {
        for &i in front {
            ranks[i] = r;
        }
    }
    ranks
}

/// Crowding distance of every row of a single front.
///
/// Extreme rows in any objective get `+inf`; an objective with zero range adds nothing.
pub fn crowding_distance(f: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = f.nrows();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..f.ncols() {
        let col = f.column(j);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        let lo = col[order[0]];
        let hi = col[order[n - 1]];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 || !range.is_finite() {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (col[order[w + 1]] - col[order[w - 1]]) / range;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    /// Peels fronts by repeatedly taking rows no remaining row dominates.
    fn brute_force_fronts(f: ArrayView2<'_, f64>) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..f.nrows()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| {
                    !remaining.iter().any(|&j| {
                        dominates(f.row(j).as_slice().unwrap(), f.row(i).as_slice().unwrap())
                    })
                })
                .collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    #[test]
    fn dominance_basics() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]));
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]));
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]));
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
    }

    #[test]
    fn sort_small_cases() {
        assert_eq!(non_dominated_sort(array![[4.0, 4.0]].view()), vec![vec![0]]);
        let f = array![[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]];
        assert_eq!(non_dominated_sort(f.view()), vec![vec![0, 1], vec![2]]);
        let dup = array![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.0, 2.0, 2.0]];
        assert_eq!(non_dominated_sort(dup.view()), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn sort_matches_brute_force_random_50x3() {
        let mut rng = RngStream::new(5, 0);
        let f = Array2::from_shape_fn((50, 3), |_| rng.uniform());
        assert_eq!(non_dominated_sort(f.view()), brute_force_fronts(f.view()));
    }

    #[test]
    fn crowding_cases() {
        assert_eq!(crowding_distance(array![[0.0, 1.0], [1.0, 0.0]].view()), vec![f64::INFINITY; 2]);
        let d = crowding_distance(array![[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]].view());
        assert_eq!(d[1], 2.0);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        let flat = crowding_distance(array![[0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [3.0, 1.0]].view());
        assert!(flat.iter().all(|v| !v.is_nan()));
        // Second objective is constant: interior points only see the first.
        assert_eq!(flat[1], 2.0 / 3.0);
    }

    proptest! {
        #[test]
        fn sort_equals_brute_force(
            n in 1usize..64,
            m in 2usize..5,
            seed in any::<u64>(),
            grid in prop_oneof![Just(0u32), Just(4u32)],
        ) {
            let mut rng = RngStream::new(seed, 0);
            // A coarse grid forces ties and duplicates.
            let f = Array2::from_shape_fn((n, m), |_| {
                let u = rng.uniform();
                if grid > 0 { (u * grid as f64).floor() } else { u }
            });
            let fronts = non_dominated_sort(f.view());
            prop_assert_eq!(&fronts, &brute_force_fronts(f.view()));
            let mut all: Vec<usize> = fronts.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
