//! Exact and Monte Carlo hypervolume.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn check_ref(points: ArrayView2<'_, f64>, reference: &[f64]) -> Result<()> {
    if points.ncols() != reference.len() && points.nrows() > 0 {
        return Err(Error::DimensionMismatch {
            context: "hypervolume reference point",
            expected: points.ncols(),
            found: reference.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::Contract("hypervolume needs at least one objective".into()));
    }
    Ok(())
}

/// Rows strictly inside the reference box; the rest contribute nothing.
fn inside(points: ArrayView2<'_, f64>, reference: &[f64]) -> Vec<Vec<f64>> {
    points
        .rows()
        .into_iter()
        .filter(|r| r.iter().zip(reference).all(|(v, z)| v < z))
        .map(|r| r.to_vec())
        .collect()
}

/// Lebesgue measure of the region dominated by `points` and bounded by `reference`.
///
/// Two objectives use a sort-and-sweep, three an incremental staircase sweep
/// over the third objective; more objectives fall back to recursive slicing.
pub fn hypervolume(points: ArrayView2<'_, f64>, reference: &[f64]) -> Result<f64> {
    check_ref(points, reference)?;
    let pts = inside(points, reference);
    Ok(match reference.len() {
        1 => pts.iter().map(|p| reference[0] - p[0]).fold(0.0, f64::max),
        2 => hv2(pts, reference),
        3 => hv3(pts, reference),
        _ => hv_slicing(pts, reference),
    })
}

fn hv2(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut ceiling = r[1];
    for p in pts {
        if p[1] < ceiling {
            area += (r[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    area
}

/// 2-D staircase of mutually non-dominated points, keyed by the first coordinate.
struct Staircase {
    steps: BTreeMap<Key, f64>,
    area: f64,
    rx: f64,
    ry: f64,
}

impl Staircase {
    fn new(rx: f64, ry: f64) -> Self {
        Self {
            steps: BTreeMap::new(),
            area: 0.0,
            rx,
            ry,
        }
    }

    fn insert(&mut self, x: f64, y: f64) {
        // The closest step at or left of x has the lowest y among x' <= x.
        let ceiling = match self.steps.range(..=Key(x)).next_back() {
            Some((_, &py)) if py <= y => return,
            Some((_, &py)) => py,
            None => self.ry,
        };
        let mut height = ceiling;
        let mut from = x;
        let mut dominated = Vec::new();
        let mut blocked = false;
        for (&k, &sy) in self.steps.range(Key(x)..) {
            self.area += (k.0 - from) * (height - y);
            if sy >= y {
                dominated.push(k);
                height = sy;
                from = k.0;
            } else {
                blocked = true;
                break;
            }
        }
        if !blocked {
            self.area += (self.rx - from) * (height - y);
        }
        for k in dominated {
            self.steps.remove(&k);
        }
        self.steps.insert(Key(x), y);
    }
}

fn hv3(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stairs = Staircase::new(r[0], r[1]);
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        stairs.insert(p[0], p[1]);
        let next = pts.get(i + 1).map_or(r[2], |q| q[2]);
        volume += stairs.area * (next - p[2]);
    }
    volume
}

fn hv_slicing(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    let m = r.len();
    if m == 3 {
        return hv3(pts, r);
    }
    let last = m - 1;
    pts.sort_by(|a, b| a[last].total_cmp(&b[last]));
    let mut volume = 0.0;
    for i in 0..pts.len() {
        let next = pts.get(i + 1).map_or(r[last], |q| q[last]);
        let depth = next - pts[i][last];
        if depth <= 0.0 {
            continue;
        }
        let slice: Vec<Vec<f64>> = pts[..=i].iter().map(|p| p[..last].to_vec()).collect();
        volume += hv_slicing(slice, &r[..last]) * depth;
    }
    volume
}

/// Monte Carlo estimate over the box spanned by the points' ideal point and `reference`.
pub fn hypervolume_mc(
    points: ArrayView2<'_, f64>,
    reference: &[f64],
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    check_ref(points, reference)?;
    let pts = inside(points, reference);
    if pts.is_empty() || samples == 0 {
        return Ok(0.0);
    }
    let m = reference.len();
    let ideal: Vec<f64> = (0..m)
        .map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = (0..m).map(|j| reference[j] - ideal[j]).product();
    let flat = Array2::from_shape_vec((pts.len(), m), pts.concat()).expect("rectangular");
    let mut sample = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..m {
            sample[j] = rng.uniform_in(ideal[j], reference[j]);
        }
        if flat
            .rows()
            .into_iter()
            .any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s))
        {
            hits += 1;
        }
    }
    Ok(box_volume * hits as f64 / samples as f64)
}
