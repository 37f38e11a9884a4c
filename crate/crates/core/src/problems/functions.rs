//! Single-objective kernels. All take the decision vector in problem units.

use std::f64::consts::{E, PI};

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    let f = -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E;
    // Rounding leaves about -4e-16 at the origin.
    f.max(0.0)
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    (1.0 + sum - prod).max(0.0)
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = 1.0 - w[0];
            100.0 * a * a + b * b
        })
        .sum()
}

pub const SCHWEFEL_CONSTANT: f64 = 418.9829;

pub fn schwefel(x: &[f64]) -> f64 {
    SCHWEFEL_CONSTANT * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
}

pub fn zakharov(z: &[f64]) -> f64 {
    let s1: f64 = z.iter().map(|v| v * v).sum();
    let s2: f64 = z.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * v).sum();
    s1 + s2 * s2 + s2.powi(4)
}

/// Expanded Schaffer F7 over consecutive coordinate pairs.
pub fn schaffer_f7(z: &[f64]) -> f64 {
    if z.len() < 2 {
        return 0.0;
    }
    let mut f = 0.0;
    for w in z.windows(2) {
        let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let t = (50.0 * s.powf(0.2)).sin();
        f += s.sqrt() + s.sqrt() * t * t;
    }
    let n = (z.len() - 1) as f64;
    f * f / (n * n)
}

/// Rastrigin with coordinates beyond ±0.5 snapped to the half-integer grid.
pub fn noncontinuous_rastrigin(z: &[f64]) -> f64 {
    z.iter()
        .map(|&v| {
            let y = if v.abs() > 0.5 { (2.0 * v).round() / 2.0 } else { v };
            y * y - 10.0 * (2.0 * PI * y).cos() + 10.0
        })
        .sum::<f64>()
        .max(0.0)
}

pub fn levy(z: &[f64]) -> f64 {
    let w: Vec<f64> = z.iter().map(|v| 1.0 + v / 4.0).collect();
    let n = w.len();
    let first = (PI * w[0]).sin().powi(2);
    let last = (w[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[n - 1]).sin().powi(2));
    let mid: f64 = w[..n - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    first + mid + last
}
