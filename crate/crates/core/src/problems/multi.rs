//! ZDT and DTLZ objective functions.

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Zdt {
    One,
    Two,
    Three,
}

pub(crate) fn zdt(variant: Zdt, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let f1 = x[0];
    let g = if n > 1 {
        1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n - 1) as f64
    } else {
        1.0
    };
    let r = f1 / g;
    let h = match variant {
        Zdt::One => 1.0 - r.sqrt(),
        Zdt::Two => 1.0 - r * r,
        Zdt::Three => 1.0 - r.sqrt() - r * (10.0 * PI * f1).sin(),
    };
    out[0] = f1;
    out[1] = g * h;
}

fn g_rastrigin(tail: &[f64]) -> f64 {
    let k = tail.len() as f64;
    100.0
        * (k + tail
            .iter()
            .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
            .sum::<f64>())
}

fn g_sphere(tail: &[f64]) -> f64 {
    tail.iter().map(|v| (v - 0.5).powi(2)).sum()
}

/// Standard spherical mapping `f_i = scale · Π cos(θ_j) · sin(θ_{M-i})`.
fn spherical(theta: &[f64], scale: f64, out: &mut [f64]) {
    let m = out.len();
    for i in 0..m {
        let mut v = scale;
        for t in &theta[..m - 1 - i] {
            v *= t.cos();
        }
        if i > 0 {
            v *= theta[m - 1 - i].sin();
        }
        out[i] = v;
    }
}

/// DTLZ1–7 with `m = out.len()` objectives and `k = x.len() - m + 1`.
pub(crate) fn dtlz(variant: u8, x: &[f64], out: &mut [f64]) {
    let m = out.len();
    let (head, tail) = x.split_at(m - 1);
    match variant {
        1 => {
            let g = g_rastrigin(tail);
            for i in 0..m {
                let mut v = 0.5 * (1.0 + g);
                for xj in &head[..m - 1 - i] {
                    v *= xj;
                }
                if i > 0 {
                    v *= 1.0 - head[m - 1 - i];
                }
                out[i] = v;
            }
        }
        2..=4 => {
            let g = if variant == 3 { g_rastrigin(tail) } else { g_sphere(tail) };
            let theta: Vec<f64> = head
                .iter()
                .map(|&v| {
                    let v = if variant == 4 { v.powi(100) } else { v };
                    v * FRAC_PI_2
                })
                .collect();
            spherical(&theta, 1.0 + g, out);
        }
        5 | 6 => {
            let g = if variant == 5 {
                g_sphere(tail)
            } else {
                tail.iter().map(|v| v.powf(0.1)).sum()
            };
            let theta: Vec<f64> = head
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if j == 0 {
                        v * FRAC_PI_2
                    } else {
                        PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * v)
                    }
                })
                .collect();
            spherical(&theta, 1.0 + g, out);
        }
        7 => {
            let k = tail.len().max(1) as f64;
            let g = 1.0 + 9.0 / k * tail.iter().sum::<f64>();
            out[..m - 1].copy_from_slice(head);
            let h = m as f64
                - head
                    .iter()
                    .map(|f| f / (1.0 + g) * (1.0 + (3.0 * PI * f).sin()))
                    .sum::<f64>();
            out[m - 1] = (1.0 + g) * h;
        }
        _ => unreachable!("DTLZ variant {variant}"),
    }
}
