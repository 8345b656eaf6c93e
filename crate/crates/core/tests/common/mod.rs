#![allow(dead_code)]

use std::f64::consts::PI;

use mint_core::{BlockedSample, PointSet};
use rayon::prelude::*;

pub fn xy(x: &[f64], y: &[f64]) -> BlockedSample {
    BlockedSample::from_xy(&PointSet::from_column(x).unwrap(), &PointSet::from_column(y).unwrap()).unwrap()
}

/// Kolmogorov distance between the empirical CDF of `values` and `U[lo, hi]`.
pub fn ks_uniform(values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Fraction of seeds in `0..reps` for which `reject` holds, evaluated in parallel.
pub fn rejection_rate<F>(reps: u64, reject: F) -> f64
where
    F: Fn(u64) -> bool + Sync,
{
    let hits = (0..reps).into_par_iter().filter(|&s| reject(s)).count();
    hits as f64 / reps as f64
}

/// `q + 3·√(q(1−q)/reps)`.
pub fn size_bound(q: f64, reps: u64) -> f64 {
    q + 3.0 * (q * (1.0 - q) / reps as f64).sqrt()
}

/// Mutual information of the sinusoidal density, `E log(1 + sin X sin Y)`
/// under the density itself, by the midpoint rule on a `m × m` grid.
pub fn sinusoidal_mi(m: usize) -> f64 {
    let s: Vec<f64> = (0..m).map(|i| (-PI + (i as f64 + 0.5) * 2.0 * PI / m as f64).sin()).collect();
    let mut total = 0.0;
    for a in &s {
        for b in &s {
            let v = 1.0 + a * b;
            if v > 0.0 {
                total += v * v.ln();
            }
        }
    }
    total / (m * m) as f64
}
