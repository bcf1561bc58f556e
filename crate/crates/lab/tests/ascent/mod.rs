//! Brute-force maximization of `Σαw²/Σw²` subject to
//! `Σw·(−Δ_h w) ≤ f0·Σw²` on a periodic grid, by projected gradient ascent
//! on the unit sphere from random smooth starts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(w: &mut [f64]) {
    let s = dot(w, w).sqrt();
    w.iter_mut().for_each(|v| *v /= s);
}

/// Periodic `−Δ_h` on `n` points of `[0, 1)`.
fn neg_laplacian(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let h2 = (n * n) as f64;
    (0..n)
        .map(|j| (2.0 * w[j] - w[(j + 1) % n] - w[(j + n - 1) % n]) * h2)
        .collect()
}

fn excess(w: &[f64], f0: f64) -> f64 {
    dot(w, &neg_laplacian(w)) - f0
}

/// Moves `v` toward the constant vector until the constraint holds with
/// equality.
fn retract(v: &[f64], f0: f64) -> Vec<f64> {
    let c = 1.0 / (v.len() as f64).sqrt();
    let mix = |s: f64| {
        let mut u: Vec<f64> = v.iter().map(|a| (1.0 - s) * a + s * c).collect();
        normalize(&mut u);
        u
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(&mix(mid), f0) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(hi)
}

/// One ascent from `w`; returns the final Rayleigh quotient.
fn ascend(alpha: &[f64], f0: f64, mut w: Vec<f64>, max_iter: usize) -> f64 {
    let n = w.len();
    // Stable for the constraint curvature 4n² times multipliers below 1/2.
    let step = 0.5 / (n * n) as f64;
    let value = |w: &[f64]| alpha.iter().zip(w).map(|(a, v)| a * v * v).sum::<f64>();
    let mut last = value(&w);
    for it in 0..max_iter {
        let lw = neg_laplacian(&w);
        let mut p: Vec<f64> = alpha.iter().zip(&w).map(|(a, v)| 2.0 * a * v).collect();
        let s = dot(&p, &w);
        p.iter_mut().zip(&w).for_each(|(x, v)| *x -= s * v);
        if excess(&w, f0) > -1e-9 * f0 {
            // Active constraint: also project out its normal when the
            // multiplier is positive.
            let mut q: Vec<f64> = lw.iter().zip(&w).map(|(l, v)| l - f0 * v).collect();
            let s = dot(&q, &w);
            q.iter_mut().zip(&w).for_each(|(x, v)| *x -= s * v);
            let t = dot(&p, &q) / dot(&q, &q);
            if t > 0.0 {
                p.iter_mut().zip(&q).for_each(|(x, y)| *x -= t * y);
            }
        }
        let mut v: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a + step * b).collect();
        normalize(&mut v);
        w = if excess(&v, f0) > 0.0 { retract(&v, f0) } else { v };
        if it % 1000 == 999 {
            let now = value(&w);
            if (now - last).abs() < 1e-14 {
                break;
            }
            last = now;
        }
    }
    value(&w)
}

/// Best value over `restarts` random smooth starting points.
pub fn maximize(alpha: &[f64], f0: f64, restarts: usize, seed: u64) -> f64 {
    let n = alpha.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..restarts {
        let coef: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut w: Vec<f64> = (0..n)
            .map(|j| {
                let y = j as f64 / n as f64;
                1.0 + coef
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let z = 2.0 * PI * (k + 1) as f64 * y;
                        0.05 * (a * z.cos() + b * z.sin())
                    })
                    .sum::<f64>()
            })
            .collect();
        normalize(&mut w);
        best = best.max(ascend(alpha, f0, w, 400_000));
    }
    best
}
