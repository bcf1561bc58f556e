//! Direct discrete Fourier transforms on torus grids.
//!
//! Grids here are small (tens of points per axis), so an `O(n²)` transform
//! per line is simpler than an FFT and exact enough.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::TorusGrid;

/// Complex field of Fourier coefficients, laid out like the grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Signed wavenumber of index `k` on an `n`-point axis.
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn transform_lines(grid: &TorusGrid, re: &mut [f64], im: &mut [f64], sign: f64) {
    let n = grid.points_per_dim();
    let (cs, sn): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|m| {
            let a = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
            (libm::cos(a), sign * libm::sin(a))
        })
        .unzip();
    let mut lr = vec![0.0; n];
    let mut li = vec![0.0; n];
    let lines: Vec<(usize, usize)> = if grid.dim() == 1 {
        vec![(0, 1)]
    } else {
        let mut v = Vec::new();
        for a in 0..n {
            v.push((a * n, 1));
            v.push((a, n));
        }
        v
    };
    // In two dimensions the rows are transformed first, then the columns.
    let order: Vec<(usize, usize)> = if grid.dim() == 1 {
        lines
    } else {
        let mut rows: Vec<_> = lines.iter().copied().filter(|l| l.1 == 1).collect();
        rows.extend(lines.iter().copied().filter(|l| l.1 == n));
        rows
    };
    for (start, stride) in order {
        for k in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                let m = (j * k) % n;
                let (xr, xi) = (re[start + j * stride], im[start + j * stride]);
                sr += xr * cs[m] - xi * sn[m];
                si += xr * sn[m] + xi * cs[m];
            }
            lr[k] = sr;
            li[k] = si;
        }
        for k in 0..n {
            re[start + k * stride] = lr[k];
            im[start + k * stride] = li[k];
        }
    }
}

/// Coefficients `û_k = (1/N) Σ_j u_j e^{−2πi k·y_j}`.
pub fn forward(grid: &TorusGrid, u: &[f64]) -> Spectrum {
    let mut re = u.to_vec();
    let mut im = vec![0.0; u.len()];
    transform_lines(grid, &mut re, &mut im, -1.0);
    let scale = 1.0 / u.len() as f64;
    re.iter_mut().for_each(|v| *v *= scale);
    im.iter_mut().for_each(|v| *v *= scale);
    Spectrum { re, im }
}

/// Real part of `Σ_k û_k e^{2πi k·y}`.
pub fn inverse_real(grid: &TorusGrid, s: &Spectrum) -> Vec<f64> {
    let mut re = s.re.clone();
    let mut im = s.im.clone();
    transform_lines(grid, &mut re, &mut im, 1.0);
    re
}

/// Wavevector of coefficient index `idx`.
pub fn wavevector(grid: &TorusGrid, idx: usize) -> [i64; 2] {
    let n = grid.points_per_dim();
    if grid.dim() == 1 {
        [wavenumber(idx, n), 0]
    } else {
        [wavenumber(idx / n, n), wavenumber(idx % n, n)]
    }
}

/// Spectral partial derivative of order `orders[axis]` along each axis.
///
/// Odd derivatives discard the Nyquist mode, which has no real derivative.
pub fn derivative(grid: &TorusGrid, u: &[f64], orders: [u32; 2]) -> Vec<f64> {
    let mut s = forward(grid, u);
    let n = grid.points_per_dim() as i64;
    let two_pi = 2.0 * core::f64::consts::PI;
    for idx in 0..u.len() {
        let kv = wavevector(grid, idx);
        // multiplier (i 2π k1)^{o1} (i 2π k2)^{o2}
        let (mut mr, mut mi) = (1.0, 0.0);
        for axis in 0..grid.dim() {
            let o = orders[axis];
            if o == 0 {
                continue;
            }
            let k = kv[axis];
            if o % 2 == 1 && 2 * k.abs() == n {
                mr = 0.0;
                mi = 0.0;
            }
            let mag = libm::pow(two_pi * k as f64, o as f64);
            // i^o
            let (pr, pi) = match o % 4 {
                0 => (mag, 0.0),
                1 => (0.0, mag),
                2 => (-mag, 0.0),
                _ => (0.0, -mag),
            };
            let (ar, ai) = (mr * pr - mi * pi, mr * pi + mi * pr);
            mr = ar;
            mi = ai;
        }
        let (a, b) = (s.re[idx], s.im[idx]);
        s.re[idx] = a * mr - b * mi;
        s.im[idx] = a * mi + b * mr;
    }
    inverse_real(grid, &s)
}
