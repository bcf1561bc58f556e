//! Small dense and banded linear algebra kernels.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = dot(self.row(i), x);
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// LU factorization with partial pivoting of a square dense matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factorization with partial pivoting.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        Self::factor(a, true)
    }

    /// Factorization in natural order. For nonsingular M-matrices the factors
    /// keep their sign pattern and triangular solves never cancel, so
    /// positive right-hand sides give positive solutions.
    pub fn new_unpivoted(a: DenseMatrix) -> Result<Self> {
        Self::factor(a, false)
    }

    fn factor(mut a: DenseMatrix, pivoting: bool) -> Result<Self> {
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            if pivoting {
                for i in k + 1..n {
                    if a[(i, k)].abs() > best {
                        best = a[(i, k)].abs();
                        p = i;
                    }
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix { row: k });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / pivot;
                a[(i, k)] = l;
                if l != 0.0 {
                    let (top, bottom) = a.data.split_at_mut(i * n);
                    let rk = &top[k * n + k + 1..k * n + n];
                    let ri = &mut bottom[k + 1..n];
                    for (x, y) in ri.iter_mut().zip(rk) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns `(diagonal, off_diagonal)` with `off[0] = 0` and `off[i]` coupling `i-1, i`.
pub fn tridiagonalize(mut a: DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -libm::sqrt(h) } else { libm::sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut ff = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    ff += e[j] * a[(i, j)];
                }
                let hh = ff / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        let _ = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[(i, i)];
    }
    e[0] = 0.0;
    (d, e)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let e2 = if i == 0 { 0.0 } else { e[i] * e[i] };
        q = d[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
pub fn largest_tridiagonal_eigenvalue(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i].abs() } else { 0.0 } + if i + 1 < n { e[i + 1].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest eigenvalue of a dense symmetric matrix.
pub fn largest_symmetric_eigenvalue(a: &DenseMatrix) -> f64 {
    let (d, e) = tridiagonalize(a.clone());
    largest_tridiagonal_eigenvalue(&d, &e)
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals, stored row-major,
/// factored in place by Gaussian elimination without pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    /// Resets every entry to zero, keeping the allocation.
    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `v` to entry `(i, j)`; `j` must lie in the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && j <= i + self.ku);
        let w = self.width();
        self.data[i * w + j + self.kl - i] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[i * self.width() + j + self.kl - i]
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let w = self.width();
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w + j0 + self.kl - i..i * w + j1 + self.kl - i + 1];
            *o = dot(row, &x[j0..=j1]);
        }
    }

    /// In-place LU factorization without pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = self.width();
        for k in 0..n {
            let pivot = self.data[k * w + kl];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularMatrix { row: k });
            }
            let inv = 1.0 / pivot;
            let jmax = (k + ku).min(n - 1);
            let len = jmax - k;
            let imax = (k + kl).min(n - 1);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let rk = &head[k * w + kl + 1..k * w + kl + 1 + len];
            for i in k + 1..=imax {
                let base = (i - k - 1) * w;
                let off = kl - (i - k);
                let l = tail[base + off] * inv;
                tail[base + off] = l;
                if l != 0.0 {
                    let ri = &mut tail[base + off + 1..base + off + 1 + len];
                    for (x, y) in ri.iter_mut().zip(rk) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        let w = self.m.width();
        let d = &self.m.data;
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let row = &d[i * w + j0 + kl - i..i * w + kl];
            let s = dot(row, &x[j0..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let j1 = (i + ku).min(n - 1);
            let row = &d[i * w + kl + 1..i * w + kl + 1 + (j1 - i)];
            let s = dot(row, &x[i + 1..=j1]);
            x[i] = (x[i] - s) / d[i * w + kl];
        }
    }
}

/// Conjugate gradients for a symmetric positive definite operator.
/// Returns `None` if the operator is found not to be positive definite.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rel_tol * norm2(b).max(f64::MIN_POSITIVE);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        if libm::sqrt(rr) <= target {
            return Some(x);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return None;
        }
        let a = rr / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Some(x)
}
