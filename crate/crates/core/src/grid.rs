//! Uniform grids on the unit torus and on truncated cylinders over it.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;

/// Discretization of the torus Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YStencil {
    /// Second-order centered differences.
    #[default]
    FiniteDifference,
    /// Trigonometric (Fourier) differentiation.
    Spectral,
}

/// Uniform grid on the unit-period torus of dimension 1 or 2.
///
/// Nodes of a 2-torus are stored row-major: index `j1 * n + j2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    points_per_dim: usize,
    stencil: YStencil,
}

impl TorusGrid {
    /// Grid with `points_per_dim` nodes along each of `dim` periodic axes.
    pub fn new(dim: usize, points_per_dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("torus dimension must be 1 or 2"));
        }
        if points_per_dim < 8 {
            return Err(invalid("torus grid needs at least 8 points per dimension"));
        }
        Ok(Self {
            dim,
            points_per_dim,
            stencil: YStencil::FiniteDifference,
        })
    }

    /// Same grid with a different Laplacian discretization.
    pub fn with_stencil(mut self, stencil: YStencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn stencil(&self) -> YStencil {
        self.stencil
    }

    /// Mesh width `1 / points_per_dim`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_dim as f64
    }

    /// Total number of nodes, `points_per_dim^dim`.
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one node (cell volume).
    pub fn cell_volume(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Coordinates of node `idx`; the second entry is zero on a 1-torus.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let n = self.points_per_dim;
        if self.dim == 1 {
            [idx as f64 * h, 0.0]
        } else {
            [(idx / n) as f64 * h, (idx % n) as f64 * h]
        }
    }

    /// Samples `f(y1, y2)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let [a, b] = self.coords(k);
                f(a, b)
            })
            .collect()
    }

    /// Index of the neighbour of `idx` shifted by `step` along `axis`, wrapping periodically.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> usize {
        let n = self.points_per_dim as isize;
        let wrap = |j: usize| ((j as isize + step).rem_euclid(n)) as usize;
        if self.dim == 1 {
            wrap(idx)
        } else if axis == 0 {
            let (j1, j2) = (idx / self.points_per_dim, idx % self.points_per_dim);
            wrap(j1) * self.points_per_dim + j2
        } else {
            let (j1, j2) = (idx / self.points_per_dim, idx % self.points_per_dim);
            j1 * self.points_per_dim + wrap(j2)
        }
    }

    /// Grid with every spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            points_per_dim: 2 * self.points_per_dim,
            ..self.clone()
        }
    }

    /// One-dimensional second-derivative matrix of the chosen stencil (`n × n`).
    pub fn second_derivative_1d(&self) -> DenseMatrix {
        let n = self.points_per_dim;
        let h = self.spacing();
        let mut d = DenseMatrix::zeros(n, n);
        match self.stencil {
            YStencil::FiniteDifference => {
                let c = 1.0 / (h * h);
                for j in 0..n {
                    d[(j, j)] -= 2.0 * c;
                    d[(j, (j + 1) % n)] += c;
                    d[(j, (j + n - 1) % n)] += c;
                }
            }
            YStencil::Spectral => {
                // Symmetric trigonometric interpolant; the Nyquist mode is kept
                // so that the matrix stays symmetric.
                let two_pi = 2.0 * core::f64::consts::PI;
                for j in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        let shift = j as f64 - l as f64;
                        for k in 1..n {
                            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                            s -= (two_pi * kk) * (two_pi * kk) * libm::cos(two_pi * kk * shift / n as f64);
                        }
                        d[(j, l)] = s / n as f64;
                    }
                }
            }
        }
        d
    }

    /// Full Laplacian matrix on the torus (`len × len`).
    pub fn laplacian_matrix(&self) -> DenseMatrix {
        let d1 = self.second_derivative_1d();
        let n = self.points_per_dim;
        if self.dim == 1 {
            return d1;
        }
        let m = self.len();
        let mut l = DenseMatrix::zeros(m, m);
        for a in 0..n {
            for b in 0..n {
                let row = a * n + b;
                for c in 0..n {
                    l[(row, c * n + b)] += d1[(a, c)];
                    l[(row, a * n + c)] += d1[(b, c)];
                }
            }
        }
        l
    }

    /// Sparse-in-structure Laplacian as a list of `(row, col, value)` entries.
    pub fn laplacian_entries(&self) -> Vec<(usize, usize, f64)> {
        if self.stencil == YStencil::FiniteDifference {
            let c = 1.0 / (self.spacing() * self.spacing());
            let mut out = Vec::with_capacity(self.len() * (1 + 2 * self.dim));
            for k in 0..self.len() {
                out.push((k, k, -2.0 * c * self.dim as f64));
                for axis in 0..self.dim {
                    out.push((k, self.neighbor(k, axis, 1), c));
                    out.push((k, self.neighbor(k, axis, -1), c));
                }
            }
            return out;
        }
        let l = self.laplacian_matrix();
        let m = self.len();
        let mut out = Vec::new();
        for r in 0..m {
            for c in 0..m {
                let v = l[(r, c)];
                if v != 0.0 {
                    out.push((r, c, v));
                }
            }
        }
        out
    }

    /// Applies the Laplacian to `u`.
    pub fn apply_laplacian(&self, u: &[f64], out: &mut [f64]) {
        match self.stencil {
            YStencil::FiniteDifference => {
                let h2 = self.spacing() * self.spacing();
                for k in 0..self.len() {
                    let mut s = 0.0;
                    for axis in 0..self.dim {
                        s += u[self.neighbor(k, axis, 1)] + u[self.neighbor(k, axis, -1)]
                            - 2.0 * u[k];
                    }
                    out[k] = s / h2;
                }
            }
            YStencil::Spectral => {
                let l = self.laplacian_matrix();
                l.matvec(u, out);
            }
        }
    }

    /// Squared gradient norm `Σ |D⁺u|²` times the cell volume (forward differences
    /// for the finite-difference stencil, `−⟨u, Δu⟩` otherwise).
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let vol = self.cell_volume();
        match self.stencil {
            YStencil::FiniteDifference => {
                let h = self.spacing();
                let mut s = 0.0;
                for k in 0..self.len() {
                    for axis in 0..self.dim {
                        let d = (u[self.neighbor(k, axis, 1)] - u[k]) / h;
                        s += d * d;
                    }
                }
                s * vol
            }
            YStencil::Spectral => {
                let mut lu = alloc::vec![0.0; u.len()];
                self.apply_laplacian(u, &mut lu);
                -u.iter().zip(&lu).map(|(a, b)| a * b).sum::<f64>() * vol
            }
        }
    }

    /// Grid mean of a field.
    pub fn mean(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() / u.len() as f64
    }
}

/// Truncated cylinder `[x_min, x_max] × T` with `n_x` uniformly spaced x-nodes.
///
/// Fields are stored x-major: node `(i, j)` lives at `i * torus.len() + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid {
    torus: TorusGrid,
    x_min: f64,
    x_max: f64,
    n_x: usize,
}

impl CylinderGrid {
    /// Requires `x_min < 0 < x_max`, `n_x ≥ 64` and that `x = 0` is a node.
    pub fn new(torus: TorusGrid, x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if !(x_min < 0.0 && x_max > 0.0) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("cylinder needs x_min < 0 < x_max"));
        }
        if n_x < 64 {
            return Err(invalid("cylinder needs at least 64 x-nodes"));
        }
        let g = Self {
            torus,
            x_min,
            x_max,
            n_x,
        };
        let s = -x_min / g.dx();
        if (s - libm::round(s)).abs() > 1e-9 * s.max(1.0) {
            return Err(invalid("x = 0 must be a grid node"));
        }
        Ok(g)
    }

    pub fn torus(&self) -> &TorusGrid {
        &self.torus
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Cross-section size.
    pub fn n_y(&self) -> usize {
        self.torus.len()
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.n_x * self.n_y()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    /// Index of the node at `x = 0`.
    pub fn zero_index(&self) -> usize {
        libm::round(-self.x_min / self.dx()) as usize
    }

    /// Halves the x-spacing and every torus spacing.
    pub fn refined(&self) -> Self {
        Self {
            torus: self.torus.refined(),
            n_x: 2 * self.n_x - 1,
            ..self.clone()
        }
    }

    /// Same node counts on `[x_min / s, x_max / s]`.
    pub fn contracted(&self, s: f64) -> Self {
        Self {
            x_min: self.x_min / s,
            x_max: self.x_max / s,
            ..self.clone()
        }
    }

    /// Same spacing, x-range extended on the right by `extra_nodes` nodes.
    pub fn extended_right(&self, extra_nodes: usize) -> Self {
        let dx = self.dx();
        Self {
            x_max: self.x_max + extra_nodes as f64 * dx,
            n_x: self.n_x + extra_nodes,
            ..self.clone()
        }
    }
}
