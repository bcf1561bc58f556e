//! Discrete residual and Jacobian of the scaled front equation.
//!
//! Unknowns are the interior nodes `1 ≤ i ≤ n_x − 2` of the x-major field,
//! so the unknown vector is the contiguous slice `u[m .. (n_x − 1)·m]` with
//! `m` the cross-section size.

use alloc::vec;
use alloc::vec::Vec;

use crate::flow::FlowProfile;
use crate::grid::CylinderGrid;
use crate::reaction::Reaction;

/// Difference scheme for the advective term `(γ − α) U_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionScheme {
    /// Second-order centered differences.
    Centered,
    /// Second-order one-sided upwind differences.
    Upwind2,
    /// Third-order upwind-biased differences (`κ = 1/3`).
    #[default]
    Upwind3,
}

/// Stencil offsets and weights (times `1/dx`) for rows whose upwind side is `−x`.
fn backward(scheme: AdvectionScheme) -> &'static [(isize, f64)] {
    match scheme {
        AdvectionScheme::Centered => &[(-1, -0.5), (1, 0.5)],
        AdvectionScheme::Upwind2 => &[(-2, 0.5), (-1, -2.0), (0, 1.5)],
        AdvectionScheme::Upwind3 => &[(-2, 1.0 / 6.0), (-1, -1.0), (0, 0.5), (1, 1.0 / 3.0)],
    }
}

fn forward(scheme: AdvectionScheme) -> &'static [(isize, f64)] {
    match scheme {
        AdvectionScheme::Centered => &[(-1, -0.5), (1, 0.5)],
        AdvectionScheme::Upwind2 => &[(2, -0.5), (1, 2.0), (0, -1.5)],
        AdvectionScheme::Upwind3 => &[(2, -1.0 / 6.0), (1, 1.0), (0, -0.5), (-1, -1.0 / 3.0)],
    }
}

const CENTERED: &[(isize, f64)] = &[(-1, -0.5), (1, 0.5)];

/// Selects the x-derivative stencil at row `i` for transport speed `v`.
///
/// The steady equation carries information against `v`, so `v > 0` takes
/// the forward-biased stencil. Rows whose stencil would leave the grid fall
/// back to centered differences.
pub fn stencil(scheme: AdvectionScheme, v: f64, i: usize, n_x: usize) -> &'static [(isize, f64)] {
    let s = if v > 0.0 { forward(scheme) } else { backward(scheme) };
    let fits = s.iter().all(|&(o, _)| {
        let k = i as isize + o;
        k >= 0 && (k as usize) < n_x
    });
    if fits {
        s
    } else {
        CENTERED
    }
}

/// Per-problem constants of the discrete operator.
pub struct Discretization<'a> {
    pub grid: &'a CylinderGrid,
    pub flow: &'a FlowProfile,
    pub reaction: &'a Reaction,
    pub scheme: AdvectionScheme,
    pub amplitude: f64,
    m: usize,
    nx: usize,
    dx: f64,
    cxx: f64,
    ylap: Vec<Vec<(usize, f64)>>,
}


impl<'a> Discretization<'a> {
    pub fn new(
        amplitude: f64,
        flow: &'a FlowProfile,
        reaction: &'a Reaction,
        grid: &'a CylinderGrid,
        scheme: AdvectionScheme,
    ) -> Self {
        let m = grid.n_y();
        let mut ylap = vec![Vec::new(); m];
        for (r, c, v) in grid.torus().laplacian_entries() {
            ylap[r].push((c, v));
        }
        let dx = grid.dx();
        Self {
            grid,
            flow,
            reaction,
            scheme,
            amplitude,
            m,
            nx: grid.n_x(),
            dx,
            cxx: 1.0 / (amplitude * amplitude * dx * dx),
            ylap,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of unknowns (interior nodes).
    pub fn unknowns(&self) -> usize {
        (self.nx - 2) * self.m
    }

    /// Bandwidth of the Jacobian in unknown ordering.
    pub fn bandwidth(&self) -> usize {
        let reach = match self.scheme {
            AdvectionScheme::Centered => 1,
            _ => 2,
        };
        reach * self.m
    }

    /// Discrete x-derivative `(D U)_{ij}` with the stencil oriented by `v`.
    #[inline]
    pub fn advective_derivative(&self, u: &[f64], i: usize, j: usize, v: f64) -> f64 {
        let m = self.m;
        stencil(self.scheme, v, i, self.nx)
            .iter()
            .map(|&(o, c)| c * u[(i as isize + o) as usize * m + j])
            .sum::<f64>()
            / self.dx
    }

    /// Cell-averaged reaction at node `(i, j)` with partials in
    /// `U_{i,j}`, `U_{i+1,j}`, `U_{i−1,j}`.
    ///
    /// The reaction is averaged along the piecewise-linear interpolant over
    /// the half cells on each side of the node, which keeps the scheme
    /// second-order accurate even when `f` jumps at `θ`.
    #[inline]
    pub fn cell_reaction(&self, u: &[f64], i: usize, j: usize) -> (f64, f64, f64, f64) {
        let m = self.m;
        let c = u[i * m + j];
        let right = u[(i + 1) * m + j];
        let left = u[(i - 1) * m + j];
        let (a1, da1, db1) = self.reaction.segment_average(c, 0.5 * (c + right));
        let (a2, da2, db2) = self.reaction.segment_average(c, 0.5 * (c + left));
        let value = 0.5 * (a1 + a2);
        let d_center = 0.5 * (da1 + 0.5 * db1 + da2 + 0.5 * db2);
        (value, d_center, 0.25 * db1, 0.25 * db2)
    }

    /// Residual of every interior node, written into `out` (length `unknowns()`).
    pub fn residual(&self, u: &[f64], gamma: f64, out: &mut [f64]) {
        let m = self.m;
        let alpha = self.flow.alpha();
        for i in 1..self.nx - 1 {
            for j in 0..m {
                let k = i * m + j;
                let mut r = 0.0;
                for &(l, c) in &self.ylap[j] {
                    r += c * u[i * m + l];
                }
                r += self.cxx * (u[k + m] - 2.0 * u[k] + u[k - m]);
                let v = gamma - alpha[j];
                r += v * self.advective_derivative(u, i, j, v);
                r += self.cell_reaction(u, i, j).0;
                out[k - m] = r;
            }
        }
    }

    /// Emits the Jacobian entries `(row, col, value)` in unknown ordering and
    /// writes the γ-column `∂R/∂γ` into `gcol`.
    pub fn jacobian(
        &self,
        u: &[f64],
        gamma: f64,
        gcol: &mut [f64],
        mut emit: impl FnMut(usize, usize, f64),
    ) {
        let m = self.m;
        let nx = self.nx;
        let alpha = self.flow.alpha();
        let inv_dx = 1.0 / self.dx;
        let interior = |node: isize| node >= m as isize && node < ((nx - 1) * m) as isize;
        for i in 1..nx - 1 {
            for j in 0..m {
                let k = i * m + j;
                let row = k - m;
                let mut put = |node: usize, val: f64| {
                    if interior(node as isize) {
                        emit(row, node - m, val);
                    }
                };
                for &(l, c) in &self.ylap[j] {
                    put(i * m + l, c);
                }
                put(k + m, self.cxx);
                put(k - m, self.cxx);
                put(k, -2.0 * self.cxx);
                let v = gamma - alpha[j];
                let st = stencil(self.scheme, v, i, nx);
                let mut du = 0.0;
                for &(o, c) in st {
                    let node = (i as isize + o) as usize * m + j;
                    put(node, v * c * inv_dx);
                    du += c * u[node];
                }
                gcol[row] = du * inv_dx;
                let (_, dc, dr, dl) = self.cell_reaction(u, i, j);
                put(k, dc);
                put(k + m, dr);
                put(k - m, dl);
            }
        }
    }
}
