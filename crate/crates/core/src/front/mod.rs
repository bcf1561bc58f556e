//! Traveling fronts of the amplitude-scaled problem
//! `Δ_y U + A⁻² U_xx + (γ − α(y)) U_x + f(U) = 0` on a truncated cylinder,
//! with the speed `γ` solved together with `U` under the normalization
//! `max_y U(0, y) = θ`.

mod audit;
mod continuation;
mod discretize;
mod solve;

pub use audit::{
    check_exponential_barrier, check_integral_identities, lower_barrier, Barrier, BarrierReport,
    IdentityReport,
};
pub use continuation::{continuation_in_a, ContinuationEntry, ContinuationEvent, ContinuationRun, XFrame};
pub use discretize::{stencil, AdvectionScheme, Discretization};
pub use solve::solve_front_scaled;

use alloc::vec::Vec;

use crate::flow::FlowProfile;
use crate::grid::CylinderGrid;
use crate::reaction::Reaction;

/// Controls for the nonlinear front solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Residual ∞-norm accepted as converged.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Initial Newton step fraction; backtracking halves it from here.
    pub damping: f64,
    /// First pseudo-time step of the fallback marcher.
    pub pseudo_time_dt: f64,
    pub max_pseudo_steps: usize,
    /// Allowed boundary defect `|U(x_min+dx)−1|`, `|U(x_max−dx)|`.
    pub tol_bc: f64,
    /// Allowed monotonicity and range defect of the converged field.
    pub shape_tol: f64,
    pub scheme: AdvectionScheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 50,
            damping: 1.0,
            pseudo_time_dt: 0.05,
            max_pseudo_steps: 400,
            tol_bc: 1e-6,
            shape_tol: 1e-10,
            scheme: AdvectionScheme::Upwind3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = self.newton_tol > 0.0
            && self.max_newton > 0
            && self.damping > 0.0
            && self.damping <= 1.0
            && self.pseudo_time_dt > 0.0
            && self.tol_bc > 0.0
            && self.shape_tol > 0.0;
        if !positive || self.newton_tol >= self.tol_bc {
            return Err(crate::error::invalid(
                "solve options must be positive, damping ≤ 1 and newton_tol < tol_bc",
            ));
        }
        Ok(())
    }
}

/// Starting point of a front solve.
#[derive(Debug, Clone, Copy)]
pub enum Init<'a> {
    /// `U = ½(1 − tanh((x − x_c)/width))` with `U(0) = θ`, constant in `y`.
    Tanh { width: f64, gamma: f64 },
    /// A previous solution, resampled onto the new grid in normalized `x`.
    Solution(&'a FrontSolution),
    /// An explicit field on the target grid.
    Field { u: &'a [f64], gamma: f64 },
}

/// A converged front `(γ_A, U_A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontSolution {
    pub amplitude: f64,
    /// Scaled speed `γ_A = c_A / A` of the mean-zero flow.
    pub gamma: f64,
    /// Field on `grid`, x-major.
    pub u: Vec<f64>,
    pub grid: CylinderGrid,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub pseudo_time_steps: usize,
    pub flow: FlowProfile,
    pub reaction: Reaction,
    pub scheme: AdvectionScheme,
}

impl FrontSolution {
    /// Unscaled speed of the original flow, `A·γ_A + A·β`.
    pub fn unscaled_speed(&self) -> f64 {
        self.amplitude * (self.gamma + self.flow.beta())
    }

    /// Values on the cross-section `x = x_i`.
    pub fn slice(&self, i: usize) -> &[f64] {
        let m = self.grid.n_y();
        &self.u[i * m..(i + 1) * m]
    }

    /// `max_y U(0, y)`.
    pub fn max_at_zero(&self) -> f64 {
        self.slice(self.grid.zero_index())
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Field shifted by `k` nodes in `x` (positive moves the front right),
    /// padded with the boundary values.
    pub fn shifted_field(&self, k: isize) -> Vec<f64> {
        let m = self.grid.n_y();
        let nx = self.grid.n_x() as isize;
        let mut out = alloc::vec![0.0; self.u.len()];
        for i in 0..nx {
            let src = (i - k).clamp(0, nx - 1) as usize;
            out[i as usize * m..(i as usize + 1) * m].copy_from_slice(self.slice(src));
        }
        out
    }

    /// Largest increase `U(x_{i+1}, y) − U(x_i, y)` over all node pairs.
    pub fn monotonicity_defect(&self) -> f64 {
        let m = self.grid.n_y();
        (m..self.u.len())
            .map(|k| self.u[k] - self.u[k - m])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Distance of the field from the range `[0, 1]`.
    pub fn range_defect(&self) -> f64 {
        self.u
            .iter()
            .fold(0.0_f64, |d, &v| d.max(-v).max(v - 1.0))
    }
}
