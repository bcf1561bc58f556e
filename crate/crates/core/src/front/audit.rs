//! Post-solve audits: integral identities and the exponential barrier.

use alloc::vec::Vec;

use super::discretize::Discretization;
use super::FrontSolution;
use crate::error::Result;
use crate::flow::FlowProfile;
use crate::spectral::decay_rate_with_profile;

/// Discrete check of `∬ f(U) = γ` and `∬ |∇_y U|² + A⁻² U_x² = ∬ f(U) U − γ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub reaction_integral: f64,
    pub gamma: f64,
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    pub rel_err_reaction: f64,
    pub rel_err_energy: f64,
    /// `∬ |U_x|`, which telescopes to 1 for a monotone profile.
    pub ux_l1: f64,
}

/// Evaluates both integral identities on the solution grid.
///
/// Integrals use the trapezoid rule in `x` and the periodic rectangle rule in
/// `y`; the reaction enters through the same cell averages as the solver, so
/// a converged solution satisfies the first identity up to boundary fluxes.
pub fn check_integral_identities(sol: &FrontSolution) -> IdentityReport {
    let grid = &sol.grid;
    let torus = grid.torus();
    let m = grid.n_y();
    let nx = grid.n_x();
    let dx = grid.dx();
    let vol = torus.cell_volume();
    let disc = Discretization::new(sol.amplitude, &sol.flow, &sol.reaction, grid, sol.scheme);
    let mut react = 0.0;
    let mut react_u = 0.0;
    for i in 1..nx - 1 {
        for j in 0..m {
            let f = disc.cell_reaction(&sol.u, i, j).0;
            react += f;
            react_u += f * sol.u[i * m + j];
        }
    }
    react *= dx * vol;
    react_u *= dx * vol;
    let mut ey = 0.0;
    for i in 0..nx {
        let w = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
        ey += w * torus.dirichlet_energy(sol.slice(i));
    }
    ey *= dx;
    let mut ex = 0.0;
    let mut l1 = 0.0;
    for k in m..sol.u.len() {
        let d = sol.u[k] - sol.u[k - m];
        ex += d * d;
        l1 += d.abs();
    }
    let a2 = sol.amplitude * sol.amplitude;
    ex *= vol / (dx * a2);
    l1 *= vol;
    let gamma = sol.gamma;
    let scale = gamma.abs().max(1e-12);
    let energy_lhs = ey + ex;
    let energy_rhs = react_u - 0.5 * gamma;
    IdentityReport {
        reaction_integral: react,
        gamma,
        energy_lhs,
        energy_rhs,
        rel_err_reaction: (react - gamma).abs() / scale,
        rel_err_energy: (energy_lhs - energy_rhs).abs() / scale,
        ux_l1: l1,
    }
}

/// Exponential supersolution `e^{−λ̲x} φ(y)` ahead of the front.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    /// Uniform rate `λ̲`.
    pub rate: f64,
    /// Cross-section profile with `min φ = θ`.
    pub profile: Vec<f64>,
}

/// Uniform decay rate `λ̲`: the root of `μ̲(λ)`, the principal eigenvalue of
/// `Δ_y + λ² − λ(γ̲ − α)`, where `γ̲` bounds every scaled speed from below.
pub fn lower_barrier(flow: &FlowProfile, gamma_lower: f64) -> Result<f64> {
    crate::spectral::decay_rate(1.0, gamma_lower, flow)
}

/// Slack for the comparison: at `x = 0` the barrier touches the pinned value.
pub const BARRIER_TOL: f64 = 1e-10;

/// Outcome of the barrier comparison on `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    pub holds: bool,
    /// `min (e^{−λ̲x} φ(y) − U(x, y))` over grid nodes with `x ≥ 0`.
    pub worst_margin: f64,
    pub worst_node: (usize, usize),
    pub violations: usize,
    /// Per-x minimum of the margin, from `x = 0` to `x_max`.
    pub margins: Vec<f64>,
    pub barrier: Barrier,
}

/// Checks `U(x, y) ≤ e^{−λ̲x} φ_A(y)` for `x ≥ 0`, with `φ_A` the eigenfunction
/// at the solution's own decay rate, scaled to `min φ_A = θ`.
pub fn check_exponential_barrier(sol: &FrontSolution, lambda_lower: f64) -> Result<BarrierReport> {
    let (_, mut phi) = decay_rate_with_profile(sol.amplitude, sol.gamma, &sol.flow)?;
    let theta = sol.reaction.theta();
    let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
    phi.iter_mut().for_each(|p| *p *= theta / min);
    let grid = &sol.grid;
    let i0 = grid.zero_index();
    let mut worst = f64::INFINITY;
    let mut worst_node = (i0, 0);
    let mut violations = 0;
    let mut margins = Vec::with_capacity(grid.n_x() - i0);
    for i in i0..grid.n_x() {
        let decay = libm::exp(-lambda_lower * grid.x(i));
        let mut row_min = f64::INFINITY;
        for (j, (&u, &p)) in sol.slice(i).iter().zip(&phi).enumerate() {
            let margin = decay * p - u;
            if margin < -BARRIER_TOL {
                violations += 1;
            }
            if margin < worst {
                worst = margin;
                worst_node = (i, j);
            }
            row_min = row_min.min(margin);
        }
        margins.push(row_min);
    }
    Ok(BarrierReport {
        holds: violations == 0,
        worst_margin: worst,
        worst_node,
        violations,
        margins,
        barrier: Barrier {
            rate: lambda_lower,
            profile: phi,
        },
    })
}
