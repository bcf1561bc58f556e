//! Shear-flow profiles with their mean split off.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::fourier;
use crate::grid::TorusGrid;

/// Mean-zero shear profile `α` on a torus grid plus the removed mean `β`.
///
/// Speeds computed with `α` convert to the original profile through
/// `c = c_meanzero + A·β`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProfile {
    grid: TorusGrid,
    alpha: Vec<f64>,
    beta: f64,
    alpha_max: f64,
    alpha_min: f64,
}

impl FlowProfile {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    /// `max |α|`.
    pub fn sup_norm(&self) -> f64 {
        self.alpha_max.max(-self.alpha_min)
    }

    /// True if `α` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }

    /// The original profile `α + β`.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a + self.beta).collect()
    }

    /// Identically zero flow.
    pub fn zero(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            alpha: alloc::vec![0.0; grid.len()],
            beta: 0.0,
            alpha_max: 0.0,
            alpha_min: 0.0,
        }
    }
}

/// Splits `raw` into its grid mean `β` and the mean-zero part `α`.
pub fn normalize_flow(grid: &TorusGrid, raw: &[f64]) -> Result<FlowProfile> {
    if raw.len() != grid.len() {
        return Err(invalid("flow profile length does not match the grid"));
    }
    if let Some(index) = raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let beta = grid.mean(raw);
    let mut alpha: Vec<f64> = raw.iter().map(|v| v - beta).collect();
    // A second pass removes the rounding left by the first subtraction.
    let residual_mean = grid.mean(&alpha);
    alpha.iter_mut().for_each(|a| *a -= residual_mean);
    let beta = beta + residual_mean;
    let alpha_max = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let alpha_min = alpha.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    Ok(FlowProfile {
        grid: grid.clone(),
        alpha,
        beta,
        alpha_max,
        alpha_min,
    })
}

/// Outcome of the derivative nondegeneracy test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondegeneracy {
    /// True iff every node has a nonzero derivative of order `1..=r`.
    pub holds: bool,
    /// Node with the smallest derivative sum.
    pub worst_index: usize,
    /// That smallest sum.
    pub worst_sum: f64,
    /// Threshold the sums were compared against.
    pub threshold: f64,
}

/// Tests that some spectral derivative `D^ζ α`, `1 ≤ |ζ| ≤ r`, is nonzero at every node.
pub fn check_nondegeneracy(flow: &FlowProfile, r: usize) -> Result<Nondegeneracy> {
    let grid = flow.grid();
    if r == 0 {
        return Err(invalid("derivative order must be at least 1"));
    }
    if r > grid.points_per_dim() / 2 {
        return Err(invalid("derivative order exceeds what the grid resolves"));
    }
    if grid.points_per_dim() < 16 {
        return Err(invalid("nondegeneracy check needs at least 16 points per dimension"));
    }
    let mut sums = alloc::vec![0.0; grid.len()];
    for order in 1..=r as u32 {
        let indices: Vec<[u32; 2]> = if grid.dim() == 1 {
            alloc::vec![[order, 0]]
        } else {
            (0..=order).map(|a| [a, order - a]).collect()
        };
        for z in indices {
            let d = fourier::derivative(grid, flow.alpha(), z);
            for (s, v) in sums.iter_mut().zip(&d) {
                *s += v.abs();
            }
        }
    }
    let threshold = 1e-8 * flow.sup_norm();
    let (worst_index, worst_sum) = sums
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, s)| if s < b.1 { (i, s) } else { b });
    Ok(Nondegeneracy {
        holds: worst_sum > threshold,
        worst_index,
        worst_sum,
        threshold,
    })
}
