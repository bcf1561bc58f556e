//! Principal eigenpairs of `t·Δ + V` on the torus and the KPP speed formulas
//! built from them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::flow::FlowProfile;
use crate::fourier;
use crate::grid::{TorusGrid, YStencil};
use crate::linalg::{
    conjugate_gradient, dot, largest_symmetric_eigenvalue, norm_inf, DenseLu, DenseMatrix,
};

/// Largest eigenvalue of a torus operator with its positive eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Normalized to minimum 1 (for `t = 0`: indicator of the maximizer).
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
    /// `‖(Op − eigenvalue)·φ‖∞ / ‖φ‖∞`.
    pub residual: f64,
}

/// Largest grid size handled by dense factorizations.
const DENSE_LIMIT: usize = 1024;
const RESIDUAL_TOL: f64 = 1e-9;

fn apply_operator(grid: &TorusGrid, t: f64, v: &[f64], x: &[f64], out: &mut [f64]) {
    grid.apply_laplacian(x, out);
    for ((o, vi), xi) in out.iter_mut().zip(v).zip(x) {
        *o = t * *o + vi * xi;
    }
}

fn rayleigh(grid: &TorusGrid, t: f64, v: &[f64], x: &[f64]) -> (f64, f64) {
    let mut ax = vec![0.0; x.len()];
    apply_operator(grid, t, v, x, &mut ax);
    let rho = dot(x, &ax) / dot(x, x);
    let r = ax
        .iter()
        .zip(x)
        .fold(0.0_f64, |m, (a, b)| m.max((a - rho * b).abs()));
    (rho, r / norm_inf(x))
}

/// Largest eigenvalue of `t·Δ + V` with its positive eigenfunction.
pub fn principal_eigpair(grid: &TorusGrid, t: f64, potential: &[f64]) -> Result<EigenResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("diffusivity must be finite and non-negative"));
    }
    if potential.len() != grid.len() {
        return Err(invalid("potential length does not match the grid"));
    }
    if let Some(index) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let n = grid.len();
    let (imax, vmax) = potential
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    if t == 0.0 {
        let mut phi = vec![0.0; n];
        phi[imax] = 1.0;
        return Ok(EigenResult {
            eigenvalue: vmax,
            eigenfunction: phi,
            iterations: 0,
            residual: 0.0,
        });
    }
    if potential.iter().all(|&v| v == potential[0]) {
        return Ok(EigenResult {
            eigenvalue: potential[0],
            eigenfunction: vec![1.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let (x, iterations) = if n <= DENSE_LIMIT {
        dense_inverse_iteration(grid, t, potential)?
    } else {
        iterative_inverse_iteration(grid, t, potential, vmax)?
    };
    finish(grid, t, potential, x, iterations)
}

fn finish(
    grid: &TorusGrid,
    t: f64,
    potential: &[f64],
    mut x: Vec<f64>,
    iterations: usize,
) -> Result<EigenResult> {
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Check(alloc::format!(
            "principal eigenfunction is not positive (min {min:.3e})"
        )));
    }
    x.iter_mut().for_each(|v| *v /= min);
    let (rho, residual) = rayleigh(grid, t, potential, &x);
    // Rounding in the operator itself sets a floor for very large potentials.
    let scale = t * 4.0 * grid.dim() as f64 / (grid.spacing() * grid.spacing())
        + norm_inf(potential);
    if residual > RESIDUAL_TOL.max(1e-13 * scale) {
        return Err(Error::NoConvergence {
            what: "principal eigenpair",
            iterations,
            residual,
        });
    }
    Ok(EigenResult {
        eigenvalue: rho,
        eigenfunction: x,
        iterations,
        residual,
    })
}

fn dense_inverse_iteration(grid: &TorusGrid, t: f64, v: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = grid.len();
    let mut m = grid.laplacian_matrix();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= t;
        }
        m[(i, i)] += v[i];
    }
    let lambda = largest_symmetric_eigenvalue(&m);
    let delta = 1e-9 * (m.norm_inf() + 1.0);
    let mut shifted = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            shifted[(i, j)] = -m[(i, j)];
        }
        shifted[(i, i)] += lambda + delta;
    }
    let lu = if grid.stencil() == YStencil::FiniteDifference {
        DenseLu::new_unpivoted(shifted)?
    } else {
        DenseLu::new(shifted)?
    };
    let mut x = vec![1.0; n];
    let mut best = f64::INFINITY;
    for it in 1..=60 {
        x = lu.solve(&x);
        let s = norm_inf(&x);
        x.iter_mut().for_each(|e| *e /= s);
        let (_, r) = rayleigh(grid, t, v, &x);
        if r <= 1e-15 * (m.norm_inf() + 1.0) || (it > 2 && r >= 0.5 * best) {
            return Ok((x, it));
        }
        best = best.min(r);
    }
    Ok((x, 60))
}

fn iterative_inverse_iteration(
    grid: &TorusGrid,
    t: f64,
    v: &[f64],
    vmax: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = grid.len();
    let mut x = vec![1.0; n];
    let mut sigma = vmax + 1.0;
    let mut last = f64::INFINITY;
    for it in 1..=500 {
        let apply = |p: &[f64], out: &mut [f64]| {
            apply_operator(grid, t, v, p, out);
            for (o, pi) in out.iter_mut().zip(p) {
                *o = sigma * pi - *o;
            }
        };
        let next = match conjugate_gradient(apply, &x, &x, 1e-12, 20 * n) {
            Some(y) => y,
            None => {
                sigma += 2.0 * (sigma - vmax).abs().max(1e-6);
                continue;
            }
        };
        x = next;
        let s = norm_inf(&x);
        x.iter_mut().for_each(|e| *e /= s);
        let (rho, r) = rayleigh(grid, t, v, &x);
        if r <= 1e-11 {
            return Ok((x, it));
        }
        if r < 1e-3 && r < last {
            sigma = rho + 10.0 * r;
        }
        last = r;
    }
    Err(Error::NoConvergence {
        what: "principal eigenpair",
        iterations: 500,
        residual: last,
    })
}

/// Principal eigenvalue of `Δ_y + A⁻²λ² − λ(γ − α)`.
pub fn mu_of_lambda(lambda: f64, a: f64, gamma: f64, flow: &FlowProfile) -> Result<f64> {
    Ok(mu_pair(lambda, a, gamma, flow)?.0)
}

fn mu_pair(lambda: f64, a: f64, gamma: f64, flow: &FlowProfile) -> Result<(f64, Vec<f64>)> {
    if !(a > 0.0) {
        return Err(invalid("amplitude must be positive"));
    }
    let n = flow.grid().len();
    if lambda == 0.0 {
        return Ok((0.0, vec![1.0; n]));
    }
    let shift = lambda * lambda / (a * a) - lambda * gamma;
    let v: Vec<f64> = flow.alpha().iter().map(|al| lambda * al).collect();
    let e = principal_eigpair(flow.grid(), 1.0, &v)?;
    Ok((shift + e.eigenvalue, e.eigenfunction))
}

/// Positive root `λ` of `μ(λ) = 0` with the eigenfunction at the root.
pub fn decay_rate_with_profile(a: f64, gamma: f64, flow: &FlowProfile) -> Result<(f64, Vec<f64>)> {
    if !(gamma > 0.0) {
        return Err(invalid("decay rate needs γ > 0"));
    }
    const TOL: f64 = 1e-10;
    let hi0 = gamma * a * a;
    let (mut hi, mut mu_hi) = (hi0, mu_of_lambda(hi0, a, gamma, flow)?);
    if mu_hi.abs() <= TOL {
        let (_, phi) = mu_pair(hi, a, gamma, flow)?;
        return Ok((hi, phi));
    }
    // μ(γA²) ≥ 0 because the Rayleigh quotient of a constant is the mean of α.
    // Guard anyway against a coarse-grid failure of that inequality.
    while mu_hi < 0.0 {
        hi *= 2.0;
        if hi > 10.0 * hi0 {
            return Err(Error::NotBracketed {
                what: "decay rate",
                lo: 0.0,
                hi,
                f_lo: 0.0,
                f_hi: mu_hi,
            });
        }
        mu_hi = mu_of_lambda(hi, a, gamma, flow)?;
    }
    let mut lo = 0.5 * hi;
    let mut mu_lo = mu_of_lambda(lo, a, gamma, flow)?;
    let mut halvings = 0;
    while mu_lo >= 0.0 {
        lo *= 0.5;
        halvings += 1;
        if halvings > 80 {
            return Err(Error::NotBracketed {
                what: "decay rate",
                lo,
                hi,
                f_lo: mu_lo,
                f_hi: mu_hi,
            });
        }
        mu_lo = mu_of_lambda(lo, a, gamma, flow)?;
    }
    // Illinois regula falsi on the bracket [lo, hi].
    let mut side = 0i32;
    for _ in 0..200 {
        let mut mid = (lo * mu_hi - hi * mu_lo) / (mu_hi - mu_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let m = mu_of_lambda(mid, a, gamma, flow)?;
        if m.abs() <= TOL || hi - lo <= 4.0 * f64::EPSILON * hi {
            let (_, phi) = mu_pair(mid, a, gamma, flow)?;
            return Ok((mid, phi));
        }
        if m < 0.0 {
            lo = mid;
            mu_lo = m;
            if side == -1 {
                mu_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            mu_hi = m;
            if side == 1 {
                mu_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence {
        what: "decay rate",
        iterations: 200,
        residual: mu_hi.min(-mu_lo),
    })
}

/// Positive root `λ` of `μ(λ) = 0`.
pub fn decay_rate(a: f64, gamma: f64, flow: &FlowProfile) -> Result<f64> {
    Ok(decay_rate_with_profile(a, gamma, flow)?.0)
}

/// `(k_A(λ) + f'(0)) / λ` with `k_A(λ)` the principal eigenvalue of `Δ + λ² + λAα`.
pub fn kpp_speed_at(lambda: f64, a: f64, flow: &FlowProfile, fprime0: f64) -> Result<f64> {
    let v: Vec<f64> = flow.alpha().iter().map(|al| lambda * a * al).collect();
    let k = lambda * lambda + principal_eigpair(flow.grid(), 1.0, &v)?.eigenvalue;
    Ok((k + fprime0) / lambda)
}

/// Minimal KPP front speed at amplitude `A` for the mean-zero flow.
pub fn kpp_minimal_speed(a: f64, flow: &FlowProfile, fprime0: f64) -> Result<f64> {
    if !(fprime0 > 0.0) || !(a >= 0.0) {
        return Err(invalid("KPP speed needs f'(0) > 0 and A ≥ 0"));
    }
    let phi = |s: f64| kpp_speed_at(libm::exp(s), a, flow, fprime0);
    let (s_lo, s_hi) = (-6.0, 6.0);
    let samples = 49;
    let mut vals = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = s_lo + (s_hi - s_lo) * k as f64 / (samples - 1) as f64;
        vals.push((s, phi(s)?));
    }
    let k = (0..samples)
        .min_by(|&i, &j| vals[i].1.partial_cmp(&vals[j].1).unwrap())
        .unwrap();
    if k == 0 || k == samples - 1 {
        return Err(Error::NotBracketed {
            what: "KPP speed minimum",
            lo: s_lo,
            hi: s_hi,
            f_lo: vals[0].1,
            f_hi: vals[samples - 1].1,
        });
    }
    let golden = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a0, mut b0) = (vals[k - 1].0, vals[k + 1].0);
    let mut c = b0 - golden * (b0 - a0);
    let mut d = a0 + golden * (b0 - a0);
    let (mut fc, mut fd) = (phi(c)?, phi(d)?);
    while b0 - a0 > 1e-8 {
        if fc <= fd {
            b0 = d;
            d = c;
            fd = fc;
            c = b0 - golden * (b0 - a0);
            fc = phi(c)?;
        } else {
            a0 = c;
            c = d;
            fc = fd;
            d = a0 + golden * (b0 - a0);
            fd = phi(d)?;
        }
    }
    Ok(fc.min(fd).min(vals[k].1))
}

/// Result of the constrained Rayleigh-quotient maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct KppLimit {
    /// `max ∫αw²/∫w²` subject to `‖∇w‖² ≤ f'(0)‖w‖²`.
    pub value: f64,
    /// Multiplier `t*` of the gradient constraint.
    pub t_star: f64,
    /// Principal eigenvalue `ν(t*)` of `t*Δ + α`; `value = ν(t*) + t*·f'(0)`.
    pub nu: f64,
    /// False when the constraint is slack down to the resolution floor of `t`.
    pub constraint_active: bool,
    /// Maximizer `w_{t*}`, normalized to minimum 1.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
}

/// Smallest diffusivity the dual sweep resolves.
pub const T_FLOOR: f64 = 1e-8;

fn dual_point(flow: &FlowProfile, t: f64) -> Result<(f64, f64, Vec<f64>)> {
    let e = principal_eigpair(flow.grid(), t, flow.alpha())?;
    let w = e.eigenfunction;
    let ww = dot(&w, &w) * flow.grid().cell_volume();
    let g = flow.grid().dirichlet_energy(&w) / ww;
    Ok((e.eigenvalue, g, w))
}

fn rayleigh_alpha(flow: &FlowProfile, w: &[f64]) -> f64 {
    let num: f64 = w.iter().zip(flow.alpha()).map(|(x, a)| a * x * x).sum();
    num / dot(w, w)
}

/// The KPP limit speed: the largest `∫αw²/∫w²` over `w` with `‖∇w‖² ≤ f'(0)‖w‖²`.
///
/// Solved through the dual family `t·Δ + α`: the gradient ratio `g(t)` of the
/// principal eigenfunction `w_t` decreases in `t`, and the maximizer is `w_{t*}`
/// with `g(t*) = f'(0)`.
pub fn kpp_limit_speed(flow: &FlowProfile, fprime0: f64) -> Result<KppLimit> {
    if !(fprime0 > 0.0) || !fprime0.is_finite() {
        return Err(invalid("f'(0) must be positive"));
    }
    let n = flow.grid().len();
    if flow.is_zero() {
        return Ok(KppLimit {
            value: 0.0,
            t_star: 0.0,
            nu: 0.0,
            constraint_active: false,
            maximizer: vec![1.0; n],
            iterations: 0,
        });
    }
    let (nu_lo, g_lo, w_lo) = dual_point(flow, T_FLOOR)?;
    if g_lo <= fprime0 {
        return Ok(KppLimit {
            value: rayleigh_alpha(flow, &w_lo),
            t_star: T_FLOOR,
            nu: nu_lo,
            constraint_active: false,
            maximizer: w_lo,
            iterations: 0,
        });
    }
    let mut t_hi = 1.0;
    let (mut g_hi, mut iterations) = (dual_point(flow, t_hi)?.1, 0);
    while g_hi >= fprime0 {
        t_hi *= 4.0;
        iterations += 1;
        if iterations > 60 {
            return Err(Error::NotBracketed {
                what: "dual multiplier",
                lo: T_FLOOR,
                hi: t_hi,
                f_lo: g_lo,
                f_hi: g_hi,
            });
        }
        g_hi = dual_point(flow, t_hi)?.1;
    }
    let (mut s_lo, mut s_hi) = (libm::log(T_FLOOR), libm::log(t_hi));
    let mut g_left = g_lo;
    let mut g_right = g_hi;
    let mut best = None;
    for it in 0..200 {
        let s = 0.5 * (s_lo + s_hi);
        let (nu, g, w) = dual_point(flow, libm::exp(s))?;
        // g must lie between its bracket values; a violation means g(t) is not monotone.
        let slack = 1e-10 * g_left.max(1.0);
        if g > g_left + slack || g < g_right - slack {
            return Err(Error::Check(alloc::format!(
                "gradient ratio not monotone at t = {:.6e}",
                libm::exp(s)
            )));
        }
        iterations += 1;
        let done = (g - fprime0).abs() <= 1e-13 * fprime0 || s_hi - s_lo < 1e-14;
        best = Some((libm::exp(s), nu, w));
        if done || it == 199 {
            break;
        }
        if g > fprime0 {
            s_lo = s;
            g_left = g;
        } else {
            s_hi = s;
            g_right = g;
        }
    }
    let (t_star, nu, w) = best.expect("bisection ran");
    Ok(KppLimit {
        value: rayleigh_alpha(flow, &w),
        t_star,
        nu,
        constraint_active: true,
        maximizer: w,
        iterations,
    })
}

/// `2√f'(0) · sup ∫αw / ‖∇w‖` over mean-zero `w`, via the Fourier coefficients of `α`.
pub fn small_amplitude_slope(flow: &FlowProfile, fprime0: f64) -> Result<f64> {
    if !(fprime0 >= 0.0) || !fprime0.is_finite() {
        return Err(invalid("f'(0) must be finite and non-negative"));
    }
    let grid = flow.grid();
    let spec = fourier::forward(grid, flow.alpha());
    let mut s = 0.0;
    for idx in 0..grid.len() {
        let k = fourier::wavevector(grid, idx);
        let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        if k2 == 0.0 {
            continue;
        }
        let c2 = spec.re[idx] * spec.re[idx] + spec.im[idx] * spec.im[idx];
        s += c2 / (4.0 * core::f64::consts::PI * core::f64::consts::PI * k2);
    }
    Ok(2.0 * libm::sqrt(fprime0) * libm::sqrt(s))
}
