//! Bordered Newton iteration with a pseudo-transient fallback.

use alloc::vec;
use alloc::vec::Vec;

use super::discretize::Discretization;
use super::{FrontSolution, Init, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::flow::FlowProfile;
use crate::grid::CylinderGrid;
use crate::linalg::{norm_inf, BandMatrix};
use crate::reaction::{Reaction, ReactionKind};

struct State {
    u: Vec<f64>,
    gamma: f64,
}

struct Solver<'a> {
    disc: Discretization<'a>,
    theta: f64,
    zero_row: usize,
    res: Vec<f64>,
}

impl<'a> Solver<'a> {
    /// Node carrying the normalization: the maximizer of `U(0, ·)`.
    fn pin_node(&self, u: &[f64]) -> usize {
        let m = self.disc.m();
        let base = self.zero_row * m;
        let mut best = base;
        for k in base..base + m {
            if u[k] > u[best] {
                best = k;
            }
        }
        best
    }

    fn norm(&mut self, s: &State) -> f64 {
        self.disc.residual(&s.u, s.gamma, &mut self.res);
        let pin = (s.u[self.pin_node(&s.u)] - self.theta).abs();
        let r = norm_inf(&self.res).max(pin);
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }

    /// Solves `[J − σI, g; e_pᵀ, 0] [δU; δγ] = −[R; U_p − θ]` with one step of
    /// iterative refinement. `self.res` must hold `R` at `s`.
    fn linear_step(&mut self, s: &State, sigma: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.disc.unknowns();
        let m = self.disc.m();
        let bw = self.disc.bandwidth();
        let mut band = BandMatrix::zeros(n, bw, bw);
        let mut g = vec![0.0; n];
        self.disc.jacobian(&s.u, s.gamma, &mut g, |r, c, v| band.add(r, c, v));
        if sigma != 0.0 {
            for r in 0..n {
                band.add(r, r, -sigma);
            }
        }
        let lu = band.factor()?;
        let pin = self.pin_node(&s.u) - m;
        let rp = s.u[pin + m] - self.theta;
        let mut z1: Vec<f64> = self.res.iter().map(|r| -r).collect();
        lu.solve_in_place(&mut z1);
        let mut z2 = g.clone();
        lu.solve_in_place(&mut z2);
        if z2[pin] == 0.0 || !z2[pin].is_finite() {
            return Err(Error::SingularMatrix { row: n });
        }
        let mut dg = (z1[pin] + rp) / z2[pin];
        let mut du: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a - dg * b).collect();
        // refinement against the unfactored operator
        let mut e: Vec<f64> = self.res.iter().zip(&g).map(|(r, gi)| -r - gi * dg).collect();
        let mut gdummy = vec![0.0; n];
        self.disc
            .jacobian(&s.u, s.gamma, &mut gdummy, |r, c, v| e[r] -= v * du[c]);
        if sigma != 0.0 {
            for r in 0..n {
                e[r] += sigma * du[r];
            }
        }
        let ep = -rp - du[pin];
        lu.solve_in_place(&mut e);
        let dg2 = (e[pin] - ep) / z2[pin];
        for k in 0..n {
            du[k] += e[k] - dg2 * z2[k];
        }
        dg += dg2;
        Ok((du, dg))
    }

    fn apply(&self, s: &State, du: &[f64], dg: f64, step: f64) -> State {
        let m = self.disc.m();
        let mut u = s.u.clone();
        for (k, d) in du.iter().enumerate() {
            u[k + m] += step * d;
        }
        State {
            u,
            gamma: s.gamma + step * dg,
        }
    }

    /// Damped Newton. Returns the final state, its residual and the iteration count.
    fn newton(&mut self, mut s: State, opts: &SolveOptions) -> (State, f64, usize, bool) {
        let mut nrm = self.norm(&s);
        for it in 0..opts.max_newton {
            if nrm <= opts.newton_tol {
                return (s, nrm, it, true);
            }
            let (du, dg) = match self.linear_step(&s, 0.0) {
                Ok(d) => d,
                Err(_) => return (s, nrm, it, false),
            };
            let mut step = opts.damping;
            loop {
                let trial = self.apply(&s, &du, dg, step);
                let tn = self.norm(&trial);
                if tn < (1.0 - 1e-4 * step) * nrm {
                    s = trial;
                    nrm = tn;
                    break;
                }
                step *= 0.5;
                if step < 1.0 / 1024.0 {
                    self.norm(&s);
                    return (s, nrm, it + 1, false);
                }
            }
        }
        let ok = nrm <= opts.newton_tol;
        (s, nrm, opts.max_newton, ok)
    }

    /// Backward-Euler pseudo-time marching with switched evolution relaxation.
    fn pseudo_time(&mut self, mut s: State, opts: &SolveOptions) -> (State, f64, usize) {
        let mut nrm = self.norm(&s);
        let mut dt = opts.pseudo_time_dt;
        for step in 0..opts.max_pseudo_steps {
            if nrm <= 1e-3 * opts.tol_bc.max(opts.newton_tol) || dt > 1e8 {
                return (s, nrm, step);
            }
            let (du, dg) = match self.linear_step(&s, 1.0 / dt) {
                Ok(d) => d,
                Err(_) => return (s, nrm, step),
            };
            let trial = self.apply(&s, &du, dg, 1.0);
            let tn = self.norm(&trial);
            if !tn.is_finite() {
                dt *= 0.25;
                self.norm(&s);
                continue;
            }
            dt *= (nrm / tn).clamp(0.25, 4.0);
            s = trial;
            nrm = tn;
        }
        (s, nrm, opts.max_pseudo_steps)
    }
}

/// Initial field on `grid` from an [`Init`].
pub(crate) fn initial_state(init: &Init<'_>, grid: &CylinderGrid, theta: f64) -> Result<(Vec<f64>, f64)> {
    let m = grid.n_y();
    let nx = grid.n_x();
    let mut u = vec![0.0; grid.len()];
    let gamma;
    match *init {
        Init::Tanh { width, gamma: g } => {
            if !(width > 0.0) {
                return Err(invalid("tanh seed needs a positive width"));
            }
            let xc = -width * libm::atanh(1.0 - 2.0 * theta);
            for i in 0..nx {
                let v = 0.5 * (1.0 - libm::tanh((grid.x(i) - xc) / width));
                u[i * m..(i + 1) * m].iter_mut().for_each(|e| *e = v);
            }
            gamma = g;
        }
        Init::Field { u: f, gamma: g } => {
            if f.len() != u.len() {
                return Err(invalid("initial field does not match the grid"));
            }
            u.copy_from_slice(f);
            gamma = g;
        }
        Init::Solution(prev) => {
            if prev.grid.torus() != grid.torus() {
                return Err(invalid("continuation requires the same cross-section grid"));
            }
            let (a0, b0) = (prev.grid.x_min(), prev.grid.x_max());
            let (a1, b1) = (grid.x_min(), grid.x_max());
            let np = prev.grid.n_x();
            for i in 0..nx {
                let s = (grid.x(i) - a1) / (b1 - a1) * (np - 1) as f64;
                let i0 = (libm::floor(s) as usize).min(np - 2);
                let w = s - i0 as f64;
                for j in 0..m {
                    u[i * m + j] = (1.0 - w) * prev.u[i0 * m + j] + w * prev.u[(i0 + 1) * m + j];
                }
            }
            gamma = prev.gamma * (b1 - a1) / (b0 - a0);
        }
    }
    u[..m].iter_mut().for_each(|e| *e = 1.0);
    u[(nx - 1) * m..].iter_mut().for_each(|e| *e = 0.0);
    Ok((u, gamma))
}

/// Solves the scaled front problem at amplitude `a` for `(γ_A, U_A)`.
///
/// Damped Newton on the bordered system is tried first; if it stalls, a
/// pseudo-time march brings the iterate into Newton's basin.
pub fn solve_front_scaled(
    a: f64,
    flow: &FlowProfile,
    reaction: &Reaction,
    grid: &CylinderGrid,
    init: Init<'_>,
    opts: &SolveOptions,
) -> Result<FrontSolution> {
    opts.validate()?;
    if !(a >= 1.0) || !a.is_finite() {
        return Err(invalid("amplitude must be at least 1"));
    }
    if reaction.kind() == ReactionKind::Kpp || !(reaction.theta() > 0.0) {
        return Err(invalid("the front solver needs a positive ignition temperature"));
    }
    if flow.grid() != grid.torus() {
        return Err(invalid("flow and cylinder use different cross-section grids"));
    }
    let theta = reaction.theta();
    let (u0, g0) = initial_state(&init, grid, theta)?;
    let disc = Discretization::new(a, flow, reaction, grid, opts.scheme);
    let n = disc.unknowns();
    let mut solver = Solver {
        disc,
        theta,
        zero_row: grid.zero_index(),
        res: vec![0.0; n],
    };
    let start = State { u: u0, gamma: g0 };
    let (mut s, mut nrm, mut iters, mut ok) = solver.newton(
        State {
            u: start.u.clone(),
            gamma: start.gamma,
        },
        opts,
    );
    let mut pseudo_steps = 0;
    if !ok {
        let (p, _, steps) = solver.pseudo_time(start, opts);
        pseudo_steps = steps;
        let (s2, n2, it2, ok2) = solver.newton(p, opts);
        s = s2;
        nrm = n2;
        iters += it2;
        ok = ok2;
    }
    if !ok {
        return Err(Error::NoConvergence {
            what: "front solve",
            iterations: iters + pseudo_steps,
            residual: nrm,
        });
    }
    let sol = FrontSolution {
        amplitude: a,
        gamma: s.gamma,
        u: s.u,
        grid: grid.clone(),
        residual_norm: nrm,
        newton_iterations: iters,
        pseudo_time_steps: pseudo_steps,
        flow: flow.clone(),
        reaction: reaction.clone(),
        scheme: opts.scheme,
    };
    let mono = sol.monotonicity_defect();
    let range = sol.range_defect();
    if mono > opts.shape_tol || range > opts.shape_tol {
        return Err(Error::ShapeViolation {
            monotonicity_defect: mono,
            range_defect: range,
        });
    }
    let nx = grid.n_x();
    let left = sol.slice(1).iter().fold(0.0_f64, |d, v| d.max((v - 1.0).abs()));
    let right = sol.slice(nx - 2).iter().fold(0.0_f64, |d, v| d.max(v.abs()));
    if left > opts.tol_bc || right > opts.tol_bc {
        return Err(Error::DomainTooShort {
            left_defect: left,
            right_defect: right,
        });
    }
    Ok(sol)
}
