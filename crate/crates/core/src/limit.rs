//! Large-amplitude limit `γ*` of the scaled speed: vanishing-viscosity and
//! cutoff routes, identities of the degenerate problem, and min-max
//! certificates.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{invalid, Error, Result};
use crate::flow::FlowProfile;
use crate::front::{
    continuation_in_a, AdvectionScheme, ContinuationEvent, ContinuationRun, Discretization,
    FrontSolution, Init, SolveOptions, XFrame,
};
use crate::grid::CylinderGrid;
use crate::reaction::{make_cutoff, Reaction};

/// Which computation produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    SweepExtrapolation,
    VanishingViscosity,
    CutoffLimit,
    KppFormula,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::SweepExtrapolation => "sweep_extrapolation",
            Route::VanishingViscosity => "vanishing_viscosity",
            Route::CutoffLimit => "cutoff_limit",
            Route::KppFormula => "kpp_formula",
        }
    }
}

/// An estimate of `γ*` with its uncertainty and the raw data behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaStarEstimate {
    pub value: f64,
    pub route: Route,
    pub error_bar: f64,
    /// Schedule the raw values were computed on (`A` or `θ'`).
    pub parameters: Vec<f64>,
    pub raw_values: Vec<f64>,
    /// Named scalar diagnostics (ratios, tails, model choices).
    pub notes: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl GammaStarEstimate {
    fn new(route: Route, value: f64, error_bar: f64) -> Self {
        Self {
            value,
            route,
            error_bar,
            parameters: Vec::new(),
            raw_values: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn note(&self, key: &str) -> Option<f64> {
        self.notes.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Extrapolation in `1/A²` through the last two points: `(value, |last − value|)`.
pub fn richardson(amplitudes: &[f64], gammas: &[f64]) -> Result<(f64, f64)> {
    let n = gammas.len();
    if n != amplitudes.len() || n == 0 {
        return Err(invalid("richardson needs matching, non-empty inputs"));
    }
    if n == 1 {
        return Ok((gammas[0], 0.0));
    }
    let (a0, a1) = (amplitudes[n - 2] * amplitudes[n - 2], amplitudes[n - 1] * amplitudes[n - 1]);
    let value = (a1 * gammas[n - 1] - a0 * gammas[n - 2]) / (a1 - a0);
    Ok((value, (gammas[n - 1] - value).abs()))
}

/// Estimate plus the continuation it came from; the last front approximates
/// the degenerate profile.
#[derive(Debug, Clone)]
pub struct ViscosityOutcome {
    pub estimate: GammaStarEstimate,
    pub run: ContinuationRun,
}

impl ViscosityOutcome {
    pub fn profile(&self) -> &FrontSolution {
        &self.run.entries.last().expect("non-empty run").solution
    }
}

fn ratio_test(amplitudes: &[f64], gammas: &[f64], est: &mut GammaStarEstimate) -> bool {
    let mut ok = true;
    for k in 0..gammas.len().saturating_sub(2) {
        let d0 = gammas[k] - gammas[k + 1];
        let d1 = gammas[k + 1] - gammas[k + 2];
        let inv = |a: f64| 1.0 / (a * a);
        let expected = (inv(amplitudes[k]) - inv(amplitudes[k + 1]))
            / (inv(amplitudes[k + 1]) - inv(amplitudes[k + 2]));
        let ratio = d0 / d1;
        est.notes.push((format!("ratio_{k}"), ratio));
        if !(ratio >= 0.625 * expected && ratio <= 1.5 * expected) {
            ok = false;
        }
    }
    ok
}

/// Continues the front over an ascending amplitude schedule and extrapolates
/// `γ_A` in `1/A²`.
#[allow(clippy::too_many_arguments)]
pub fn gamma_star_by_viscosity(
    flow: &FlowProfile,
    reaction: &Reaction,
    grid: &CylinderGrid,
    schedule: &[f64],
    frame: XFrame,
    seed: Init<'_>,
    opts: &SolveOptions,
    observer: impl FnMut(ContinuationEvent<'_>),
) -> Result<ViscosityOutcome> {
    let run = continuation_in_a(schedule, flow, reaction, grid, frame, seed, opts, observer)?
        .complete()?;
    let amps = run.amplitudes();
    let gammas = run.gammas();
    let (value, bar) = richardson(&amps, &gammas)?;
    let mut est = GammaStarEstimate::new(Route::VanishingViscosity, value, bar);
    est.parameters = amps.clone();
    est.raw_values = gammas.clone();
    est.notes.push(("richardson_order".into(), 2.0));
    if amps.len() < 2 {
        est.warnings.push("single amplitude: no extrapolation".into());
    } else if !ratio_test(&amps, &gammas, &mut est) {
        est.error_bar = est.error_bar.max((gammas[gammas.len() - 1] - gammas[gammas.len() - 2]).abs());
        est.warnings
            .push("differences do not decay like A^-2; error bar inflated".into());
    }
    if !(value > 0.0 && value < flow.alpha_max()) {
        est.warnings.push(format!(
            "estimate {value:.6e} outside the strict bounds (0, {:.6e})",
            flow.alpha_max()
        ));
    }
    Ok(ViscosityOutcome { estimate: est, run })
}

/// Per-cutoff results of the cutoff route.
#[derive(Debug, Clone)]
pub struct CutoffOutcome {
    pub estimate: GammaStarEstimate,
    pub per_cutoff: Vec<(f64, ViscosityOutcome)>,
}

/// Tolerance for the monotonicity of the cutoff sequence.
pub const CUTOFF_MONOTONE_TOL: f64 = 1e-6;

/// Limit of `γ*(f_θ')` as `θ' → 0` for a KPP reaction `f`.
///
/// Each cutoff runs the viscosity route; each run is seeded from the
/// previous cutoff's first front. The sequence must be non-decreasing as
/// `θ'` decreases; the limit is extrapolated geometrically from the last
/// three values and the error bar is the last increment plus the last
/// viscosity error bar.
#[allow(clippy::too_many_arguments)]
pub fn gamma_star_by_cutoff(
    flow: &FlowProfile,
    parent: &Reaction,
    theta_primes: &[f64],
    grid: &CylinderGrid,
    schedule: &[f64],
    frame: XFrame,
    opts: &SolveOptions,
    mut observer: impl FnMut(f64, ContinuationEvent<'_>),
) -> Result<CutoffOutcome> {
    if theta_primes.is_empty() || theta_primes.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("cutoff levels must be non-empty and strictly descending"));
    }
    let mut per: Vec<(f64, ViscosityOutcome)> = Vec::new();
    for &tp in theta_primes {
        let r = make_cutoff(parent, tp)?;
        let seed_sol = per.last().map(|(_, o)| o.run.entries[0].solution.clone());
        let seed = match &seed_sol {
            Some(s) => Init::Solution(s),
            None => Init::Tanh {
                width: 1.0,
                gamma: 0.5,
            },
        };
        let out = gamma_star_by_viscosity(flow, &r, grid, schedule, frame, seed, opts, |e| {
            observer(tp, e)
        })?;
        per.push((tp, out));
    }
    let values: Vec<f64> = per.iter().map(|(_, o)| o.estimate.value).collect();
    for k in 1..values.len() {
        let jump = values[k - 1] - values[k];
        if jump > CUTOFF_MONOTONE_TOL {
            return Err(Error::NotMonotone { index: k, jump });
        }
    }
    let n = values.len();
    let last_bar = per[n - 1].1.estimate.error_bar;
    let mut est;
    if n >= 3 {
        let d1 = values[n - 2] - values[n - 3];
        let d2 = values[n - 1] - values[n - 2];
        let r = d2 / d1;
        if d1 > 0.0 && r > 0.0 && r < 1.0 {
            let tail = d2 * r / (1.0 - r);
            est = GammaStarEstimate::new(Route::CutoffLimit, values[n - 1] + tail, d2.abs() + last_bar);
            est.notes.push(("geometric_ratio".into(), r));
            est.notes.push(("geometric_tail".into(), tail));
        } else {
            est = GammaStarEstimate::new(Route::CutoffLimit, values[n - 1], d2.abs() + last_bar);
            est.notes.push(("geometric_ratio".into(), r));
            est.warnings
                .push("increments not geometric; last value reported".into());
        }
    } else {
        let inc = if n == 2 { (values[1] - values[0]).abs() } else { 0.0 };
        est = GammaStarEstimate::new(Route::CutoffLimit, values[n - 1], inc + last_bar);
        est.warnings
            .push("fewer than three cutoffs: no extrapolation".into());
    }
    est.parameters = theta_primes.to_vec();
    est.raw_values = values;
    est.notes.push(("last_viscosity_error_bar".into(), last_bar));
    Ok(CutoffOutcome {
        estimate: est,
        per_cutoff: per,
    })
}

/// Identities of the degenerate problem evaluated on a candidate profile.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitIdentityReport {
    /// `∫ (γ − α) dy`.
    pub flux: f64,
    /// `∬ f(U) dx dy`.
    pub reaction_integral: f64,
    /// `|flux − reaction_integral| / max(|γ|, 1e-12)`.
    pub rel_gap: f64,
    /// Largest `x` with `max_y U(x, ·) = θ`.
    pub level_x: f64,
    /// `∬_{x ≥ a} f(U)`, zero for an exact solution.
    pub half_line_reaction: f64,
    /// `∫ (γ − α) U(a, y) dy`.
    pub flux_at_level: f64,
    /// The reaction integral vanishes: no front is present.
    pub no_front: bool,
    /// No front but a positive speed was claimed.
    pub contradiction: bool,
}

/// Checks `∫(γ − α) = ∬ f(U)` and `∬_{x ≥ a} f(U) = 0` on `profile`.
pub fn limit_identity_check(profile: &FrontSolution, gamma: f64, reaction: &Reaction) -> LimitIdentityReport {
    let grid = &profile.grid;
    let m = grid.n_y();
    let nx = grid.n_x();
    let vol = grid.torus().cell_volume();
    let dx = grid.dx();
    let alpha = profile.flow.alpha();
    let flux: f64 = alpha.iter().map(|a| (gamma - a) * vol).sum();
    let disc = Discretization::new(profile.amplitude, &profile.flow, reaction, grid, profile.scheme);
    let mut react = 0.0;
    for i in 1..nx - 1 {
        for j in 0..m {
            react += disc.cell_reaction(&profile.u, i, j).0;
        }
    }
    react *= dx * vol;
    let theta = reaction.theta();
    let level = (0..nx)
        .rev()
        .find(|&i| profile.slice(i).iter().any(|&u| u >= theta * (1.0 - 1e-9)))
        .unwrap_or(0);
    let mut half = 0.0;
    for i in level..nx {
        let w = if i == level || i == nx - 1 { 0.5 } else { 1.0 };
        half += w * profile.slice(i).iter().map(|&u| reaction.value(u)).sum::<f64>();
    }
    half *= dx * vol;
    let flux_at_level: f64 = profile
        .slice(level)
        .iter()
        .zip(alpha)
        .map(|(u, a)| (gamma - a) * u * vol)
        .sum();
    let no_front = react == 0.0;
    LimitIdentityReport {
        flux,
        reaction_integral: react,
        rel_gap: (flux - react).abs() / gamma.abs().max(1e-12),
        level_x: grid.x(level),
        half_line_reaction: half,
        flux_at_level,
        no_front,
        contradiction: no_front && gamma > 0.0,
    }
}

/// Controls for [`certificate_upper_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub scheme: AdvectionScheme,
    /// Speed orienting the upwind stencils; `None` runs a centered pre-pass.
    pub reference_speed: Option<f64>,
    /// Fraction of the x-range excluded at each end.
    pub margin: f64,
    /// Nodes with `|w_x|` below this are skipped.
    pub wx_floor: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            scheme: AdvectionScheme::Upwind3,
            reference_speed: None,
            margin: 0.05,
            wx_floor: 1e-8,
        }
    }
}

/// Value of a min-max certificate and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub bound: f64,
    pub argmax: (usize, usize),
    pub evaluated_nodes: usize,
}

fn certificate_pass(
    w: &[f64],
    grid: &CylinderGrid,
    a: f64,
    flow: &FlowProfile,
    reaction: &Reaction,
    scheme: AdvectionScheme,
    speed: f64,
    opts: &CertificateOptions,
) -> Result<Certificate> {
    let disc = Discretization::new(a, flow, reaction, grid, scheme);
    let m = grid.n_y();
    let nx = grid.n_x();
    let skip = libm::ceil(opts.margin * (nx - 1) as f64) as usize;
    let (lo, hi) = (skip.max(1), (nx - 1 - skip).min(nx - 2));
    let torus = grid.torus();
    let alpha = flow.alpha();
    let dx = grid.dx();
    let cxx = 1.0 / (a * a * dx * dx);
    let mut lap = vec![0.0; m];
    let mut best = Certificate {
        bound: f64::NEG_INFINITY,
        argmax: (0, 0),
        evaluated_nodes: 0,
    };
    for i in lo..=hi {
        torus.apply_laplacian(&w[i * m..(i + 1) * m], &mut lap);
        for j in 0..m {
            let k = i * m + j;
            let d = disc.advective_derivative(w, i, j, speed - alpha[j]);
            if d > opts.wx_floor {
                return Err(Error::Check(format!(
                    "candidate increases in x at node ({i}, {j}): w_x = {d:.3e}"
                )));
            }
            if -d < opts.wx_floor {
                continue;
            }
            let num = lap[j] + cxx * (w[k + m] - 2.0 * w[k] + w[k - m]) + disc.cell_reaction(w, i, j).0;
            let q = num / (-d) + alpha[j];
            best.evaluated_nodes += 1;
            if q > best.bound {
                best.bound = q;
                best.argmax = (i, j);
            }
        }
    }
    if best.evaluated_nodes == 0 {
        return Err(Error::Check("no node of the window has |w_x| above the floor".into()));
    }
    Ok(best)
}

/// Min-max upper bound `sup (Δ_y w + A⁻² w_xx + f(w)) / (−w_x) + α` for a
/// decreasing candidate `w`, evaluated with the solver's discrete operators.
pub fn certificate_upper_bound(
    w: &[f64],
    grid: &CylinderGrid,
    a: f64,
    flow: &FlowProfile,
    reaction: &Reaction,
    opts: &CertificateOptions,
) -> Result<Certificate> {
    if w.len() != grid.len() {
        return Err(invalid("candidate does not match the grid"));
    }
    if flow.grid() != grid.torus() {
        return Err(invalid("flow and cylinder use different cross-section grids"));
    }
    let speed = match opts.reference_speed {
        Some(s) => s,
        None => {
            certificate_pass(w, grid, a, flow, reaction, AdvectionScheme::Centered, 0.0, opts)?.bound
        }
    };
    certificate_pass(w, grid, a, flow, reaction, opts.scheme, speed, opts)
}
