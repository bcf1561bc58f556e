//! Checks recomputed from records. Every check carries a status, the
//! compared value, its limit and the margin between them.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::records::*;
use crate::HarnessError;

/// Slack of `bound ≥ γ_A` for certificates, in units of `γ`.
pub const CERTIFICATE_SLACK: f64 = 1e-8;
/// Slack of monotone sequences computed by iterative eigensolvers.
pub const SEQUENCE_SLACK: f64 = 1e-9;
/// Largest `|∬_{x ≥ a} f(U)|` accepted in the limit identity.
pub const HALF_LINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    /// Distance to the limit, positive when passing.
    pub margin: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn new(name: &str, ok: bool, value: Option<f64>, limit: Option<f64>, margin: Option<f64>, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            limit,
            margin,
            detail,
        }
    }

    /// Passes iff `value ≤ limit`.
    pub fn at_most(name: &str, value: f64, limit: f64, detail: String) -> Self {
        Self::new(name, value <= limit, Some(value), Some(limit), Some(limit - value), detail)
    }

    /// Passes iff `value ≥ limit`.
    pub fn at_least(name: &str, value: f64, limit: f64, detail: String) -> Self {
        Self::new(name, value >= limit, Some(value), Some(limit), Some(value - limit), detail)
    }

    /// Passes iff `value > limit`.
    pub fn above(name: &str, value: f64, limit: f64, detail: String) -> Self {
        Self::new(name, value > limit, Some(value), Some(limit), Some(value - limit), detail)
    }

    pub fn flag(name: &str, ok: bool, detail: String) -> Self {
        Self::new(name, ok, None, None, None, detail)
    }
}

fn fold_max(it: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    it.fold((f64::NEG_INFINITY, f64::NAN), |b, (v, a)| if v > b.0 { (v, a) } else { b })
}

fn fold_min(it: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (v, a) = fold_max(it.map(|(v, a)| (-v, a)));
    (-v, a)
}

/// Entries in the top half of the schedule.
fn top_half(curve: &SpeedCurve) -> &[SpeedEntry] {
    &curve.entries[curve.entries.len() / 2..]
}

/// Sandwich bounds `0 ≤ γ_A ≤ max α + c*(0, f)/A`, strict positivity for a
/// non-constant flow and tail convergence of `γ_A`.
pub fn verify_bounds(curve: &SpeedCurve, flow: &FlowSummary, c0: f64, tol: &Tolerances) -> Vec<Check> {
    let mut out = Vec::new();
    let e = &curve.entries;
    if e.is_empty() {
        return out;
    }
    let (lo, lo_a) = fold_min(e.iter().map(|e| (e.gamma, e.amplitude)));
    out.push(Check::at_least("bounds.lower", lo, 0.0, format!("min γ_A at A = {lo_a}")));
    let (excess, ex_a) = fold_max(e.iter().map(|e| {
        let ub = flow.alpha_max + c0 / e.amplitude;
        ((e.gamma - ub) / ub, e.amplitude)
    }));
    out.push(Check::at_most(
        "bounds.upper",
        excess,
        tol.bound_slack,
        format!("largest relative excess over max α + c0/A at A = {ex_a}, c0 = {c0}"),
    ));
    if flow.constant {
        let (dev, a) = fold_max(e.iter().map(|e| ((e.gamma - c0 / e.amplitude).abs() * e.amplitude / c0, e.amplitude)));
        out.push(Check::at_most(
            "bounds.top",
            dev,
            tol.zero_flow_invariance,
            format!("relative distance of γ_A to c0/A, worst at A = {a}"),
        ));
    } else {
        let last = e.last().expect("non-empty");
        out.push(Check::above(
            "bounds.strict_positivity",
            last.gamma,
            tol.positivity_margin,
            format!("γ_A at A = {}", last.amplitude),
        ));
    }
    let tail = top_half(curve);
    if tail.len() >= 3 {
        let d: Vec<f64> = tail.windows(2).map(|w| (w[1].gamma - w[0].gamma).abs()).collect();
        let ratio = d.windows(2).map(|w| w[1] / w[0].max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        out.push(Check::at_most(
            "bounds.tail_convergence",
            ratio,
            1.0,
            format!("largest ratio of successive |Δγ_A| over A ≥ {}", tail[0].amplitude),
        ));
    }
    out
}

/// Least-squares fit of `c* = γ·A + b` over the top half of the schedule.
pub fn fit_asymptote(curve: &SpeedCurve) -> Result<FitRecord, HarnessError> {
    if curve.entries.len() < 3 {
        return Err(HarnessError::Report(format!(
            "the fit needs at least 3 entries, found {}",
            curve.entries.len()
        )));
    }
    let w = top_half(curve);
    let n = w.len() as f64;
    let ma = w.iter().map(|e| e.amplitude).sum::<f64>() / n;
    let mc = w.iter().map(|e| e.c_star).sum::<f64>() / n;
    let saa: f64 = w.iter().map(|e| (e.amplitude - ma).powi(2)).sum();
    let sac: f64 = w.iter().map(|e| (e.amplitude - ma) * (e.c_star - mc)).sum();
    if !(saa > 1e-12 * ma * ma * n) {
        return Err(HarnessError::Report("singular normal equations in the fit".into()));
    }
    let g = sac / saa;
    let b = mc - g * ma;
    let rss: f64 = w.iter().map(|e| (e.c_star - g * e.amplitude - b).powi(2)).sum();
    Ok(FitRecord {
        fitted_gamma: g,
        intercept: b,
        fit_residual: (rss / n).sqrt(),
        window: w.iter().map(|e| e.amplitude).collect(),
    })
}

/// Large- and small-`M` behaviour of `γ*(M·f)` and monotonicity in `M`.
pub fn asymptotic_regime_checks(rec: &RegimeRecord, flow: &FlowSummary, tol: &Tolerances) -> Vec<Check> {
    let mut out = Vec::new();
    let v = &rec.values;
    let (drop, at) = fold_max(v.windows(2).map(|w| (w[0].1 - w[1].1, w[1].0)));
    if v.len() >= 2 {
        out.push(Check::at_most(
            "regimes.monotone",
            drop,
            SEQUENCE_SLACK,
            format!("largest decrease in M, at M = {at}"),
        ));
    }
    if let (Some(&(m_hi, hi)), Some(&(m_lo, lo))) = (v.last(), v.first()) {
        out.push(Check::above(
            "regimes.large_m",
            hi,
            tol.large_m_fraction * flow.alpha_max,
            format!("γ* at M = {m_hi} against {}·max α", tol.large_m_fraction),
        ));
        let rel = (lo / m_lo.sqrt() - rec.slope).abs() / rec.slope;
        out.push(Check::at_most(
            "regimes.small_m_slope",
            rel,
            tol.small_m_slope,
            format!("γ*/√M at M = {m_lo} against the slope {}", rec.slope),
        ));
    }
    out
}

fn front_checks(curve: &SpeedCurve, tol: &Tolerances, out: &mut Vec<Check>) {
    let fronts: Vec<(f64, f64, &FrontDiagnostics)> = curve
        .entries
        .iter()
        .filter_map(|e| e.front.as_ref().map(|f| (e.amplitude, e.gamma, f)))
        .collect();
    if fronts.is_empty() {
        return;
    }
    let worst = |f: &dyn Fn(f64, &FrontDiagnostics) -> f64| fold_max(fronts.iter().map(|&(a, g, d)| (f(g, d), a)));
    let (v, a) = worst(&|_, d| d.identities.rel_err_reaction);
    out.push(Check::at_most("identity.reaction", v, tol.identity_reaction, format!("|∬f(U) − γ|/γ, worst at A = {a}")));
    let (v, a) = worst(&|_, d| d.identities.rel_err_energy);
    out.push(Check::at_most("identity.energy", v, tol.identity_energy, format!("energy identity, worst at A = {a}")));
    let (v, a) = worst(&|g, d| d.identities.energy_lhs - 0.5 * g);
    out.push(Check::at_most("identity.energy_bound", v, tol.energy_bound, format!("energy − γ/2, worst at A = {a}")));
    let (v, a) = worst(&|_, d| (d.identities.ux_l1 - 1.0).abs());
    out.push(Check::at_most("identity.ux_l1", v, tol.ux_l1, format!("|‖U_x‖₁ − 1|, worst at A = {a}")));
    let (v, a) = worst(&|_, d| d.monotonicity_defect);
    out.push(Check::at_most("shape.monotonicity", v, tol.shape, format!("largest increase in x, at A = {a}")));
    let (v, a) = worst(&|_, d| d.range_defect);
    out.push(Check::at_most("shape.range", v, tol.shape, format!("distance from [0, 1], worst at A = {a}")));
    let (v, a) = worst(&|_, d| d.pin_defect);
    out.push(Check::at_most("shape.pin", v, tol.shape, format!("|max_y U(0, ·) − θ|, worst at A = {a}")));

    let barriers: Vec<(f64, &BarrierRecord)> = fronts.iter().filter_map(|&(a, _, d)| d.barrier.as_ref().map(|b| (a, b))).collect();
    if !barriers.is_empty() {
        let total: usize = barriers.iter().map(|(_, b)| b.violations).sum();
        let (m, a) = fold_min(barriers.iter().map(|(a, b)| (b.worst_margin, *a)));
        out.push(Check::at_most(
            "barrier.violations",
            total as f64,
            0.0,
            format!("λ̲ = {}, smallest margin {m} at A = {a}", barriers[0].1.rate),
        ));
    }
    let certs: Vec<(f64, f64, &CertificateRecord)> =
        fronts.iter().filter_map(|&(a, g, d)| d.certificate.as_ref().map(|c| (a, g, c))).collect();
    if !certs.is_empty() {
        let (v, a) = fold_min(certs.iter().map(|&(a, g, c)| ((c.bound - g) / g.abs().max(1e-300), a)));
        out.push(Check::at_least(
            "certificate.valid",
            v,
            -CERTIFICATE_SLACK,
            format!("(bound − γ_A)/γ_A, smallest at A = {a}"),
        ));
        let (v, a) = fold_max(certs.iter().map(|&(a, g, c)| ((c.bound - g) / g.abs().max(1e-300), a)));
        out.push(Check::at_most("certificate.tight", v, tol.certificate, format!("(bound − γ_A)/γ_A, largest at A = {a}")));
    }
}

fn failure_check(name: &str, f: &Option<Failure>) -> Check {
    match f {
        None => Check::flag(name, true, String::new()),
        Some(f) => Check::flag(name, false, format!("failed at {}: {}", f.at, f.error)),
    }
}

/// Everything a report needs to recompute its checks.
pub struct CheckInput<'a> {
    pub tolerances: &'a Tolerances,
    pub flow: &'a FlowSummary,
    pub reference_speed: Option<&'a ReferenceSpeed>,
    pub speeds: Option<&'a SpeedCurve>,
    pub fit: Option<&'a FitRecord>,
    pub gauge: Option<&'a GaugeRecord>,
    pub lipschitz: Option<&'a LipschitzRecord>,
    pub viscosity: Option<&'a ViscosityRecord>,
    pub cutoff: Option<&'a CutoffRecord>,
    pub kpp_formula: Option<&'a KppFormulaRecord>,
    pub regimes: Option<&'a RegimeRecord>,
}

/// All checks implied by the records present.
pub fn evaluate(r: &CheckInput<'_>) -> Vec<Check> {
    let tol = r.tolerances;
    let flow = r.flow;
    let mut out = Vec::new();
    if let Some(curve) = r.speeds {
        out.push(failure_check("sweep.complete", &curve.failure));
        if let Some(c0) = r.reference_speed {
            out.extend(verify_bounds(curve, flow, c0.value, tol));
        }
        if flow.constant && !curve.entries.is_empty() {
            let c: Vec<f64> = curve.entries.iter().map(|e| e.c_star).collect();
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(Check::at_most(
                "sweep.zero_flow_invariance",
                (hi - lo) / lo.abs(),
                tol.zero_flow_invariance,
                "relative spread of c* across A".into(),
            ));
        }
        front_checks(curve, tol, &mut out);
    }
    if let Some(g) = r.gauge {
        let (v, k) = fold_max(g.restarts.iter().map(|&(k, gamma, _)| ((gamma - g.gamma).abs(), k as f64)));
        let field = g.restarts.iter().map(|r| r.2).fold(0.0, f64::max);
        out.push(Check::at_most(
            "gauge.restart",
            v,
            tol.gauge,
            format!("|Δγ| after shifted restarts at A = {}, worst shift {k}; max field change {field}", g.amplitude),
        ));
    }
    if let (Some(l), Some(curve)) = (r.lipschitz, r.speeds) {
        out.push(failure_check("lipschitz.complete", &l.failure));
        let diffs: Vec<(f64, f64)> = l
            .entries
            .iter()
            .filter_map(|&(a, s)| curve.entries.iter().find(|e| e.amplitude == a).map(|e| (s - e.c_star / a, a)))
            .collect();
        if !diffs.is_empty() {
            let (v, a) = fold_max(diffs.iter().copied());
            out.push(Check::at_most(
                "lipschitz.bound",
                v,
                l.delta + tol.lipschitz_slack,
                format!("largest change of c*/A, at A = {a}"),
            ));
            let (v, a) = fold_min(diffs.iter().copied());
            out.push(Check::at_least(
                "lipschitz.order",
                v,
                -tol.lipschitz_slack,
                format!("smallest change of c*/A, at A = {a}"),
            ));
        }
    }
    let visc = r.viscosity.and_then(|v| v.estimate.as_ref());
    if let Some(v) = r.viscosity {
        out.push(failure_check("viscosity.complete", &v.failure));
        if let Some(li) = &v.limit_identity {
            out.push(Check::at_most(
                "viscosity.limit_identity",
                li.rel_gap,
                tol.limit_identity,
                format!("|∫(γ − α) − ∬f(U)|/γ on the last profile, flux {}", li.flux),
            ));
            out.push(Check::at_most(
                "viscosity.half_line",
                li.half_line_reaction.abs(),
                HALF_LINE_TOL,
                format!("∬ f(U) beyond the level x = {}", li.level_x),
            ));
            out.push(Check::flag("viscosity.front_present", !li.no_front, String::new()));
        }
    }
    if let Some(e) = visc {
        if flow.constant {
            out.push(Check::at_most(
                "viscosity.zero_limit",
                e.value.abs(),
                e.error_bar,
                "|γ*| against the route's error bar".into(),
            ));
        } else {
            out.push(interior("viscosity.interior", e.value, flow));
        }
    }
    if let Some(fit) = r.fit {
        if flow.constant {
            if let Some(c0) = r.reference_speed {
                out.push(Check::at_most(
                    "fit.zero_flow",
                    fit.fitted_gamma.abs() / c0.value,
                    tol.zero_flow_invariance,
                    format!("|fitted γ|/c0, intercept {} against c0 = {}", fit.intercept, c0.value),
                ));
            }
        } else {
            out.push(interior("fit.interior", fit.fitted_gamma, flow));
            if let Some(e) = visc {
                out.push(Check::at_most(
                    "fit.agreement",
                    (fit.fitted_gamma - e.value).abs() / e.value.abs(),
                    tol.fit_agreement,
                    format!("fitted {} against the viscosity route {}", fit.fitted_gamma, e.value),
                ));
            }
        }
    }
    let cut = r.cutoff.and_then(|c| c.estimate.as_ref());
    if let Some(c) = r.cutoff {
        out.push(failure_check("cutoff.complete", &c.failure));
    }
    if let Some(e) = cut {
        let (drop, at) = fold_max(e.raw_values.windows(2).zip(&e.parameters[1..]).map(|(w, &tp)| (w[0] - w[1], tp)));
        if e.raw_values.len() >= 2 {
            out.push(Check::at_most(
                "cutoff.monotone",
                drop,
                shearfront_core::limit::CUTOFF_MONOTONE_TOL,
                format!("largest decrease as θ' decreases, at θ' = {at}"),
            ));
        }
        if !flow.constant {
            out.push(interior("cutoff.interior", e.value, flow));
        }
    }
    if let Some(k) = r.kpp_formula {
        if !flow.constant {
            out.push(interior("kpp_formula.interior", k.estimate.value, flow));
        }
        if let Some(c) = cut {
            let k = &k.estimate;
            let bars = c.error_bar + k.error_bar;
            out.push(Check::at_most(
                "routes.agreement",
                (c.value - k.value).abs(),
                bars,
                format!("cutoff {} ± {} against formula {} ± {}", c.value, c.error_bar, k.value, k.error_bar),
            ));
            out.push(Check::at_most(
                "routes.error_bars",
                bars / k.value.abs(),
                tol.route_agreement,
                "combined error bars relative to the formula value".into(),
            ));
        }
    }
    if let Some(reg) = r.regimes {
        out.extend(asymptotic_regime_checks(reg, flow, tol));
    }
    out
}

/// `0 < γ* < max α` for a non-constant flow.
fn interior(name: &str, v: f64, flow: &FlowSummary) -> Check {
    let margin = v.min(flow.alpha_max - v);
    Check::above(name, margin, 0.0, format!("value {v} inside (0, {})", flow.alpha_max))
}
