//! Serializable results of each route. Records hold plain numbers only, so a
//! cached record replays exactly and checks can be recomputed offline.

use serde::{Deserialize, Serialize};
use shearfront_core::{GammaStarEstimate, IdentityReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub at: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identities {
    pub reaction_integral: f64,
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    pub rel_err_reaction: f64,
    pub rel_err_energy: f64,
    pub ux_l1: f64,
}

impl From<&IdentityReport> for Identities {
    fn from(r: &IdentityReport) -> Self {
        Self {
            reaction_integral: r.reaction_integral,
            energy_lhs: r.energy_lhs,
            energy_rhs: r.energy_rhs,
            rel_err_reaction: r.rel_err_reaction,
            rel_err_energy: r.rel_err_energy,
            ux_l1: r.ux_l1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierRecord {
    pub rate: f64,
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_x: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub bound: f64,
    pub x: f64,
    pub y_index: usize,
    pub evaluated_nodes: usize,
}

/// Front-solver diagnostics of one amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDiagnostics {
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub pseudo_time_steps: usize,
    pub monotonicity_defect: f64,
    pub range_defect: f64,
    /// `|max_y U(0, y) − θ|`.
    pub pin_defect: f64,
    pub identities: Identities,
    pub barrier: Option<BarrierRecord>,
    pub certificate: Option<CertificateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEntry {
    pub amplitude: f64,
    /// Unscaled speed of the original flow, `A·γ_A + A·β`.
    pub c_star: f64,
    /// Scaled speed of the mean-zero flow.
    pub gamma: f64,
    pub front: Option<FrontDiagnostics>,
}

/// The sweep over the amplitude schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedCurve {
    /// `front` for front solves, `kpp_minimal_speed` for the KPP formula.
    pub source: String,
    pub entries: Vec<SpeedEntry>,
    pub failure: Option<Failure>,
    /// `γ̲ = min γ_A` and its uniform decay rate `λ̲`.
    pub gamma_lower: Option<f64>,
    pub lambda_lower: Option<f64>,
}

/// Speed without flow, `c*(0, f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpeed {
    pub value: f64,
    /// `solve` or `closed_form`.
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeRecord {
    pub amplitude: f64,
    pub gamma: f64,
    /// `(shift, γ of the restart, max field difference)`.
    pub restarts: Vec<(i64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRecord {
    pub delta: f64,
    /// `(A, c*/A of the raised flow)`.
    pub entries: Vec<(f64, f64)>,
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub route: String,
    pub value: f64,
    pub error_bar: f64,
    pub parameters: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub notes: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl From<&GammaStarEstimate> for Estimate {
    fn from(e: &GammaStarEstimate) -> Self {
        Self {
            route: e.route.name().to_string(),
            value: e.value,
            error_bar: e.error_bar,
            parameters: e.parameters.clone(),
            raw_values: e.raw_values.clone(),
            notes: e.notes.clone(),
            warnings: e.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitIdentity {
    pub flux: f64,
    pub reaction_integral: f64,
    pub rel_gap: f64,
    pub level_x: f64,
    pub half_line_reaction: f64,
    pub no_front: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscosityRecord {
    pub estimate: Option<Estimate>,
    pub limit_identity: Option<LimitIdentity>,
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffLevel {
    pub theta_prime: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRecord {
    pub estimate: Option<Estimate>,
    pub levels: Vec<CutoffLevel>,
    pub failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KppFormulaRecord {
    pub estimate: Estimate,
    pub t_star: f64,
    pub nu: f64,
    pub constraint_active: bool,
    /// Value on the cross-section refined once; the error bar is the gap.
    pub refined_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRecord {
    /// `(M, γ*(M·f))`.
    pub values: Vec<(f64, f64)>,
    /// Closed-form small-amplitude slope for `f'(0) = 1`.
    pub slope: f64,
    pub fprime0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub fitted_gamma: f64,
    pub intercept: f64,
    pub fit_residual: f64,
    pub window: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub beta: f64,
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub constant: bool,
    /// Order `r` at which the derivative condition first holds, if any up to 4.
    pub nondegenerate_order: Option<usize>,
}
