//! Experiment configuration: parsing, validation and construction of the
//! numerical objects it describes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shearfront_core::{
    make_cutoff, normalize_flow, AdvectionScheme, CylinderGrid, FlowProfile, Reaction,
    SolveOptions, TorusGrid, XFrame, YStencil,
};

use crate::HarnessError;

/// Builtin configurations, addressable as `builtin:<name>`.
pub const BUILTINS: [(&str, &str); 3] = [
    ("zero-flow-ignition", include_str!("../configs/zero-flow-ignition.toml")),
    ("cosine-ignition", include_str!("../configs/cosine-ignition.toml")),
    ("cosine-kpp", include_str!("../configs/cosine-kpp.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowSpec {
    Zero,
    /// `amplitude·cos(2πk·y₁) + offset`.
    Cosine {
        #[serde(default = "one_u32")]
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a1·cos(2πk1·y₁) + a2·cos(2πk2·y_last)`; on a 1-torus both modes use `y₁`.
    TwoMode { a1: f64, k1: u32, a2: f64, k2: u32 },
    /// Node values in row-major order.
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IgnitionForm {
    /// `u(1−u)` above `θ`, a jump at `θ`.
    #[default]
    Jump,
    /// `(u−θ)₊(1−u)`.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KppForm {
    #[default]
    Logistic,
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionSpec {
    Ignition {
        theta: f64,
        #[serde(default)]
        form: IgnitionForm,
    },
    Kpp {
        fprime0: f64,
        #[serde(default)]
        form: KppForm,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StencilSpec {
    #[default]
    FiniteDifference,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_dim: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub stencil: StencilSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            points_per_dim: 64,
            x_min: -24.0,
            x_max: 24.0,
            n_x: 961,
            stencil: StencilSpec::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameSpec {
    #[default]
    Scaled,
    Unscaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    Centered,
    Upwind2,
    #[default]
    Upwind3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub tol_bc: f64,
    pub scheme: SchemeSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self {
            newton_tol: d.newton_tol,
            max_newton: d.max_newton,
            tol_bc: d.tol_bc,
            scheme: SchemeSpec::Upwind3,
        }
    }
}

/// Which computations run. Front-based routes need an ignition reaction;
/// the cutoff, formula and regime routes need a KPP reaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Routes {
    pub sweep: bool,
    pub viscosity: bool,
    pub barrier: bool,
    pub certificate: bool,
    pub gauge: bool,
    pub lipschitz: bool,
    pub cutoff: bool,
    pub kpp_formula: bool,
    pub regimes: bool,
}

impl Default for Routes {
    fn default() -> Self {
        Self {
            sweep: true,
            viscosity: false,
            barrier: false,
            certificate: false,
            gauge: false,
            lipschitz: false,
            cutoff: false,
            kpp_formula: false,
            regimes: false,
        }
    }
}

impl Routes {
    fn any(&self) -> bool {
        self.sweep || self.viscosity || self.cutoff || self.kpp_formula || self.regimes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub identity_reaction: f64,
    pub identity_energy: f64,
    /// Slack in `energy_lhs ≤ γ/2 + slack`.
    pub energy_bound: f64,
    pub ux_l1: f64,
    pub shape: f64,
    /// Required `γ_A` at the largest amplitude for a non-constant flow.
    pub positivity_margin: f64,
    /// Relative slack of the upper sandwich bound.
    pub bound_slack: f64,
    pub gauge: f64,
    pub certificate: f64,
    pub lipschitz_slack: f64,
    pub fit_agreement: f64,
    pub route_agreement: f64,
    pub limit_identity: f64,
    pub large_m_fraction: f64,
    pub small_m_slope: f64,
    /// Relative spread allowed for `c*` across amplitudes without flow.
    pub zero_flow_invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_reaction: 1e-3,
            identity_energy: 5e-3,
            energy_bound: 1e-3,
            ux_l1: 1e-3,
            shape: 1e-10,
            positivity_margin: 0.0,
            bound_slack: 1e-6,
            gauge: 1e-10,
            certificate: 0.05,
            lipschitz_slack: 1e-4,
            fit_agreement: 0.02,
            route_agreement: 0.03,
            limit_identity: 5e-3,
            large_m_fraction: 0.9,
            small_m_slope: 0.05,
            zero_flow_invariance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViscositySpec {
    pub amplitudes: Vec<f64>,
}

impl Default for ViscositySpec {
    fn default() -> Self {
        Self {
            amplitudes: vec![8.0, 16.0, 32.0, 64.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSpec {
    pub theta_primes: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Overrides `grid.n_x` for the cutoff solves.
    pub n_x: Option<usize>,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            theta_primes: (2..=8).map(|k| 0.5_f64.powi(k)).collect(),
            amplitudes: vec![8.0, 16.0, 32.0, 64.0],
            n_x: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeSpec {
    /// Scale factors `M` of the family `M·f`, ascending.
    pub m_list: Vec<f64>,
}

impl Default for RegimeSpec {
    fn default() -> Self {
        Self {
            m_list: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LipschitzSpec {
    /// Sup-norm of the pointwise raise `δ(y) = delta·(1 + sin 2πy₁)/2`.
    pub delta: f64,
}

impl Default for LipschitzSpec {
    fn default() -> Self {
        Self { delta: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeSpec {
    pub amplitude: f64,
    /// Shifts in x-nodes applied to the converged front before re-solving.
    pub shifts: Vec<i64>,
}

impl Default for GaugeSpec {
    fn default() -> Self {
        Self {
            amplitude: 8.0,
            shifts: vec![-20, 20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub flow: FlowSpec,
    pub reaction: ReactionSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub frame: FrameSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub routes: Routes,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub viscosity: ViscositySpec,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub regimes: RegimeSpec,
    #[serde(default)]
    pub lipschitz: LipschitzSpec,
    #[serde(default)]
    pub gauge: GaugeSpec,
    /// Output directory; the CLI flag `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "yes")]
    pub cache: bool,
    #[serde(default)]
    pub dump_profiles: bool,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn yes() -> bool {
    true
}

fn default_amplitudes() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
}

fn config_error(field: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        location: field.to_string(),
        message: message.into(),
    }
}

fn ascending(field: &str, v: &[f64], min: f64) -> Result<(), HarnessError> {
    if v.is_empty() {
        return Err(config_error(field, "must not be empty"));
    }
    for (k, &a) in v.iter().enumerate() {
        if !a.is_finite() || a < min {
            return Err(config_error(&format!("{field}[{k}]"), format!("must be finite and ≥ {min}")));
        }
        if k > 0 && !(a > v[k - 1]) {
            return Err(config_error(&format!("{field}[{k}]"), "must be strictly ascending"));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML or JSON text; `source` names the input in diagnostics.
    pub fn parse(text: &str, json: bool, source: &str) -> Result<Self, HarnessError> {
        let cfg: Self = if json {
            serde_json::from_str(text).map_err(|e| HarnessError::Config {
                location: format!("{source}:{}:{}", e.line(), e.column()),
                message: e.to_string(),
            })?
        } else {
            toml::from_str(text).map_err(|e| {
                let location = match e.span() {
                    Some(span) => {
                        let line = text[..span.start].matches('\n').count() + 1;
                        let col = span.start - text[..span.start].rfind('\n').map_or(0, |p| p + 1) + 1;
                        format!("{source}:{line}:{col}")
                    }
                    None => source.to_string(),
                };
                HarnessError::Config {
                    location,
                    message: e.message().to_string(),
                }
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `builtin:<name>` or a `.toml` / `.json` file.
    pub fn load(spec: &str) -> Result<Self, HarnessError> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            return Self::builtin(name);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| config_error(spec, e.to_string()))?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::parse(&text, json, spec)
    }

    pub fn builtin(name: &str) -> Result<Self, HarnessError> {
        let (_, text) = BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| config_error("builtin", format!("unknown builtin {name:?}")))?;
        Self::parse(text, false, &format!("builtin:{name}"))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.is_empty() {
            return Err(config_error("name", "must not be empty"));
        }
        if !self.routes.any() {
            return Err(config_error("routes", "at least one route must be enabled"));
        }
        ascending("amplitudes", &self.amplitudes, 1.0)?;
        let g = &self.grid;
        if !(1..=2).contains(&g.dim) {
            return Err(config_error("grid.dim", "must be 1 or 2"));
        }
        if g.points_per_dim < 8 {
            return Err(config_error("grid.points_per_dim", "must be at least 8"));
        }
        self.base_grid(0).map_err(|e| config_error("grid", e.to_string()))?;
        match &self.reaction {
            ReactionSpec::Ignition { theta, .. } if !(*theta > 0.0 && *theta < 1.0) => {
                return Err(config_error("reaction.theta", "must lie in (0, 1)"));
            }
            ReactionSpec::Kpp { fprime0, .. } if !(*fprime0 > 0.0 && fprime0.is_finite()) => {
                return Err(config_error("reaction.fprime0", "must be positive"));
            }
            _ => {}
        }
        let kpp = self.is_kpp();
        let r = &self.routes;
        let front_routes = r.viscosity || r.barrier || r.certificate || r.gauge || r.lipschitz;
        if kpp && front_routes {
            return Err(config_error(
                "routes",
                "front-based routes need an ignition reaction; use the cutoff route for KPP",
            ));
        }
        if !kpp && (r.cutoff || r.kpp_formula || r.regimes) {
            return Err(config_error("routes", "cutoff, kpp_formula and regimes need a KPP reaction"));
        }
        if (r.barrier || r.certificate || r.gauge || r.lipschitz) && !r.sweep {
            return Err(config_error("routes", "barrier, certificate, gauge and lipschitz need the sweep"));
        }
        if r.viscosity {
            ascending("viscosity.amplitudes", &self.viscosity.amplitudes, 1.0)?;
        }
        if r.cutoff {
            ascending("cutoff.amplitudes", &self.cutoff.amplitudes, 1.0)?;
            let tp = &self.cutoff.theta_primes;
            if tp.is_empty() {
                return Err(config_error("cutoff.theta_primes", "must not be empty"));
            }
            for (k, &t) in tp.iter().enumerate() {
                if !(t > 0.0 && t <= 0.25) || (k > 0 && !(t < tp[k - 1])) {
                    return Err(config_error(
                        &format!("cutoff.theta_primes[{k}]"),
                        "must lie in (0, 1/4] and strictly descend",
                    ));
                }
            }
        }
        if r.regimes {
            ascending("regimes.m_list", &self.regimes.m_list, f64::MIN_POSITIVE)?;
        }
        if r.gauge && !self.amplitudes.contains(&self.gauge.amplitude) {
            return Err(config_error("gauge.amplitude", "must be one of the sweep amplitudes"));
        }
        if r.lipschitz && !(self.lipschitz.delta > 0.0) {
            return Err(config_error("lipschitz.delta", "must be positive"));
        }
        self.solve_options().validate().map_err(|e| config_error("solver", e.to_string()))?;
        if let FlowSpec::Custom { values } = &self.flow {
            let n = g.points_per_dim.pow(g.dim as u32);
            if values.len() != n {
                return Err(config_error("flow.values", format!("expected {n} values, found {}", values.len())));
            }
        }
        Ok(())
    }

    pub fn is_kpp(&self) -> bool {
        matches!(self.reaction, ReactionSpec::Kpp { .. })
    }

    /// Cross-section grid refined `refine` times.
    pub fn torus(&self, refine: u32) -> Result<TorusGrid, HarnessError> {
        let g = &self.grid;
        let stencil = match g.stencil {
            StencilSpec::FiniteDifference => YStencil::FiniteDifference,
            StencilSpec::Spectral => YStencil::Spectral,
        };
        Ok(TorusGrid::new(g.dim, g.points_per_dim << refine)?.with_stencil(stencil))
    }

    fn cylinder(&self, n_x: usize, refine: u32) -> Result<CylinderGrid, HarnessError> {
        let g = &self.grid;
        let n_x = ((n_x - 1) << refine) + 1;
        Ok(CylinderGrid::new(self.torus(refine)?, g.x_min, g.x_max, n_x)?)
    }

    pub fn base_grid(&self, refine: u32) -> Result<CylinderGrid, HarnessError> {
        self.cylinder(self.grid.n_x, refine)
    }

    pub fn cutoff_grid(&self, refine: u32) -> Result<CylinderGrid, HarnessError> {
        self.cylinder(self.cutoff.n_x.unwrap_or(self.grid.n_x), refine)
    }

    /// Raw profile sampled on `torus`; a custom profile must match its size.
    pub fn raw_flow(&self, torus: &TorusGrid) -> Result<Vec<f64>, HarnessError> {
        let two_d = torus.dim() == 2;
        Ok(match &self.flow {
            FlowSpec::Zero => vec![0.0; torus.len()],
            FlowSpec::Cosine { k, amplitude, offset } => {
                torus.sample(|y, _| amplitude * (2.0 * PI * *k as f64 * y).cos() + offset)
            }
            FlowSpec::TwoMode { a1, k1, a2, k2 } => torus.sample(|y1, y2| {
                let second = if two_d { y2 } else { y1 };
                a1 * (2.0 * PI * *k1 as f64 * y1).cos() + a2 * (2.0 * PI * *k2 as f64 * second).cos()
            }),
            FlowSpec::Custom { values } => {
                if values.len() != torus.len() {
                    return Err(config_error("flow.values", "custom profiles cannot be refined"));
                }
                values.clone()
            }
        })
    }

    pub fn flow(&self, torus: &TorusGrid) -> Result<FlowProfile, HarnessError> {
        Ok(normalize_flow(torus, &self.raw_flow(torus)?)?)
    }

    pub fn reaction(&self) -> Result<Reaction, HarnessError> {
        Ok(match &self.reaction {
            ReactionSpec::Ignition { theta, form: IgnitionForm::Jump } => Reaction::ignition(*theta)?,
            ReactionSpec::Ignition { theta, form: IgnitionForm::Ramp } => Reaction::ignition_ramp(*theta)?,
            ReactionSpec::Kpp { fprime0, form: KppForm::Logistic } => Reaction::kpp(*fprime0)?,
            ReactionSpec::Kpp { fprime0, form: KppForm::Cubic } => Reaction::kpp_cubic(*fprime0)?,
        })
    }

    pub fn cutoff_reaction(&self, theta_prime: f64) -> Result<Reaction, HarnessError> {
        Ok(make_cutoff(&self.reaction()?, theta_prime)?)
    }

    pub fn frame(&self) -> XFrame {
        match self.frame {
            FrameSpec::Scaled => XFrame::Scaled,
            FrameSpec::Unscaled => XFrame::Unscaled,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            newton_tol: s.newton_tol,
            max_newton: s.max_newton,
            tol_bc: s.tol_bc,
            scheme: match s.scheme {
                SchemeSpec::Centered => AdvectionScheme::Centered,
                SchemeSpec::Upwind2 => AdvectionScheme::Upwind2,
                SchemeSpec::Upwind3 => AdvectionScheme::Upwind3,
            },
            shape_tol: self.tolerances.shape,
            ..SolveOptions::default()
        }
    }
}
