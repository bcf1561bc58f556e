//! Computation of each route's record, with caching and bookkeeping.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use shearfront_core::{
    certificate_upper_bound, check_exponential_barrier, continuation_in_a, gamma_star_by_cutoff,
    gamma_star_by_viscosity, kpp_limit_speed, kpp_minimal_speed, limit_identity_check,
    lower_barrier, normalize_flow, small_amplitude_slope, solve_front_scaled, CertificateOptions,
    ContinuationEvent, FlowProfile, FrontSolution, Init, TorusGrid, XFrame,
};

use crate::cache::Cache;
use crate::config::ExperimentConfig;
use crate::records::*;
use crate::HarnessError;

const SEED: Init<'static> = Init::Tanh {
    width: 1.0,
    gamma: 0.5,
};

/// Shared state of one pipeline run.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub refine: u32,
    pub cache: &'a Cache,
    pub solver_calls: &'a AtomicUsize,
    pub timings: &'a Mutex<BTreeMap<String, f64>>,
    pub profile_dir: Option<PathBuf>,
}

impl Context<'_> {
    fn time(&self, label: String, seconds: f64) {
        self.timings.lock().expect("timings lock").insert(label, seconds);
    }

    /// Observer that counts solves and records per-amplitude wall time.
    fn observer<'s>(&'s self, route: &'s str) -> impl FnMut(ContinuationEvent<'_>) + 's {
        let mut start = Instant::now();
        move |e| match e {
            ContinuationEvent::Started { amplitude } => {
                self.solver_calls.fetch_add(1, Ordering::Relaxed);
                log::info!("{route}: solving A = {amplitude}");
                start = Instant::now();
            }
            ContinuationEvent::Finished { entry } => {
                self.time(format!("{route}/A={}", entry.amplitude), start.elapsed().as_secs_f64());
            }
            ContinuationEvent::Failed { amplitude, error } => {
                log::warn!("{route}: A = {amplitude} failed: {error}");
            }
        }
    }

    /// Returns the cached record for `(route, parts)` or computes and stores it.
    fn cached<T, P>(&self, route: &str, parts: &P, compute: impl FnOnce() -> Result<T, HarnessError>) -> Result<T, HarnessError>
    where
        T: Serialize + DeserializeOwned,
        P: Serialize,
    {
        let key = Cache::key(route, &(parts, self.refine));
        if let Some(hit) = self.cache.get(&key) {
            log::info!("{route}: cache hit");
            return Ok(hit);
        }
        let t0 = Instant::now();
        let value = compute()?;
        self.time(format!("{route}/total"), t0.elapsed().as_secs_f64());
        self.cache.put(&key, &value)?;
        Ok(value)
    }

    fn torus(&self) -> Result<TorusGrid, HarnessError> {
        self.config.torus(self.refine)
    }

    fn flow(&self) -> Result<FlowProfile, HarnessError> {
        self.config.flow(&self.torus()?)
    }
}

/// The sweep and the gauge restarts it spawns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBundle {
    pub curve: SpeedCurve,
    pub gauge: Option<GaugeRecord>,
}

fn failure(at: f64, e: impl std::fmt::Display) -> Failure {
    Failure {
        at,
        error: e.to_string(),
    }
}

/// JSON field format for profile dumps.
#[derive(Serialize)]
struct FieldDump<'a> {
    format: &'static str,
    dim: usize,
    points_per_dim: usize,
    x_min: f64,
    x_max: f64,
    n_x: usize,
    amplitude: f64,
    gamma: f64,
    values: &'a [f64],
}

fn dump_profile(dir: &PathBuf, sol: &FrontSolution) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let g = &sol.grid;
    let rec = FieldDump {
        format: "shearfront-field/1",
        dim: g.torus().dim(),
        points_per_dim: g.torus().points_per_dim(),
        x_min: g.x_min(),
        x_max: g.x_max(),
        n_x: g.n_x(),
        amplitude: sol.amplitude,
        gamma: sol.gamma,
        values: &sol.u,
    };
    let path = dir.join(format!("profile_A{}.json", sol.amplitude));
    std::fs::write(path, serde_json::to_vec(&rec)?)?;
    Ok(())
}

fn front_diagnostics(
    ctx: &Context<'_>,
    sol: &FrontSolution,
    lambda_lower: Option<f64>,
) -> Result<FrontDiagnostics, HarnessError> {
    let cfg = ctx.config;
    let theta = sol.reaction.theta();
    let identities = shearfront_core::check_integral_identities(sol);
    let barrier = match lambda_lower {
        Some(rate) if cfg.routes.barrier => {
            let r = check_exponential_barrier(sol, rate)?;
            Some(BarrierRecord {
                rate,
                holds: r.holds,
                worst_margin: r.worst_margin,
                worst_x: sol.grid.x(r.worst_node.0),
                violations: r.violations,
            })
        }
        _ => None,
    };
    let certificate = if cfg.routes.certificate {
        let opts = CertificateOptions {
            scheme: sol.scheme,
            reference_speed: Some(sol.gamma),
            ..CertificateOptions::default()
        };
        let c = certificate_upper_bound(&sol.u, &sol.grid, sol.amplitude, &sol.flow, &sol.reaction, &opts)?;
        Some(CertificateRecord {
            bound: c.bound,
            x: sol.grid.x(c.argmax.0),
            y_index: c.argmax.1,
            evaluated_nodes: c.evaluated_nodes,
        })
    } else {
        None
    };
    Ok(FrontDiagnostics {
        residual_norm: sol.residual_norm,
        newton_iterations: sol.newton_iterations,
        pseudo_time_steps: sol.pseudo_time_steps,
        monotonicity_defect: sol.monotonicity_defect(),
        range_defect: sol.range_defect(),
        pin_defect: (sol.max_at_zero() - theta).abs(),
        identities: (&identities).into(),
        barrier,
        certificate,
    })
}

fn sweep_front(ctx: &Context<'_>) -> Result<SweepBundle, HarnessError> {
    let cfg = ctx.config;
    let grid = cfg.base_grid(ctx.refine)?;
    let flow = ctx.flow()?;
    let f = cfg.reaction()?;
    let opts = cfg.solve_options();
    let run = continuation_in_a(&cfg.amplitudes, &flow, &f, &grid, cfg.frame(), SEED, &opts, ctx.observer("sweep"))?;
    let gamma_lower = run.gammas().into_iter().reduce(f64::min);
    let lambda_lower = match gamma_lower {
        Some(g) if cfg.routes.barrier && g > 0.0 => Some(lower_barrier(&flow, g)?),
        _ => None,
    };
    let mut entries = Vec::with_capacity(run.entries.len());
    for e in &run.entries {
        entries.push(SpeedEntry {
            amplitude: e.amplitude,
            c_star: e.c_star,
            gamma: e.gamma,
            front: Some(front_diagnostics(ctx, &e.solution, lambda_lower)?),
        });
        if let Some(dir) = &ctx.profile_dir {
            dump_profile(dir, &e.solution)?;
        }
    }
    let gauge = match run.entries.iter().find(|e| e.amplitude == cfg.gauge.amplitude) {
        Some(e) if cfg.routes.gauge => {
            let sol = &e.solution;
            let mut restarts = Vec::new();
            for &k in &cfg.gauge.shifts {
                let u = sol.shifted_field(k as isize);
                ctx.solver_calls.fetch_add(1, Ordering::Relaxed);
                let init = Init::Field { u: &u, gamma: sol.gamma };
                let again = solve_front_scaled(sol.amplitude, &flow, &f, &sol.grid, init, &opts)?;
                let diff = again.u.iter().zip(&sol.u).fold(0.0_f64, |d, (a, b)| d.max((a - b).abs()));
                restarts.push((k, again.gamma, diff));
            }
            Some(GaugeRecord {
                amplitude: sol.amplitude,
                gamma: sol.gamma,
                restarts,
            })
        }
        _ => None,
    };
    Ok(SweepBundle {
        curve: SpeedCurve {
            source: "front".into(),
            entries,
            failure: run.failure.as_ref().map(|(a, e)| failure(*a, e)),
            gamma_lower,
            lambda_lower,
        },
        gauge,
    })
}

fn sweep_kpp(ctx: &Context<'_>) -> Result<SweepBundle, HarnessError> {
    let cfg = ctx.config;
    let flow = ctx.flow()?;
    let f0 = cfg.reaction()?.fprime0();
    let mut entries = Vec::new();
    let mut fail = None;
    for &a in &cfg.amplitudes {
        match kpp_minimal_speed(a, &flow, f0) {
            Ok(c) => entries.push(SpeedEntry {
                amplitude: a,
                c_star: c + a * flow.beta(),
                gamma: c / a,
                front: None,
            }),
            Err(e) => {
                fail = Some(failure(a, e));
                break;
            }
        }
    }
    let gamma_lower = entries.iter().map(|e| e.gamma).reduce(f64::min);
    Ok(SweepBundle {
        curve: SpeedCurve {
            source: "kpp_minimal_speed".into(),
            entries,
            failure: fail,
            gamma_lower,
            lambda_lower: None,
        },
        gauge: None,
    })
}

/// Sweep over the amplitude schedule.
pub fn sweep(ctx: &Context<'_>) -> Result<SweepBundle, HarnessError> {
    let c = ctx.config;
    let parts = (
        &c.flow,
        &c.reaction,
        &c.grid,
        &c.amplitudes,
        &c.frame,
        &c.solver,
        c.tolerances.shape,
        (c.routes.barrier, c.routes.certificate, c.routes.gauge),
        &c.gauge,
    );
    ctx.cached("sweep", &parts, || if c.is_kpp() { sweep_kpp(ctx) } else { sweep_front(ctx) })
}

/// `c*(0, f)`: a front solve without flow, or `2√f'(0)` for KPP.
pub fn reference_speed(ctx: &Context<'_>) -> Result<ReferenceSpeed, HarnessError> {
    let c = ctx.config;
    if c.is_kpp() {
        let f0 = c.reaction()?.fprime0();
        return Ok(ReferenceSpeed {
            value: 2.0 * f0.sqrt(),
            method: "closed_form".into(),
        });
    }
    let parts = (&c.reaction, &c.grid, &c.solver, c.tolerances.shape);
    ctx.cached("reference", &parts, || {
        // Without flow the front is constant in y; the coarsest cross-section suffices.
        let torus = TorusGrid::new(c.grid.dim, 8)?;
        let base = c.base_grid(ctx.refine)?;
        let grid = shearfront_core::CylinderGrid::new(torus.clone(), base.x_min(), base.x_max(), base.n_x())?;
        let flow = FlowProfile::zero(&torus);
        ctx.solver_calls.fetch_add(1, Ordering::Relaxed);
        let sol = solve_front_scaled(1.0, &flow, &c.reaction()?, &grid, SEED, &c.solve_options())?;
        Ok(ReferenceSpeed {
            value: sol.gamma,
            method: "solve".into(),
        })
    })
}

/// Sweep of the flow raised pointwise by `δ(y) = delta·(1 + sin 2πy₁)/2`.
pub fn lipschitz(ctx: &Context<'_>) -> Result<LipschitzRecord, HarnessError> {
    let c = ctx.config;
    let parts = (&c.flow, &c.reaction, &c.grid, &c.amplitudes, &c.frame, &c.solver, c.tolerances.shape, &c.lipschitz);
    ctx.cached("lipschitz", &parts, || {
        let torus = ctx.torus()?;
        let delta = c.lipschitz.delta;
        let bump = torus.sample(|y, _| 0.5 * delta * (1.0 + (2.0 * std::f64::consts::PI * y).sin()));
        let raw: Vec<f64> = c.raw_flow(&torus)?.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let flow = normalize_flow(&torus, &raw)?;
        let grid = c.base_grid(ctx.refine)?;
        let run = continuation_in_a(
            &c.amplitudes,
            &flow,
            &c.reaction()?,
            &grid,
            c.frame(),
            SEED,
            &c.solve_options(),
            ctx.observer("lipschitz"),
        )?;
        Ok(LipschitzRecord {
            delta: bump.iter().copied().fold(0.0, f64::max),
            entries: run.entries.iter().map(|e| (e.amplitude, e.c_star / e.amplitude)).collect(),
            failure: run.failure.as_ref().map(|(a, e)| failure(*a, e)),
        })
    })
}

/// Richardson extrapolation of `γ_A` in `1/A²`, with the limit identities of
/// the last profile.
pub fn viscosity(ctx: &Context<'_>) -> Result<ViscosityRecord, HarnessError> {
    let c = ctx.config;
    let parts = (&c.flow, &c.reaction, &c.grid, &c.viscosity, &c.frame, &c.solver, c.tolerances.shape);
    ctx.cached("viscosity", &parts, || {
        let grid = c.base_grid(ctx.refine)?;
        let flow = ctx.flow()?;
        let f = c.reaction()?;
        let out = gamma_star_by_viscosity(
            &flow,
            &f,
            &grid,
            &c.viscosity.amplitudes,
            c.frame(),
            SEED,
            &c.solve_options(),
            ctx.observer("viscosity"),
        );
        Ok(match out {
            Ok(o) => {
                let p = o.profile();
                let li = limit_identity_check(p, p.gamma, &f);
                ViscosityRecord {
                    estimate: Some((&o.estimate).into()),
                    limit_identity: Some(LimitIdentity {
                        flux: li.flux,
                        reaction_integral: li.reaction_integral,
                        rel_gap: li.rel_gap,
                        level_x: li.level_x,
                        half_line_reaction: li.half_line_reaction,
                        no_front: li.no_front,
                    }),
                    failure: None,
                }
            }
            Err(e) => ViscosityRecord {
                estimate: None,
                limit_identity: None,
                failure: Some(failure(c.viscosity.amplitudes[0], e)),
            },
        })
    })
}

/// `θ' → 0` limit of the cutoff speeds.
pub fn cutoff(ctx: &Context<'_>) -> Result<CutoffRecord, HarnessError> {
    let c = ctx.config;
    let parts = (&c.flow, &c.reaction, &c.grid, &c.cutoff, &c.frame, &c.solver, c.tolerances.shape);
    ctx.cached("cutoff", &parts, || {
        let grid = c.cutoff_grid(ctx.refine)?;
        let flow = ctx.flow()?;
        let mut current = c.cutoff.theta_primes[0];
        let mut inner = ctx.observer("cutoff");
        let out = gamma_star_by_cutoff(
            &flow,
            &c.reaction()?,
            &c.cutoff.theta_primes,
            &grid,
            &c.cutoff.amplitudes,
            c.frame(),
            &c.solve_options(),
            |tp, e| {
                current = tp;
                if let ContinuationEvent::Started { amplitude } = e {
                    log::info!("cutoff: θ' = {tp}, A = {amplitude}");
                }
                inner(e)
            },
        );
        Ok(match out {
            Ok(o) => CutoffRecord {
                estimate: Some((&o.estimate).into()),
                levels: o
                    .per_cutoff
                    .iter()
                    .map(|(tp, v)| CutoffLevel {
                        theta_prime: *tp,
                        estimate: (&v.estimate).into(),
                    })
                    .collect(),
                failure: None,
            },
            Err(e) => CutoffRecord {
                estimate: None,
                levels: Vec::new(),
                failure: Some(failure(current, e)),
            },
        })
    })
}

/// The variational formula on the configured cross-section and on its
/// refinement; the gap is the error bar.
pub fn kpp_formula(ctx: &Context<'_>) -> Result<KppFormulaRecord, HarnessError> {
    let c = ctx.config;
    let parts = (&c.flow, &c.reaction, &c.grid);
    ctx.cached("kpp_formula", &parts, || {
        let f0 = c.reaction()?.fprime0();
        let torus = ctx.torus()?;
        let k = kpp_limit_speed(&c.flow(&torus)?, f0)?;
        let fine = kpp_limit_speed(&c.flow(&torus.refined())?, f0)?;
        let bar = (k.value - fine.value).abs();
        Ok(KppFormulaRecord {
            estimate: Estimate {
                route: shearfront_core::Route::KppFormula.name().into(),
                value: k.value,
                error_bar: bar,
                parameters: vec![f0],
                raw_values: vec![k.value, fine.value],
                notes: vec![("t_star".into(), k.t_star), ("nu".into(), k.nu)],
                warnings: if k.constraint_active {
                    Vec::new()
                } else {
                    vec!["gradient constraint inactive down to the t floor".into()]
                },
            },
            t_star: k.t_star,
            nu: k.nu,
            constraint_active: k.constraint_active,
            refined_value: fine.value,
        })
    })
}

/// `γ*(M·f)` over the configured `M` values.
pub fn regimes(ctx: &Context<'_>) -> Result<RegimeRecord, HarnessError> {
    let c = ctx.config;
    let parts = (&c.flow, &c.reaction, &c.grid, &c.regimes);
    ctx.cached("regimes", &parts, || {
        let flow = ctx.flow()?;
        let f0 = c.reaction()?.fprime0();
        let mut values = Vec::new();
        for &m in &c.regimes.m_list {
            values.push((m, kpp_limit_speed(&flow, m * f0)?.value));
        }
        Ok(RegimeRecord {
            values,
            slope: small_amplitude_slope(&flow, f0)?,
            fprime0: f0,
        })
    })
}

/// Summary of the normalized flow on the configured cross-section.
pub fn flow_summary(ctx: &Context<'_>) -> Result<FlowSummary, HarnessError> {
    let flow = ctx.flow()?;
    let n = flow.grid().points_per_dim();
    let order = if n >= 16 && !flow.is_zero() {
        (1..=4.min(n / 2)).find(|&r| shearfront_core::check_nondegeneracy(&flow, r).is_ok_and(|d| d.holds))
    } else {
        None
    };
    Ok(FlowSummary {
        beta: flow.beta(),
        alpha_max: flow.alpha_max(),
        alpha_min: flow.alpha_min(),
        constant: flow.is_zero(),
        nondegenerate_order: order,
    })
}

/// Frame used by the sweep, exposed for reporting.
pub fn frame_name(frame: XFrame) -> &'static str {
    match frame {
        XFrame::Scaled => "scaled",
        XFrame::Unscaled => "unscaled",
    }
}
