//! Orchestration of one run: routes in a worker pool, then a single
//! reduction into the report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::checks::{evaluate, fit_asymptote, Check, CheckInput};
use crate::config::ExperimentConfig;
use crate::records::*;
use crate::routes::{self, Context, SweepBundle};
use crate::{output, HarnessError, EXIT_FAILURE};

pub const REPORT_FORMAT: &str = "shearfront-report/1";

/// Which part of the pipeline a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Every enabled route.
    Run,
    /// The sweep and the per-amplitude audits.
    Speeds,
    /// The limit routes.
    Gammastar,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stage: Stage,
    /// Output directory; `None` keeps everything in memory.
    pub out: Option<PathBuf>,
    pub cache: bool,
    /// Defaults to `<out>/.cache`.
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid_refine: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stage: Stage::Run,
            out: None,
            cache: true,
            cache_dir: None,
            threads: None,
            grid_refine: 0,
        }
    }
}

/// Everything a run computed. Wall times live in [`Timings`], so identical
/// inputs produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub name: String,
    pub stage: Stage,
    pub grid_refine: u32,
    pub config: ExperimentConfig,
    pub flow: FlowSummary,
    pub reference_speed: Option<ReferenceSpeed>,
    pub speeds: Option<SpeedCurve>,
    pub fit: Option<FitRecord>,
    pub gauge: Option<GaugeRecord>,
    pub lipschitz: Option<LipschitzRecord>,
    pub viscosity: Option<ViscosityRecord>,
    pub cutoff: Option<CutoffRecord>,
    pub kpp_formula: Option<KppFormulaRecord>,
    pub regimes: Option<RegimeRecord>,
    /// Route errors outside the per-amplitude failure records.
    pub errors: Vec<(String, String)>,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    /// Checks recomputed from the records and tolerances in the report.
    pub fn recheck(&self) -> Vec<Check> {
        let mut checks: Vec<Check> = self
            .errors
            .iter()
            .map(|(route, e)| Check::flag(&format!("{route}.error"), false, e.clone()))
            .collect();
        checks.extend(evaluate(&CheckInput {
            tolerances: &self.config.tolerances,
            flow: &self.flow,
            reference_speed: self.reference_speed.as_ref(),
            speeds: self.speeds.as_ref(),
            fit: self.fit.as_ref(),
            gauge: self.gauge.as_ref(),
            lipschitz: self.lipschitz.as_ref(),
            viscosity: self.viscosity.as_ref(),
            cutoff: self.cutoff.as_ref(),
            kpp_formula: self.kpp_formula.as_ref(),
            regimes: self.regimes.as_ref(),
        }));
        checks
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            EXIT_FAILURE
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Wall times and solver calls of a run, written next to the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub solver_calls: usize,
    /// Seconds per `route/total` and per `route/A=…`.
    pub sections: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub timings: Timings,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

fn stage_config(cfg: &ExperimentConfig, stage: Stage) -> Result<ExperimentConfig, HarnessError> {
    let mut c = cfg.clone();
    let r = &mut c.routes;
    match stage {
        Stage::Run => {}
        Stage::Speeds => {
            r.viscosity = false;
            r.cutoff = false;
            r.kpp_formula = false;
            r.regimes = false;
        }
        Stage::Gammastar => {
            r.sweep = false;
            r.barrier = false;
            r.certificate = false;
            r.gauge = false;
            r.lipschitz = false;
        }
    }
    let r = &c.routes;
    if !(r.sweep || r.viscosity || r.cutoff || r.kpp_formula || r.regimes) {
        return Err(HarnessError::Config {
            location: "routes".into(),
            message: format!("no enabled route belongs to the {stage:?} stage"),
        });
    }
    c.output = None;
    Ok(c)
}

type Slot<T> = Option<Result<T, HarnessError>>;

/// Unwraps a route result, moving errors into the report.
fn take<T>(errors: &mut Vec<(String, String)>, name: &str, slot: Slot<T>) -> Option<T> {
    match slot {
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            log::error!("{name}: {e}");
            errors.push((name.to_string(), e.to_string()));
            None
        }
        None => None,
    }
}

/// Runs the configured routes and, with an output directory, writes the
/// report files.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, HarnessError> {
    let t0 = Instant::now();
    let cfg = stage_config(cfg, opts.stage)?;
    cfg.validate()?;
    let cache = match (&opts.cache_dir, &opts.out) {
        _ if !(opts.cache && cfg.cache) => Cache::disabled(),
        (Some(d), _) => Cache::new(d),
        (None, Some(out)) => Cache::new(&out.join(".cache")),
        (None, None) => Cache::disabled(),
    };
    let calls = AtomicUsize::new(0);
    let sections = Mutex::new(BTreeMap::new());
    let ctx = Context {
        config: &cfg,
        refine: opts.grid_refine,
        cache: &cache,
        solver_calls: &calls,
        timings: &sections,
        profile_dir: opts.out.as_ref().filter(|_| cfg.dump_profiles).map(|o| o.join("profiles")),
    };
    let flow = routes::flow_summary(&ctx)?;
    let r = &cfg.routes;

    let mut sweep: Slot<SweepBundle> = None;
    let mut reference: Slot<ReferenceSpeed> = None;
    let mut lipschitz: Slot<LipschitzRecord> = None;
    let mut viscosity: Slot<ViscosityRecord> = None;
    let mut cutoff: Slot<CutoffRecord> = None;
    let mut kpp_formula: Slot<KppFormulaRecord> = None;
    let mut regimes: Slot<RegimeRecord> = None;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| HarnessError::Report(e.to_string()))?;
    pool.install(|| {
        rayon::scope(|s| {
            let ctx = &ctx;
            if r.sweep {
                s.spawn(|_| sweep = Some(routes::sweep(ctx)));
                s.spawn(|_| reference = Some(routes::reference_speed(ctx)));
            }
            if r.lipschitz {
                s.spawn(|_| lipschitz = Some(routes::lipschitz(ctx)));
            }
            if r.viscosity {
                s.spawn(|_| viscosity = Some(routes::viscosity(ctx)));
            }
            if r.cutoff {
                s.spawn(|_| cutoff = Some(routes::cutoff(ctx)));
            }
            if r.kpp_formula {
                s.spawn(|_| kpp_formula = Some(routes::kpp_formula(ctx)));
            }
            if r.regimes {
                s.spawn(|_| regimes = Some(routes::regimes(ctx)));
            }
        })
    });

    let mut errors = Vec::new();
    let sweep = take(&mut errors, "sweep", sweep);
    let reference_speed = take(&mut errors, "reference", reference);
    let lipschitz = take(&mut errors, "lipschitz", lipschitz);
    let viscosity = take(&mut errors, "viscosity", viscosity);
    let cutoff = take(&mut errors, "cutoff", cutoff);
    let kpp_formula = take(&mut errors, "kpp_formula", kpp_formula);
    let regimes = take(&mut errors, "regimes", regimes);

    let (speeds, gauge) = match sweep {
        Some(b) => (Some(b.curve), b.gauge),
        None => (None, None),
    };
    if let Some(f) = speeds.as_ref().and_then(|s| s.failure.as_ref()) {
        log::error!("sweep failed at A = {}: {}", f.at, f.error);
    }
    let fit = speeds.as_ref().filter(|s| s.entries.len() >= 3).and_then(|s| fit_asymptote(s).ok());

    let mut estimates = Vec::new();
    if let (Some(f), Some(s)) = (&fit, &speeds) {
        let last = s.entries.last().expect("fit has entries");
        estimates.push(Estimate {
            route: shearfront_core::Route::SweepExtrapolation.name().into(),
            value: f.fitted_gamma,
            // Distance to the largest-amplitude value.
            error_bar: (f.fitted_gamma - last.gamma).abs(),
            parameters: f.window.clone(),
            raw_values: s.entries[s.entries.len() - f.window.len()..].iter().map(|e| e.c_star).collect(),
            notes: vec![("intercept".into(), f.intercept), ("fit_residual".into(), f.fit_residual)],
            warnings: Vec::new(),
        });
    }
    estimates.extend(viscosity.as_ref().and_then(|v| v.estimate.clone()));
    estimates.extend(cutoff.as_ref().and_then(|v| v.estimate.clone()));
    estimates.extend(kpp_formula.as_ref().map(|k| k.estimate.clone()));

    let mut report = Report {
        format: REPORT_FORMAT.into(),
        name: cfg.name.clone(),
        stage: opts.stage,
        grid_refine: opts.grid_refine,
        config: cfg.clone(),
        flow,
        reference_speed,
        speeds,
        fit,
        gauge,
        lipschitz,
        viscosity,
        cutoff,
        kpp_formula,
        regimes,
        errors,
        estimates,
        checks: Vec::new(),
        passed: false,
    };
    report.checks = report.recheck();
    report.passed = report.checks.iter().all(Check::passed);
    let timings = Timings {
        total_seconds: t0.elapsed().as_secs_f64(),
        solver_calls: calls.load(Ordering::Relaxed),
        sections: sections.into_inner().expect("timings lock"),
    };
    if let Some(out) = &opts.out {
        output::write_all(out, &report, &timings)?;
    }
    Ok(Outcome { report, timings })
}
