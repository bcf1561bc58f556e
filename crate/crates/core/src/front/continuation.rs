//! Continuation of fronts along an ascending amplitude schedule.

use alloc::vec::Vec;

use super::audit::{check_integral_identities, IdentityReport};
use super::solve::solve_front_scaled;
use super::{FrontSolution, Init, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::flow::FlowProfile;
use crate::grid::CylinderGrid;
use crate::reaction::Reaction;

/// How the x-extent of the cylinder follows the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XFrame {
    /// Fixed extent in the scaled variable `x`.
    #[default]
    Scaled,
    /// Fixed extent in the unscaled variable `Ax`: the scaled grid is
    /// `[x_min/A, x_max/A]`. Useful when fronts do not sharpen with `A`,
    /// e.g. without flow.
    Unscaled,
}

impl XFrame {
    /// The cylinder used at amplitude `a`.
    pub fn grid_at(self, base: &CylinderGrid, a: f64) -> CylinderGrid {
        match self {
            XFrame::Scaled => base.clone(),
            XFrame::Unscaled => base.contracted(a),
        }
    }
}

/// One converged amplitude of a continuation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationEntry {
    pub amplitude: f64,
    /// Unscaled speed of the original flow, `A·γ_A + A·β`.
    pub c_star: f64,
    /// Scaled speed `γ_A` of the mean-zero flow.
    pub gamma: f64,
    pub identities: IdentityReport,
    pub solution: FrontSolution,
}

/// Result of a continuation: converged entries, and the failure that
/// truncated the schedule, if any.
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub entries: Vec<ContinuationEntry>,
    pub failure: Option<(f64, Error)>,
}

impl ContinuationRun {
    pub fn gammas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.gamma).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.amplitude).collect()
    }

    pub fn last(&self) -> Option<&ContinuationEntry> {
        self.entries.last()
    }

    /// Errors out if the schedule was truncated.
    pub fn complete(self) -> Result<Self> {
        match self.failure {
            Some((_, e)) => Err(e),
            None => Ok(self),
        }
    }
}

/// Progress notifications for callers that time or log the run.
#[derive(Debug, Clone, Copy)]
pub enum ContinuationEvent<'a> {
    Started { amplitude: f64 },
    Finished { entry: &'a ContinuationEntry },
    Failed { amplitude: f64, error: &'a Error },
}

/// Solves along `amplitudes`, seeding each solve with the previous front.
///
/// The first solve starts from `seed`. A failure stops the run; the entries
/// computed so far are kept and the failure is recorded.
#[allow(clippy::too_many_arguments)]
pub fn continuation_in_a(
    amplitudes: &[f64],
    flow: &FlowProfile,
    reaction: &Reaction,
    grid: &CylinderGrid,
    frame: XFrame,
    seed: Init<'_>,
    opts: &SolveOptions,
    mut observer: impl FnMut(ContinuationEvent<'_>),
) -> Result<ContinuationRun> {
    if amplitudes.is_empty() || amplitudes[0] < 1.0 {
        return Err(invalid("amplitude schedule must be non-empty and start at A ≥ 1"));
    }
    if amplitudes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("amplitude schedule must be strictly ascending"));
    }
    let mut entries: Vec<ContinuationEntry> = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        observer(ContinuationEvent::Started { amplitude: a });
        let g = frame.grid_at(grid, a);
        let init = match entries.last() {
            Some(prev) => Init::Solution(&prev.solution),
            None => seed,
        };
        match solve_front_scaled(a, flow, reaction, &g, init, opts) {
            Ok(sol) => {
                let entry = ContinuationEntry {
                    amplitude: a,
                    c_star: sol.unscaled_speed(),
                    gamma: sol.gamma,
                    identities: check_integral_identities(&sol),
                    solution: sol,
                };
                observer(ContinuationEvent::Finished { entry: &entry });
                entries.push(entry);
            }
            Err(error) => {
                observer(ContinuationEvent::Failed {
                    amplitude: a,
                    error: &error,
                });
                return Ok(ContinuationRun {
                    entries,
                    failure: Some((a, error)),
                });
            }
        }
    }
    Ok(ContinuationRun {
        entries,
        failure: None,
    })
}
