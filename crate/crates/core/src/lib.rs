#![no_std]
//! Numerics for traveling fronts of reaction-diffusion equations in shear flows.
//!
//! The crate solves the amplitude-scaled front problem
//! `Δ_y U + A⁻² U_xx + (γ − α(y)) U_x + f(U) = 0` on a truncated cylinder
//! `[x_min, x_max] × T^{N−1}`, computes principal eigenpairs of potential
//! operators on the torus, and estimates the large-amplitude limit of the
//! scaled speed `c*(Aα, f) / A` by several independent routes.
//!
//! Everything here is allocation-based but `std`-free; file formats, the
//! CLI and caching live in the companion `shearfront` crate.

extern crate alloc;

/// Crate version, part of every cache key downstream.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod fourier;
pub mod front;
pub mod grid;
pub mod flow;
pub mod limit;
pub mod linalg;
pub mod reaction;
pub mod spectral;

pub use error::{Error, Result};
pub use flow::{check_nondegeneracy, normalize_flow, FlowProfile, Nondegeneracy};
pub use front::{
    check_exponential_barrier, check_integral_identities, continuation_in_a, lower_barrier,
    solve_front_scaled, AdvectionScheme, Barrier, BarrierReport, ContinuationEntry,
    ContinuationEvent, ContinuationRun, FrontSolution, IdentityReport, Init,
    SolveOptions, XFrame,
};
pub use grid::{CylinderGrid, TorusGrid, YStencil};
pub use limit::{
    certificate_upper_bound, gamma_star_by_cutoff, gamma_star_by_viscosity, limit_identity_check,
    richardson, Certificate, CertificateOptions, CutoffOutcome, GammaStarEstimate,
    LimitIdentityReport, Route, ViscosityOutcome,
};
pub use reaction::{make_cutoff, Reaction, ReactionKind};
pub use spectral::{
    decay_rate, kpp_limit_speed, kpp_minimal_speed, mu_of_lambda, principal_eigpair,
    small_amplitude_slope, EigenResult, KppLimit,
};
