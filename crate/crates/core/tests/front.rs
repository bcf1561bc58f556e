//! Front solves against the 1-D shooting oracle and the structural properties
//! of converged fronts.

mod oracle;

use shearfront_core::*;
use std::f64::consts::PI;

const THETA: f64 = 0.25;

fn cylinder(ny: usize, nx: usize) -> CylinderGrid {
    CylinderGrid::new(TorusGrid::new(1, ny).unwrap(), -24.0, 24.0, nx).unwrap()
}

fn cosine(grid: &CylinderGrid) -> FlowProfile {
    let t = grid.torus();
    normalize_flow(t, &t.sample(|y, _| (2.0 * PI * y).cos())).unwrap()
}

fn seed() -> Init<'static> {
    Init::Tanh {
        width: 1.0,
        gamma: 0.5,
    }
}

fn solve(a: f64, flow: &FlowProfile, grid: &CylinderGrid) -> FrontSolution {
    let f = Reaction::ignition(THETA).unwrap();
    solve_front_scaled(a, flow, &f, grid, seed(), &SolveOptions::default()).unwrap()
}

#[test]
fn zero_flow_speed_is_amplitude_free_and_matches_shooting() {
    let grid = cylinder(16, 961);
    let flow = FlowProfile::zero(grid.torus());
    let f = Reaction::ignition(THETA).unwrap();
    let run = continuation_in_a(
        &[1.0, 2.0, 4.0, 8.0],
        &flow,
        &f,
        &grid,
        XFrame::Unscaled,
        seed(),
        &SolveOptions::default(),
        |_| {},
    )
    .unwrap()
    .complete()
    .unwrap();
    let shot = oracle::ignition_speed(THETA);
    let c0 = run.entries[0].c_star;
    for e in &run.entries {
        assert!((e.c_star - c0).abs() <= 1e-6 * c0, "A = {}: {}", e.amplitude, e.c_star);
        assert!((e.gamma - c0 / e.amplitude).abs() <= 1e-6 * e.gamma);
    }
    assert!((c0 - shot.speed).abs() < 1e-4, "{c0} vs {}", shot.speed);
    // γ_A = c/A strictly decreasing.
    assert!(run.gammas().windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn zero_flow_identities_match_oracle_quadratures() {
    let grid = cylinder(16, 961);
    let flow = FlowProfile::zero(grid.torus());
    let sol = solve(1.0, &flow, &grid);
    let rep = check_integral_identities(&sol);
    let shot = oracle::ignition_speed(THETA);
    assert!((shot.reaction_integral - shot.speed).abs() < 1e-6 * shot.speed);
    assert!((rep.reaction_integral - shot.reaction_integral).abs() < 1e-3 * shot.speed);
    assert!((rep.energy_lhs - shot.energy).abs() < 2e-3 * shot.speed, "{} vs {}", rep.energy_lhs, shot.energy);
    assert!(rep.rel_err_reaction < 1e-3);
    assert!(rep.rel_err_energy < 5e-3);
    assert!((rep.ux_l1 - 1.0).abs() < 1e-3);
}

#[test]
fn zero_flow_barrier_against_pure_exponential() {
    let grid = cylinder(16, 961);
    let flow = FlowProfile::zero(grid.torus());
    let f = Reaction::ignition(THETA).unwrap();
    let run = continuation_in_a(
        &[1.0, 2.0],
        &flow,
        &f,
        &grid,
        XFrame::Unscaled,
        seed(),
        &SolveOptions::default(),
        |_| {},
    )
    .unwrap();
    let g_low = run.gammas().iter().copied().fold(f64::INFINITY, f64::min);
    let lam = lower_barrier(&flow, g_low).unwrap();
    // Without flow the uniform rate has the closed form γ̲.
    assert!((lam - g_low).abs() < 1e-10 * g_low);
    let sol = &run.entries[1].solution;
    let rep = check_exponential_barrier(sol, lam).unwrap();
    assert!(rep.holds, "worst margin {}", rep.worst_margin);
    assert!(rep.barrier.profile.iter().all(|&p| (p - THETA).abs() < 1e-12));
    // Against the exact tail θe^{−λx}: the pure exponential is an upper bound.
    let i0 = sol.grid.zero_index();
    for i in i0..sol.grid.n_x() {
        let x = sol.grid.x(i);
        assert!(sol.slice(i)[0] <= THETA * (-lam * x).exp() + 1e-10);
    }
}

#[test]
fn cosine_front_structure() {
    let grid = cylinder(32, 961);
    let flow = cosine(&grid);
    let shot = oracle::ignition_speed(THETA);
    let sol = solve(4.0, &flow, &grid);
    assert!(sol.gamma > 0.0 && sol.gamma <= 1.0 + shot.speed / 4.0);
    assert!(sol.monotonicity_defect() <= 1e-10);
    assert!(sol.range_defect() <= 1e-10);
    assert!((sol.max_at_zero() - THETA).abs() < 1e-10);
    assert!(sol.residual_norm <= 1e-10);
    let rep = check_integral_identities(&sol);
    assert!(rep.rel_err_reaction < 1e-3, "{}", rep.rel_err_reaction);
    assert!(rep.rel_err_energy < 5e-3, "{}", rep.rel_err_energy);
    assert!(rep.energy_lhs <= sol.gamma / 2.0 + 1e-3);
    assert!((rep.ux_l1 - 1.0).abs() < 1e-3);
}

#[test]
fn shifted_restart_reproduces_the_front() {
    let grid = cylinder(32, 961);
    let flow = cosine(&grid);
    let f = Reaction::ignition(THETA).unwrap();
    let sol = solve(4.0, &flow, &grid);
    for k in [-20_isize, 13] {
        let u = sol.shifted_field(k);
        let again = solve_front_scaled(
            4.0,
            &flow,
            &f,
            &grid,
            Init::Field {
                u: &u,
                gamma: sol.gamma,
            },
            &SolveOptions::default(),
        )
        .unwrap();
        assert!((again.gamma - sol.gamma).abs() <= 1e-10, "shift {k}: {}", again.gamma - sol.gamma);
        let diff = again
            .u
            .iter()
            .zip(&sol.u)
            .fold(0.0_f64, |d, (a, b)| d.max((a - b).abs()));
        assert!(diff < 1e-8, "shift {k}: field differs by {diff}");
    }
}

#[test]
fn longer_domain_leaves_speed_unchanged() {
    let grid = cylinder(32, 961);
    let flow = cosine(&grid);
    let f = Reaction::ignition(THETA).unwrap();
    let sol = solve(4.0, &flow, &grid);
    let long = grid.extended_right(120);
    assert!((long.x_max() - 30.0).abs() < 1e-12);
    let again =
        solve_front_scaled(4.0, &flow, &f, &long, Init::Solution(&sol), &SolveOptions::default()).unwrap();
    assert!((again.gamma - sol.gamma).abs() < 1e-6);
}

#[test]
fn raising_the_flow_orders_and_bounds_the_speed() {
    let grid = cylinder(32, 961);
    let t = grid.torus();
    let a = 4.0;
    let raw = t.sample(|y, _| (2.0 * PI * y).cos());
    let bump = t.sample(|y, _| 0.05 * (-(y - 0.3) * (y - 0.3) * 40.0).exp());
    let raised: Vec<f64> = raw.iter().zip(&bump).map(|(r, b)| r + b).collect();
    let f1 = normalize_flow(t, &raw).unwrap();
    let f2 = normalize_flow(t, &raised).unwrap();
    let s1 = solve(a, &f1, &grid);
    let s2 = solve(a, &f2, &grid);
    let (c1, c2) = (s1.unscaled_speed(), s2.unscaled_speed());
    let gap = bump.iter().copied().fold(0.0, f64::max);
    assert!(c2 >= c1, "{c2} < {c1}");
    assert!(c2 - c1 <= a * gap + 1e-8);
}

#[test]
fn constant_shift_of_the_flow_adds_exactly() {
    let grid = cylinder(32, 961);
    let t = grid.torus();
    let raw: Vec<f64> = t.sample(|y, _| (2.0 * PI * y).cos() + 0.05);
    let flow = normalize_flow(t, &raw).unwrap();
    let base = solve(4.0, &cosine(&grid), &grid);
    let sol = solve(4.0, &flow, &grid);
    assert!((sol.gamma - base.gamma).abs() < 1e-12);
    assert!((sol.unscaled_speed() - base.unscaled_speed() - 4.0 * 0.05).abs() < 1e-10);
}

#[test]
fn kpp_and_short_domains_are_rejected() {
    let grid = cylinder(16, 961);
    let flow = FlowProfile::zero(grid.torus());
    let kpp = Reaction::kpp(1.0).unwrap();
    assert!(solve_front_scaled(1.0, &flow, &kpp, &grid, seed(), &SolveOptions::default()).is_err());
    let short = CylinderGrid::new(grid.torus().clone(), -2.0, 2.0, 81).unwrap();
    let f = Reaction::ignition(THETA).unwrap();
    match solve_front_scaled(1.0, &flow, &f, &short, seed(), &SolveOptions::default()) {
        Err(Error::DomainTooShort { .. }) => {}
        other => panic!("expected a short-domain error, got {other:?}"),
    }
}

#[test]
fn continuation_stays_inside_the_sandwich() {
    let grid = cylinder(32, 961);
    let flow = cosine(&grid);
    let f = Reaction::ignition(THETA).unwrap();
    let c0 = oracle::ignition_speed(THETA).speed;
    let run = continuation_in_a(
        &[1.0, 2.0, 4.0, 8.0, 16.0],
        &flow,
        &f,
        &grid,
        XFrame::Scaled,
        seed(),
        &SolveOptions::default(),
        |_| {},
    )
    .unwrap()
    .complete()
    .unwrap();
    for e in &run.entries {
        assert!(e.gamma > 0.0 && e.gamma <= 1.0 + c0 / e.amplitude, "A = {}", e.amplitude);
        assert!(e.identities.rel_err_reaction < 1e-3);
    }
    let g = run.gammas();
    let d: Vec<f64> = g.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // Differences shrink once A ≥ 8.
    assert!(d[3] < d[2]);
}

#[test]
fn barrier_holds_for_a_cosine_front() {
    let grid = cylinder(32, 961);
    let flow = cosine(&grid);
    let f = Reaction::ignition(THETA).unwrap();
    let run = continuation_in_a(
        &[1.0, 2.0, 4.0],
        &flow,
        &f,
        &grid,
        XFrame::Scaled,
        seed(),
        &SolveOptions::default(),
        |_| {},
    )
    .unwrap();
    let g_low = run.gammas().iter().copied().fold(f64::INFINITY, f64::min);
    let lam = lower_barrier(&flow, g_low).unwrap();
    for e in &run.entries {
        let rep = check_exponential_barrier(&e.solution, lam).unwrap();
        assert!(rep.holds, "A = {}: worst margin {}", e.amplitude, rep.worst_margin);
        // At x = 0 the barrier is φ ≥ θ ≥ U.
        assert!(rep.margins[0] >= -1e-10);
        // Margins shrink along the tail.
        let tail = &rep.margins[rep.margins.len() / 2..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
