//! Grids, flow normalization, nondegeneracy and reactions.

use proptest::prelude::*;
use shearfront_core::*;
use std::f64::consts::PI;

fn torus(n: usize) -> TorusGrid {
    TorusGrid::new(1, n).unwrap()
}

#[test]
fn torus_grid_shape_and_wrapping() {
    let g = TorusGrid::new(2, 16).unwrap();
    assert_eq!(g.len(), 256);
    assert_eq!(g.spacing(), 1.0 / 16.0);
    assert_eq!(g.neighbor(0, 0, -1), 15 * 16);
    assert_eq!(g.neighbor(15, 1, 1), 0);
    assert_eq!(g.neighbor(0, 1, -1), 15);
    assert!(TorusGrid::new(3, 16).is_err());
    assert!(TorusGrid::new(1, 4).is_err());
}

#[test]
fn cylinder_grid_requires_zero_node() {
    let t = torus(16);
    let c = CylinderGrid::new(t.clone(), -24.0, 24.0, 961).unwrap();
    assert_eq!(c.dx(), 0.05);
    assert_eq!(c.x(c.zero_index()), 0.0);
    assert!(CylinderGrid::new(t.clone(), -1.0, 2.0, 101).is_err());
    assert!(CylinderGrid::new(t, 1.0, 2.0, 101).is_err());
}

#[test]
fn constant_profile_is_all_mean() {
    let g = torus(32);
    let f = normalize_flow(&g, &[3.0; 32]).unwrap();
    assert!(f.alpha().iter().all(|&a| a == 0.0));
    assert_eq!(f.beta(), 3.0);
    assert!(f.is_zero());
}

#[test]
fn cosine_profile_has_zero_mean() {
    let g = torus(64);
    let raw = g.sample(|y, _| (2.0 * PI * y).cos());
    let f = normalize_flow(&g, &raw).unwrap();
    assert!(f.beta().abs() < 1e-15);
    for (a, r) in f.alpha().iter().zip(&raw) {
        assert!((a - r).abs() < 1e-15);
    }
    assert_eq!(f.alpha_max(), 1.0);
    assert!((f.alpha_min() + 1.0).abs() < 1e-15);
}

#[test]
fn shifted_cosine_splits_off_the_shift() {
    let g = torus(64);
    let raw = g.sample(|y, _| (2.0 * PI * y).cos() + 0.5);
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let f = normalize_flow(&g, &raw).unwrap();
    assert!((f.beta() - mean).abs() < 1e-15);
    assert!((f.beta() - 0.5).abs() < 1e-14);
    for (back, r) in f.reconstruct().iter().zip(&raw) {
        assert!((back - r).abs() < 1e-15);
    }
}

#[test]
fn non_finite_profile_reports_node() {
    let g = torus(16);
    let mut raw = vec![0.0; 16];
    raw[7] = f64::NAN;
    match normalize_flow(&g, &raw) {
        Err(Error::NonFinite { index }) => assert_eq!(index, 7),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn normalized_mean_is_tiny(vals in prop::collection::vec(-50.0f64..50.0, 32)) {
        let g = torus(32);
        let f = normalize_flow(&g, &vals).unwrap();
        let mean = f.alpha().iter().sum::<f64>() / 32.0;
        prop_assert!(mean.abs() <= 1e-12 * f.sup_norm().max(1.0));
        prop_assert!(f.alpha_min() <= 0.0 && f.alpha_max() >= 0.0);
        for (back, r) in f.reconstruct().iter().zip(&vals) {
            prop_assert!((back - r).abs() <= 1e-13 * r.abs().max(1.0));
        }
    }
}

#[test]
fn zero_flow_is_degenerate() {
    let g = torus(32);
    let f = FlowProfile::zero(&g);
    assert!(!check_nondegeneracy(&f, 2).unwrap().holds);
}

#[test]
fn cosine_needs_second_derivatives() {
    let g = torus(64);
    let f = normalize_flow(&g, &g.sample(|y, _| (2.0 * PI * y).cos())).unwrap();
    let r1 = check_nondegeneracy(&f, 1).unwrap();
    assert!(!r1.holds);
    let y = g.coords(r1.worst_index)[0];
    assert!(y == 0.0 || y == 0.5, "worst node at y = {y}");
    assert!(check_nondegeneracy(&f, 2).unwrap().holds);
}

#[test]
fn two_mode_flow_on_two_torus() {
    let g = TorusGrid::new(2, 16).unwrap();
    let raw = g.sample(|a, b| (2.0 * PI * a).cos() + (4.0 * PI * b).cos());
    let f = normalize_flow(&g, &raw).unwrap();
    let rep = check_nondegeneracy(&f, 2).unwrap();
    assert!(rep.holds);
    // Closed-form derivative sum at the worst node.
    let [y1, y2] = g.coords(rep.worst_index);
    let (s1, c1) = (2.0 * PI * y1).sin_cos();
    let (s2, c2) = (4.0 * PI * y2).sin_cos();
    let closed = (2.0 * PI * s1).abs()
        + (4.0 * PI * s2).abs()
        + (4.0 * PI * PI * c1).abs()
        + (16.0 * PI * PI * c2).abs();
    assert!((rep.worst_sum - closed).abs() < 1e-9 * closed);
}

#[test]
fn nondegeneracy_rejects_unresolvable_orders() {
    let g = torus(16);
    let f = normalize_flow(&g, &g.sample(|y, _| (2.0 * PI * y).cos())).unwrap();
    assert!(check_nondegeneracy(&f, 9).is_err());
    assert!(check_nondegeneracy(&f, 0).is_err());
    let coarse = torus(8);
    let fc = normalize_flow(&coarse, &coarse.sample(|y, _| (2.0 * PI * y).cos())).unwrap();
    assert!(check_nondegeneracy(&fc, 1).is_err());
}

#[test]
fn nondegeneracy_is_monotone_in_order() {
    let g = torus(32);
    let f = normalize_flow(
        &g,
        &g.sample(|y, _| (2.0 * PI * y).cos() + 0.2 * (6.0 * PI * y).sin()),
    )
    .unwrap();
    let mut seen = false;
    for r in 1..=16 {
        let h = check_nondegeneracy(&f, r).unwrap().holds;
        assert!(!seen || h, "order {r} lost nondegeneracy");
        seen |= h;
    }
    assert!(seen);
}

#[test]
fn every_builtin_reaction_has_the_sign_pattern() {
    let kpp = Reaction::kpp(1.0).unwrap();
    for r in [
        Reaction::ignition(0.25).unwrap(),
        Reaction::ignition_ramp(0.1).unwrap(),
        kpp.clone(),
        Reaction::kpp_cubic(2.0).unwrap(),
        make_cutoff(&kpp, 0.25).unwrap(),
        make_cutoff(&kpp, 1.0 / 256.0).unwrap(),
    ] {
        r.validate().unwrap();
    }
}

#[test]
fn ignition_values() {
    let f = Reaction::ignition(0.25).unwrap();
    assert_eq!(f.value(0.25), 0.0);
    assert_eq!(f.value(0.5), 0.25);
    assert_eq!(f.value(1.0), 0.0);
    assert_eq!(f.theta(), 0.25);
    assert!(Reaction::ignition(0.0).is_err());
    assert!(Reaction::ignition(1.0).is_err());
}

#[test]
fn cutoff_examples() {
    let f = Reaction::kpp(1.0).unwrap();
    let c = make_cutoff(&f, 0.1).unwrap();
    assert_eq!(c.value(0.05), 0.0);
    assert!((c.value(0.3) - 0.21).abs() < 1e-15);
    let v = c.value(0.15);
    assert!(v > 0.0 && v < 0.1275);
    // The switch is symmetric about its midpoint, so χ(1.5) = 1/2.
    assert!((v - 0.1275 * 0.5).abs() < 1e-15);
    assert!(c.theta() >= 0.1);
    assert!(make_cutoff(&f, 0.0).is_err());
    assert!(make_cutoff(&f, 0.3).is_err());
    assert!(make_cutoff(&Reaction::ignition(0.2).unwrap(), 0.1).is_err());
}

#[test]
fn cutoff_is_below_parent_and_equal_above_twice_level() {
    let f = Reaction::kpp(1.0).unwrap();
    let c = make_cutoff(&f, 0.05).unwrap();
    for k in 0..=1000 {
        let u = k as f64 / 1000.0;
        assert!(c.value(u) <= f.value(u));
        if u >= 0.1 {
            assert_eq!(c.value(u), f.value(u));
        }
    }
}

#[test]
fn switch_is_smooth_and_monotone() {
    assert_eq!(reaction::switch(1.0), 0.0);
    assert_eq!(reaction::switch(2.0), 1.0);
    let mut prev = 0.0;
    for k in 0..=2000 {
        let v = 0.5 + 2.0 * k as f64 / 2000.0;
        let s = reaction::switch(v);
        assert!(s >= prev);
        prev = s;
        // Central difference oracle for the derivative.
        let h = 1e-6;
        let fd = (reaction::switch(v + h) - reaction::switch(v - h)) / (2.0 * h);
        assert!((fd - reaction::switch_derivative(v)).abs() < 1e-5);
    }
}

proptest! {
    #[test]
    fn cutoffs_increase_as_the_level_drops(a in 0.01f64..0.25, b in 0.01f64..0.25) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let f = Reaction::kpp(1.0).unwrap();
        let cl = make_cutoff(&f, lo).unwrap();
        let ch = make_cutoff(&f, hi).unwrap();
        for k in 0..1000 {
            let u = k as f64 / 999.0;
            prop_assert!(cl.value(u) >= ch.value(u));
        }
    }

    #[test]
    fn segment_average_matches_quadrature(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = make_cutoff(&Reaction::kpp(1.0).unwrap(), 0.125).unwrap();
        let (avg, _, _) = f.segment_average(a, b);
        // Midpoint rule with many panels.
        let n = 20000;
        let mid: f64 = (0..n)
            .map(|k| f.value(a + (b - a) * (k as f64 + 0.5) / n as f64))
            .sum::<f64>() / n as f64;
        prop_assert!((avg - mid).abs() < 1e-7);
    }
}

#[test]
fn laplacian_of_a_cosine() {
    let g = TorusGrid::new(2, 32).unwrap();
    let u = g.sample(|a, b| (2.0 * PI * a).cos() * (2.0 * PI * b).cos());
    let mut out = vec![0.0; u.len()];
    g.apply_laplacian(&u, &mut out);
    let h = g.spacing();
    // Three-point symbol per axis.
    let sym = 2.0 * (2.0 * (2.0 * PI * h).cos() - 2.0) / (h * h);
    for (o, v) in out.iter().zip(&u) {
        assert!((o - sym * v).abs() < 1e-9);
    }
}
