//! One-dimensional front oracle by phase-plane shooting.
//!
//! A front `u'' + c u' + f(u) = 0` with `f = 0` on `[0, θ]` is `θ e^{−cx}`
//! ahead of the level `θ`, so `p = u'` must equal `−cθ` there. Integrating
//! `dp/du = −c − f(u)/p` down from the saddle at `u = 1` and bisecting on the
//! mismatch gives `c`.

#![allow(dead_code)]

pub struct Shot {
    pub speed: f64,
    /// `∫ f(u) dx`, equal to `c` for an exact front.
    pub reaction_integral: f64,
    /// `∫ u_x² dx` over the front.
    pub energy: f64,
}

fn slope(c: f64, p: f64, u: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    -c - f(u) / p
}

/// Integrates from `u = 1 − δ` down to `u = θ`; returns `p(θ)` and quadratures.
fn sweep(c: f64, theta: f64, fp1: f64, f: &dyn Fn(f64) -> f64, steps: usize) -> (f64, f64, f64) {
    let delta = 1e-7;
    let k = 0.5 * (-c + (c * c - 4.0 * fp1).sqrt());
    let mut u = 1.0 - delta;
    let mut p = -k * delta;
    let h = (u - theta) / steps as f64;
    let mut react = 0.0;
    let mut energy = 0.0;
    for _ in 0..steps {
        // RK4 with step −h in u; quadratures by Simpson on the same nodes.
        let k1 = slope(c, p, u, f);
        let k2 = slope(c, p - 0.5 * h * k1, u - 0.5 * h, f);
        let k3 = slope(c, p - 0.5 * h * k2, u - 0.5 * h, f);
        let k4 = slope(c, p - h * k3, u - h, f);
        let pm = p - 0.5 * h * (k1 + k2) * 0.5;
        let pn = p - h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        let q = |pp: f64, uu: f64| f(uu) / -pp;
        react += h / 6.0 * (q(p, u) + 4.0 * q(pm, u - 0.5 * h) + q(pn, u - h));
        energy += h / 6.0 * (-p - 4.0 * pm - pn);
        p = pn;
        u -= h;
        if p >= 0.0 {
            return (f64::INFINITY, react, energy);
        }
    }
    (p, react, energy)
}

/// Speed of the 1-D front for `f` vanishing on `[0, θ]`, with `f'(1) = fp1 < 0`.
pub fn shoot(theta: f64, fp1: f64, f: &dyn Fn(f64) -> f64) -> Shot {
    let steps = 200_000;
    let mismatch = |c: f64| sweep(c, theta, fp1, f, steps).0 + c * theta;
    let (mut lo, mut hi) = (1e-3, 10.0);
    assert!(mismatch(lo) < 0.0 && mismatch(hi) > 0.0, "speed not bracketed");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let (_, r, e) = sweep(c, theta, fp1, f, steps);
    // The exponential tail ahead of θ adds ∫ (cθe^{−cx})² dx = cθ²/2.
    Shot {
        speed: c,
        reaction_integral: r,
        energy: e + 0.5 * c * theta * theta,
    }
}

/// Ignition reaction `u(1−u)·1{u>θ}`.
pub fn ignition_speed(theta: f64) -> Shot {
    shoot(theta, -1.0, &move |u: f64| if u > theta { u * (1.0 - u) } else { 0.0 })
}
