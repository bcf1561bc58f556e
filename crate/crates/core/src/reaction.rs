//! Reaction nonlinearities: ignition, KPP and smooth cutoffs of KPP.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Which family a reaction belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReactionKind {
    Ignition,
    Kpp,
    Cutoff { theta_prime: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    /// `u(1−u)` for `u > θ`, zero below: a jump at `θ`.
    IgnitionJump { theta: f64 },
    /// `(u−θ)₊(1−u)`, continuous at `θ`.
    IgnitionRamp { theta: f64 },
    /// `r·u(1−u)`.
    KppLogistic { rate: f64 },
    /// `r·u(1−u²)`.
    KppCubic { rate: f64 },
    /// `f(u)·χ(u/θ')` for a KPP parent `f`.
    Cutoff { parent: Box<Reaction>, theta_prime: f64 },
}

/// A nonlinearity `f: [0,1] → [0,∞)`, extended by zero outside `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    form: Form,
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(invalid("ignition temperature must lie in (0, 1)"))
    }
}

/// `g(s) = exp(−1/s)` for `s > 0`, zero otherwise.
fn bump_primitive(s: f64) -> f64 {
    if s > 0.0 {
        libm::exp(-1.0 / s)
    } else {
        0.0
    }
}

fn bump_primitive_derivative(s: f64) -> f64 {
    if s > 0.0 {
        libm::exp(-1.0 / s) / (s * s)
    } else {
        0.0
    }
}

/// Smooth switch: zero on `(−∞, 1]`, one on `[2, ∞)`, non-decreasing.
pub fn switch(v: f64) -> f64 {
    let a = bump_primitive(v - 1.0);
    let b = bump_primitive(2.0 - v);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Derivative of [`switch`].
pub fn switch_derivative(v: f64) -> f64 {
    let a = bump_primitive(v - 1.0);
    let b = bump_primitive(2.0 - v);
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let da = bump_primitive_derivative(v - 1.0);
    let db = -bump_primitive_derivative(2.0 - v);
    (da * b - a * db) / ((a + b) * (a + b))
}

impl Reaction {
    /// Ignition reaction `u(1−u)·1{u>θ}`.
    pub fn ignition(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            form: Form::IgnitionJump { theta },
        })
    }

    /// Continuous ignition reaction `(u−θ)₊(1−u)`.
    pub fn ignition_ramp(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            form: Form::IgnitionRamp { theta },
        })
    }

    /// KPP reaction `r·u(1−u)` with `f'(0) = r`.
    pub fn kpp(fprime0: f64) -> Result<Self> {
        if !(fprime0 > 0.0 && fprime0.is_finite()) {
            return Err(invalid("f'(0) must be positive"));
        }
        Ok(Self {
            form: Form::KppLogistic { rate: fprime0 },
        })
    }

    /// KPP reaction `r·u(1−u²)` with `f'(0) = r`.
    pub fn kpp_cubic(fprime0: f64) -> Result<Self> {
        if !(fprime0 > 0.0 && fprime0.is_finite()) {
            return Err(invalid("f'(0) must be positive"));
        }
        Ok(Self {
            form: Form::KppCubic { rate: fprime0 },
        })
    }

    pub fn kind(&self) -> ReactionKind {
        match &self.form {
            Form::IgnitionJump { .. } | Form::IgnitionRamp { .. } => ReactionKind::Ignition,
            Form::KppLogistic { .. } | Form::KppCubic { .. } => ReactionKind::Kpp,
            Form::Cutoff { theta_prime, .. } => ReactionKind::Cutoff {
                theta_prime: *theta_prime,
            },
        }
    }

    /// Ignition temperature: `f = 0` on `[0, θ]`.
    pub fn theta(&self) -> f64 {
        match &self.form {
            Form::IgnitionJump { theta } | Form::IgnitionRamp { theta } => *theta,
            Form::KppLogistic { .. } | Form::KppCubic { .. } => 0.0,
            Form::Cutoff { theta_prime, .. } => *theta_prime,
        }
    }

    /// `f'(0)`; zero for reactions with positive ignition temperature.
    pub fn fprime0(&self) -> f64 {
        match &self.form {
            Form::KppLogistic { rate } | Form::KppCubic { rate } => *rate,
            _ => 0.0,
        }
    }

    /// The KPP reaction a cutoff was built from.
    pub fn parent(&self) -> Option<&Reaction> {
        match &self.form {
            Form::Cutoff { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// True if `f` is discontinuous somewhere in `[0, 1]`.
    pub fn has_jump(&self) -> bool {
        matches!(self.form, Form::IgnitionJump { .. })
    }

    /// Bound on `|f'|` away from jumps (sampled for cutoffs).
    pub fn lipschitz(&self) -> f64 {
        match &self.form {
            Form::IgnitionJump { .. } => 1.0,
            Form::IgnitionRamp { theta } => 1.0 - theta,
            Form::KppLogistic { rate } => *rate,
            Form::KppCubic { rate } => 2.0 * rate,
            Form::Cutoff { .. } => (0..=4000)
                .map(|k| self.derivative(k as f64 / 4000.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `f(u)`, zero outside `[0, 1]`.
    pub fn value(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        match &self.form {
            Form::IgnitionJump { theta } => {
                if u > *theta {
                    u * (1.0 - u)
                } else {
                    0.0
                }
            }
            Form::IgnitionRamp { theta } => (u - theta).max(0.0) * (1.0 - u),
            Form::KppLogistic { rate } => rate * u * (1.0 - u),
            Form::KppCubic { rate } => rate * u * (1.0 - u * u),
            Form::Cutoff {
                parent,
                theta_prime,
            } => parent.value(u) * switch(u / theta_prime),
        }
    }

    /// `f'(u)` on the smooth pieces; zero outside `(0, 1)`.
    pub fn derivative(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        match &self.form {
            Form::IgnitionJump { theta } => {
                if u > *theta {
                    1.0 - 2.0 * u
                } else {
                    0.0
                }
            }
            Form::IgnitionRamp { theta } => {
                if u > *theta {
                    1.0 + theta - 2.0 * u
                } else {
                    0.0
                }
            }
            Form::KppLogistic { rate } => rate * (1.0 - 2.0 * u),
            Form::KppCubic { rate } => rate * (1.0 - 3.0 * u * u),
            Form::Cutoff {
                parent,
                theta_prime,
            } => {
                let v = u / theta_prime;
                parent.derivative(u) * switch(v)
                    + parent.value(u) * switch_derivative(v) / theta_prime
            }
        }
    }

    /// Points of `[0, 1]` where `f` or `f'` is not smooth, plus points that
    /// split steep smooth regions for quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = alloc::vec![0.0, 1.0];
        match &self.form {
            Form::IgnitionJump { theta } | Form::IgnitionRamp { theta } => b.push(*theta),
            Form::Cutoff { theta_prime, .. } => {
                for s in [1.0, 1.125, 1.25, 1.375, 1.5, 1.625, 1.75, 1.875, 2.0] {
                    b.push(s * theta_prime);
                }
            }
            _ => {}
        }
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b
    }

    fn integral_smooth(&self, lo: f64, hi: f64) -> f64 {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        GL_NODES
            .iter()
            .zip(&GL_WEIGHTS)
            .map(|(x, w)| w * self.value(c + h * x))
            .sum::<f64>()
            * h
    }

    /// `∫_lo^hi f` for `lo ≤ hi`, split at breakpoints.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut s = 0.0;
        let mut left = lo;
        for b in self.breakpoints() {
            if b > left && b < hi {
                s += self.integral_smooth(left, b);
                left = b;
            }
        }
        s + self.integral_smooth(left, hi)
    }

    /// Mean of `f` along the segment from `a` to `b`, with its partial
    /// derivatives in `a` and `b`.
    pub fn segment_average(&self, a: f64, b: f64) -> (f64, f64, f64) {
        let len = b - a;
        if len.abs() <= 1e-13 {
            let m = 0.5 * (a + b);
            let d = 0.5 * self.derivative(m);
            return (self.value(m), d, d);
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let avg = self.integral(lo, hi) / (hi - lo);
        let crosses = self.breakpoints().iter().any(|&p| p > lo && p < hi);
        if crosses {
            let da = (avg - self.value(a)) / len;
            let db = (self.value(b) - avg) / len;
            (avg, da, db)
        } else {
            let (mut da, mut db) = (0.0, 0.0);
            for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                let s = 0.5 * (1.0 + x);
                let d = 0.5 * w * self.derivative(a + s * len);
                da += (1.0 - s) * d;
                db += s * d;
            }
            (avg, da, db)
        }
    }

    /// Checks the sign pattern `f = 0` on `[0, θ] ∪ {1}`, `f > 0` on `(θ, 1)`
    /// and, for KPP, `f(u) ≤ f'(0)·u`, on 1000 sample points.
    pub fn validate(&self) -> Result<()> {
        let theta = self.theta();
        if self.value(1.0) != 0.0 {
            return Err(Error::Check("f(1) != 0".into()));
        }
        for k in 0..1000 {
            let u = k as f64 / 999.0;
            let f = self.value(u);
            if !f.is_finite() {
                return Err(Error::Check(alloc::format!("f({u}) is not finite")));
            }
            if u <= theta && f != 0.0 {
                return Err(Error::Check(alloc::format!("f({u}) = {f} below θ")));
            }
            if u > theta && u < 1.0 && f <= 0.0 {
                // Cutoff reactions are only positive past θ' (flat start of χ).
                let flat = matches!(self.form, Form::Cutoff { .. }) && switch(u / theta) == 0.0;
                if !flat {
                    return Err(Error::Check(alloc::format!("f({u}) = {f} not positive")));
                }
            }
            if self.kind() == ReactionKind::Kpp && f > self.fprime0() * u * (1.0 + 1e-14) {
                return Err(Error::Check(alloc::format!("f({u}) exceeds f'(0)·u")));
            }
        }
        Ok(())
    }
}

/// Smooth cutoff `f_θ'(u) = f(u)·χ(u/θ')` of a KPP reaction.
pub fn make_cutoff(parent: &Reaction, theta_prime: f64) -> Result<Reaction> {
    if !(theta_prime > 0.0 && theta_prime <= 0.25) {
        return Err(invalid("cutoff level θ' must lie in (0, 1/4]"));
    }
    if parent.kind() != ReactionKind::Kpp {
        return Err(invalid("cutoffs are built from KPP reactions"));
    }
    Ok(Reaction {
        form: Form::Cutoff {
            parent: Box::new(parent.clone()),
            theta_prime,
        },
    })
}
