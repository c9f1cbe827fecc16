//! Concrete radial profiles behind the named trial families.

use crate::error::{Error, Result};

use super::{OriginBehavior, RadialProfile, Smoothness};

/// `exp(-1/t)` for t > 0, else 0.
fn mollifier(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn mollifier_deriv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// Rising smoothstep on [0,1] built from the mollifier:
/// `S(x) = g(x) / (g(x) + g(1-x))`, S(0)=0, S(1)=1.
fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = mollifier(x);
    let b = mollifier(1.0 - x);
    a / (a + b)
}

fn smoothstep_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let a = mollifier(x);
    let b = mollifier(1.0 - x);
    let da = mollifier_deriv(x);
    let db = mollifier_deriv(1.0 - x);
    let sum = a + b;
    (da * b + a * db) / (sum * sum)
}

/// Smooth cutoff: 1 for ρ ≤ r_inner, 0 for ρ ≥ r_outer, nonincreasing.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    r_inner: f64,
    r_outer: f64,
}

impl BumpProfile {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0 && r_outer > r_inner) {
            return Err(Error::InvalidParameter(format!(
                "bump requires 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
            )));
        }
        Ok(Self { r_inner, r_outer })
    }

    fn width(&self) -> f64 {
        self.r_outer - self.r_inner
    }
}

impl RadialProfile for BumpProfile {
    fn value(&self, rho: f64) -> f64 {
        smoothstep((self.r_outer - rho) / self.width())
    }

    fn deriv(&self, rho: f64) -> f64 {
        -smoothstep_deriv((self.r_outer - rho) / self.width()) / self.width()
    }

    fn support(&self) -> f64 {
        self.r_outer
    }
}

/// The necessity-proof profile:
/// 0 for ρ ≥ 1; `ρ^{-e} log(1/ρ)` for ε ≤ ρ ≤ 1; constant `ε^{-e} log(1/ε)`
/// for ρ ≤ ε, where `e = γ + Q/r`.
#[derive(Debug, Clone)]
pub struct LogFamilyProfile {
    eps: f64,
    exponent: f64,
    cap: f64,
    ln_eps: f64,
}

impl LogFamilyProfile {
    pub fn new(eps: f64, exponent: f64) -> Self {
        let cap = eps.powf(-exponent) * (1.0 / eps).ln();
        Self { eps, exponent, cap, ln_eps: eps.ln() }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl RadialProfile for LogFamilyProfile {
    fn value(&self, rho: f64) -> f64 {
        if rho >= 1.0 {
            0.0
        } else if rho <= self.eps {
            self.cap
        } else {
            rho.powf(-self.exponent) * (1.0 / rho).ln()
        }
    }

    fn deriv(&self, rho: f64) -> f64 {
        if rho >= 1.0 || rho <= self.eps {
            0.0
        } else {
            // d/dρ [ρ^{-e} log(1/ρ)] = -ρ^{-e-1} (e·log(1/ρ) + 1)
            -rho.powf(-self.exponent - 1.0) * (self.exponent * (1.0 / rho).ln() + 1.0)
        }
    }

    fn log_abs_value(&self, u: f64) -> f64 {
        if u >= 0.0 {
            f64::NEG_INFINITY
        } else if u <= self.ln_eps {
            self.cap.ln()
        } else {
            -self.exponent * u + (-u).ln()
        }
    }

    fn log_abs_deriv(&self, u: f64) -> f64 {
        if u >= 0.0 || u <= self.ln_eps {
            f64::NEG_INFINITY
        } else {
            (-self.exponent - 1.0) * u + (self.exponent * (-u) + 1.0).abs().ln()
        }
    }

    fn support(&self) -> f64 {
        1.0
    }

    fn deriv_origin_behavior(&self) -> OriginBehavior {
        OriginBehavior::Vanishes
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::LipschitzPiecewise
    }
}

/// Near-extremal Hardy profile `ρ^e` for ρ ≤ 1, bridged to 0 on [1, 2] by a
/// smooth cutoff.
#[derive(Debug, Clone)]
pub struct HardyExtremalProfile {
    exponent: f64,
    cut: BumpProfile,
}

impl HardyExtremalProfile {
    pub fn new(exponent: f64, cut: BumpProfile) -> Self {
        Self { exponent, cut }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

impl RadialProfile for HardyExtremalProfile {
    fn value(&self, rho: f64) -> f64 {
        if rho >= self.cut.support() {
            0.0
        } else {
            rho.powf(self.exponent) * self.cut.value(rho)
        }
    }

    fn deriv(&self, rho: f64) -> f64 {
        if rho >= self.cut.support() {
            0.0
        } else {
            rho.powf(self.exponent - 1.0)
                * (self.exponent * self.cut.value(rho) + rho * self.cut.deriv(rho))
        }
    }

    fn log_abs_value(&self, u: f64) -> f64 {
        // ρ = e^u may underflow to 0, where the cutoff is 1 and ln(cut) = 0.
        let rho = u.exp();
        if rho >= self.cut.support() {
            f64::NEG_INFINITY
        } else {
            self.exponent * u + self.cut.value(rho).ln()
        }
    }

    fn log_abs_deriv(&self, u: f64) -> f64 {
        let rho = u.exp();
        if rho >= self.cut.support() {
            f64::NEG_INFINITY
        } else {
            let inner = self.exponent * self.cut.value(rho) + rho * self.cut.deriv(rho);
            (self.exponent - 1.0) * u + inner.abs().ln()
        }
    }

    fn support(&self) -> f64 {
        self.cut.support()
    }

    fn value_origin_behavior(&self) -> OriginBehavior {
        if self.exponent == 0.0 {
            OriginBehavior::Plateau
        } else {
            OriginBehavior::Power(self.exponent)
        }
    }

    fn deriv_origin_behavior(&self) -> OriginBehavior {
        if self.exponent == 0.0 {
            // plateau inside B1: the derivative lives on the bridge only
            OriginBehavior::Vanishes
        } else {
            OriginBehavior::Power(self.exponent - 1.0)
        }
    }
}

/// Indicator of the gauge ball ρ < radius (integration test profile).
#[derive(Debug, Clone)]
pub struct StepProfile {
    pub radius: f64,
}

impl RadialProfile for StepProfile {
    fn value(&self, rho: f64) -> f64 {
        if rho < self.radius {
            1.0
        } else {
            0.0
        }
    }

    fn deriv(&self, _rho: f64) -> f64 {
        0.0
    }

    fn support(&self) -> f64 {
        self.radius
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::LipschitzPiecewise
    }
}
