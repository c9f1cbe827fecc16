//! Trial-function families: smooth cutoffs, the piecewise log profile used by
//! the necessity experiments, near-extremal Hardy power profiles, and the
//! dilation/translation transforms.

mod profiles;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{dilate, GrushinSpace, Point};

pub use profiles::{BumpProfile, HardyExtremalProfile, LogFamilyProfile, StepProfile};

/// Regularity class of a trial field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    LipschitzPiecewise,
}

/// Behavior of a radial profile as ρ → 0, used by integrability pre-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginBehavior {
    /// Bounded near the origin (value tends to a constant).
    Plateau,
    /// Behaves like a constant multiple of ρ^e.
    Power(f64),
    /// Identically zero in a neighborhood of the origin.
    Vanishes,
}

/// A profile in the gauge variable ρ. Fields radial in ρ expose one of these,
/// which unlocks the separable 1-D integration path.
///
/// `log_abs_value` / `log_abs_deriv` take `u = ln ρ` and return `ln |·|`
/// (`-inf` where the profile vanishes); the defaults go through `exp`, and
/// power-law profiles override them so that steep exponents never overflow.
pub trait RadialProfile: Send + Sync {
    fn value(&self, rho: f64) -> f64;
    fn deriv(&self, rho: f64) -> f64;

    fn log_abs_value(&self, u: f64) -> f64 {
        self.value(u.exp()).abs().ln()
    }

    fn log_abs_deriv(&self, u: f64) -> f64 {
        self.deriv(u.exp()).abs().ln()
    }

    /// Outer radius of the support: value is exactly 0 for ρ ≥ this.
    fn support(&self) -> f64;

    fn value_origin_behavior(&self) -> OriginBehavior {
        OriginBehavior::Plateau
    }

    fn deriv_origin_behavior(&self) -> OriginBehavior {
        OriginBehavior::Vanishes
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }
}

type StFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type StGradFn = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;
type PointFn = dyn Fn(&Point) -> f64 + Send + Sync;

struct BiRadialData {
    f: Box<StFn>,
    /// Partials with respect to (s, t) = (|x|, |y|), if supplied.
    grad: Option<Box<StGradFn>>,
    support_radius: f64,
    smoothness: Smoothness,
}

struct GeneralData {
    f: Box<PointFn>,
    support_radius: f64,
}

struct TranslatedData {
    base: TrialField,
    x0: Vec<f64>,
    y0: Vec<f64>,
    lambda: f64,
    support_bound: f64,
}

enum FieldInner {
    Radial(Box<dyn RadialProfile>),
    BiRadial(BiRadialData),
    General(GeneralData),
    Scaled { c: f64, base: TrialField },
    Dilated { lambda: f64, base: TrialField },
    Translated(TranslatedData),
}

/// An evaluable scalar function on `R^{d+k}` with Grushin gradient access and
/// support metadata. Immutable after construction; cheap to clone.
#[derive(Clone)]
pub struct TrialField {
    space: GrushinSpace,
    inner: Arc<FieldInner>,
}

impl std::fmt::Debug for TrialField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrialField")
            .field("space", &self.space)
            .field("bi_radial", &self.bi_radial())
            .field("radial_in_rho", &self.is_radial())
            .field("support_radius", &self.support_radius())
            .finish()
    }
}

impl TrialField {
    fn new(space: GrushinSpace, inner: FieldInner) -> Self {
        Self { space, inner: Arc::new(inner) }
    }

    /// Wraps a radial profile u = f(ρ).
    pub fn from_radial_profile(space: GrushinSpace, profile: impl RadialProfile + 'static) -> Self {
        Self::new(space, FieldInner::Radial(Box::new(profile)))
    }

    /// Bi-radial field u(x,y) = f(|x|, |y|) with optional analytic
    /// (s,t)-partials; `support_radius` is a ρ-ball containing the support
    /// (evaluation is clamped to 0 outside it).
    pub fn from_st(
        space: GrushinSpace,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: Option<Box<StGradFn>>,
        support_radius: f64,
        smoothness: Smoothness,
    ) -> Self {
        Self::new(
            space,
            FieldInner::BiRadial(BiRadialData {
                f: Box::new(f),
                grad,
                support_radius,
                smoothness,
            }),
        )
    }

    /// General field from a closure on points. No analytic partials (the
    /// gradient falls back to finite differences) and no bi-radial claim.
    pub fn from_coordinates(
        space: GrushinSpace,
        f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            space,
            FieldInner::General(GeneralData { f: Box::new(f), support_radius: f64::INFINITY }),
        )
    }

    /// Indicator of the gauge ball `ρ < radius` (test integrand; piecewise).
    pub fn ball_indicator(space: GrushinSpace, radius: f64) -> Self {
        Self::from_radial_profile(space, StepProfile { radius })
    }

    /// The field multiplied by a constant.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.space, FieldInner::Scaled { c, base: self.clone() })
    }

    pub fn space(&self) -> &GrushinSpace {
        &self.space
    }

    /// ρ-radius of a ball containing the support (∞ if unbounded).
    pub fn support_radius(&self) -> f64 {
        match &*self.inner {
            FieldInner::Radial(p) => p.support(),
            FieldInner::BiRadial(b) => b.support_radius,
            FieldInner::General(g) => g.support_radius,
            FieldInner::Scaled { base, .. } => base.support_radius(),
            FieldInner::Dilated { lambda, base } => base.support_radius() / lambda,
            FieldInner::Translated(t) => t.support_bound,
        }
    }

    pub fn bi_radial(&self) -> bool {
        match &*self.inner {
            FieldInner::Radial(_) | FieldInner::BiRadial(_) => true,
            FieldInner::General(_) | FieldInner::Translated(_) => false,
            FieldInner::Scaled { base, .. } | FieldInner::Dilated { base, .. } => base.bi_radial(),
        }
    }

    /// True when the field depends on the point only through ρ.
    pub fn is_radial(&self) -> bool {
        match &*self.inner {
            FieldInner::Radial(_) => true,
            FieldInner::Scaled { base, .. } | FieldInner::Dilated { base, .. } => base.is_radial(),
            _ => false,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match &*self.inner {
            FieldInner::Radial(p) => p.smoothness(),
            FieldInner::BiRadial(b) => b.smoothness,
            FieldInner::General(_) => Smoothness::Smooth,
            FieldInner::Scaled { base, .. }
            | FieldInner::Dilated { base, .. } => base.smoothness(),
            FieldInner::Translated(t) => t.base.smoothness(),
        }
    }

    pub fn evaluate(&self, p: &Point) -> f64 {
        match &*self.inner {
            FieldInner::Radial(prof) => {
                prof.value(self.space.rho_st(p.x_norm(), p.y_norm()))
            }
            FieldInner::BiRadial(b) => {
                let (s, t) = (p.x_norm(), p.y_norm());
                if self.space.rho_st(s, t) > b.support_radius {
                    0.0
                } else {
                    (b.f)(s, t)
                }
            }
            FieldInner::General(g) => (g.f)(p),
            FieldInner::Scaled { c, base } => c * base.evaluate(p),
            FieldInner::Dilated { lambda, base } => {
                base.evaluate(&dilate(&self.space, *lambda, p).expect("lambda > 0 by construction"))
            }
            FieldInner::Translated(t) => {
                let shifted = t.shift_back(&self.space, p);
                t.base.evaluate(&shifted)
            }
        }
    }

    /// Analytic partial derivatives `(∂_x u, ∂_y u)` at `p` when the family
    /// supplies them; `None` requests the finite-difference fallback.
    pub fn partials(&self, p: &Point) -> Option<Result<Vec<f64>>> {
        match &*self.inner {
            FieldInner::Radial(prof) => {
                let r = self.space.rho_st(p.x_norm(), p.y_norm());
                if r == 0.0 {
                    return Some(Ok(vec![0.0; p.x.len() + p.y.len()]));
                }
                let fp = prof.deriv(r);
                Some(crate::geometry::rho_partials(&self.space, p).map(|g| {
                    g.into_iter().map(|v| fp * v).collect()
                }))
            }
            FieldInner::BiRadial(b) => {
                let grad = b.grad.as_ref()?;
                let (s, t) = (p.x_norm(), p.y_norm());
                if s == 0.0 || t == 0.0 {
                    return None;
                }
                let (fs, ft) = grad(s, t);
                let mut out = Vec::with_capacity(p.x.len() + p.y.len());
                out.extend(p.x.iter().map(|xi| fs * xi / s));
                out.extend(p.y.iter().map(|yj| ft * yj / t));
                Some(Ok(out))
            }
            FieldInner::General(_) => None,
            FieldInner::Scaled { c, base } => {
                let c = *c;
                base.partials(p)
                    .map(|r| r.map(|g| g.into_iter().map(|v| c * v).collect()))
            }
            FieldInner::Dilated { lambda, base } => {
                let q = dilate(&self.space, *lambda, p).expect("lambda > 0 by construction");
                let lam = *lambda;
                let ly = lam.powf(1.0 + self.space.mu());
                let d = p.x.len();
                base.partials(&q).map(|r| {
                    r.map(|g| {
                        g.into_iter()
                            .enumerate()
                            .map(|(i, v)| if i < d { lam * v } else { ly * v })
                            .collect()
                    })
                })
            }
            FieldInner::Translated(t) => {
                let shifted = t.shift_back(&self.space, p);
                t.base.partials(&shifted)
            }
        }
    }

    /// Value as a function of the block norms (s, t); requires bi-radiality.
    pub fn eval_st(&self, s: f64, t: f64) -> Result<f64> {
        match &*self.inner {
            FieldInner::Radial(prof) => Ok(prof.value(self.space.rho_st(s, t))),
            FieldInner::BiRadial(b) => {
                if self.space.rho_st(s, t) > b.support_radius {
                    Ok(0.0)
                } else {
                    Ok((b.f)(s, t))
                }
            }
            FieldInner::Scaled { c, base } => Ok(c * base.eval_st(s, t)?),
            FieldInner::Dilated { lambda, base } => {
                base.eval_st(lambda * s, lambda.powf(1.0 + self.space.mu()) * t)
            }
            _ => Err(Error::NotBiRadial),
        }
    }

    /// `|∇_μ u|` as a function of the block norms; requires bi-radiality.
    /// Falls back to central differences in (s, t) when no analytic partials
    /// are supplied.
    pub fn grad_norm_st(&self, s: f64, t: f64) -> Result<f64> {
        let mu = self.space.mu();
        match &*self.inner {
            FieldInner::Radial(prof) => {
                let r = self.space.rho_st(s, t);
                if r == 0.0 {
                    return Ok(0.0);
                }
                Ok(prof.deriv(r).abs() * (s / r).powf(mu))
            }
            FieldInner::BiRadial(b) => {
                let (fs, ft) = match &b.grad {
                    Some(g) => g(s, t),
                    None => {
                        let h = 1e-5 * s.abs().max(t.abs()).max(1.0);
                        let fs = ((b.f)(s + h, t) - (b.f)(s - h, t)) / (2.0 * h);
                        let ft = ((b.f)(s, t + h) - (b.f)(s, t - h)) / (2.0 * h);
                        (fs, ft)
                    }
                };
                Ok((fs * fs + s.powf(2.0 * mu) * ft * ft).sqrt())
            }
            FieldInner::Scaled { c, base } => Ok(c.abs() * base.grad_norm_st(s, t)?),
            FieldInner::Dilated { lambda, base } => {
                let v = base.grad_norm_st(lambda * s, lambda.powf(1.0 + mu) * t)?;
                Ok(lambda * v)
            }
            _ => Err(Error::NotBiRadial),
        }
    }

    // --- radial fast-path accessors (valid when is_radial()) ---

    pub(crate) fn radial_value(&self, rho: f64) -> f64 {
        match &*self.inner {
            FieldInner::Radial(p) => p.value(rho),
            FieldInner::Scaled { c, base } => c * base.radial_value(rho),
            FieldInner::Dilated { lambda, base } => base.radial_value(lambda * rho),
            _ => unreachable!("radial_value on non-radial field"),
        }
    }

    pub(crate) fn radial_deriv(&self, rho: f64) -> f64 {
        match &*self.inner {
            FieldInner::Radial(p) => p.deriv(rho),
            FieldInner::Scaled { c, base } => c * base.radial_deriv(rho),
            FieldInner::Dilated { lambda, base } => lambda * base.radial_deriv(lambda * rho),
            _ => unreachable!("radial_deriv on non-radial field"),
        }
    }

    /// ln |u(e^u)| along the log-radius axis.
    pub(crate) fn radial_log_abs_value(&self, u: f64) -> f64 {
        match &*self.inner {
            FieldInner::Radial(p) => p.log_abs_value(u),
            FieldInner::Scaled { c, base } => c.abs().ln() + base.radial_log_abs_value(u),
            FieldInner::Dilated { lambda, base } => base.radial_log_abs_value(u + lambda.ln()),
            _ => unreachable!("radial_log_abs_value on non-radial field"),
        }
    }

    pub(crate) fn radial_log_abs_deriv(&self, u: f64) -> f64 {
        match &*self.inner {
            FieldInner::Radial(p) => p.log_abs_deriv(u),
            FieldInner::Scaled { c, base } => c.abs().ln() + base.radial_log_abs_deriv(u),
            FieldInner::Dilated { lambda, base } => {
                lambda.ln() + base.radial_log_abs_deriv(u + lambda.ln())
            }
            _ => unreachable!("radial_log_abs_deriv on non-radial field"),
        }
    }

    pub(crate) fn value_origin_behavior(&self) -> OriginBehavior {
        match &*self.inner {
            FieldInner::Radial(p) => p.value_origin_behavior(),
            FieldInner::Scaled { base, .. } | FieldInner::Dilated { base, .. } => {
                base.value_origin_behavior()
            }
            _ => OriginBehavior::Plateau,
        }
    }

    pub(crate) fn deriv_origin_behavior(&self) -> OriginBehavior {
        match &*self.inner {
            FieldInner::Radial(p) => p.deriv_origin_behavior(),
            FieldInner::Scaled { base, .. } | FieldInner::Dilated { base, .. } => {
                base.deriv_origin_behavior()
            }
            _ => OriginBehavior::Plateau,
        }
    }
}

impl TranslatedData {
    fn shift_back(&self, space: &GrushinSpace, p: &Point) -> Point {
        let ly = self.lambda.powf(1.0 + space.mu());
        Point {
            x: p.x.iter().zip(&self.x0).map(|(a, b)| a - self.lambda * b).collect(),
            y: p.y.iter().zip(&self.y0).map(|(a, b)| a - ly * b).collect(),
        }
    }
}

/// Smooth, bi-radial cutoff equal to 1 for ρ ≤ `r_inner` and 0 for
/// ρ ≥ `r_outer`, built from the standard `exp(-1/t)` mollifier profile
/// composed with ρ.
pub fn make_bump(space: &GrushinSpace, r_inner: f64, r_outer: f64) -> Result<TrialField> {
    let profile = BumpProfile::new(r_inner, r_outer)?;
    Ok(TrialField::from_radial_profile(*space, profile))
}

/// The piecewise necessity profile: 0 for ρ ≥ 1, `ρ^{-γ-Q/r} log(1/ρ)` for
/// ε ≤ ρ ≤ 1, and the constant `ε^{-γ-Q/r} log(1/ε)` for ρ ≤ ε.
/// Value-continuous; the gradient is supplied analytically on each piece.
pub fn make_log_family(space: &GrushinSpace, eps: f64, gamma: f64, r: f64) -> Result<TrialField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let exponent = gamma + space.q() / r;
    Ok(TrialField::from_radial_profile(*space, LogFamilyProfile::new(eps, exponent)))
}

/// Near-extremal Hardy profile `ρ^{-(Q-p+αp)/p + eps_shift}` inside the unit
/// ball, smoothly cut to 0 by ρ = 2. The Hardy ratio of this family climbs
/// toward the explicit constant as `eps_shift` shrinks.
pub fn make_hardy_extremal(
    space: &GrushinSpace,
    p: f64,
    alpha: f64,
    eps_shift: f64,
) -> Result<TrialField> {
    let denom = space.q() - p + alpha * p;
    if denom <= 0.0 {
        return Err(Error::ConstantInapplicable(denom));
    }
    if !(eps_shift > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_shift must be positive, got {eps_shift}"
        )));
    }
    let exponent = -denom / p + eps_shift;
    // The profile must stay integrable against the Hardy weights near the
    // origin: the p-th power of ρ^exponent against ρ^{αp-p} needs
    // exponent·p + αp - p + Q > 0, which eps_shift > 0 guarantees:
    // exponent·p + αp - p + Q = p·eps_shift.
    let cut = BumpProfile::new(1.0, 2.0)?;
    Ok(TrialField::from_radial_profile(*space, HardyExtremalProfile::new(exponent, cut)))
}

/// `u ∘ δ_λ`; the support radius scales by 1/λ and the gradient obeys the
/// degree-one chain rule.
pub fn dilate_field(u: &TrialField, lambda: f64) -> Result<TrialField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    Ok(TrialField::new(*u.space(), FieldInner::Dilated { lambda, base: u.clone() }))
}

/// The translated field `u((x,y) - δ_λ(x₀,y₀))`. Requires `x₀ ≠ 0` and a
/// compactly supported base; the result is not bi-radial, so it is integrated
/// only through the analytic bookkeeping path or full-dimension Monte Carlo.
pub fn translate_field(
    u: &TrialField,
    x0: &[f64],
    y0: &[f64],
    lambda: f64,
) -> Result<TrialField> {
    let space = *u.space();
    if x0.len() != space.d() as usize || y0.len() != space.k() as usize {
        return Err(Error::DimensionMismatch {
            expected_x: space.d() as usize,
            expected_y: space.k() as usize,
            got_x: x0.len(),
            got_y: y0.len(),
        });
    }
    let x0n = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if x0n == 0.0 {
        return Err(Error::InvalidParameter("translation requires x0 != 0".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let r = u.support_radius();
    if !r.is_finite() {
        return Err(Error::UnboundedSupport);
    }
    // Coordinate bound on ρ over the shifted support: |x| <= λ|x0| + R and
    // |y| <= λ^{1+μ}|y0| + R^{1+μ}/(1+μ).
    let mu = space.mu();
    let y0n = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ly = lambda.powf(1.0 + mu);
    let smax = lambda * x0n + r;
    let tmax = ly * y0n + r.powf(1.0 + mu) / (1.0 + mu);
    let support_bound = space.rho_st(smax, tmax);
    Ok(TrialField::new(
        space,
        FieldInner::Translated(TranslatedData {
            base: u.clone(),
            x0: x0.to_vec(),
            y0: y0.to_vec(),
            lambda,
            support_bound,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{grushin_gradient, rho};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn space111() -> GrushinSpace {
        GrushinSpace::new(1, 1, 1.0).unwrap()
    }

    fn sample_point(rng: &mut ChaCha8Rng, space: &GrushinSpace, lo: f64, hi: f64) -> Point {
        loop {
            let x: Vec<f64> = (0..space.d()).map(|_| rng.gen_range(-hi..hi)).collect();
            let y: Vec<f64> = (0..space.k()).map(|_| rng.gen_range(-hi..hi)).collect();
            let p = Point::new(x, y);
            if p.x_norm() > lo {
                return p;
            }
        }
    }

    #[test]
    fn bump_plateau_and_support() {
        let s = space111();
        let u = make_bump(&s, 1.0, 2.0).unwrap();
        // on the plateau
        assert_eq!(u.radial_value(0.5), 1.0);
        assert_eq!(u.radial_value(0.0), 1.0);
        // outside the support
        assert_eq!(u.radial_value(4.0), 0.0);
        assert_eq!(u.support_radius(), 2.0);
        // strictly between 0 and 1, monotone on the transition
        let mut prev = 1.0;
        for i in 1..40 {
            let r = 1.0 + 0.025 * f64::from(i);
            let v = u.radial_value(r);
            assert!(v > 0.0 && v < 1.0, "v({r}) = {v}");
            assert!(v <= prev);
            prev = v;
        }
        assert!(make_bump(&s, 2.0, 1.0).is_err());
        assert!(make_bump(&s, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_family_branch_values() {
        let s = space111();
        // Q = 3, gamma = 0, r = 3 => exponent 1
        let eps = 1e-4;
        let u = make_log_family(&s, eps, 0.0, 3.0).unwrap();
        let cap = eps.powf(-1.0) * (1.0 / eps).ln();
        assert_relative_eq!(u.radial_value(eps / 2.0), cap, max_relative = 1e-14);
        assert_relative_eq!(u.radial_value(eps), cap, max_relative = 1e-12);
        // middle-branch hand value at rho = sqrt(eps) = 0.01
        assert_relative_eq!(
            u.radial_value(0.01),
            100.0 * (100.0f64).ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(u.radial_value(0.01), 460.5170185988091, max_relative = 1e-12);
        // zero at and beyond rho = 1
        assert_eq!(u.radial_value(1.0), 0.0);
        assert_eq!(u.radial_value(1.5), 0.0);
        assert!(make_log_family(&s, 0.0, 0.0, 3.0).is_err());
        assert!(make_log_family(&s, 1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn hardy_extremal_inner_exponent() {
        let s = space111();
        let u = make_hardy_extremal(&s, 2.0, 0.0, 0.25).unwrap();
        // inner exponent -(Q-p)/p + 0.25 = -0.25
        let r1 = 0.3;
        let r2 = 0.6;
        let got = (u.radial_value(r2) / u.radial_value(r1)).ln() / (r2 / r1).ln();
        assert_relative_eq!(got, -0.25, max_relative = 1e-12);
        // inapplicable regime: Q - p + alpha p = 0
        assert!(make_hardy_extremal(&s, 2.0, -0.5, 0.1).is_err());
    }

    #[test]
    fn hardy_extremal_degenerate_exponent_is_plateau() {
        let s = space111();
        // eps_shift = (Q-p)/p makes the exponent 0: constant 1 inside B1.
        let u = make_hardy_extremal(&s, 2.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(u.radial_value(0.2), 1.0, max_relative = 1e-14);
        assert_relative_eq!(u.radial_value(0.9), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn dilate_field_matches_pointwise_composition() {
        let s = space111();
        let u = make_bump(&s, 1.0, 2.0).unwrap();
        let ul = dilate_field(&u, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = sample_point(&mut rng, &s, 0.0, 2.5);
            assert_eq!(ul.evaluate(&p), u.evaluate(&p));
        }
        let ul = dilate_field(&u, 3.0).unwrap();
        for _ in 0..50 {
            let p = sample_point(&mut rng, &s, 0.0, 1.0);
            let q = dilate(&s, 3.0, &p).unwrap();
            assert_eq!(ul.evaluate(&p), u.evaluate(&q));
        }
        // support scales by 1/lambda
        assert_relative_eq!(ul.support_radius(), 2.0 / 3.0, max_relative = 1e-15);
        assert!(dilate_field(&u, 0.0).is_err());
    }

    #[test]
    fn gradient_consistency_analytic_vs_fd() {
        // Analytic partials match the finite-difference fallback away from
        // the log family's interface spheres and {x = 0}.
        let spaces = [space111(), GrushinSpace::new(2, 3, 0.5).unwrap()];
        for space in spaces {
            let fields: Vec<(&str, TrialField)> = vec![
                ("bump", make_bump(&space, 1.0, 2.0).unwrap()),
                ("log", make_log_family(&space, 1e-2, 0.5, 3.0).unwrap()),
                ("hardy", make_hardy_extremal(&space, 2.0, 0.0, 0.3).unwrap()),
                ("dilated bump", dilate_field(&make_bump(&space, 1.0, 2.0).unwrap(), 0.7).unwrap()),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for (name, u) in &fields {
                let bare = {
                    let u = u.clone();
                    TrialField::from_coordinates(space, move |p: &Point| u.evaluate(p))
                };
                let mut checked = 0;
                while checked < 200 {
                    let p = sample_point(&mut rng, &space, 0.15, 1.8);
                    let r = rho(&space, &p).unwrap();
                    // stay inside the support and off the log interfaces
                    if r > 0.95 * u.support_radius() || r < 0.05 {
                        continue;
                    }
                    if *name == "log" && (r - 1e-2).abs() < 5e-3 {
                        continue;
                    }
                    let ana = grushin_gradient(&space, u, &p).unwrap();
                    let fd = grushin_gradient(&space, &bare, &p).unwrap();
                    let na = ana.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let nf = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let scale = na.max(nf).max(1e-8);
                    for (a, b) in ana.iter().zip(fd.iter()) {
                        assert!(
                            (a - b).abs() <= 1e-6 * scale,
                            "{name}: analytic {a} vs fd {b} at rho={r}"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn support_honesty_sampled() {
        let s = GrushinSpace::new(2, 1, 0.8).unwrap();
        let fields = [
            make_bump(&s, 0.5, 1.5).unwrap(),
            make_log_family(&s, 0.1, 0.0, 2.0).unwrap(),
            make_hardy_extremal(&s, 2.0, 0.1, 0.2).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for u in &fields {
            let rs = u.support_radius();
            for _ in 0..200 {
                let p = sample_point(&mut rng, &s, 0.0, 4.0);
                if rho(&s, &p).unwrap() > rs {
                    assert_eq!(u.evaluate(&p), 0.0);
                }
            }
        }
    }

    #[test]
    fn bi_radial_fields_depend_only_on_block_norms() {
        let s = GrushinSpace::new(2, 2, 1.5).unwrap();
        let u = make_bump(&s, 0.8, 1.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let p = sample_point(&mut rng, &s, 0.0, 1.5);
            let (sn, tn) = (p.x_norm(), p.y_norm());
            // rotate blocks: (s,0) and (0,t) has the same block norms
            let q = Point::new(vec![sn, 0.0], vec![0.0, tn]);
            assert_relative_eq!(u.evaluate(&p), u.evaluate(&q), max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn translated_field_support_containment() {
        let s = space111();
        let u = make_bump(&s, 0.5, 1.0).unwrap();
        let x0 = [1.0];
        let y0 = [0.5];
        for lambda in [8.0, 32.0, 128.0] {
            let ul = translate_field(&u, &x0, &y0, lambda).unwrap();
            let rho0 = rho(&s, &Point::new(x0.to_vec(), y0.to_vec())).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            // sample points inside the base support, push them through the shift
            for _ in 0..200 {
                let p = sample_point(&mut rng, &s, 0.0, 1.0);
                if rho(&s, &p).unwrap() >= 1.0 {
                    continue;
                }
                let shifted = Point::new(
                    vec![p.x[0] + lambda * x0[0]],
                    vec![p.y[0] + lambda * lambda * y0[0]],
                );
                assert!(ul.evaluate(&shifted) == u.evaluate(&p));
                let r = rho(&s, &shifted).unwrap();
                // ρ on the shifted support stays within an additive band of λρ0
                assert!(
                    (r - lambda * rho0).abs() < 2.0,
                    "rho {r} vs lambda*rho0 {}",
                    lambda * rho0
                );
            }
        }
        assert!(translate_field(&u, &[0.0], &[1.0], 4.0).is_err());
    }

    #[test]
    fn scaled_field_scales_values_and_gradient() {
        let s = space111();
        let u = make_bump(&s, 1.0, 2.0).unwrap();
        let v = u.scaled(-2.5);
        let p = Point::new(vec![0.9], vec![0.8]);
        assert_relative_eq!(v.evaluate(&p), -2.5 * u.evaluate(&p), max_relative = 1e-15);
        assert_relative_eq!(
            v.grad_norm_st(0.9, 0.8).unwrap(),
            2.5 * u.grad_norm_st(0.9, 0.8).unwrap(),
            max_relative = 1e-15
        );
    }
}
