//! Numerical integration of weighted bi-radial integrands over `R^{d+k}`.
//!
//! Two independent deterministic routes are provided: a reduced Cartesian
//! route over the block norms `(s, t) = (|x|, |y|)` and a polar route in the
//! gauge coordinates `(ρ, θ)`, whose Jacobian is derived from the explicit
//! substitution `s = ρ (sin θ)^{1/(1+μ)}`, `(1+μ) t = ρ^{1+μ} cos θ`. A
//! seeded Monte-Carlo oracle cross-validates both. Weight powers are
//! composed in log space, so steep exponents survive far below the normal
//! f64 range.

pub mod adaptive;
mod gauss;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::TrialField;
use crate::fit::fit_line;
use crate::geometry::{GrushinSpace, Point};
use crate::params::Region;

pub use adaptive::AdaptiveConfig;

/// Which factor of the field enters the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTerm {
    /// |u|
    Value,
    /// |∇_μ u|
    GradNorm,
}

/// A monomial weight times a power of the field:
/// `(|x|^μ/ρ^μ)^{a_weight} · ρ^{rho_weight} · |term|^{power}`.
///
/// With `power = 0` the field only delimits the domain (its open support).
#[derive(Clone, Copy)]
pub struct WeightedIntegrand<'a> {
    pub a_weight: f64,
    pub rho_weight: f64,
    pub field: &'a TrialField,
    pub term: FieldTerm,
    pub power: f64,
}

impl<'a> WeightedIntegrand<'a> {
    pub fn new(
        a_weight: f64,
        rho_weight: f64,
        field: &'a TrialField,
        term: FieldTerm,
        power: f64,
    ) -> Self {
        Self { a_weight, rho_weight, field, term, power }
    }

    /// Pure weight over the open support of `field`.
    pub fn pure_weight(a_weight: f64, rho_weight: f64, field: &'a TrialField) -> Self {
        Self { a_weight, rho_weight, field, term: FieldTerm::Value, power: 0.0 }
    }

    pub fn bi_radial(&self) -> bool {
        self.field.bi_radial()
    }

    /// Exponent of |x| carried by the weight alone.
    pub fn x_exp(&self, space: &GrushinSpace) -> f64 {
        space.mu() * self.a_weight
    }

    /// Exponent of ρ once the |x| part is factored out of the weight.
    pub fn rho_exp(&self, space: &GrushinSpace) -> f64 {
        self.rho_weight - space.mu() * self.a_weight
    }

    /// ln of the integrand at block norms (s, t), -inf where it vanishes.
    fn ln_value_st(&self, space: &GrushinSpace, s: f64, t: f64) -> f64 {
        let rho = space.rho_st(s, t);
        let mut ln = 0.0;
        if self.a_weight != 0.0 {
            ln += self.a_weight * space.mu() * (s.ln() - rho.ln());
        }
        if self.rho_weight != 0.0 {
            ln += self.rho_weight * rho.ln();
        }
        if self.power != 0.0 {
            let f = match self.term {
                FieldTerm::Value => self.field.eval_st(s, t),
                FieldTerm::GradNorm => self.field.grad_norm_st(s, t),
            }
            .expect("bi-radiality checked by the route");
            ln += self.power * f.abs().ln();
        } else {
            let f = self.field.eval_st(s, t).expect("bi-radiality checked by the route");
            if f == 0.0 {
                return f64::NEG_INFINITY;
            }
        }
        ln
    }

    /// Angular exponent picked up on top of the weight by a radial field's
    /// gradient norm (|∇_μ f(ρ)| = |f'(ρ)| (|x|/ρ)^μ).
    fn angular_exponent(&self) -> f64 {
        match self.term {
            FieldTerm::Value => self.a_weight,
            FieldTerm::GradNorm => self.a_weight + self.power,
        }
    }

    /// ln of the radial factor at `u = ln ρ` for a ρ-radial field, Jacobian
    /// `ρ^{Q}` of the polar measure and log substitution included.
    fn ln_radial(&self, space: &GrushinSpace, u: f64) -> f64 {
        let mut ln = (self.rho_weight + space.q()) * u;
        if self.power != 0.0 {
            let lf = match self.term {
                FieldTerm::Value => self.field.radial_log_abs_value(u),
                FieldTerm::GradNorm => self.field.radial_log_abs_deriv(u),
            };
            ln += self.power * lf;
        } else if self.field.radial_value(u.exp()) == 0.0 {
            return f64::NEG_INFINITY;
        }
        ln
    }
}

/// Integration outcome with provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: usize,
    pub converged: bool,
}

/// Surface area of the unit sphere in `R^n`: `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    assert!(n >= 1);
    // Γ(n/2) by the recursion from Γ(1/2) = √π or Γ(1) = 1.
    let mut gamma;
    let mut x;
    if n % 2 == 0 {
        gamma = 1.0;
        x = 1.0;
    } else {
        gamma = PI.sqrt();
        x = 0.5;
    }
    while x < f64::from(n) / 2.0 - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(f64::from(n) / 2.0) / gamma
}

fn st_box(space: &GrushinSpace, support_radius: f64) -> Result<(f64, f64)> {
    if !support_radius.is_finite() {
        return Err(Error::UnboundedSupport);
    }
    let mu = space.mu();
    Ok((support_radius, support_radius.powf(1.0 + mu) / (1.0 + mu)))
}

/// Reduced Cartesian route: adaptive 2-D quadrature over
/// `(s, t) = (|x|, |y|)` with the product measure
/// `ω_{d-1} ω_{k-1} s^{d-1} t^{k-1} ds dt`.
pub fn integrate_cartesian(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    tol: f64,
) -> Result<QuadratureResult> {
    integrate_cartesian_with(space, g, tol, &AdaptiveConfig::default())
}

pub fn integrate_cartesian_with(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    if !g.bi_radial() {
        return Err(Error::NotBiRadial);
    }
    let (s_max, t_max) = st_box(space, g.field.support_radius())?;
    let d1 = f64::from(space.d()) - 1.0;
    let k1 = f64::from(space.k()) - 1.0;
    let omega = unit_sphere_area(space.d()) * unit_sphere_area(space.k());

    let f = |s: f64, t: f64| -> f64 {
        let mut ln = g.ln_value_st(space, s, t);
        if d1 != 0.0 {
            ln += d1 * s.ln();
        }
        if k1 != 0.0 {
            ln += k1 * t.ln();
        }
        ln.exp()
    };
    let mut r = adaptive::integrate_2d(f, (0.0, s_max), (0.0, t_max), tol, cfg)?;
    r.value *= omega;
    r.error_estimate *= omega;
    Ok(r)
}

/// Total angular mass picked up by the weight factor `(|x|^μ/ρ^μ)^e` under
/// the derived polar Jacobian; `e = 0` gives the measure constant σ_tot with
/// `|B_R| = σ_tot R^Q / Q`.
pub fn angular_moment(
    space: &GrushinSpace,
    e: f64,
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    let d = f64::from(space.d());
    let mu = space.mu();
    if d + mu * e <= 0.0 {
        return Err(Error::Divergent(format!(
            "angular moment diverges: d + mu*e = {} <= 0",
            d + mu * e
        )));
    }
    let a = (d - 1.0 - mu + mu * e) / (1.0 + mu);
    let b = f64::from(space.k()) - 1.0;
    let f = |theta: f64| -> f64 {
        let mut ln = 0.0;
        if a != 0.0 {
            ln += a * theta.sin().ln();
        }
        if b != 0.0 {
            ln += b * theta.cos().ln();
        }
        ln.exp()
    };
    let mut r = adaptive::integrate_1d(f, 0.0, std::f64::consts::FRAC_PI_2, tol, cfg)?;
    let c = unit_sphere_area(space.d())
        * unit_sphere_area(space.k())
        * (1.0 + mu).powi(-(space.k() as i32));
    r.value *= c;
    r.error_estimate *= c;
    if !r.converged {
        return Err(Error::NonConvergence {
            value: r.value,
            estimate: r.error_estimate,
            n_evals: r.n_evals,
        });
    }
    Ok(r)
}

/// Polar route in the coordinates `s = ρ (sin θ)^{1/(1+μ)}`,
/// `(1+μ) t = ρ^{1+μ} cos θ`, θ ∈ [0, π/2], with the Jacobian implemented
/// from the change of variables. Integrands built on ρ-radial fields reduce
/// to a 1-D ρ-integral times a cached angular constant.
pub fn integrate_polar(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    tol: f64,
) -> Result<QuadratureResult> {
    integrate_polar_with(space, g, tol, &AdaptiveConfig::default())
}

pub fn integrate_polar_with(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    if !g.bi_radial() {
        return Err(Error::NotBiRadial);
    }
    let support = g.field.support_radius();
    if !support.is_finite() {
        return Err(Error::UnboundedSupport);
    }

    if g.field.is_radial() {
        // Separable: angular moment × 1-D radial integral on the log axis.
        let ang = angular_moment(space, g.angular_exponent(), (tol * 0.1).max(1e-12), cfg)?;
        let rad =
            adaptive::integrate_left_tail(|u| g.ln_radial(space, u), support.ln(), tol, cfg)?;
        let value = ang.value * rad.value;
        let error_estimate =
            ang.value.abs() * rad.error_estimate + rad.value.abs() * ang.error_estimate;
        return Ok(QuadratureResult {
            value,
            error_estimate,
            n_evals: ang.n_evals + rad.n_evals,
            converged: ang.converged && rad.converged,
        });
    }

    // General bi-radial field: 2-D quadrature over (ρ, θ).
    let d = f64::from(space.d());
    let k = f64::from(space.k());
    let mu = space.mu();
    let q_h = space.q();
    let a_ang = (d - 1.0 - mu + mu * g.a_weight) / (1.0 + mu);
    let b_ang = k - 1.0;
    let rho_pow = q_h - 1.0 + g.rho_weight;
    let c = unit_sphere_area(space.d()) * unit_sphere_area(space.k())
        * (1.0 + mu).powi(-(space.k() as i32));

    let f = |rho: f64, theta: f64| -> f64 {
        let sin = theta.sin();
        let cos = theta.cos();
        let mut ln = 0.0;
        if rho_pow != 0.0 {
            ln += rho_pow * rho.ln();
        }
        if a_ang != 0.0 {
            ln += a_ang * sin.ln();
        }
        if b_ang != 0.0 {
            ln += b_ang * cos.ln();
        }
        let s = rho * sin.powf(1.0 / (1.0 + mu));
        let t = rho.powf(1.0 + mu) * cos / (1.0 + mu);
        if g.power != 0.0 {
            let fv = match g.term {
                FieldTerm::Value => g.field.eval_st(s, t),
                FieldTerm::GradNorm => g.field.grad_norm_st(s, t),
            }
            .expect("bi-radiality checked");
            ln += g.power * fv.abs().ln();
        } else {
            let fv = g.field.eval_st(s, t).expect("bi-radiality checked");
            if fv == 0.0 {
                return 0.0;
            }
        }
        ln.exp()
    };
    let mut r =
        adaptive::integrate_2d(f, (0.0, support), (0.0, std::f64::consts::FRAC_PI_2), tol, cfg)?;
    r.value *= c;
    r.error_estimate *= c;
    Ok(r)
}

/// Seeded, reproducible Monte-Carlo estimate over a rectangle in (s, t),
/// with standard-error estimate as `error_estimate`. The box must contain
/// the support.
pub fn monte_carlo_oracle(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    s_range: (f64, f64),
    t_range: (f64, f64),
    n: usize,
    seed: u64,
) -> Result<QuadratureResult> {
    if !g.bi_radial() {
        return Err(Error::NotBiRadial);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("monte carlo requires n >= 1".into()));
    }
    let d1 = f64::from(space.d()) - 1.0;
    let k1 = f64::from(space.k()) - 1.0;
    let omega = unit_sphere_area(space.d()) * unit_sphere_area(space.k());
    let area = (s_range.1 - s_range.0) * (t_range.1 - t_range.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let s = rng.gen_range(s_range.0..s_range.1);
        let t = rng.gen_range(t_range.0..t_range.1);
        let mut ln = g.ln_value_st(space, s, t);
        if d1 != 0.0 {
            ln += d1 * s.ln();
        }
        if k1 != 0.0 {
            ln += k1 * t.ln();
        }
        let h = omega * ln.exp();
        if !h.is_finite() {
            return Err(Error::NonFinite("monte carlo sample"));
        }
        sum += h;
        sum_sq += h * h;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let se = area * (var / nf).sqrt();
    Ok(QuadratureResult { value: area * mean, error_estimate: se, n_evals: n, converged: true })
}

/// Default (s, t) bounding box of a field's support.
pub fn mc_default_box(space: &GrushinSpace, field: &TrialField) -> Result<((f64, f64), (f64, f64))> {
    let (s_max, t_max) = st_box(space, field.support_radius())?;
    Ok(((0.0, s_max), (0.0, t_max)))
}

/// Full-dimension Monte-Carlo estimate over a coordinate box, usable for
/// fields that are not bi-radial (translates). `x_box`/`y_box` give per-axis
/// bounds. The field term must be `Value` (gradient sampling would need the
/// finite-difference path per sample).
pub fn monte_carlo_fulldim(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    x_box: &[(f64, f64)],
    y_box: &[(f64, f64)],
    n: usize,
    seed: u64,
) -> Result<QuadratureResult> {
    if x_box.len() != space.d() as usize || y_box.len() != space.k() as usize {
        return Err(Error::DimensionMismatch {
            expected_x: space.d() as usize,
            expected_y: space.k() as usize,
            got_x: x_box.len(),
            got_y: y_box.len(),
        });
    }
    if g.term != FieldTerm::Value {
        return Err(Error::InvalidParameter(
            "full-dimension monte carlo supports the value term only".into(),
        ));
    }
    let mut volume = 1.0;
    for (lo, hi) in x_box.iter().chain(y_box.iter()) {
        volume *= hi - lo;
    }
    let mu = space.mu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let x: Vec<f64> = x_box.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
        let y: Vec<f64> = y_box.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
        let p = Point::new(x, y);
        let s = p.x_norm();
        let rho = space.rho_st(s, p.y_norm());
        let mut ln = 0.0;
        if g.a_weight != 0.0 {
            ln += g.a_weight * mu * (s.ln() - rho.ln());
        }
        if g.rho_weight != 0.0 {
            ln += g.rho_weight * rho.ln();
        }
        let fv = g.field.evaluate(&p);
        let h = if g.power != 0.0 {
            (ln + g.power * fv.abs().ln()).exp()
        } else if fv == 0.0 {
            0.0
        } else {
            ln.exp()
        };
        if !h.is_finite() {
            return Err(Error::NonFinite("monte carlo sample"));
        }
        sum += h;
        sum_sq += h * h;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Ok(QuadratureResult {
        value: volume * mean,
        error_estimate: volume * (var / nf).sqrt(),
        n_evals: n,
        converged: true,
    })
}

/// Probe verdict for a weight over a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Convergent,
    LogDivergent,
    Divergent,
}

impl ProbeVerdict {
    pub fn is_integrable(&self) -> bool {
        matches!(self, ProbeVerdict::Convergent)
    }
}

/// Result of the dyadic-annulus divergence probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub region: Region,
    /// Fitted scaling exponent of the annulus mass in the annulus radius;
    /// equals x_exp + rho_exp + Q for a pure monomial weight.
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub verdict: ProbeVerdict,
    /// (geometric mid-radius, mass) per dyadic annulus.
    pub annuli: Vec<(f64, f64)>,
    pub n_evals: usize,
}

const PROBE_BOUNDARY_EPS: f64 = 0.02;

/// Integrates the weight over dyadic annuli `2^{-j-1} ≤ ρ ≤ 2^{-j}` (or the
/// outer mirror) and fits the growth exponent of the masses. Requires a pure
/// weight (`power = 0`) or a ρ-radial field.
pub fn divergence_probe(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    region: Region,
) -> Result<ProbeReport> {
    divergence_probe_with(space, g, region, &AdaptiveConfig::default())
}

pub fn divergence_probe_with(
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    region: Region,
    cfg: &AdaptiveConfig,
) -> Result<ProbeReport> {
    if g.power != 0.0 && !g.field.is_radial() {
        return Err(Error::InvalidParameter(
            "divergence probe requires a pure weight or a rho-radial field".into(),
        ));
    }
    let ang = angular_moment(space, g.angular_exponent(), 1e-10, cfg)?;
    let mut n_evals = ang.n_evals;

    // Pure weights are probed over the bare region, not clamped to the
    // marker field's support; radial fields contribute their profile factor.
    let ln_rad = |u: f64| -> f64 {
        let mut ln = (g.rho_weight + space.q()) * u;
        if g.power != 0.0 {
            let lf = match g.term {
                FieldTerm::Value => g.field.radial_log_abs_value(u),
                FieldTerm::GradNorm => g.field.radial_log_abs_deriv(u),
            };
            ln += g.power * lf;
        }
        ln
    };

    let ln2 = std::f64::consts::LN_2;
    let js: Vec<i32> = (1..=10).collect();
    let mut xs = Vec::with_capacity(js.len());
    let mut ys = Vec::with_capacity(js.len());
    let mut annuli = Vec::with_capacity(js.len());
    for j in &js {
        let (u_lo, u_hi) = match region {
            Region::NearOrigin => (-f64::from(j + 1) * ln2, -f64::from(*j) * ln2),
            Region::NearInfinity => (f64::from(*j) * ln2, f64::from(j + 1) * ln2),
        };
        let r = adaptive::integrate_1d(|u| ln_rad(u).exp(), u_lo, u_hi, 1e-10, cfg)?;
        n_evals += r.n_evals;
        let mass = ang.value * r.value;
        let r_mid = (0.5 * (u_lo + u_hi)).exp();
        annuli.push((r_mid, mass));
        if mass > 0.0 {
            xs.push(r_mid.ln());
            ys.push(mass.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InconclusiveFit(format!(
            "only {} annuli carried positive mass",
            xs.len()
        )));
    }
    let (slope, _, r2) = fit_line(&xs, &ys);
    if r2 < 0.99 {
        return Err(Error::InconclusiveFit(format!("annulus fit r^2 = {r2:.4}")));
    }
    let verdict = if slope.abs() <= PROBE_BOUNDARY_EPS {
        ProbeVerdict::LogDivergent
    } else {
        let convergent = match region {
            Region::NearOrigin => slope > 0.0,
            Region::NearInfinity => slope < 0.0,
        };
        if convergent {
            ProbeVerdict::Convergent
        } else {
            ProbeVerdict::Divergent
        }
    };
    Ok(ProbeReport { region, fitted_exponent: slope, r_squared: r2, verdict, annuli, n_evals })
}

#[cfg(test)]
mod tests;
