//! Evaluates both sides of each inequality, runs the necessity experiments,
//! searches for sharp constants and probes the pointwise lemmas.

mod experiments;
mod lemmas;
mod search;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{OriginBehavior, TrialField};
use crate::geometry::GrushinSpace;
use crate::params::{
    self, check_ckn, check_hardy, check_sobolev, check_whs, hardy_constant, remark_reduction,
    AdmissibilityReport, CknParams, HardyParams, HardySobolevParams, Region,
    BALANCE_TOL_DEFAULT,
};
use crate::quadrature::{
    integrate_cartesian_with, integrate_polar_with, AdaptiveConfig, FieldTerm, QuadratureResult,
    WeightedIntegrand,
};

pub use experiments::{
    log_family_experiment, scaling_experiment, translation_experiment, ExperimentVerdict,
    IntegralFit, ScalingReport,
};
pub use lemmas::{lemma_lambda_check, lemma_p_probe, LemmaPReport, SupEstimate};
pub use search::{sharp_search, SearchReport, SearchTracePoint, SharpSearchConfig};

/// Which inequality is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InequalityKind {
    Hardy(HardyParams),
    Whs(HardySobolevParams),
    Ckn(CknParams),
    Sobolev { p: f64 },
}

/// An inequality instance over a concrete space.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalitySpec {
    pub space: GrushinSpace,
    pub kind: InequalityKind,
}

impl InequalitySpec {
    pub fn admissibility(&self) -> AdmissibilityReport {
        match &self.kind {
            InequalityKind::Hardy(t) => check_hardy(&self.space, t),
            InequalityKind::Whs(t) => check_whs(&self.space, t),
            InequalityKind::Ckn(t) => check_ckn(&self.space, t, BALANCE_TOL_DEFAULT),
            InequalityKind::Sobolev { p } => check_sobolev(&self.space, *p),
        }
    }
}

/// Evaluation options shared by the engine operations.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Relative quadrature tolerance per integral.
    pub tol: f64,
    /// Skip the admissibility refusal (violation experiments).
    pub force: bool,
    /// Evaluate both deterministic routes and cross-check (`true`), or the
    /// polar route only (grid sweeps where speed matters).
    pub cross_check: bool,
    pub quadrature: AdaptiveConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { tol: 1e-6, force: false, cross_check: true, quadrature: AdaptiveConfig::default() }
    }
}

/// Provenance of one computed integral.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralProvenance {
    pub name: &'static str,
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: usize,
    pub converged: bool,
    /// Route that produced `value` ("polar" or "cartesian").
    pub route: &'static str,
    /// |polar - cartesian| when both routes ran.
    pub route_deviation: Option<f64>,
    /// Deviation within the summed error estimates.
    pub routes_agree: Option<bool>,
}

/// Both sides of an inequality on a concrete trial field.
///
/// Normalization: for `hardy` the report is in integral form
/// (`lhs = ∫ weight |u|^p`, `rhs = ∫ ρ^{αp} |∇_μ u|^p`, ratio bounded by the
/// explicit constant). For `ckn`/`whs`/`sobolev` the factors are in norm
/// form: `lhs = (∫ …)^{1/r}`, `rhs_grad_factor = (∫ …)^{1/p}`,
/// `rhs_q_factor = (∫ …)^{1/q}` and `rhs = grad^a · q^{1-a}`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs_grad_factor: f64,
    pub rhs_q_factor: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Explicit constant (hardy only).
    pub constant: Option<f64>,
    /// `lhs ≤ constant · rhs · (1 + 3 tol)` (hardy only).
    pub satisfied_at_constant: Option<bool>,
    /// Raw integrals: weighted |u|-power, gradient power, q-factor power.
    pub lhs_integral: f64,
    pub grad_integral: f64,
    pub q_integral: Option<f64>,
    pub exponents: CanonicalExponents,
    pub provenance: Vec<IntegralProvenance>,
}

/// The canonical three-integral form every inequality reduces to:
/// LHS weight `(|x|^μ/ρ^μ)^{aW} ρ^{rhoW} |u|^{r}`, gradient factor
/// `ρ^{αp} |∇_μ u|^p` with exponent a, q-factor
/// `(|x|^μ/ρ^μ)^{aWq} ρ^{rhoWq} |u|^{q}` with exponent 1-a.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CanonicalExponents {
    pub lhs_a_weight: f64,
    pub lhs_rho_weight: f64,
    pub r: f64,
    pub grad_rho_weight: f64,
    pub p: f64,
    pub a: f64,
    pub q_a_weight: f64,
    pub q_rho_weight: f64,
    pub q: f64,
}

impl CanonicalExponents {
    /// The display exponents of each inequality, expressed through the
    /// shared CKN shape.
    pub fn from_spec(spec: &InequalitySpec) -> Result<Self> {
        Ok(match &spec.kind {
            InequalityKind::Hardy(t) => Self {
                lhs_a_weight: t.p,
                lhs_rho_weight: t.alpha * t.p - t.p,
                r: t.p,
                grad_rho_weight: t.alpha * t.p,
                p: t.p,
                a: 1.0,
                q_a_weight: 0.0,
                q_rho_weight: 0.0,
                q: 1.0,
            },
            InequalityKind::Whs(t) => {
                let p_star = t.p_star(&spec.space)?;
                Self {
                    lhs_a_weight: t.s,
                    lhs_rho_weight: t.alpha * p_star - t.s,
                    r: p_star,
                    grad_rho_weight: t.alpha * t.p,
                    p: t.p,
                    a: 1.0,
                    q_a_weight: 0.0,
                    q_rho_weight: 0.0,
                    q: 1.0,
                }
            }
            InequalityKind::Ckn(t) => {
                let gamma = t.gamma();
                Self {
                    lhs_a_weight: (t.alpha - gamma) * t.r,
                    lhs_rho_weight: gamma * t.r,
                    r: t.r,
                    grad_rho_weight: t.alpha * t.p,
                    p: t.p,
                    a: t.a,
                    q_a_weight: (t.alpha - t.beta) * t.q,
                    q_rho_weight: t.beta * t.q,
                    q: t.q,
                }
            }
            InequalityKind::Sobolev { p } => {
                let whs = HardySobolevParams { p: *p, s: 0.0, alpha: 0.0 };
                let p_star = whs.p_star(&spec.space)?;
                Self {
                    lhs_a_weight: 0.0,
                    lhs_rho_weight: 0.0,
                    r: p_star,
                    grad_rho_weight: 0.0,
                    p: *p,
                    a: 1.0,
                    q_a_weight: 0.0,
                    q_rho_weight: 0.0,
                    q: 1.0,
                }
            }
        })
    }
}

/// Effective near-origin exponents of an integrand on a concrete field, for
/// the integrability pre-check.
fn origin_precheck(
    space: &GrushinSpace,
    a_weight: f64,
    rho_weight: f64,
    power: f64,
    term: FieldTerm,
    field: &TrialField,
) -> Result<()> {
    let behavior = match term {
        FieldTerm::Value => field.value_origin_behavior(),
        FieldTerm::GradNorm => field.deriv_origin_behavior(),
    };
    let mu = space.mu();
    let (x_exp, rho_exp) = {
        let mut x_exp = mu * a_weight;
        let mut rho_exp = rho_weight - mu * a_weight;
        if term == FieldTerm::GradNorm {
            // |∇_μ f(ρ)|^power carries (|x|/ρ)^{μ·power}
            x_exp += mu * power;
            rho_exp -= mu * power;
        }
        match behavior {
            OriginBehavior::Vanishes => return Ok(()),
            OriginBehavior::Plateau => {}
            OriginBehavior::Power(e) => rho_exp += power * e,
        }
        (x_exp, rho_exp)
    };
    let v = params::integrable(space, x_exp, rho_exp, Region::NearOrigin);
    if !v.integrable {
        return Err(Error::IntegrabilityPrecheck(format!(
            "near-origin weight |x|^{x_exp} rho^{rho_exp} fails the criterion{}",
            if v.boundary { " (log-divergent boundary)" } else { "" }
        )));
    }
    Ok(())
}

/// Computes one integral with the configured route policy.
fn run_integral(
    name: &'static str,
    space: &GrushinSpace,
    g: &WeightedIntegrand,
    opts: &EvalOptions,
) -> Result<(f64, IntegralProvenance)> {
    let polar = integrate_polar_with(space, g, opts.tol, &opts.quadrature)?;
    if !opts.cross_check {
        let prov = IntegralProvenance {
            name,
            value: polar.value,
            error_estimate: polar.error_estimate,
            n_evals: polar.n_evals,
            converged: polar.converged,
            route: "polar",
            route_deviation: None,
            routes_agree: None,
        };
        return Ok((polar.value, prov));
    }
    let cart = integrate_cartesian_with(space, g, opts.tol, &opts.quadrature)?;
    let deviation = (polar.value - cart.value).abs();
    let agree = deviation <= polar.error_estimate + cart.error_estimate;
    let (value, err, evals, conv, route) = if polar.error_estimate <= cart.error_estimate {
        (polar.value, polar.error_estimate, polar.n_evals + cart.n_evals, polar.converged, "polar")
    } else {
        (cart.value, cart.error_estimate, polar.n_evals + cart.n_evals, cart.converged, "cartesian")
    };
    if !conv {
        return Err(Error::NonConvergence { value, estimate: err, n_evals: evals });
    }
    Ok((
        value,
        IntegralProvenance {
            name,
            value,
            error_estimate: err,
            n_evals: evals,
            converged: conv,
            route,
            route_deviation: Some(deviation),
            routes_agree: Some(agree),
        },
    ))
}

/// The three canonical integrals of a spec on a field.
fn canonical_integrals(
    spec: &InequalitySpec,
    exps: &CanonicalExponents,
    u: &TrialField,
    opts: &EvalOptions,
) -> Result<(f64, f64, Option<f64>, Vec<IntegralProvenance>)> {
    let space = &spec.space;
    let mut provenance = Vec::new();

    origin_precheck(space, exps.lhs_a_weight, exps.lhs_rho_weight, exps.r, FieldTerm::Value, u)?;
    let g_lhs =
        WeightedIntegrand::new(exps.lhs_a_weight, exps.lhs_rho_weight, u, FieldTerm::Value, exps.r);
    let (lhs, prov) = run_integral("lhs", space, &g_lhs, opts)?;
    provenance.push(prov);

    origin_precheck(space, 0.0, exps.grad_rho_weight, exps.p, FieldTerm::GradNorm, u)?;
    let g_grad =
        WeightedIntegrand::new(0.0, exps.grad_rho_weight, u, FieldTerm::GradNorm, exps.p);
    let (grad, prov) = run_integral("grad", space, &g_grad, opts)?;
    provenance.push(prov);

    let q_int = if exps.a < 1.0 {
        origin_precheck(space, exps.q_a_weight, exps.q_rho_weight, exps.q, FieldTerm::Value, u)?;
        let g_q =
            WeightedIntegrand::new(exps.q_a_weight, exps.q_rho_weight, u, FieldTerm::Value, exps.q);
        let (v, prov) = run_integral("q_factor", space, &g_q, opts)?;
        provenance.push(prov);
        Some(v)
    } else {
        None
    };
    Ok((lhs, grad, q_int, provenance))
}

/// Evaluates both sides of the inequality on the trial field.
///
/// Refuses inadmissible parameter tuples unless `opts.force` is set. Every
/// constituent integral passes the near-origin integrability pre-check and
/// is computed with the two-route cross-check (recorded in the provenance).
pub fn evaluate(spec: &InequalitySpec, u: &TrialField, opts: &EvalOptions) -> Result<InequalityReport> {
    let adm = spec.admissibility();
    if !adm.verdict && !opts.force {
        return Err(Error::Inadmissible(format!("failing predicates: {:?}", adm.failing())));
    }
    let exps = CanonicalExponents::from_spec(spec)?;
    let (lhs_integral, grad_integral, q_integral, provenance) =
        canonical_integrals(spec, &exps, u, opts)?;

    let report = match &spec.kind {
        InequalityKind::Hardy(t) => {
            let constant = hardy_constant(&spec.space, t)?;
            let rhs = grad_integral;
            let ratio = lhs_integral / rhs;
            let satisfied = lhs_integral <= constant * rhs * (1.0 + 3.0 * opts.tol);
            InequalityReport {
                lhs: lhs_integral,
                rhs_grad_factor: grad_integral,
                rhs_q_factor: 1.0,
                rhs,
                ratio,
                constant: Some(constant),
                satisfied_at_constant: Some(satisfied),
                lhs_integral,
                grad_integral,
                q_integral: None,
                exponents: exps,
                provenance,
            }
        }
        _ => {
            let lhs = lhs_integral.powf(1.0 / exps.r);
            let grad_factor = grad_integral.powf(1.0 / exps.p);
            let q_factor = match q_integral {
                Some(v) => v.powf(1.0 / exps.q),
                None => 1.0,
            };
            let rhs = grad_factor.powf(exps.a) * q_factor.powf(1.0 - exps.a);
            InequalityReport {
                lhs,
                rhs_grad_factor: grad_factor,
                rhs_q_factor: q_factor,
                rhs,
                ratio: lhs / rhs,
                constant: None,
                satisfied_at_constant: None,
                lhs_integral,
                grad_integral,
                q_integral,
                exponents: exps,
                provenance,
            }
        }
    };
    Ok(report)
}

/// Convenience: the CKN tuple a Hardy–Sobolev instance reduces to.
pub fn whs_as_ckn(space: &GrushinSpace, whs: &HardySobolevParams) -> Result<CknParams> {
    remark_reduction(space, whs)
}

#[cfg(test)]
mod tests;
