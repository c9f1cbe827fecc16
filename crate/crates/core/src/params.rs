//! Parameter tuples for each inequality: admissibility predicates,
//! dimensional balance, exponent formulas, explicit constants and the
//! integrability criteria for monomial weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GrushinSpace;

/// Parameters of the three-weight interpolation inequality. The derived
/// weight exponent γ = aσ + (1-a)β is always recomputed, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CknParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl CknParams {
    pub fn gamma(&self) -> f64 {
        self.a * self.sigma + (1.0 - self.a) * self.beta
    }
}

/// Parameters of the weighted Hardy–Sobolev inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySobolevParams {
    pub p: f64,
    pub s: f64,
    pub alpha: f64,
}

impl HardySobolevParams {
    /// The interpolation exponent `p_*(s, p, Q) = p(Q-s)/(Q-p)`.
    pub fn p_star(&self, space: &GrushinSpace) -> Result<f64> {
        p_star(space, self.p, self.s)
    }
}

/// Parameters of the weighted Hardy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardyParams {
    pub p: f64,
    pub alpha: f64,
}

/// One admissibility predicate with its numeric residual. `residual` is the
/// margin by which the predicate holds (positive = satisfied for strict
/// inequalities; for the balance it is the signed deviation).
#[derive(Debug, Clone, Serialize)]
pub struct PredicateCheck {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
    /// False for conditionally-required predicates whose trigger is off
    /// (they then pass vacuously).
    pub applicable: bool,
}

/// Outcome of an admissibility check; `verdict` is the conjunction of all
/// pass flags.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub verdict: bool,
    pub checks: Vec<PredicateCheck>,
    pub balance_residual: f64,
}

impl AdmissibilityReport {
    fn from_checks(checks: Vec<PredicateCheck>, balance_residual: f64) -> Self {
        Self { verdict: checks.iter().all(|c| c.pass), checks, balance_residual }
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

pub const BALANCE_TOL_DEFAULT: f64 = 1e-9;

/// Signed deviation of the dimensional-balance identity
/// `1/r + γ/Q - a(1/p + (α-1)/Q) - (1-a)(1/q + β/Q)`.
pub fn balance_residual(space: &GrushinSpace, t: &CknParams) -> f64 {
    let q_h = space.q();
    let gamma = t.gamma();
    1.0 / t.r + gamma / q_h
        - t.a * (1.0 / t.p + (t.alpha - 1.0) / q_h)
        - (1.0 - t.a) * (1.0 / t.q + t.beta / q_h)
}

/// Deviation of the equality trigger `1/p + (α-1)/Q - (1/r + γ/Q)`; the
/// condition `α - σ ≤ 1` is only required when this vanishes.
pub fn equality_trigger_residual(space: &GrushinSpace, t: &CknParams) -> f64 {
    let q_h = space.q();
    1.0 / t.p + (t.alpha - 1.0) / q_h - (1.0 / t.r + t.gamma() / q_h)
}

/// Evaluates every admissibility predicate of the CKN tuple and returns the
/// full residual list; report-only, any finite tuple is accepted for
/// diagnosis. Equality-type conditions are compared with the absolute
/// tolerance `tol`.
pub fn check_ckn(space: &GrushinSpace, t: &CknParams, tol: f64) -> AdmissibilityReport {
    let d = f64::from(space.d());
    let q_h = space.q();
    let mu = space.mu();
    let gamma = t.gamma();
    let balance = balance_residual(space, t);
    let trigger = equality_trigger_residual(space, t);

    let mut checks = Vec::with_capacity(12);
    let mut push = |name: &'static str, residual: f64, pass: bool, applicable: bool| {
        checks.push(PredicateCheck { name, residual, pass, applicable });
    };

    let m = (t.p - 1.0).min(q_h - t.p);
    push("1<p<Q", m, m > 0.0, true);
    push("q>=1", t.q - 1.0, t.q >= 1.0, true);
    push("r>0", t.r, t.r > 0.0, true);
    let ma = t.a.min(1.0 - t.a);
    push("0<=a<=1", ma, ma >= 0.0, true);
    let v = d + mu * (t.alpha - gamma) * t.r;
    push("d+mu*(alpha-gamma)*r>0", v, v > 0.0, true);
    let v = d + mu * (t.alpha - t.beta) * t.q;
    push("d+mu*(alpha-beta)*q>0", v, v > 0.0, true);
    let v = t.alpha * t.p + q_h;
    push("alpha*p+Q>0", v, v > 0.0, true);
    let v = t.beta * t.q + q_h;
    push("beta*q+Q>0", v, v > 0.0, true);
    let v = gamma * t.r + q_h;
    push("gamma*r+Q>0", v, v > 0.0, true);
    push("dimensional balance", balance, balance.abs() <= tol, true);

    let index_applicable = t.a > 0.0;
    let index = t.alpha - t.sigma;
    push("0<=alpha-sigma", index, !index_applicable || index >= 0.0, index_applicable);

    let case_applicable = t.a > 0.0 && trigger.abs() <= tol;
    push(
        "alpha-sigma<=1 (equality case)",
        1.0 - index,
        !case_applicable || index <= 1.0 + tol,
        case_applicable,
    );

    AdmissibilityReport::from_checks(checks, balance)
}

/// Admissibility of the Hardy tuple: `p > 1`, the hypothesis
/// `1/p + α/Q > 0`, and applicability of the explicit constant
/// (`Q - p + αp > 0`, strictly stronger than the hypothesis for some α).
pub fn check_hardy(space: &GrushinSpace, t: &HardyParams) -> AdmissibilityReport {
    let q_h = space.q();
    let hyp = 1.0 / t.p + t.alpha / q_h;
    let denom = q_h - t.p + t.alpha * t.p;
    let checks = vec![
        PredicateCheck { name: "p>1", residual: t.p - 1.0, pass: t.p > 1.0, applicable: true },
        PredicateCheck { name: "1/p+alpha/Q>0", residual: hyp, pass: hyp > 0.0, applicable: true },
        PredicateCheck {
            name: "Q-p+alpha*p>0 (constant applicable)",
            residual: denom,
            pass: denom > 0.0,
            applicable: true,
        },
    ];
    AdmissibilityReport::from_checks(checks, 0.0)
}

/// Admissibility of the weighted Hardy–Sobolev tuple:
/// `1 < p < Q`, `0 ≤ s ≤ p`, `α > (p-Q)/p`.
pub fn check_whs(space: &GrushinSpace, t: &HardySobolevParams) -> AdmissibilityReport {
    let q_h = space.q();
    let m = (t.p - 1.0).min(q_h - t.p);
    let s_m = t.s.min(t.p - t.s);
    let a_m = t.alpha - (t.p - q_h) / t.p;
    let checks = vec![
        PredicateCheck { name: "1<p<Q", residual: m, pass: m > 0.0, applicable: true },
        PredicateCheck { name: "0<=s<=p", residual: s_m, pass: s_m >= 0.0, applicable: true },
        PredicateCheck { name: "alpha>(p-Q)/p", residual: a_m, pass: a_m > 0.0, applicable: true },
    ];
    AdmissibilityReport::from_checks(checks, 0.0)
}

/// Admissibility of the unweighted embedding: `1 < p < Q`.
pub fn check_sobolev(space: &GrushinSpace, p: f64) -> AdmissibilityReport {
    let m = (p - 1.0).min(space.q() - p);
    let checks =
        vec![PredicateCheck { name: "1<p<Q", residual: m, pass: m > 0.0, applicable: true }];
    AdmissibilityReport::from_checks(checks, 0.0)
}

/// Which parameter the balance equation is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceFree {
    R,
    Alpha,
    Beta,
    Sigma,
    A,
}

/// Solution of the balance equation for one free parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BalanceSolution {
    pub value: f64,
    /// For `free = r`: false when the solved exponent is nonpositive (the
    /// value is still returned for diagnosis).
    pub valid_sign: bool,
}

/// Inverts the dimensional-balance identity with respect to one parameter,
/// all others held fixed. The equation is affine in α, β, σ, a and rational
/// in r; substituting the solution back drives the residual below 1e-12.
pub fn solve_balance(
    space: &GrushinSpace,
    t: &CknParams,
    free: BalanceFree,
) -> Result<BalanceSolution> {
    const DEGENERATE_EPS: f64 = 1e-14;
    match free {
        BalanceFree::R => {
            let q_h = space.q();
            let rhs = t.a * (1.0 / t.p + (t.alpha - 1.0) / q_h)
                + (1.0 - t.a) * (1.0 / t.q + t.beta / q_h)
                - t.gamma() / q_h;
            if rhs.abs() < DEGENERATE_EPS {
                return Err(Error::DegenerateBalance("r"));
            }
            let r = 1.0 / rhs;
            Ok(BalanceSolution { value: r, valid_sign: r > 0.0 })
        }
        _ => {
            let (name, set): (&'static str, fn(&mut CknParams, f64)) = match free {
                BalanceFree::Alpha => ("alpha", |t, v| t.alpha = v),
                BalanceFree::Beta => ("beta", |t, v| t.beta = v),
                BalanceFree::Sigma => ("sigma", |t, v| t.sigma = v),
                BalanceFree::A => ("a", |t, v| t.a = v),
                BalanceFree::R => unreachable!(),
            };
            let mut t0 = *t;
            set(&mut t0, 0.0);
            let b0 = balance_residual(space, &t0);
            let mut t1 = *t;
            set(&mut t1, 1.0);
            let b1 = balance_residual(space, &t1);
            let coeff = b1 - b0;
            if coeff.abs() < DEGENERATE_EPS {
                return Err(Error::DegenerateBalance(name));
            }
            Ok(BalanceSolution { value: -b0 / coeff, valid_sign: true })
        }
    }
}

/// The explicit Hardy constant `(p / (Q - p + αp))^p`.
pub fn hardy_constant(space: &GrushinSpace, t: &HardyParams) -> Result<f64> {
    if !(t.p > 1.0) {
        return Err(Error::InvalidParameter(format!("hardy constant requires p > 1, got {}", t.p)));
    }
    let denom = space.q() - t.p + t.alpha * t.p;
    if denom <= 0.0 {
        return Err(Error::ConstantInapplicable(denom));
    }
    Ok((t.p / denom).powf(t.p))
}

/// `p_*(s, p, Q) = p(Q-s)/(Q-p)` for 1 < p < Q, 0 ≤ s ≤ p. Interpolates
/// between the Sobolev exponent at s = 0 and p itself at s = p.
pub fn p_star(space: &GrushinSpace, p: f64, s: f64) -> Result<f64> {
    let q_h = space.q();
    if !(p > 1.0 && p < q_h) {
        return Err(Error::InvalidParameter(format!("p must lie in (1, Q) = (1, {q_h}), got {p}")));
    }
    if !(0.0..=p).contains(&s) {
        return Err(Error::InvalidParameter(format!("s must lie in [0, p] = [0, {p}], got {s}")));
    }
    Ok(p * (q_h - s) / (q_h - p))
}

/// Region of an integrability question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NearOrigin,
    NearInfinity,
}

/// Verdict of the monomial-weight integrability criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityVerdict {
    pub integrable: bool,
    /// Set when one of the criterion expressions is exactly 0 (the
    /// log-divergent boundary); such cases are reported non-integrable.
    pub boundary: bool,
}

/// Integrability of `|x|^{x_exp} ρ^{rho_exp}`: near the origin requires
/// `x_exp + d > 0` and `x_exp + rho_exp + Q > 0` (both strict); near infinity
/// the second becomes `< 0`.
pub fn integrable(
    space: &GrushinSpace,
    x_exp: f64,
    rho_exp: f64,
    region: Region,
) -> IntegrabilityVerdict {
    let d = f64::from(space.d());
    let q_h = space.q();
    let angular = x_exp + d;
    let radial = x_exp + rho_exp + q_h;
    let boundary = angular == 0.0 || radial == 0.0;
    let integrable = match region {
        Region::NearOrigin => angular > 0.0 && radial > 0.0,
        Region::NearInfinity => angular > 0.0 && radial < 0.0,
    };
    IntegrabilityVerdict { integrable, boundary }
}

/// Rewrites a Hardy–Sobolev tuple as the a = 1 CKN tuple it coincides with:
/// `t = s/p`, `r = p(Q - tp)/(Q - p)`, σ chosen so `(α-σ)r = tp`, β = σ and
/// a placeholder q = p (the q-factor carries exponent 1-a = 0).
pub fn remark_reduction(space: &GrushinSpace, whs: &HardySobolevParams) -> Result<CknParams> {
    let q_h = space.q();
    if !(whs.p > 1.0 && whs.p < q_h) {
        return Err(Error::InvalidParameter(format!(
            "reduction requires 1 < p < Q, got p = {}",
            whs.p
        )));
    }
    let t = whs.s / whs.p;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "reduction requires s/p in [0, 1], got {t}"
        )));
    }
    let r = p_star(space, whs.p, whs.s)?;
    let sigma = whs.alpha - whs.s / r;
    Ok(CknParams {
        p: whs.p,
        q: whs.p,
        r,
        a: 1.0,
        alpha: whs.alpha,
        beta: sigma,
        sigma,
    })
}

/// Exact-rational admissibility checking for certificate-grade verdicts: the
/// balance identity and the equality trigger are decided with no rounding.
pub mod exact {
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

    use super::{AdmissibilityReport, PredicateCheck};

    /// Ambient structure with a rational degeneracy exponent.
    #[derive(Debug, Clone)]
    pub struct RationalSpace {
        pub d: u32,
        pub k: u32,
        pub mu: BigRational,
    }

    impl RationalSpace {
        pub fn new(d: u32, k: u32, mu_num: i64, mu_den: i64) -> Self {
            Self { d, k, mu: ratio(mu_num, mu_den) }
        }

        pub fn q(&self) -> BigRational {
            BigRational::from_integer(self.d.into())
                + (BigRational::one() + self.mu.clone())
                    * BigRational::from_integer(self.k.into())
        }
    }

    /// CKN tuple with rational entries.
    #[derive(Debug, Clone)]
    pub struct RationalCkn {
        pub p: BigRational,
        pub q: BigRational,
        pub r: BigRational,
        pub a: BigRational,
        pub alpha: BigRational,
        pub beta: BigRational,
        pub sigma: BigRational,
    }

    /// `n/d` as a rational.
    pub fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    impl RationalCkn {
        pub fn gamma(&self) -> BigRational {
            self.a.clone() * self.sigma.clone()
                + (BigRational::one() - self.a.clone()) * self.beta.clone()
        }

        /// Nearest-f64 view of the tuple.
        pub fn to_f64(&self) -> super::CknParams {
            let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
            super::CknParams {
                p: f(&self.p),
                q: f(&self.q),
                r: f(&self.r),
                a: f(&self.a),
                alpha: f(&self.alpha),
                beta: f(&self.beta),
                sigma: f(&self.sigma),
            }
        }

        /// Exact view of an f64 tuple (every finite f64 is rational).
        pub fn from_f64(t: &super::CknParams) -> Option<Self> {
            let g = BigRational::from_f64;
            Some(Self {
                p: g(t.p)?,
                q: g(t.q)?,
                r: g(t.r)?,
                a: g(t.a)?,
                alpha: g(t.alpha)?,
                beta: g(t.beta)?,
                sigma: g(t.sigma)?,
            })
        }
    }

    /// Exact counterpart of [`super::check_ckn`]; the predicate list and its
    /// order match the floating-point path, equalities are decided exactly.
    pub fn check_ckn_exact(space: &RationalSpace, t: &RationalCkn) -> AdmissibilityReport {
        let d = BigRational::from_integer(space.d.into());
        let mu = space.mu.clone();
        let q_h = space.q();
        let one = BigRational::one();
        let gamma = t.gamma();

        let balance = one.clone() / t.r.clone() + gamma.clone() / q_h.clone()
            - t.a.clone()
                * (one.clone() / t.p.clone() + (t.alpha.clone() - one.clone()) / q_h.clone())
            - (one.clone() - t.a.clone())
                * (one.clone() / t.q.clone() + t.beta.clone() / q_h.clone());
        let trigger = one.clone() / t.p.clone() + (t.alpha.clone() - one.clone()) / q_h.clone()
            - (one.clone() / t.r.clone() + gamma.clone() / q_h.clone());

        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        let mut checks = Vec::with_capacity(12);
        let mut push = |name: &'static str, residual: &BigRational, pass: bool, applicable: bool| {
            checks.push(PredicateCheck { name, residual: f(residual), pass, applicable });
        };

        let m1 = (t.p.clone() - one.clone()).min(q_h.clone() - t.p.clone());
        push("1<p<Q", &m1, m1.is_positive(), true);
        let mq = t.q.clone() - one.clone();
        push("q>=1", &mq, !mq.is_negative(), true);
        push("r>0", &t.r, t.r.is_positive(), true);
        let ma = t.a.clone().min(one.clone() - t.a.clone());
        push("0<=a<=1", &ma, !ma.is_negative(), true);
        let v = d.clone() + mu.clone() * (t.alpha.clone() - gamma.clone()) * t.r.clone();
        push("d+mu*(alpha-gamma)*r>0", &v, v.is_positive(), true);
        let v = d + mu * (t.alpha.clone() - t.beta.clone()) * t.q.clone();
        push("d+mu*(alpha-beta)*q>0", &v, v.is_positive(), true);
        let v = t.alpha.clone() * t.p.clone() + q_h.clone();
        push("alpha*p+Q>0", &v, v.is_positive(), true);
        let v = t.beta.clone() * t.q.clone() + q_h.clone();
        push("beta*q+Q>0", &v, v.is_positive(), true);
        let v = gamma.clone() * t.r.clone() + q_h.clone();
        push("gamma*r+Q>0", &v, v.is_positive(), true);
        push("dimensional balance", &balance, balance.numer().is_zero(), true);

        let index_applicable = t.a.is_positive();
        let index = t.alpha.clone() - t.sigma.clone();
        push("0<=alpha-sigma", &index, !index_applicable || !index.is_negative(), index_applicable);

        let case_applicable = index_applicable && trigger.numer().is_zero();
        let margin = one - index.clone();
        push(
            "alpha-sigma<=1 (equality case)",
            &margin,
            !case_applicable || !margin.is_negative(),
            case_applicable,
        );

        let balance_f = f(&balance);
        AdmissibilityReport::from_checks(checks, balance_f)
    }

}
