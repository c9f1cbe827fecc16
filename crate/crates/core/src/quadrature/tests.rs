use approx::assert_relative_eq;
use statrs::function::beta::beta;

use super::*;
use crate::fields::{dilate_field, make_bump, make_log_family, Smoothness, TrialField};

fn space111() -> GrushinSpace {
    GrushinSpace::new(1, 1, 1.0).unwrap()
}

fn space235() -> GrushinSpace {
    GrushinSpace::new(2, 3, 0.5).unwrap()
}

fn gaussian(space: GrushinSpace) -> TrialField {
    TrialField::from_st(
        space,
        |s, t| (-s * s - t * t).exp(),
        Some(Box::new(|s: f64, t: f64| {
            let v = (-s * s - t * t).exp();
            (-2.0 * s * v, -2.0 * t * v)
        })),
        6.0,
        Smoothness::Smooth,
    )
}

#[test]
fn sphere_areas() {
    use std::f64::consts::PI;
    assert_relative_eq!(unit_sphere_area(1), 2.0, max_relative = 1e-14);
    assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
}

#[test]
fn gaussian_sanity_integral_is_pi() {
    // ∫ e^{-|x|²-|y|²} over R² = π, independent of μ.
    let s = space111();
    let u = gaussian(s);
    let g = WeightedIntegrand::new(0.0, 0.0, &u, FieldTerm::Value, 1.0);
    let r = integrate_cartesian(&s, &g, 1e-8).unwrap();
    assert!(r.converged);
    assert_relative_eq!(r.value, std::f64::consts::PI, max_relative = 1e-6);
    let rp = integrate_polar(&s, &g, 1e-8).unwrap();
    assert_relative_eq!(rp.value, std::f64::consts::PI, max_relative = 1e-6);
}

#[test]
fn angular_moment_matches_beta_closed_form() {
    // M(e) = ω_{d-1} ω_{k-1} (1+μ)^{-k} · B((d+μe)/(2+2μ), k/2) / 2
    let cfg = AdaptiveConfig::default();
    for (space, es) in [
        (space111(), vec![0.0, 1.0, 1.5, 2.0, 3.0]),
        (space235(), vec![0.0, 0.5, 2.0]),
        (GrushinSpace::new(3, 1, 2.0).unwrap(), vec![0.0, 2.0]),
    ] {
        let d = f64::from(space.d());
        let k = f64::from(space.k());
        let mu = space.mu();
        for e in es {
            let m = angular_moment(&space, e, 1e-11, &cfg).unwrap();
            let expected = unit_sphere_area(space.d())
                * unit_sphere_area(space.k())
                * (1.0 + mu).powi(-(space.k() as i32))
                * 0.5
                * beta((d + mu * e) / (2.0 + 2.0 * mu), k / 2.0);
            assert_relative_eq!(m.value, expected, max_relative = 1e-9);
        }
    }
}

#[test]
fn sigma_tot_calibrates_against_cartesian_ball_volume() {
    // |B_1| = σ_tot / Q on both routes.
    let cfg = AdaptiveConfig::default();
    for space in [space111(), space235()] {
        let ball = TrialField::ball_indicator(space, 1.0);
        let g = WeightedIntegrand::pure_weight(0.0, 0.0, &ball);
        let cart = integrate_cartesian(&space, &g, 1e-6).unwrap();
        let sigma = angular_moment(&space, 0.0, 1e-11, &cfg).unwrap();
        assert_relative_eq!(cart.value, sigma.value / space.q(), max_relative = 1e-4);
    }
}

#[test]
fn mu_one_angular_density_matches_printed_exponent() {
    // At μ = 1 the derived angular density exponent (d-1-μ)/(1+μ) equals
    // d/2 - 1; verify the resulting moment against the Beta form with that
    // exponent for a couple of d.
    let cfg = AdaptiveConfig::default();
    for d in [1, 2, 3] {
        let space = GrushinSpace::new(d, 2, 1.0).unwrap();
        let m = angular_moment(&space, 0.0, 1e-11, &cfg).unwrap();
        let a = f64::from(d) / 2.0 - 1.0;
        let b = f64::from(space.k()) - 1.0;
        let expected = unit_sphere_area(space.d())
            * unit_sphere_area(space.k())
            * 0.25
            * 0.5
            * beta((a + 1.0) / 2.0, (b + 1.0) / 2.0)
            * 2.0;
        assert_relative_eq!(m.value, expected, max_relative = 1e-9);
    }
}

#[test]
fn ball_volumes_scale_with_q() {
    // |B_R| / |B_1| = R^Q by degree-Q homogeneity of the measure.
    for space in [space111(), space235()] {
        let q = space.q();
        let vol = |radius: f64| {
            let ball = TrialField::ball_indicator(space, radius);
            let g = WeightedIntegrand::pure_weight(0.0, 0.0, &ball);
            integrate_polar(&space, &g, 1e-9).unwrap().value
        };
        let v1 = vol(1.0);
        assert_relative_eq!(vol(2.0) / v1, 2.0f64.powf(q), max_relative = 1e-7);
        assert_relative_eq!(vol(0.5) / v1, 0.5f64.powf(q), max_relative = 1e-7);
    }
}

#[test]
fn rho_moment_ratio_over_unit_ball() {
    // ∫_{B1} ρ / ∫_{B1} 1 = Q/(Q+1); for (1,1,1): 3/4.
    let s = space111();
    let ball = TrialField::ball_indicator(s, 1.0);
    let g1 = WeightedIntegrand::pure_weight(0.0, 1.0, &ball);
    let g0 = WeightedIntegrand::pure_weight(0.0, 0.0, &ball);
    let p1 = integrate_polar(&s, &g1, 1e-9).unwrap();
    let p0 = integrate_polar(&s, &g0, 1e-9).unwrap();
    assert_relative_eq!(p1.value / p0.value, 0.75, max_relative = 1e-7);
    // the Cartesian route sees a curved discontinuity; agreement is coarser
    let c1 = integrate_cartesian(&s, &g1, 1e-4).unwrap();
    let c0 = integrate_cartesian(&s, &g0, 1e-4).unwrap();
    assert_relative_eq!(c1.value / c0.value, 0.75, max_relative = 2e-3);
}

#[test]
fn unit_ball_gauge_powers_finite_and_divergent() {
    let s = space111();
    let ball = TrialField::ball_indicator(s, 1.0);
    let finite = WeightedIntegrand::pure_weight(0.0, -2.0, &ball);
    let r = integrate_polar(&s, &finite, 1e-8).unwrap();
    assert!(r.converged);
    // ∫_{B1} ρ^{-2} = σ_tot ∫_0^1 ρ^{0} dρ = σ_tot
    let sigma = angular_moment(&s, 0.0, 1e-11, &AdaptiveConfig::default()).unwrap();
    assert_relative_eq!(r.value, sigma.value, max_relative = 1e-7);

    let divergent = WeightedIntegrand::pure_weight(0.0, -3.0, &ball);
    let e = integrate_polar(&s, &divergent, 1e-8);
    assert!(matches!(e, Err(Error::Divergent(_))), "got {e:?}");
}

#[test]
fn route_agreement_on_smooth_weighted_integrands() {
    let s = space111();
    let bump = make_bump(&s, 1.0, 2.0).unwrap();
    let cases = [
        WeightedIntegrand::new(0.0, 0.0, &bump, FieldTerm::Value, 1.0),
        WeightedIntegrand::new(2.0, -1.0, &bump, FieldTerm::Value, 2.0),
        WeightedIntegrand::new(0.0, -2.0, &bump, FieldTerm::Value, 1.0),
        WeightedIntegrand::new(0.0, 0.0, &bump, FieldTerm::GradNorm, 2.0),
    ];
    for (i, g) in cases.iter().enumerate() {
        let c = integrate_cartesian(&s, g, 1e-7).unwrap();
        let p = integrate_polar(&s, g, 1e-7).unwrap();
        assert!(
            (c.value - p.value).abs() <= c.error_estimate + p.error_estimate,
            "case {i}: cartesian {} vs polar {} (errors {} + {})",
            c.value,
            p.value,
            c.error_estimate,
            p.error_estimate
        );
    }
}

#[test]
fn log_family_integrals_match_closed_forms() {
    // For the trigger tuple (Q=3, p=2, q=3, r=4, a=1/2, α=3.5, β=3, σ=3.5):
    // γ = 3.25, c = γ + Q/r = 4, and with L = log(1/ε):
    //   value integral with weights (aW=(α-γ)r=1, rhoW=γr=13), power r:
    //     M(1) · [L^r/(γr+Q) + L^{r+1}/(r+1)],   M(1) = π for (1,1,1)
    //   gradient integral (aW=0, rhoW=αp=7, power p=2):
    //     M(2) · [((cL+1)^{p+1} - 1) / (c (p+1))],  M(2) = B(3/4, 1/2)
    let s = space111();
    let eps = 1e-3;
    let ll = (1.0f64 / eps).ln();
    let u = make_log_family(&s, eps, 3.25, 4.0).unwrap();

    let g_val = WeightedIntegrand::new(1.0, 13.0, &u, FieldTerm::Value, 4.0);
    let expected_val = std::f64::consts::PI * (ll.powi(4) / 16.0 + ll.powi(5) / 5.0);
    let got = integrate_polar(&s, &g_val, 1e-9).unwrap();
    assert_relative_eq!(got.value, expected_val, max_relative = 1e-7);
    let got_c = integrate_cartesian(&s, &g_val, 1e-6).unwrap();
    assert_relative_eq!(got_c.value, expected_val, max_relative = 1e-4);

    let g_grad = WeightedIntegrand::new(0.0, 7.0, &u, FieldTerm::GradNorm, 2.0);
    let c = 4.0;
    let expected_grad =
        beta(0.75, 0.5) * (((c * ll + 1.0).powi(3) - 1.0) / (c * 3.0));
    let got = integrate_polar(&s, &g_grad, 1e-9).unwrap();
    assert_relative_eq!(got.value, expected_grad, max_relative = 1e-7);
}

#[test]
fn dilation_covariance_of_weighted_integrals() {
    // For u∘δ_λ with pure gauge weights the integral picks up λ^{-rhoW-Q}.
    let s = space235();
    let u = make_bump(&s, 0.8, 1.6).unwrap();
    for (a_w, rho_w, power, lambda) in
        [(0.0, 0.0, 2.0, 2.0), (1.0, -1.0, 3.0, 0.5), (0.0, 1.5, 1.0, 4.0)]
    {
        let base = WeightedIntegrand::new(a_w, rho_w, &u, FieldTerm::Value, power);
        let i0 = integrate_polar(&s, &base, 1e-8).unwrap();
        let ul = dilate_field(&u, lambda).unwrap();
        let gl = WeightedIntegrand::new(a_w, rho_w, &ul, FieldTerm::Value, power);
        let il = integrate_polar(&s, &gl, 1e-8).unwrap();
        let predicted = lambda.powf(-rho_w - s.q()) * i0.value;
        assert_relative_eq!(il.value, predicted, max_relative = 3e-8 * 3.0 + 1e-7);
    }
}

#[test]
fn monte_carlo_constant_on_unit_square() {
    // constant 1, d=k=1, no weights: ω_0 ω_0 × area × 1 = 4.
    let s = space111();
    let one = TrialField::from_st(s, |_, _| 1.0, None, f64::INFINITY, Smoothness::Smooth);
    let g = WeightedIntegrand::new(0.0, 0.0, &one, FieldTerm::Value, 1.0);
    let r = monte_carlo_oracle(&s, &g, (0.0, 1.0), (0.0, 1.0), 10_000, 42).unwrap();
    assert_relative_eq!(r.value, 4.0, max_relative = 1e-12);
    assert!(r.error_estimate < 1e-12);
}

#[test]
fn monte_carlo_agrees_with_cartesian_on_ball_indicator() {
    let s = space111();
    let ball = TrialField::ball_indicator(s, 1.0);
    let g = WeightedIntegrand::pure_weight(0.0, 0.0, &ball);
    let (sb, tb) = mc_default_box(&s, &ball).unwrap();
    let mc = monte_carlo_oracle(&s, &g, sb, tb, 2_000_000, 7).unwrap();
    let det = integrate_cartesian(&s, &g, 1e-6).unwrap();
    let dev = (mc.value - det.value).abs();
    assert!(
        dev <= 3.0 * mc.error_estimate + det.error_estimate,
        "mc {} vs deterministic {} (3se = {})",
        mc.value,
        det.value,
        3.0 * mc.error_estimate
    );
}

#[test]
fn monte_carlo_error_scales_inverse_sqrt() {
    let s = space111();
    let u = gaussian(s);
    let g = WeightedIntegrand::new(0.0, 0.0, &u, FieldTerm::Value, 1.0);
    let r1 = monte_carlo_oracle(&s, &g, (0.0, 4.0), (0.0, 4.0), 100_000, 11).unwrap();
    let r2 = monte_carlo_oracle(&s, &g, (0.0, 4.0), (0.0, 4.0), 400_000, 11).unwrap();
    // quadrupling n halves the standard error, within 20%
    let ratio = r1.error_estimate / r2.error_estimate;
    assert!((ratio - 2.0).abs() < 0.4, "se ratio {ratio}");
}

#[test]
fn monte_carlo_reproducible_for_fixed_seed() {
    let s = space111();
    let u = gaussian(s);
    let g = WeightedIntegrand::new(0.0, 0.0, &u, FieldTerm::Value, 1.0);
    let a = monte_carlo_oracle(&s, &g, (0.0, 4.0), (0.0, 4.0), 50_000, 5).unwrap();
    let b = monte_carlo_oracle(&s, &g, (0.0, 4.0), (0.0, 4.0), 50_000, 5).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let c = monte_carlo_oracle(&s, &g, (0.0, 4.0), (0.0, 4.0), 50_000, 6).unwrap();
    assert_ne!(a.value.to_bits(), c.value.to_bits());
}

#[test]
fn probe_reference_exponents_near_origin() {
    let s = space111();
    let ball = TrialField::ball_indicator(s, 1.0);
    // (xExp, rhoExp) = (0, -4): aW = 0, rhoW = -4, E = -1 (divergent)
    let g = WeightedIntegrand::pure_weight(0.0, -4.0, &ball);
    let rep = divergence_probe(&s, &g, Region::NearOrigin).unwrap();
    assert_relative_eq!(rep.fitted_exponent, -1.0, max_relative = 1e-6);
    assert_eq!(rep.verdict, ProbeVerdict::Divergent);

    // (0, -3): E = 0, equal mass per annulus, log-divergent
    let g = WeightedIntegrand::pure_weight(0.0, -3.0, &ball);
    let rep = divergence_probe(&s, &g, Region::NearOrigin).unwrap();
    assert!(rep.fitted_exponent.abs() <= 1e-8);
    assert_eq!(rep.verdict, ProbeVerdict::LogDivergent);

    // (0, -2): E = 1, convergent
    let g = WeightedIntegrand::pure_weight(0.0, -2.0, &ball);
    let rep = divergence_probe(&s, &g, Region::NearOrigin).unwrap();
    assert_relative_eq!(rep.fitted_exponent, 1.0, max_relative = 1e-6);
    assert_eq!(rep.verdict, ProbeVerdict::Convergent);
}

#[test]
fn probe_matches_criteria_both_regions() {
    let s = space111();
    let ball = TrialField::ball_indicator(s, 1.0);
    // xExp = 2 with μ = 1 means aW = 2; rhoW = rhoExp + xExp.
    for (x_exp, rho_exp) in [(0.0, -2.0), (0.0, -3.0), (0.0, -4.0), (2.0, -6.0)] {
        let a_w = x_exp / s.mu();
        let rho_w = rho_exp + x_exp;
        let g = WeightedIntegrand::pure_weight(a_w, rho_w, &ball);
        for region in [Region::NearOrigin, Region::NearInfinity] {
            let rep = divergence_probe(&s, &g, region).unwrap();
            let v = crate::params::integrable(&s, x_exp, rho_exp, region);
            assert_eq!(
                rep.verdict.is_integrable(),
                v.integrable,
                "({x_exp},{rho_exp}) in {region:?}"
            );
            let e = x_exp + rho_exp + s.q();
            let tol = (0.05 * e.abs()).max(0.02);
            assert!(
                (rep.fitted_exponent - e).abs() <= tol,
                "fitted {} vs {e}",
                rep.fitted_exponent
            );
        }
    }
}

#[test]
fn non_bi_radial_integrands_are_rejected() {
    let s = space111();
    let u = make_bump(&s, 0.5, 1.0).unwrap();
    let shifted = crate::fields::translate_field(&u, &[1.0], &[0.0], 8.0).unwrap();
    let g = WeightedIntegrand::new(0.0, 0.0, &shifted, FieldTerm::Value, 1.0);
    assert!(matches!(integrate_cartesian(&s, &g, 1e-6), Err(Error::NotBiRadial)));
    assert!(matches!(integrate_polar(&s, &g, 1e-6), Err(Error::NotBiRadial)));
}

#[test]
fn fulldim_mc_translation_invariance_of_field_power() {
    // ∫ |u_λ|^r equals ∫ |u|^r; check within joint standard errors.
    let s = space111();
    let u = make_bump(&s, 0.5, 1.0).unwrap();
    let g0 = WeightedIntegrand::new(0.0, 0.0, &u, FieldTerm::Value, 3.0);
    let base = monte_carlo_fulldim(
        &s,
        &g0,
        &[(-1.0, 1.0)],
        &[(-0.5, 0.5)],
        400_000,
        21,
    )
    .unwrap();
    let lambda = 16.0;
    let shifted = crate::fields::translate_field(&u, &[1.0], &[0.25], lambda).unwrap();
    let gl = WeightedIntegrand::new(0.0, 0.0, &shifted, FieldTerm::Value, 3.0);
    let moved = monte_carlo_fulldim(
        &s,
        &gl,
        &[(lambda - 1.0, lambda + 1.0)],
        &[(lambda.powi(2) * 0.25 - 0.5, lambda.powi(2) * 0.25 + 0.5)],
        400_000,
        22,
    )
    .unwrap();
    let dev = (base.value - moved.value).abs();
    assert!(
        dev <= 3.0 * (base.error_estimate + moved.error_estimate),
        "base {} vs moved {}",
        base.value,
        moved.value
    );
}
