//! The Grushin ambient structure: gauge, anisotropic dilations and the
//! degenerate differential operators built from the vector fields
//! `(∂_x, |x|^μ ∂_y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::TrialField;

/// Ambient space `R^d_x × R^k_y` together with the degeneracy exponent μ.
///
/// The homogeneous dimension `Q = d + (1+μ)k` governs volume growth under the
/// anisotropic dilations and is recomputed from the fields rather than stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrushinSpace {
    d: u32,
    k: u32,
    mu: f64,
}

impl GrushinSpace {
    /// Requires `d >= 1`, `k >= 1` and `mu > 0`.
    pub fn new(d: u32, k: u32, mu: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidSpace("d must be >= 1".into()));
        }
        if k < 1 {
            return Err(Error::InvalidSpace("k must be >= 1".into()));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidSpace(format!("mu must be positive and finite, got {mu}")));
        }
        Ok(Self { d, k, mu })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Homogeneous dimension `Q = d + (1+μ)k`.
    pub fn q(&self) -> f64 {
        f64::from(self.d) + (1.0 + self.mu) * f64::from(self.k)
    }

    /// Gauge of the point with block norms `s = |x|`, `t = |y|`:
    /// `(s^{2+2μ} + (1+μ)² t²)^{1/(2+2μ)}`.
    pub fn rho_st(&self, s: f64, t: f64) -> f64 {
        let e = 2.0 + 2.0 * self.mu;
        let om = 1.0 + self.mu;
        (s.powf(e) + om * om * t * t).powf(1.0 / e)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.x.len() != self.d as usize || p.y.len() != self.k as usize {
            return Err(Error::DimensionMismatch {
                expected_x: self.d as usize,
                expected_y: self.k as usize,
                got_x: p.x.len(),
                got_y: p.y.len(),
            });
        }
        Ok(())
    }
}

/// A point of `R^d_x × R^k_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    /// Euclidean norm of the x-block.
    pub fn x_norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the y-block.
    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Gauge distance from the origin,
/// `ρ(x,y) = (|x|^{2+2μ} + (1+μ)²|y|²)^{1/(2+2μ)}`.
///
/// Zero exactly at the origin; homogeneous of degree one under [`dilate`].
pub fn rho(space: &GrushinSpace, p: &Point) -> Result<f64> {
    space.check_point(p)?;
    Ok(space.rho_st(p.x_norm(), p.y_norm()))
}

/// Anisotropic dilation `δ_λ(x,y) = (λx, λ^{1+μ}y)`, λ > 0.
pub fn dilate(space: &GrushinSpace, lambda: f64, p: &Point) -> Result<Point> {
    space.check_point(p)?;
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let ly = lambda.powf(1.0 + space.mu());
    Ok(Point {
        x: p.x.iter().map(|v| lambda * v).collect(),
        y: p.y.iter().map(|v| ly * v).collect(),
    })
}

/// Gradient adapted to the degenerate vector fields:
/// `∇_μ u = (∂_{x_1}u, …, ∂_{x_d}u, |x|^μ ∂_{y_1}u, …, |x|^μ ∂_{y_k}u)`.
///
/// Uses the field's analytic partials when available, otherwise central
/// differences at two step sizes with Richardson extrapolation.
pub fn grushin_gradient(space: &GrushinSpace, u: &TrialField, p: &Point) -> Result<Vec<f64>> {
    space.check_point(p)?;
    let partials = match u.partials(p) {
        Some(g) => g?,
        None => fd_partials(u, p)?,
    };
    let xm = p.x_norm().powf(space.mu());
    let d = space.d() as usize;
    let mut out = partials;
    for v in out.iter_mut().skip(d) {
        *v *= xm;
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("grushin_gradient"));
    }
    Ok(out)
}

/// Base relative step for finite-difference derivatives. Two-step Richardson
/// extrapolation is applied on top, which keeps relative errors below 1e-6
/// for the gauge powers away from `{x = 0}`.
pub const FD_BASE_STEP: f64 = 1e-4;

/// Exclusion radius around the degenerate set `{x = 0}` used by identity
/// checks; `|∇_μ ρ|` is a 0/0 limit there.
pub const DEGENERATE_EXCLUSION: f64 = 1e-3;

fn fd_partials(u: &TrialField, p: &Point) -> Result<Vec<f64>> {
    let n = p.x.len() + p.y.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let coord = if i < p.x.len() { p.x[i] } else { p.y[i - p.x.len()] };
        let h = FD_BASE_STEP * coord.abs().max(1.0);
        let diff = |h: f64| -> f64 {
            let mut a = p.clone();
            let mut b = p.clone();
            if i < p.x.len() {
                a.x[i] += h;
                b.x[i] -= h;
            } else {
                a.y[i - p.x.len()] += h;
                b.y[i - p.x.len()] -= h;
            }
            (u.evaluate(&a) - u.evaluate(&b)) / (2.0 * h)
        };
        // Richardson: (4 D(h/2) - D(h)) / 3 cancels the O(h^2) term.
        let d1 = diff(h);
        let d2 = diff(h / 2.0);
        let v = (4.0 * d2 - d1) / 3.0;
        if !v.is_finite() {
            return Err(Error::NonFinite("finite-difference partial"));
        }
        out.push(v);
    }
    Ok(out)
}

/// Second-order central-difference approximation of the Grushin laplacian
/// `G_μ u = Δ_x u + |x|^{2μ} Δ_y u`, Richardson-extrapolated over two step
/// sizes. Requires the x-block to stay at least `10·step` away from `{x=0}`.
pub fn fd_grushin_laplacian(
    space: &GrushinSpace,
    u: &TrialField,
    p: &Point,
    step: f64,
) -> Result<f64> {
    space.check_point(p)?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let xn = p.x_norm();
    if xn < 10.0 * step {
        return Err(Error::StepTooLarge { step, dist: xn });
    }
    let lap = |h: f64| -> f64 {
        let u0 = u.evaluate(p);
        let mut dx = 0.0;
        for i in 0..p.x.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            a.x[i] += h;
            b.x[i] -= h;
            dx += (u.evaluate(&a) - 2.0 * u0 + u.evaluate(&b)) / (h * h);
        }
        let mut dy = 0.0;
        for j in 0..p.y.len() {
            let mut a = p.clone();
            let mut b = p.clone();
            a.y[j] += h;
            b.y[j] -= h;
            dy += (u.evaluate(&a) - 2.0 * u0 + u.evaluate(&b)) / (h * h);
        }
        dx + xn.powf(2.0 * space.mu()) * dy
    };
    let l1 = lap(step);
    let l2 = lap(step / 2.0);
    let v = (4.0 * l2 - l1) / 3.0;
    if !v.is_finite() {
        return Err(Error::NonFinite("fd_grushin_laplacian"));
    }
    Ok(v)
}

/// Analytic partial derivatives of the gauge ρ with respect to the raw
/// coordinates (not the Grushin frame):
/// `∂ρ/∂x_i = |x|^{2μ} x_i / ρ^{1+2μ}`, `∂ρ/∂y_j = (1+μ) y_j / ρ^{1+2μ}`.
pub fn rho_partials(space: &GrushinSpace, p: &Point) -> Result<Vec<f64>> {
    space.check_point(p)?;
    let r = rho(space, p)?;
    if r == 0.0 {
        return Err(Error::NonFinite("rho_partials at the origin"));
    }
    let mu = space.mu();
    let denom = r.powf(1.0 + 2.0 * mu);
    let xf = p.x_norm().powf(2.0 * mu);
    let mut out = Vec::with_capacity(p.x.len() + p.y.len());
    out.extend(p.x.iter().map(|xi| xf * xi / denom));
    out.extend(p.y.iter().map(|yj| (1.0 + mu) * yj / denom));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TrialField;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn space111() -> GrushinSpace {
        GrushinSpace::new(1, 1, 1.0).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, space: &GrushinSpace, min_x: f64) -> Point {
        loop {
            let x: Vec<f64> = (0..space.d()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..space.k()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = Point::new(x, y);
            if p.x_norm() >= min_x {
                return p;
            }
        }
    }

    #[test]
    fn q_matches_definition() {
        let s = GrushinSpace::new(2, 3, 0.5).unwrap();
        assert_eq!(s.q(), 2.0 + 1.5 * 3.0);
        assert_eq!(space111().q(), 3.0);
    }

    #[test]
    fn space_rejects_bad_arguments() {
        assert!(GrushinSpace::new(0, 1, 1.0).is_err());
        assert!(GrushinSpace::new(1, 0, 1.0).is_err());
        assert!(GrushinSpace::new(1, 1, 0.0).is_err());
        assert!(GrushinSpace::new(1, 1, -1.0).is_err());
    }

    #[test]
    fn rho_of_origin_is_zero() {
        let s = space111();
        assert_eq!(rho(&s, &Point::new(vec![0.0], vec![0.0])).unwrap(), 0.0);
    }

    #[test]
    fn rho_reduces_to_x_norm_on_y_zero() {
        let s = space111();
        assert_relative_eq!(
            rho(&s, &Point::new(vec![2.0], vec![0.0])).unwrap(),
            2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rho_pure_y_hand_value() {
        // (0, 1) with mu = 1: (4)^{1/4} = sqrt(2)
        let s = space111();
        assert_relative_eq!(
            rho(&s, &Point::new(vec![0.0], vec![1.0])).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rho_rejects_dimension_mismatch() {
        let s = space111();
        assert!(rho(&s, &Point::new(vec![1.0, 2.0], vec![0.0])).is_err());
    }

    #[test]
    fn dilate_identity_and_definition() {
        let s = space111();
        let p = Point::new(vec![1.0], vec![1.0]);
        assert_eq!(dilate(&s, 1.0, &p).unwrap(), p);
        let q = dilate(&s, 2.0, &p).unwrap();
        assert_eq!(q, Point::new(vec![2.0], vec![4.0]));
        assert!(dilate(&s, 0.0, &p).is_err());
        assert!(dilate(&s, -1.0, &p).is_err());
    }

    #[test]
    fn dilate_degree_one_homogeneity_hand_value() {
        let s = space111();
        let p = Point::new(vec![1.0], vec![1.0]);
        let before = rho(&s, &p).unwrap();
        let after = rho(&s, &dilate(&s, 3.0, &p).unwrap()).unwrap();
        assert_relative_eq!(before, 5.0f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(after, 405.0f64.powf(0.25), max_relative = 1e-14);
        assert_relative_eq!(after, 3.0 * before, max_relative = 1e-14);
    }

    #[test]
    fn gradient_of_coordinate_functions() {
        let s = space111();
        let ux = TrialField::from_coordinates(s, |p| p.x[0]);
        let g = grushin_gradient(&s, &ux, &Point::new(vec![0.3], vec![0.7])).unwrap();
        assert_relative_eq!(g[0], 1.0, max_relative = 1e-9);
        assert!(g[1].abs() < 1e-9);

        let uy = TrialField::from_coordinates(s, |p| p.y[0]);
        let g = grushin_gradient(&s, &uy, &Point::new(vec![2.0], vec![0.7])).unwrap();
        assert!(g[0].abs() < 1e-9);
        assert_relative_eq!(g[1], 2.0, max_relative = 1e-9);
    }

    #[test]
    fn gradient_identity_for_rho_at_random_points() {
        // |∇_μ ρ| = |x|^μ / ρ^μ, checked via the finite-difference fallback.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for space in [space111(), GrushinSpace::new(2, 3, 0.5).unwrap(), GrushinSpace::new(3, 1, 2.0).unwrap()] {
            let u = TrialField::from_coordinates(space, move |p: &Point| {
                space.rho_st(p.x_norm(), p.y_norm())
            });
            for _ in 0..100 {
                let p = random_point(&mut rng, &space, DEGENERATE_EXCLUSION);
                let g = grushin_gradient(&space, &u, &p).unwrap();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let expected =
                    (p.x_norm() / rho(&space, &p).unwrap()).powf(space.mu());
                assert_relative_eq!(norm, expected, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn gradient_is_degree_one_under_dilation() {
        // ∇_μ(u ∘ δ_λ)(p) = λ (∇_μ u)(δ_λ p) at sampled points.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = GrushinSpace::new(2, 1, 0.5).unwrap();
        let u = TrialField::from_coordinates(s, move |p: &Point| {
            (p.x[0] + 0.5 * p.x[1]).sin() * (-p.y_norm().powi(2)).exp()
        });
        let lambda = 1.7;
        let u_l = {
            let u = u.clone();
            TrialField::from_coordinates(s, move |p: &Point| {
                u.evaluate(&dilate(&s, lambda, p).unwrap())
            })
        };
        for _ in 0..25 {
            let p = random_point(&mut rng, &s, 0.05);
            let lhs = grushin_gradient(&s, &u_l, &p).unwrap();
            let rhs = grushin_gradient(&s, &u, &dilate(&s, lambda, &p).unwrap()).unwrap();
            for (a, b) in lhs.iter().zip(rhs.iter()) {
                assert_relative_eq!(*a, lambda * b, max_relative = 1e-5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_of_x_squared_is_two() {
        let s = space111();
        let u = TrialField::from_coordinates(s, |p: &Point| p.x[0] * p.x[0]);
        let v = fd_grushin_laplacian(&s, &u, &Point::new(vec![0.9], vec![0.4]), 5e-3).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn laplacian_identity_for_rho() {
        // G_μ ρ = (Q-1) |x|^{2μ} / ρ^{2μ+1} away from {x = 0}.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for space in [space111(), GrushinSpace::new(2, 3, 0.5).unwrap()] {
            let u = TrialField::from_coordinates(space, move |p: &Point| {
                space.rho_st(p.x_norm(), p.y_norm())
            });
            for _ in 0..40 {
                let p = random_point(&mut rng, &space, 0.3);
                let got = fd_grushin_laplacian(&space, &u, &p, 5e-3).unwrap();
                let r = rho(&space, &p).unwrap();
                let expected = (space.q() - 1.0) * p.x_norm().powf(2.0 * space.mu())
                    / r.powf(2.0 * space.mu() + 1.0);
                assert_relative_eq!(got, expected, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn gauge_power_is_numerically_harmonic() {
        // G_μ (ρ^{2-Q}) -> 0 under step refinement, relative to ρ^{-Q}.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let space = space111();
        let q = space.q();
        let u = TrialField::from_coordinates(space, move |p: &Point| {
            space.rho_st(p.x_norm(), p.y_norm()).powf(2.0 - q)
        });
        for _ in 0..40 {
            let p = random_point(&mut rng, &space, 0.2);
            let r = rho(&space, &p).unwrap();
            if !(0.5..=2.0).contains(&r) {
                continue;
            }
            let got = fd_grushin_laplacian(&space, &u, &p, 2e-3).unwrap();
            assert!(
                got.abs() < 1e-3 * r.powf(-q),
                "G_mu(rho^(2-Q)) = {got} not small vs {:.3e}",
                r.powf(-q)
            );
        }
    }

    #[test]
    fn laplacian_rejects_step_near_degenerate_set() {
        let s = space111();
        let u = TrialField::from_coordinates(s, |p: &Point| p.x[0]);
        let e = fd_grushin_laplacian(&s, &u, &Point::new(vec![1e-3], vec![0.5]), 1e-2);
        assert!(matches!(e, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn analytic_rho_partials_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let space = GrushinSpace::new(3, 1, 2.0).unwrap();
        let u = TrialField::from_coordinates(space, move |p: &Point| {
            space.rho_st(p.x_norm(), p.y_norm())
        });
        for _ in 0..30 {
            let p = random_point(&mut rng, &space, 0.1);
            let analytic = rho_partials(&space, &p).unwrap();
            let fd = super::fd_partials(&u, &p).unwrap();
            for (a, b) in analytic.iter().zip(fd.iter()) {
                assert_relative_eq!(*a, *b, max_relative = 1e-6, epsilon = 1e-10);
            }
        }
    }
}
