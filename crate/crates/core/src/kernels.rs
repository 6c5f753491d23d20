//! Hitting densities (Poisson kernels) of hyperbolic, disc and spherical
//! balls, with their series representations.
//!
//! Every density is per unit of the angle it is written in: `Δα` on (−π, π]
//! for the planar models, `Δφ` for the sphere, and the geodesic angle
//! `ψ ∈ [0, π]` between start and exit directions for ℍⁿ, n ≥ 3 (the
//! uniform factor over the remaining directions is integrated out).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::geometry::carnot_spherical;
use crate::specialfn::{self, gauss_2f1_at_one, gauss_2f1_sum, gegenbauer_at_one, SeriesControl};

const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Past this outer radius `cosh` is close to overflowing, and the ℍ² kernels
/// switch to the equivalent `tanh(η/2)` representation.
pub const OVERFLOW_RADIUS: f64 = 300.0;

/// A density together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub density: f64,
    pub terms_used: usize,
    pub truncation_error_bound: f64,
}

impl KernelEvaluation {
    fn exact(density: f64) -> Self {
        Self {
            density,
            terms_used: 0,
            truncation_error_bound: 0.0,
        }
    }
}

fn check_radii(eta: f64, eta_bar: f64) -> Result<()> {
    ensure(eta.is_finite() && eta_bar.is_finite(), || "radii must be finite".into())?;
    ensure(0.0 <= eta && eta < eta_bar, || {
        format!("need 0 <= eta < eta_bar, got eta = {eta}, eta_bar = {eta_bar}")
    })
}

fn sin_half_sq(a: f64) -> f64 {
    (a / 2.0).sin().powi(2)
}

/// Disc-form kernel `(1/2π)(R² − r²)/(R² + r² − 2rR cos Δ)`, written with
/// `(R − r)² + 4rR sin²(Δ/2)` in the denominator.
fn disc_form(r: f64, r_bar: f64, delta: f64) -> f64 {
    INV_2PI * (r_bar - r) * (r_bar + r) / ((r_bar - r).powi(2) + 4.0 * r * r_bar * sin_half_sq(delta))
}

/// Hitting density of the circle of radius `η̄` about `O` in ℍ², started at
/// polar `(η, α)`, as a function of `Δα = α − ᾱ`:
/// `(1/2π)(cosh η̄ − cosh η)/(cosh η cosh η̄ − 1 − sinh η sinh η̄ cos Δα)`.
pub fn poisson_h2(eta: f64, dalpha: f64, eta_bar: f64) -> Result<f64> {
    check_radii(eta, eta_bar)?;
    if eta == 0.0 {
        return Ok(INV_2PI);
    }
    if eta_bar > OVERFLOW_RADIUS {
        return Ok(disc_form((eta / 2.0).tanh(), (eta_bar / 2.0).tanh(), dalpha));
    }
    // numerator 2 sinh((η̄+η)/2) sinh((η̄−η)/2); denominator cosh η̂ − 1
    let num = 2.0 * ((eta_bar + eta) / 2.0).sinh() * ((eta_bar - eta) / 2.0).sinh();
    let den = 2.0 * ((eta_bar - eta) / 2.0).sinh().powi(2) + 2.0 * eta.sinh() * eta_bar.sinh() * sin_half_sq(dalpha);
    Ok(INV_2PI * num / den)
}

/// Fourier partial sum `1/2π + (1/π) Σ_{m=1}^{M} cos(mΔα) qᵐ`,
/// `q = tanh(η/2)/tanh(η̄/2)`, with the tail bound `q^{M+1}/(π(1 − q))`.
pub fn poisson_h2_series(eta: f64, dalpha: f64, eta_bar: f64, terms: usize) -> Result<KernelEvaluation> {
    check_radii(eta, eta_bar)?;
    let q = (eta / 2.0).tanh() / (eta_bar / 2.0).tanh();
    let mut sum = 0.0;
    let mut qm = 1.0;
    for m in 1..=terms {
        qm *= q;
        sum += (m as f64 * dalpha).cos() * qm;
    }
    Ok(KernelEvaluation {
        density: INV_2PI + sum / PI,
        terms_used: terms,
        truncation_error_bound: qm * q / (PI * (1.0 - q)),
    })
}

/// Limit `η̄ → ∞`: `(1/2π)/(cosh η − sinh η cos Δα)`, a density in the
/// boundary angle `ᾱ`.
pub fn poisson_h2_boundary(eta: f64, dalpha: f64) -> Result<f64> {
    ensure(eta >= 0.0 && eta.is_finite(), || format!("need finite eta >= 0, got {eta}"))?;
    let s2 = sin_half_sq(dalpha);
    if eta > OVERFLOW_RADIUS {
        // 2 sinh η ≈ e^η here; the density at Δα = 0 is e^η/2π and may overflow.
        let spread = if s2 > 0.0 { (eta + s2.ln()).exp() } else { 0.0 };
        return Ok(INV_2PI / ((-eta).exp() + spread));
    }
    Ok(INV_2PI / ((-eta).exp() + 2.0 * eta.sinh() * s2))
}

/// Law of the boundary abscissa `x̄` hit from `(x, y)` in the half-plane:
/// Cauchy with location `x` and scale `y`.
pub fn cauchy_hitting_density(x: f64, y: f64, x_bar: f64) -> Result<f64> {
    ensure(y > 0.0 && y.is_finite(), || format!("need y > 0, got {y}"))?;
    Ok(y / (PI * ((x_bar - x).powi(2) + y * y)))
}

/// ℍ² kernel in half-plane coordinates of both points,
/// `(1/2π)[(x̄² + ȳ² + 1) y − (x² + y² + 1) ȳ]/((x − x̄)² + (y − ȳ)²)`,
/// a density in the polar angle `ᾱ` of the exit point. With `ȳ = 0` it is
/// the boundary law, `(1/2π)(1 + x̄²) y/((x − x̄)² + y²)`.
pub fn poisson_h2_cartesian(x: f64, y: f64, x_bar: f64, y_bar: f64) -> Result<f64> {
    ensure(y > 0.0, || format!("need y > 0, got {y}"))?;
    ensure(y_bar >= 0.0, || format!("need y_bar >= 0, got {y_bar}"))?;
    let a = x * x + y * y + 1.0;
    let b = x_bar * x_bar + y_bar * y_bar + 1.0;
    let num = b * y - a * y_bar;
    let den = (x - x_bar).powi(2) + (y - y_bar).powi(2);
    ensure(den > 0.0, || "start and exit points coincide".into())?;
    ensure(num > 0.0, || "start point is not inside the circle through the exit point".into())?;
    Ok(INV_2PI * num / den)
}

/// Euclidean ball kernel marginal in ψ:
/// `(Ωₙ₋₁/Ωₙ)(1 − ρ²)/(1 − 2ρ cos ψ + ρ²)^{n/2} sinⁿ⁻²ψ`.
pub fn euclidean_poisson_nd(n: usize, rho: f64, psi: f64) -> Result<f64> {
    ensure(n >= 2, || format!("dimension must be >= 2, got {n}"))?;
    ensure((0.0..1.0).contains(&rho), || format!("need 0 <= rho < 1, got {rho}"))?;
    check_psi(psi)?;
    let den = (1.0 - rho).powi(2) + 4.0 * rho * sin_half_sq(psi);
    Ok(specialfn::surface_area_ratio(n)? * (1.0 - rho * rho) / den.powf(n as f64 / 2.0) * psi.sin().powi(n as i32 - 2))
}

/// Limiting boundary density over ℝⁿ⁻¹ from `(x, y)` after recentering at
/// the foot of the start point:
/// `Γ(n−1)/(π^{(n−1)/2} Γ((n−1)/2)) · (y/(y² + |x|²))^{n−1}`.
pub fn cauchy_type_hn(n: usize, x: &[f64], y: f64) -> Result<f64> {
    ensure(n >= 2, || format!("dimension must be >= 2, got {n}"))?;
    ensure(x.len() == n - 1, || format!("expected {} boundary coordinates, got {}", n - 1, x.len()))?;
    ensure(y > 0.0, || format!("need y > 0, got {y}"))?;
    let m = (n - 1) as f64;
    let log_c = specialfn::log_gamma(m)? - 0.5 * m * PI.ln() - specialfn::log_gamma(m / 2.0)?;
    let x2: f64 = x.iter().map(|v| v * v).sum();
    Ok((log_c + m * (y / (y * y + x2)).ln()).exp())
}

/// Disc-model kernel `(1/2π)(r̄² − r²)/(r̄² + r² − 2rr̄ cos Δθ)`.
pub fn poisson_d2(r: f64, dtheta: f64, r_bar: f64) -> Result<f64> {
    ensure(0.0 <= r && r < r_bar && r_bar < 1.0, || {
        format!("need 0 <= r < r_bar < 1, got r = {r}, r_bar = {r_bar}")
    })?;
    Ok(disc_form(r, r_bar, dtheta))
}

/// Boundary kernel of the disc, `(1/2π)(1 − r²)/(1 + r² − 2r cos Δθ)`.
pub fn poisson_d2_boundary(r: f64, dtheta: f64) -> Result<f64> {
    ensure((0.0..1.0).contains(&r), || format!("need 0 <= r < 1, got {r}"))?;
    Ok(disc_form(r, 1.0, dtheta))
}

/// Hitting density of the circle of colatitude `θ̄` on S² from colatitude
/// `θ < θ̄`, as a function of `Δφ`:
/// `(1/2π)(cos θ − cos θ̄)/(1 − cos θ cos θ̄ − sin θ sin θ̄ cos Δφ)`.
pub fn poisson_sphere(theta: f64, dphi: f64, theta_bar: f64) -> Result<f64> {
    ensure(0.0 <= theta && theta < theta_bar && theta_bar < PI, || {
        format!("need 0 <= theta < theta_bar < pi, got theta = {theta}, theta_bar = {theta_bar}")
    })?;
    if theta == 0.0 {
        return Ok(INV_2PI);
    }
    let num = 2.0 * ((theta_bar + theta) / 2.0).sin() * ((theta_bar - theta) / 2.0).sin();
    let hat = carnot_spherical(theta, theta_bar, dphi);
    let den = 2.0 * (hat / 2.0).sin().powi(2);
    Ok(INV_2PI * num / den)
}

fn check_psi(psi: f64) -> Result<()> {
    ensure((0.0..=PI).contains(&psi), || format!("psi must lie in [0, pi], got {psi}"))
}

/// Outer radius of a ball in ℍⁿ; `Infinite` selects the boundary limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterRadius {
    Finite(f64),
    Infinite,
}

/// Gegenbauer expansion of the ℍⁿ kernel with its radial coefficients
/// precomputed, so that many angles can be evaluated cheaply.
///
/// The density is
/// `(Ωₙ₋₁/Ωₙ) sinⁿ⁻²ψ Σₖ aₖ C_k^{(λ)}(cos ψ)`, `λ = (n−2)/2`, with
/// `aₖ = (k/λ + 1) tᵏ F(k, 1−n/2; k+n/2; t²) / (t̄ᵏ F(k, 1−n/2; k+n/2; t̄²))`,
/// `t = tanh(η/2)`, `t̄ = tanh(η̄/2)`. At `η̄ = ∞` the denominator is Gauss's
/// value of `F` at 1.
#[derive(Debug, Clone)]
pub struct HnKernel {
    n: usize,
    lambda: f64,
    norm: f64,
    coeffs: Vec<f64>,
    tail_bound: f64,
}

impl HnKernel {
    pub fn new(n: usize, eta: f64, outer: OuterRadius, ctrl: SeriesControl) -> Result<Self> {
        ensure((3..=crate::exitprob::MAX_DIMENSION).contains(&n), || {
            format!("dimension must lie in 3..={}, got {n}", crate::exitprob::MAX_DIMENSION)
        })?;
        match outer {
            OuterRadius::Finite(eta_bar) => check_radii(eta, eta_bar)?,
            OuterRadius::Infinite => {
                ensure(eta >= 0.0 && eta.is_finite(), || format!("need finite eta >= 0, got {eta}"))?
            }
        }
        let lambda = (n as f64 - 2.0) / 2.0;
        let norm = specialfn::surface_area_ratio(n)?;
        if eta == 0.0 {
            return Ok(Self {
                n,
                lambda,
                norm,
                coeffs: vec![1.0],
                tail_bound: 0.0,
            });
        }
        let b = 1.0 - n as f64 / 2.0;
        let t = (eta / 2.0).tanh();
        let (t_bar, x_bar) = match outer {
            OuterRadius::Finite(eb) => {
                let tb = (eb / 2.0).tanh();
                (tb, tb * tb)
            }
            OuterRadius::Infinite => (1.0, 1.0),
        };
        let q = t / t_bar;
        let mut coeffs = vec![1.0];
        // Envelope |aₖ| C_k(1) bounds every term since |C_k(cos ψ)| ≤ C_k(1).
        let mut prev_env = 1.0;
        let mut series_err = 0.0;
        for k in 1..ctrl.max_terms() {
            let kf = k as f64;
            let c = kf + n as f64 / 2.0;
            let num = gauss_2f1_sum(kf, b, c, t * t, ctrl)?;
            let den_value = match outer {
                OuterRadius::Finite(_) => {
                    let d = gauss_2f1_sum(kf, b, c, x_bar, ctrl)?;
                    series_err += d.tail_bound / d.value.abs();
                    d.value
                }
                OuterRadius::Infinite => gauss_2f1_at_one(kf, b, c)?,
            };
            series_err += num.tail_bound / num.value.abs();
            let a = (kf / lambda + 1.0) * q.powi(k as i32) * num.value / den_value;
            coeffs.push(a);
            let env = a.abs() * gegenbauer_at_one(k, lambda)?;
            let ratio = env / prev_env;
            prev_env = env;
            if env == 0.0 {
                return Ok(Self::finish(n, lambda, norm, coeffs, 0.0));
            }
            // The envelope ratio decreases towards q, so past its peak the tail is geometric.
            if ratio < 1.0 && kf > 2.0 {
                let tail = env * ratio / (1.0 - ratio);
                if tail < ctrl.tol() {
                    let bound = tail + series_err * coeffs.len() as f64 * ctrl.tol();
                    return Ok(Self::finish(n, lambda, norm, coeffs, bound));
                }
            }
        }
        Err(Error::Convergence {
            what: "Gegenbauer kernel series",
            terms: ctrl.max_terms(),
            partial_sum: coeffs.iter().sum(),
        })
    }

    fn finish(n: usize, lambda: f64, norm: f64, coeffs: Vec<f64>, tail_bound: f64) -> Self {
        Self {
            n,
            lambda,
            norm,
            coeffs,
            tail_bound,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Radial coefficients `a₀ = 1, a₁, …`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Marginal density of ψ; zero at ψ = 0 and ψ = π by continuity.
    pub fn evaluate(&self, psi: f64) -> Result<KernelEvaluation> {
        check_psi(psi)?;
        let s = psi.sin().powi(self.n as i32 - 2);
        let x = psi.cos();
        // Inline Gegenbauer recurrence, summed on the fly.
        let lam = self.lambda;
        let mut prev = 1.0;
        let mut cur = 2.0 * lam * x;
        let mut sum = self.coeffs[0];
        if self.coeffs.len() > 1 {
            sum += self.coeffs[1] * cur;
        }
        for (j, a) in self.coeffs.iter().enumerate().skip(2) {
            let jf = j as f64;
            let next = (2.0 * (jf + lam - 1.0) * x * cur - (jf + 2.0 * lam - 2.0) * prev) / jf;
            prev = cur;
            cur = next;
            sum += a * cur;
        }
        Ok(KernelEvaluation {
            density: self.norm * s * sum,
            terms_used: self.coeffs.len(),
            truncation_error_bound: self.norm * s * self.tail_bound,
        })
    }

    pub fn density(&self, psi: f64) -> f64 {
        self.evaluate(psi).map(|e| e.density).unwrap_or(f64::NAN)
    }
}

/// Marginal exit-angle density for the ball of radius `η̄` in ℍⁿ, n ≥ 3.
pub fn poisson_hn(n: usize, eta: f64, eta_bar: f64, psi: f64, ctrl: SeriesControl) -> Result<KernelEvaluation> {
    check_psi(psi)?;
    HnKernel::new(n, eta, OuterRadius::Finite(eta_bar), ctrl)?.evaluate(psi)
}

/// Boundary (`η̄ → ∞`) limit of [`poisson_hn`].
pub fn poisson_hn_infinite(n: usize, eta: f64, psi: f64, ctrl: SeriesControl) -> Result<KernelEvaluation> {
    check_psi(psi)?;
    HnKernel::new(n, eta, OuterRadius::Infinite, ctrl)?.evaluate(psi)
}

/// Uniform marginal `(Ωₙ₋₁/Ωₙ) sinⁿ⁻²ψ`.
pub fn uniform_marginal(n: usize, psi: f64) -> Result<f64> {
    check_psi(psi)?;
    Ok(specialfn::surface_area_ratio(n)? * psi.sin().powi(n as i32 - 2))
}

impl From<f64> for KernelEvaluation {
    fn from(density: f64) -> Self {
        Self::exact(density)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_angle_to_x, carnot_hyperbolic, halfspace_to_polar_h2, polar_to_halfspace_h2, HalfSpacePoint, PolarPoint};
    use crate::specialfn::gegenbauer;
    use crate::stats::integrate;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        integrate(f, a, b, 1e-13).unwrap().0
    }

    #[test]
    fn h2_at_centre_is_uniform() {
        for &d in &[-3.0, 0.0, 1.0, PI] {
            assert_eq!(poisson_h2(0.0, d, 1.7).unwrap(), INV_2PI);
        }
        assert!(poisson_h2(1.0, 0.0, 1.0).is_err());
        assert!(poisson_h2(-0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn h2_carnot_form() {
        for &(e, eb, d) in &[(0.3, 1.0, 0.4), (1.2, 2.5, -2.0), (2.0, 2.1, 3.0)] {
            let hat = carnot_hyperbolic(e, eb, d);
            let v = INV_2PI * (f64::cosh(eb) - f64::cosh(e)) / (hat.cosh() - 1.0);
            assert!((poisson_h2(e, d, eb).unwrap() - v).abs() < 1e-10 * v);
            let raw = INV_2PI * (f64::cosh(eb) - f64::cosh(e))
                / (f64::cosh(e) * f64::cosh(eb) - 1.0 - f64::sinh(e) * f64::sinh(eb) * d.cos());
            assert!((poisson_h2(e, d, eb).unwrap() - raw).abs() < 1e-10 * raw);
        }
    }

    #[test]
    fn h2_series_matches_closed_form() {
        let s = poisson_h2_series(0.8, 0.3, 1.5, 60).unwrap();
        assert!((s.density - poisson_h2(0.8, 0.3, 1.5).unwrap()).abs() < 1e-10);
        assert_eq!(poisson_h2_series(0.8, 0.3, 1.5, 0).unwrap().density, INV_2PI);
        assert_eq!(poisson_h2_series(0.0, 2.0, 1.5, 30).unwrap().density, INV_2PI);
    }

    #[test]
    fn h2_series_error_shrinks_like_q() {
        let (e, eb, d) = (0.8, 1.5, 0.3);
        let q = (e / 2.0f64).tanh() / (eb / 2.0f64).tanh();
        let exact = poisson_h2(e, d, eb).unwrap();
        // Compare bounds at M and M+2 (single errors oscillate with cos(mΔα)).
        let b10 = poisson_h2_series(e, d, eb, 10).unwrap().truncation_error_bound;
        let b12 = poisson_h2_series(e, d, eb, 12).unwrap().truncation_error_bound;
        assert!(((b12 / b10) - q * q).abs() < 1e-12);
        for m in [5, 10, 20] {
            let s = poisson_h2_series(e, d, eb, m).unwrap();
            assert!((s.density - exact).abs() <= s.truncation_error_bound);
        }
    }

    #[test]
    fn h2_large_outer_radius_uses_bounded_form() {
        let v = poisson_h2(1.0, 0.5, 400.0).unwrap();
        let b = poisson_h2_boundary(1.0, 0.5).unwrap();
        assert!(v.is_finite() && (v - b).abs() < 1e-12);
        let far = poisson_h2_boundary(800.0, 0.1).unwrap();
        assert!((0.0..1e-300).contains(&far));
        assert!(!poisson_h2_boundary(800.0, 0.0).unwrap().is_nan());
        let (a, b) = (poisson_h2_boundary(300.0, 0.2).unwrap(), poisson_h2_boundary(300.5, 0.2).unwrap());
        assert!((b / a - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn boundary_kernel_properties() {
        assert_eq!(poisson_h2_boundary(0.0, 1.0).unwrap(), INV_2PI);
        let mut sup: f64 = 0.0;
        for i in 0..=200 {
            let d = -PI + 2.0 * PI * i as f64 / 200.0;
            sup = sup.max((poisson_h2(1.0, d, 12.0).unwrap() - poisson_h2_boundary(1.0, d).unwrap()).abs());
        }
        assert!(sup < 1e-4);
        for &e in &[0.3, 1.0, 3.0] {
            let v = quad(|a| poisson_h2_boundary(e, a).unwrap(), -PI, PI);
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_law_from_standard_point() {
        for i in -50..=50 {
            let xb = i as f64 * 0.37;
            let v = cauchy_hitting_density(0.0, 1.0, xb).unwrap();
            assert!((v - 1.0 / (PI * (1.0 + xb * xb))).abs() < 1e-15);
        }
        assert!(cauchy_hitting_density(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cauchy_law_is_boundary_kernel_in_abscissa() {
        for &(x, y) in &[(0.0, 1.0), (0.7, 0.4), (-1.5, 2.2)] {
            let p = halfspace_to_polar_h2(&HalfSpacePoint::planar(x, y).unwrap()).unwrap();
            for i in 0..40 {
                let a_bar = -PI + 2.0 * PI * (i as f64 + 0.25) / 40.0;
                let Ok(xb) = boundary_angle_to_x(a_bar) else { continue };
                let lhs = cauchy_hitting_density(x, y, xb).unwrap() * (1.0 + xb * xb) / 2.0;
                let rhs = poisson_h2_boundary(p.eta(), p.alpha() - a_bar).unwrap();
                assert!((lhs - rhs).abs() < 1e-10 * rhs, "({x},{y}) abar={a_bar}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn cauchy_law_normalized() {
        // ∫_{−L}^{L} plus the exact tails 2·(1/π)(π/2 − atan(L)) shifted by location.
        let (x, y) = (0.4, 0.7);
        let l = 200.0;
        let core = quad(|t| cauchy_hitting_density(x, y, t).unwrap(), x - l, x + l);
        let tail = 2.0 * (FRAC_PI_2 - (l / y).atan()) / PI;
        assert!((core + tail - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cartesian_kernel_matches_polar_kernel() {
        for &(e, eb, a, ab) in &[(0.5, 1.3, 0.2, 1.0), (1.1, 2.0, -2.0, 2.5), (0.2, 0.9, 3.0, -0.3)] {
            let z = polar_to_halfspace_h2(&PolarPoint::planar(e, a).unwrap()).unwrap();
            let zb = polar_to_halfspace_h2(&PolarPoint::planar(eb, ab).unwrap()).unwrap();
            let c = poisson_h2_cartesian(z.x()[0], z.y(), zb.x()[0], zb.y()).unwrap();
            let p = poisson_h2(e, a - ab, eb).unwrap();
            assert!((c - p).abs() < 1e-10 * p, "{c} vs {p}");
        }
    }

    #[test]
    fn cartesian_kernel_on_the_boundary() {
        // ȳ = 0 from (0, 1): (1/2π)(1 + x̄²)/(x̄² + 1) = 1/2π, and with dᾱ/dx̄ it is Cauchy.
        assert!((poisson_h2_cartesian(0.0, 1.0, 0.0, 0.0).unwrap() - INV_2PI).abs() < 1e-15);
        for &xb in &[-2.0, 0.3, 5.0] {
            let v = poisson_h2_cartesian(0.3, 0.8, xb, 0.0).unwrap() * 2.0 / (1.0 + xb * xb);
            assert!((v - cauchy_hitting_density(0.3, 0.8, xb).unwrap()).abs() < 1e-14);
        }
        assert!(poisson_h2_cartesian(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn euclidean_small_domain_limit() {
        let s = 1e-3;
        let (e, eb) = (0.6, 1.4);
        for i in 0..=100 {
            let d = -PI + 2.0 * PI * i as f64 / 100.0;
            let h = poisson_h2(s * e, d, s * eb).unwrap();
            let euclid = INV_2PI * (eb * eb - e * e) / (eb * eb + e * e - 2.0 * e * eb * d.cos());
            assert!((h - euclid).abs() < 1e-4);
        }
    }

    #[test]
    fn disc_kernels() {
        assert_eq!(poisson_d2(0.0, 1.0, 0.5).unwrap(), INV_2PI);
        assert_eq!(poisson_d2_boundary(0.0, 1.0).unwrap(), INV_2PI);
        assert!(poisson_d2(0.5, 0.0, 0.5).is_err());
        for &(r, rb) in &[(0.2, 0.6), (0.5, 0.95)] {
            assert!((quad(|a| poisson_d2(r, a, rb).unwrap(), -PI, PI) - 1.0).abs() < 1e-10);
        }
        assert!((quad(|a| poisson_d2_boundary(0.7, a).unwrap(), -PI, PI) - 1.0).abs() < 1e-10);
        for &e in &[0.1, 1.0, 4.0] {
            for &d in &[0.0, 1.0, 3.0] {
                let r = (e / 2.0f64).tanh();
                let a = poisson_d2_boundary(r, d).unwrap();
                let b = poisson_h2_boundary(e, d).unwrap();
                assert!((a - b).abs() < 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn sphere_kernel_cases() {
        assert_eq!(poisson_sphere(0.0, 2.0, 1.0).unwrap(), INV_2PI);
        for &t in &[0.2, 0.9, 1.4] {
            for &d in &[0.0, 1.0, -2.5] {
                let v = poisson_sphere(t, d, FRAC_PI_2).unwrap();
                let w = INV_2PI * f64::cos(t) / (1.0 - f64::sin(t) * f64::cos(d));
                assert!((v - w).abs() < 1e-12 * w);
            }
        }
        assert!(poisson_sphere(1.2, 0.0, 0.6).is_err());
        for &(t, tb) in &[(0.6, 1.2), (0.3, 2.8), (1.5, 2.0)] {
            let (c, cb, s, sb) = (f64::cos(t), f64::cos(tb), f64::sin(t), f64::sin(tb));
            let (a, b) = (1.0 - c * cb, -s * sb);
            let closed = 2.0 * PI / (a * a - b * b).sqrt();
            let num = quad(|p| 1.0 / (a + b * p.cos()), -PI, PI);
            assert!((num - closed).abs() < 1e-10 * closed);
            assert!((quad(|p| poisson_sphere(t, p, tb).unwrap(), -PI, PI) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_formula_continues_to_hyperbolic() {
        // cos → cosh, sin → sinh with the sign pattern of the hyperbolic formula.
        let grid: [(f64, f64, f64); 3] = [(0.3, 0.9, 0.4), (1.1, 1.7, -2.0), (0.5, 2.5, 3.0)];
        for &(e, eb, d) in &grid {
            let sphere_like = |c: f64, cb: f64, s: f64, sb: f64| INV_2PI * (c - cb) / (1.0 - c * cb - s * sb * d.cos());
            let continued = sphere_like(f64::cosh(e), f64::cosh(eb), f64::sinh(e), -f64::sinh(eb));
            // (cosh η − cosh η̄)/(1 − cosh η cosh η̄ + sinh η sinh η̄ cos Δ) is the hyperbolic kernel.
            let h = poisson_h2(e, d, eb).unwrap();
            assert!((continued - h).abs() < 1e-12 * h);
        }
    }

    // Series with the explicit Γ coefficients, before the Ω-ratio simplification.
    fn hn_raw_oracle(n: usize, eta: f64, eta_bar: f64, psi: f64) -> f64 {
        let nf = n as f64;
        let lam = (nf - 2.0) / 2.0;
        let lg = |x: f64| specialfn::log_gamma(x).unwrap();
        let pref = (2.0 * lg(lam)).exp() * psi.sin().powf(nf - 2.0) / (2f64.powf(3.0 - nf) * PI);
        let (t, tb) = ((eta / 2.0).tanh(), (eta_bar / 2.0).tanh());
        let ctrl = SeriesControl::new(1e-15, 1_000_000).unwrap();
        let mut sum = 0.0;
        for k in 0..120 {
            let kf = k as f64;
            let c = kf + nf / 2.0;
            let f_num = crate::specialfn::gauss_2f1(kf, 1.0 - nf / 2.0, c, t * t, ctrl).unwrap();
            let f_den = crate::specialfn::gauss_2f1(kf, 1.0 - nf / 2.0, c, tb * tb, ctrl).unwrap();
            let weight = (lg(kf + 1.0) - lg(kf + nf - 2.0)).exp() * (kf + lam);
            let ratio = (t / tb).powi(k) * f_num / f_den;
            sum += weight * ratio * gegenbauer_at_one(k as usize, lam).unwrap() * gegenbauer(k as usize, lam, psi.cos()).unwrap();
        }
        pref * sum
    }

    #[test]
    fn hn_matches_raw_gamma_series() {
        let ctrl = SeriesControl::default();
        let v = poisson_hn(3, 0.5, 1.2, 1.0, ctrl).unwrap();
        let o = hn_raw_oracle(3, 0.5, 1.2, 1.0);
        assert!((v.density - o).abs() < 1e-9, "{} vs {o}", v.density);
        for &(n, e, eb, p) in &[(4, 0.3, 1.0, 2.0), (5, 1.0, 1.6, 0.7), (6, 0.7, 2.0, 2.9)] {
            let v = poisson_hn(n, e, eb, p, ctrl).unwrap();
            let o = hn_raw_oracle(n, e, eb, p);
            assert!((v.density - o).abs() < 1e-9, "n={n}: {} vs {o}", v.density);
        }
    }

    #[test]
    fn hn_centre_is_uniform_marginal() {
        let ctrl = SeriesControl::default();
        for n in 3..=7 {
            for &p in &[0.3, 1.5, 2.8] {
                let u = uniform_marginal(n, p).unwrap();
                assert_eq!(poisson_hn(n, 0.0, 1.0, p, ctrl).unwrap().density, u);
                assert_eq!(poisson_hn_infinite(n, 0.0, p, ctrl).unwrap().density, u);
                let tiny = poisson_hn(n, 1e-9, 1.0, p, ctrl).unwrap().density;
                assert!((tiny - u).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn hn_endpoints_vanish() {
        let k = HnKernel::new(3, 0.5, OuterRadius::Finite(1.2), SeriesControl::default()).unwrap();
        assert_eq!(k.evaluate(0.0).unwrap().density, 0.0);
        assert!(k.evaluate(PI).unwrap().density.abs() < 1e-15);
        assert!(k.evaluate(-0.1).is_err());
        assert!(HnKernel::new(2, 0.5, OuterRadius::Finite(1.2), SeriesControl::default()).is_err());
        assert!(HnKernel::new(3, 1.5, OuterRadius::Finite(1.2), SeriesControl::default()).is_err());
    }

    #[test]
    fn hn_reports_nonconvergence() {
        let ctrl = SeriesControl::new(1e-12, 10).unwrap();
        assert!(matches!(poisson_hn(3, 1.1, 1.2, 1.0, ctrl), Err(Error::Convergence { .. })));
    }

    #[test]
    fn hn_normalized() {
        let ctrl = SeriesControl::default();
        for n in 3..=6 {
            for &(e, eb) in &[(0.5, 1.2), (1.0, 1.5), (0.2, 3.0)] {
                let k = HnKernel::new(n, e, OuterRadius::Finite(eb), ctrl).unwrap();
                let v = quad(|p| k.density(p), 0.0, PI);
                assert!((v - 1.0).abs() < 1e-8, "n={n} ({e},{eb}): {v}");
            }
        }
    }

    #[test]
    fn hn_infinite_normalized_and_limit() {
        let ctrl = SeriesControl::new(1e-9, 200_000).unwrap();
        for n in 3..=5 {
            for &e in &[0.3, 1.0] {
                let inf = HnKernel::new(n, e, OuterRadius::Infinite, ctrl).unwrap();
                let v = quad(|p| inf.density(p), 0.0, PI);
                assert!((v - 1.0).abs() < 1e-7, "n={n} eta={e}: {v}");
                // ₂F₁ at tanh²(7) sits 3e−6 from 1 and needs ~10⁶ terms.
                let slow = SeriesControl::new(1e-9, 4_000_000).unwrap();
                let fin = HnKernel::new(n, e, OuterRadius::Finite(14.0), slow).unwrap();
                for i in 1..20 {
                    let p = PI * i as f64 / 20.0;
                    assert!((fin.density(p) - inf.density(p)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn hn_euclidean_limit() {
        let ctrl = SeriesControl::default();
        let s = 1e-3;
        for n in [3, 4] {
            let k = HnKernel::new(n, 0.5 * s, OuterRadius::Finite(1.2 * s), ctrl).unwrap();
            for i in 0..=40 {
                let p = PI * i as f64 / 40.0;
                let e = euclidean_poisson_nd(n, 0.5 / 1.2, p).unwrap();
                assert!((k.density(p) - e).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn hn_truncation_bound_covers_tight_evaluation() {
        let loose = SeriesControl::new(1e-5, 200_000).unwrap();
        let tight = SeriesControl::default();
        for &p in &[0.4, 1.3, 2.6] {
            let a = poisson_hn(4, 0.9, 1.4, p, loose).unwrap();
            let b = poisson_hn(4, 0.9, 1.4, p, tight).unwrap();
            assert!((a.density - b.density).abs() <= a.truncation_error_bound + 1e-12);
            assert!(a.terms_used < b.terms_used);
        }
    }

    #[test]
    fn euclidean_nd_kernel() {
        for n in 2..=6 {
            assert!((euclidean_poisson_nd(n, 0.0, 1.0).unwrap() - uniform_marginal(n, 1.0).unwrap()).abs() < 1e-15);
            for &r in &[0.3, 0.8] {
                let v = quad(|p| euclidean_poisson_nd(n, r, p).unwrap(), 0.0, PI);
                assert!((v - 1.0).abs() < 1e-10, "n={n} rho={r}: {v}");
            }
        }
        assert!(euclidean_poisson_nd(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn cauchy_type_density() {
        for &(x, y) in &[(0.0, 1.0), (1.3, 0.5)] {
            let v = cauchy_type_hn(2, &[x], y).unwrap();
            assert!((v - y / (PI * (y * y + x * x))).abs() < 1e-14);
        }
        // n = 3: polar quadrature over ℝ² with exact tail y²/(y² + R²) beyond radius R.
        let y = 0.8;
        let r_max = 100.0;
        let core = quad(|r| 2.0 * PI * r * cauchy_type_hn(3, &[r, 0.0], y).unwrap(), 0.0, r_max);
        let tail = y * y / (y * y + r_max * r_max);
        assert!((core + tail - 1.0).abs() < 1e-6);
        for n in 2..=6 {
            let peak = cauchy_type_hn(n, &vec![0.0; n - 1], y).unwrap();
            let m = (n - 1) as f64;
            let c = (specialfn::log_gamma(m).unwrap() - 0.5 * m * PI.ln() - specialfn::log_gamma(m / 2.0).unwrap()).exp();
            assert!((peak - c * y.powf(-m)).abs() < 1e-12 * peak);
            assert!(cauchy_type_hn(n, &vec![0.1; n - 1], y).unwrap() < peak);
        }
    }

    proptest! {
        #[test]
        fn planar_kernels_positive(e in 0.0..3.0f64, gap in 0.01..3.0f64, d in -PI..PI) {
            prop_assert!(poisson_h2(e, d, e + gap).unwrap() > 0.0);
            prop_assert!(poisson_h2_boundary(e, d).unwrap() > 0.0);
            let r = (e / 2.0).tanh();
            let rb = ((e + gap) / 2.0).tanh();
            prop_assert!(poisson_d2(r, d, rb).unwrap() > 0.0);
            let t = e / 3.0 * 2.5;
            prop_assert!(poisson_sphere(t, d, (t + gap / 3.0 * 0.6).min(3.1)).unwrap() > 0.0);
        }

        #[test]
        fn disc_and_hyperbolic_agree(e in 0.0..5.0f64, gap in 0.05..3.0f64, d in -PI..PI) {
            let eb = e + gap;
            let h = poisson_h2(e, d, eb).unwrap();
            let dd = poisson_d2((e / 2.0).tanh(), d, (eb / 2.0).tanh()).unwrap();
            prop_assert!((h - dd).abs() < 1e-12 * h.max(1.0));
        }

        #[test]
        fn hn_density_nonnegative(n in 3usize..7, e in 0.05..1.5f64, gap in 0.1..1.5f64, p in 0.0..PI) {
            let v = poisson_hn(n, e, e + gap, p, SeriesControl::default()).unwrap();
            prop_assert!(v.density >= -1e-12);
            prop_assert!(v.truncation_error_bound.is_finite());
        }
    }
}
