//! Coordinate charts, distances and Carnot relations for ℍⁿ, 𝔻² and S².
//!
//! The half-space model is `{(x, y) : x ∈ ℝⁿ⁻¹, y > 0}` with origin
//! `O = (0, …, 0, 1)`. Geodesic polar coordinates `(η, α₁, …, αₙ₋₁)` about
//! `O` use the direction vector
//!
//! ```text
//! u₁ = cos α₁, u₂ = sin α₁ cos α₂, …, uₙ = sin α₁ ⋯ sin αₙ₋₁
//! ```
//!
//! where the last component is the vertical one. For n = 2 this is the
//! familiar `(cos α, sin α)` and the chart reduces to
//! `x = sinh η cos α / (cosh η − sinh η sin α)`, `y = 1 / (cosh η − sinh η sin α)`.
//!
//! At η = 0 the angles are undefined; they are reported as 0.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{ensure, Error, Result};

/// Arguments of `acosh`/`acos` within this distance of the valid range are
/// treated as rounding noise and clamped.
pub const CLAMP_TOL: f64 = 1e-12;

/// Reduces an angle to the principal range (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

fn acosh_clamped(c: f64) -> f64 {
    if c <= 1.0 {
        0.0
    } else {
        c.acosh()
    }
}

fn acos_clamped(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

/// A point of the half-space model.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    x: Vec<f64>,
    y: f64,
}

impl HalfSpacePoint {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        ensure(y > 0.0 && y.is_finite(), || {
            format!("half-space point needs finite y > 0, got y = {y}")
        })?;
        ensure(x.iter().all(|v| v.is_finite()), || {
            "half-space point has a non-finite x component".to_string()
        })?;
        Ok(Self { x, y })
    }

    pub fn planar(x: f64, y: f64) -> Result<Self> {
        Self::new(vec![x], y)
    }

    /// The origin `O = (0, …, 0, 1)` of ℍⁿ.
    pub fn origin(n: usize) -> Self {
        assert!(n >= 2, "dimension must be at least 2");
        Self {
            x: vec![0.0; n - 1],
            y: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `cosh` of the hyperbolic distance to the origin.
    pub fn cosh_eta(&self) -> f64 {
        let x2: f64 = self.x.iter().map(|v| v * v).sum();
        (x2 + self.y * self.y + 1.0) / (2.0 * self.y)
    }

    /// Image under the inversion `z ↦ z / |z|²` in the unit sphere, an
    /// isometry fixing `O`.
    pub fn inverted(&self) -> Self {
        let r2: f64 = self.x.iter().map(|v| v * v).sum::<f64>() + self.y * self.y;
        Self {
            x: self.x.iter().map(|v| v / r2).collect(),
            y: self.y / r2,
        }
    }
}

/// Geodesic polar coordinates about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint {
    eta: f64,
    angles: Vec<f64>,
}

impl PolarPoint {
    /// Builds a point from `η` and `n − 1` angles. The first `n − 2` angles
    /// must lie in `[0, π]`; the last one is wrapped into (−π, π].
    pub fn new(eta: f64, mut angles: Vec<f64>) -> Result<Self> {
        ensure(eta >= 0.0 && eta.is_finite(), || {
            format!("polar radius must be finite and >= 0, got {eta}")
        })?;
        ensure(!angles.is_empty(), || "polar point needs at least one angle".into())?;
        let last = angles.len() - 1;
        for (i, a) in angles.iter_mut().enumerate() {
            ensure(a.is_finite(), || "non-finite polar angle".into())?;
            if i == last {
                *a = wrap_angle(*a);
            } else {
                ensure((0.0..=PI).contains(a), || {
                    format!("polar angle {} must lie in [0, pi], got {a}", i + 1)
                })?;
            }
        }
        if eta == 0.0 {
            angles.iter_mut().for_each(|a| *a = 0.0);
        }
        Ok(Self { eta, angles })
    }

    /// A point of ℍ² given by `(η, α)`.
    pub fn planar(eta: f64, alpha: f64) -> Result<Self> {
        Self::new(eta, vec![alpha])
    }

    pub fn dim(&self) -> usize {
        self.angles.len() + 1
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// The single angle of a planar point (the last angle in general).
    pub fn alpha(&self) -> f64 {
        *self.angles.last().expect("polar point has angles")
    }

    /// Unit direction vector `u ∈ Sⁿ⁻¹`, vertical component last.
    pub fn direction(&self) -> Vec<f64> {
        direction_from_angles(&self.angles)
    }
}

pub(crate) fn direction_from_angles(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut u = Vec::with_capacity(n);
    let mut sin_prod = 1.0;
    for a in angles {
        u.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    u.push(sin_prod);
    u
}

fn angles_from_direction(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut angles = Vec::with_capacity(n - 1);
    for i in 0..n - 2 {
        let tail: f64 = u[i + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        angles.push(tail.atan2(u[i]));
    }
    angles.push(u[n - 1].atan2(u[n - 2]));
    angles
}

/// Disc-model coordinates `(r, θ)` with `0 ≤ r < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    r: f64,
    theta: f64,
}

impl DiskPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        ensure((0.0..1.0).contains(&r), || {
            format!("disc radius must lie in [0, 1), got {r}")
        })?;
        Ok(Self {
            r,
            theta: wrap_angle(theta),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Spherical coordinates: colatitude θ ∈ [0, π], longitude φ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        ensure((0.0..=PI).contains(&theta), || {
            format!("colatitude must lie in [0, pi], got {theta}")
        })?;
        ensure(phi.is_finite(), || "longitude must be finite".into())?;
        Ok(Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub(crate) fn from_raw(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }
}

/// Hyperbolic distance between two points of ℍⁿ,
/// `cosh η = 1 + |z′ − z|² / (2 y y′)`.
pub fn hyperbolic_distance(a: &HalfSpacePoint, b: &HalfSpacePoint) -> Result<f64> {
    ensure(a.dim() == b.dim(), || {
        format!("points have dimensions {} and {}", a.dim(), b.dim())
    })?;
    let dx2: f64 = a.x.iter().zip(&b.x).map(|(p, q)| (p - q) * (p - q)).sum();
    let dy = a.y - b.y;
    Ok(acosh_clamped(1.0 + (dx2 + dy * dy) / (2.0 * a.y * b.y)))
}

/// Maps geodesic polar coordinates to the half-space model (any n ≥ 2).
pub fn polar_to_halfspace(p: &PolarPoint) -> HalfSpacePoint {
    let (s, c) = (p.eta.sinh(), p.eta.cosh());
    let u = p.direction();
    let n = u.len();
    let denom = c - s * u[n - 1];
    HalfSpacePoint {
        x: u[..n - 1].iter().map(|ui| s * ui / denom).collect(),
        y: 1.0 / denom,
    }
}

/// Inverse of [`polar_to_halfspace`]. The angles are those of the direction
/// `(x / y, (|x|² + y² − 1) / (2y))`, which is `sinh η · u`.
pub fn halfspace_to_polar(z: &HalfSpacePoint) -> PolarPoint {
    let x2: f64 = z.x.iter().map(|v| v * v).sum();
    let cosh_eta = (x2 + z.y * z.y + 1.0) / (2.0 * z.y);
    let eta = acosh_clamped(cosh_eta);
    let n = z.dim();
    if eta == 0.0 {
        return PolarPoint {
            eta,
            angles: vec![0.0; n - 1],
        };
    }
    let mut v: Vec<f64> = z.x.iter().map(|xi| xi / z.y).collect();
    v.push((x2 + z.y * z.y - 1.0) / (2.0 * z.y));
    PolarPoint {
        eta,
        angles: angles_from_direction(&v),
    }
}

/// Planar polar-to-half-plane map.
pub fn polar_to_halfspace_h2(p: &PolarPoint) -> Result<HalfSpacePoint> {
    ensure(p.dim() == 2, || format!("expected a planar point, got n = {}", p.dim()))?;
    Ok(polar_to_halfspace(p))
}

/// Planar half-plane-to-polar map; `α` is recovered with `atan2` from
/// `sinh η sin α = (x² + y² − 1)/(2y)` and `sinh η cos α = x/y`.
pub fn halfspace_to_polar_h2(z: &HalfSpacePoint) -> Result<PolarPoint> {
    ensure(z.dim() == 2, || format!("expected a planar point, got n = {}", z.dim()))?;
    Ok(halfspace_to_polar(z))
}

/// ℍ² → 𝔻²: `r = tanh(η/2)`, `θ = α`.
pub fn h2_to_disk(p: &PolarPoint) -> Result<DiskPoint> {
    ensure(p.dim() == 2, || format!("expected a planar point, got n = {}", p.dim()))?;
    let r = (p.eta / 2.0).tanh();
    ensure(r < 1.0, || format!("eta = {} is beyond double precision for the disc model", p.eta))?;
    DiskPoint::new(r, p.alpha())
}

/// 𝔻² → ℍ²: `η = log((1 + r)/(1 − r))`, `α = θ`.
pub fn disk_to_h2(q: &DiskPoint) -> PolarPoint {
    let eta = 2.0 * q.r.atanh();
    PolarPoint {
        eta,
        angles: vec![if eta == 0.0 { 0.0 } else { q.theta }],
    }
}

/// Third side of a hyperbolic triangle:
/// `cosh η̂ = cosh η cosh η̄ − sinh η sinh η̄ cos ψ`.
pub fn carnot_hyperbolic(eta: f64, eta_bar: f64, psi: f64) -> f64 {
    // cosh η̂ − 1 = cosh(η − η̄) − 1 + sinh η sinh η̄ (1 − cos ψ), free of cancellation.
    let d = eta - eta_bar;
    let excess = 2.0 * (d / 2.0).sinh().powi(2)
        + eta.sinh() * eta_bar.sinh() * 2.0 * (psi / 2.0).sin().powi(2);
    acosh_clamped(1.0 + excess)
}

/// Angle ψ ∈ [0, π] opposite the side η̂ of a hyperbolic triangle with
/// sides η and η̄.
pub fn angle_from_carnot(eta: f64, eta_bar: f64, eta_hat: f64) -> Result<f64> {
    ensure(eta > 0.0 && eta_bar > 0.0, || {
        format!("angle undefined for a degenerate side (eta = {eta}, eta_bar = {eta_bar})")
    })?;
    // 1 − cos ψ = (cosh η̂ − cosh(η − η̄)) / (sinh η sinh η̄)
    let num = 2.0 * (eta_hat / 2.0).sinh().powi(2) - 2.0 * ((eta - eta_bar) / 2.0).sinh().powi(2);
    let one_minus_cos = num / (eta.sinh() * eta_bar.sinh());
    Ok(acos_clamped(1.0 - one_minus_cos))
}

/// Third side of a spherical triangle:
/// `cos θ̂ = cos θ cos θ̄ + sin θ sin θ̄ cos Δφ`.
pub fn carnot_spherical(theta: f64, theta_bar: f64, dphi: f64) -> f64 {
    // Haversine form, accurate for small sides.
    let h = ((theta - theta_bar) / 2.0).sin().powi(2)
        + theta.sin() * theta_bar.sin() * (dphi / 2.0).sin().powi(2);
    2.0 * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Boundary angle ᾱ of ∂ℍ² to its abscissa, `x̄ = cos ᾱ / (1 − sin ᾱ)`.
pub fn boundary_angle_to_x(alpha_bar: f64) -> Result<f64> {
    let a = wrap_angle(alpha_bar);
    if (a - FRAC_PI_2).abs() < CLAMP_TOL {
        return Err(Error::PointAtInfinity);
    }
    // cos/(1 − sin) = tan(π/4 + ᾱ/2)
    Ok((PI / 4.0 + a / 2.0).tan())
}

/// Inverse of [`boundary_angle_to_x`]:
/// `cos ᾱ = 2x̄/(1 + x̄²)`, `sin ᾱ = (x̄² − 1)/(1 + x̄²)`.
pub fn x_to_boundary_angle(x_bar: f64) -> f64 {
    // ᾱ = 2 atan x̄ − π/2, folded into (−π, π]
    wrap_angle(2.0 * x_bar.atan() - FRAC_PI_2)
}

/// `dᾱ/dx̄ = 2 / (1 + x̄²)`.
pub fn boundary_angle_jacobian(x_bar: f64) -> f64 {
    2.0 / (1.0 + x_bar * x_bar)
}

/// Angle in [0, π] between two directions.
pub(crate) fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let cross2: f64 = {
        // |u|²|v|² − (u·v)², by Lagrange's identity
        let uu: f64 = u.iter().map(|a| a * a).sum();
        let vv: f64 = v.iter().map(|a| a * a).sum();
        (uu * vv - dot * dot).max(0.0)
    };
    cross2.sqrt().atan2(dot)
}
