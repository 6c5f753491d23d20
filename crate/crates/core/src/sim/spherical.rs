use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{bridge_crossing, path_rng, Execution, ProbabilityEstimate, SimConfig};
use crate::error::{ensure, Error, Result};
use crate::geometry::{wrap_angle, SpherePoint};

/// Below `sin θ < POLE_ZONE·√h` the colatitude scheme's `cot θ` drift is
/// too stiff, and steps are taken in ℝ³ and projected back to the sphere.
const POLE_ZONE: f64 = 10.0;

/// One Euler–Maruyama step in colatitude/longitude:
/// `θ′ = θ + (h/2) cot θ + √h Z₁`, `φ′ = φ + √h Z₂ / sin θ`, reflected at
/// the poles (`θ ← −θ` or `2π − θ`, with `φ ← φ + π`).
pub fn sbm_step(point: &SpherePoint, h: f64, gaussians: [f64; 2]) -> Result<SpherePoint> {
    let (theta, phi) = (point.theta(), point.phi());
    ensure(theta > 0.0 && theta < PI, || format!("colatitude must lie in (0, pi), got {theta}"))?;
    ensure(h > 0.0, || format!("step must be > 0, got {h}"))?;
    let (t, p) = colatitude_step(theta, phi, h, gaussians);
    Ok(SpherePoint::from_raw(t, p))
}

fn colatitude_step(theta: f64, phi: f64, h: f64, z: [f64; 2]) -> (f64, f64) {
    let sh = h.sqrt();
    let (s, c) = theta.sin_cos();
    let raw = theta + 0.5 * h * c / s + sh * z[0];
    let mut p = phi + sh * z[1] / s;
    // Fold into [0, π]: each pole crossing reflects θ and turns φ by π.
    let mut t = raw.rem_euclid(2.0 * PI);
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    (t, p.rem_euclid(2.0 * PI))
}

/// Tangent-space step in ℝ³ followed by normalization; exact drift to first
/// order (`−X h`) and free of coordinate singularities.
fn projected_step(theta: f64, phi: f64, h: f64, z: [f64; 2]) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let p = [st * cp, st * sp, ct];
    let e_theta = [ct * cp, ct * sp, -st];
    let e_phi = [-sp, cp, 0.0];
    let sh = h.sqrt();
    let q: Vec<f64> = (0..3).map(|i| p[i] + sh * (z[0] * e_theta[i] + z[1] * e_phi[i])).collect();
    let rho = q[0].hypot(q[1]);
    (rho.atan2(q[2]), q[1].atan2(q[0]).rem_euclid(2.0 * PI))
}

/// Advances spherical Brownian motion by `h`, switching to the projected
/// step near the poles.
pub fn sphere_advance(theta: f64, phi: f64, h: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let z = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
    if theta.sin() < POLE_ZONE * h.sqrt() {
        projected_step(theta, phi, h, z)
    } else {
        colatitude_step(theta, phi, h, z)
    }
}

/// First crossing of the circle of colatitude `θ̄`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SphereExit {
    /// Exit longitude minus start longitude, in (−π, π].
    pub dphi: f64,
    pub steps_taken: u64,
    /// Colatitude at detection minus `θ̄`.
    pub overshoot: f64,
}

/// Batch of [`SphereExit`]s in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereHitBatch {
    pub samples: Vec<SphereExit>,
    pub truncated: Vec<u64>,
}

fn check_cap(cfg: &SimConfig, start: &SpherePoint, theta_bar: f64) -> Result<()> {
    cfg.validate()?;
    ensure(start.theta() < theta_bar && theta_bar < PI, || {
        format!("need start colatitude {} < theta_bar = {theta_bar} < pi", start.theta())
    })
}

/// Simulates path `path` from `start` until `θ ≥ θ̄`.
pub fn first_hit_spherical_circle(cfg: &SimConfig, start: &SpherePoint, theta_bar: f64, path: u64) -> Result<SphereExit> {
    check_cap(cfg, start, theta_bar)?;
    cap_one(cfg, start, theta_bar, path)
}

fn cap_one(cfg: &SimConfig, start: &SpherePoint, theta_bar: f64, path: u64) -> Result<SphereExit> {
    let mut rng = path_rng(cfg.seed, path);
    let (mut theta, mut phi) = (start.theta(), start.phi());
    for steps in 1..=cfg.max_steps {
        let h = cfg.step_at(theta_bar - theta);
        (theta, phi) = sphere_advance(theta, phi, h, &mut rng);
        if theta >= theta_bar {
            return Ok(SphereExit {
                dphi: wrap_angle(phi - start.phi()),
                steps_taken: steps,
                overshoot: theta - theta_bar,
            });
        }
    }
    Err(Error::Truncated {
        path,
        steps: cfg.max_steps,
    })
}

/// Runs `cfg.num_paths` paths of [`first_hit_spherical_circle`].
pub fn first_hit_spherical_circle_batch(
    cfg: &SimConfig,
    start: &SpherePoint,
    theta_bar: f64,
    exec: Execution,
) -> Result<SphereHitBatch> {
    check_cap(cfg, start, theta_bar)?;
    let results = exec.map_paths(cfg.num_paths, |i| cap_one(cfg, start, theta_bar, i));
    let mut samples = Vec::with_capacity(results.len());
    let mut truncated = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(Error::Truncated { .. }) => truncated.push(i as u64),
            Err(e) => return Err(e),
        }
    }
    Ok(SphereHitBatch { samples, truncated })
}

fn band_path(cfg: &SimConfig, theta0: f64, upper: f64, lower: f64, path: u64) -> Option<bool> {
    let mut rng = path_rng(cfg.seed, path);
    let (mut theta, mut phi) = (theta0, 0.0);
    for _ in 0..cfg.max_steps {
        let h = cfg.step_at((theta - lower).min(upper - theta));
        let (t, p) = sphere_advance(theta, phi, h, &mut rng);
        if t >= upper {
            return Some(true);
        }
        if t <= lower {
            return Some(false);
        }
        if cfg.bridge_correction {
            let p_up = bridge_crossing(upper - theta, upper - t, h);
            let p_low = bridge_crossing(theta - lower, t - lower, h);
            if p_up + p_low > 1e-12 {
                let u: f64 = rng.random();
                if u < p_up {
                    return Some(true);
                }
                if u < p_up + p_low {
                    return Some(false);
                }
            }
        }
        (theta, phi) = (t, p);
    }
    None
}

/// Estimates `P{T_{θ₁} < T_{θ₂}}` for `θ₂ < θ < θ₁`.
pub fn first_exit_spherical_annulus(
    cfg: &SimConfig,
    theta: f64,
    theta1: f64,
    theta2: f64,
    exec: Execution,
) -> Result<ProbabilityEstimate> {
    cfg.validate()?;
    ensure(0.0 < theta2 && theta2 < theta && theta < theta1 && theta1 < PI, || {
        format!("need 0 < theta2 < theta < theta1 < pi, got {theta2}, {theta}, {theta1}")
    })?;
    let outcomes = exec.map_paths(cfg.num_paths, |i| band_path(cfg, theta, theta1, theta2, i));
    Ok(ProbabilityEstimate::from_outcomes(&outcomes, None))
}
