use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{bridge_crossing, path_rng, Execution, ExitSample, HitBatch, ProbabilityEstimate, SimConfig};
use crate::error::{ensure, Error, Result};
use crate::exitprob::{exit_prob_hn, hit_prob_hn};
use crate::geometry::{
    angle_between, angle_from_carnot, halfspace_to_polar, hyperbolic_distance, polar_to_halfspace, HalfSpacePoint,
    PolarPoint,
};

/// Rejected steps are retried with half the step this many times.
const MAX_HALVINGS: u32 = 10;

/// One Euler–Maruyama step of hyperbolic Brownian motion:
/// `Xᵢ′ = Xᵢ + Y√h Zᵢ`, `Y′ = Y(1 − ((n−2)/2)h + √h Zₙ)`.
/// Returns `None` when the step would leave the half-space.
pub fn hbm_step(point: &HalfSpacePoint, h: f64, gaussians: &[f64]) -> Result<Option<HalfSpacePoint>> {
    let n = point.dim();
    ensure(gaussians.len() == n, || format!("need {n} normals, got {}", gaussians.len()))?;
    ensure(h > 0.0, || format!("step must be > 0, got {h}"))?;
    let sh = h.sqrt();
    let y = point.y();
    let y_new = y * (1.0 - (n as f64 - 2.0) / 2.0 * h + sh * gaussians[n - 1]);
    if y_new <= 0.0 {
        return Ok(None);
    }
    let x = point.x().iter().zip(gaussians).map(|(xi, z)| xi + y * sh * z).collect();
    HalfSpacePoint::new(x, y_new).map(Some)
}

/// Mutable path state reused across steps.
struct Walker {
    x: Vec<f64>,
    y: f64,
    drift: f64,
    z: Vec<f64>,
}

impl Walker {
    fn new(p: &HalfSpacePoint) -> Self {
        let n = p.dim();
        Self {
            x: p.x().to_vec(),
            y: p.y(),
            drift: (n as f64 - 2.0) / 2.0,
            z: vec![0.0; n],
        }
    }

    fn cosh_eta(&self) -> f64 {
        let x2: f64 = self.x.iter().map(|v| v * v).sum();
        (x2 + self.y * self.y + 1.0) / (2.0 * self.y)
    }

    /// Advances by `h`, halving on rejection. Returns the step actually
    /// taken, or `None` once the halvings are exhausted.
    fn advance(&mut self, h: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
        let mut h = h;
        for _ in 0..=MAX_HALVINGS {
            for z in self.z.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            let sh = h.sqrt();
            let last = self.z.len() - 1;
            let y_new = self.y * (1.0 - self.drift * h + sh * self.z[last]);
            if y_new > 0.0 {
                let ys = self.y * sh;
                for (xi, z) in self.x.iter_mut().zip(&self.z) {
                    *xi += ys * z;
                }
                self.y = y_new;
                return Some(h);
            }
            h /= 2.0;
        }
        None
    }

    fn point(&self) -> HalfSpacePoint {
        HalfSpacePoint::new(self.x.clone(), self.y).expect("walker keeps y > 0")
    }
}

fn eta_of(cosh_eta: f64) -> f64 {
    if cosh_eta <= 1.0 {
        0.0
    } else {
        cosh_eta.acosh()
    }
}

fn check_start(cfg: &SimConfig, start: &PolarPoint, eta_bar: f64) -> Result<()> {
    cfg.validate()?;
    ensure(start.dim() == cfg.dimension, || {
        format!("start point has dimension {}, config {}", start.dim(), cfg.dimension)
    })?;
    ensure(start.eta() < eta_bar && eta_bar.is_finite(), || {
        format!("start radius {} must be below the target {eta_bar}", start.eta())
    })
}

/// Simulates path `path` from `start` until its distance from `O` first
/// reaches `η̄`, and reports the exit angle.
///
/// The angle ψ comes from the hyperbolic law of cosines in the triangle
/// (O, start, exit) using the detected point's actual radius.
pub fn first_hit_sphere(cfg: &SimConfig, start: &PolarPoint, eta_bar: f64, path: u64) -> Result<ExitSample> {
    check_start(cfg, start, eta_bar)?;
    hit_one(cfg, start, &polar_to_halfspace(start), eta_bar, path)
}

fn hit_one(cfg: &SimConfig, start: &PolarPoint, z0: &HalfSpacePoint, eta_bar: f64, path: u64) -> Result<ExitSample> {
    let mut rng = path_rng(cfg.seed, path);
    let mut w = Walker::new(z0);
    let target = eta_bar.cosh();
    let adaptive = cfg.max_step.is_some();
    let mut steps = 0u64;
    loop {
        if steps >= cfg.max_steps {
            return Err(Error::Truncated { path, steps });
        }
        let h = if adaptive { cfg.step_at(eta_bar - eta_of(w.cosh_eta())) } else { cfg.step };
        w.advance(h, &mut rng).ok_or(Error::Truncated { path, steps })?;
        steps += 1;
        let c = w.cosh_eta();
        if c >= target {
            let exit = w.point();
            let eta_exit = eta_of(c);
            let psi = if start.eta() > 0.0 {
                let hat = hyperbolic_distance(z0, &exit)?;
                angle_from_carnot(start.eta(), eta_exit, hat)?
            } else {
                angle_between(&start.direction(), &halfspace_to_polar(&exit).direction())
            };
            let signed_angle = (cfg.dimension == 2).then(|| halfspace_to_polar(&exit).alpha());
            return Ok(ExitSample {
                psi,
                signed_angle,
                steps_taken: steps,
                overshoot: (eta_exit - eta_bar).max(0.0),
            });
        }
    }
}

/// Runs `cfg.num_paths` independent paths of [`first_hit_sphere`].
pub fn first_hit_sphere_batch(cfg: &SimConfig, start: &PolarPoint, eta_bar: f64, exec: Execution) -> Result<HitBatch> {
    check_start(cfg, start, eta_bar)?;
    let z0 = polar_to_halfspace(start);
    let results = exec.map_paths(cfg.num_paths, |i| hit_one(cfg, start, &z0, eta_bar, i));
    let mut samples = Vec::with_capacity(results.len());
    let mut truncated = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(Error::Truncated { .. }) => truncated.push(i as u64),
            Err(e) => return Err(e),
        }
    }
    Ok(HitBatch { samples, truncated })
}

/// `Some(true)` if the path reaches `inner` first, `Some(false)` for
/// `outer`, `None` when truncated.
fn annulus_path(cfg: &SimConfig, z0: &HalfSpacePoint, inner: f64, outer: f64, path: u64) -> Option<bool> {
    let mut rng = path_rng(cfg.seed, path);
    let mut w = Walker::new(z0);
    let (c_in, c_out) = (inner.cosh(), outer.cosh());
    let mut eta = eta_of(w.cosh_eta());
    for _ in 0..cfg.max_steps {
        let h = cfg.step_at((eta - inner).min(outer - eta));
        let used = w.advance(h, &mut rng)?;
        let c = w.cosh_eta();
        if c <= c_in {
            return Some(true);
        }
        if c >= c_out {
            return Some(false);
        }
        let eta_new = eta_of(c);
        if cfg.bridge_correction {
            let p_in = bridge_crossing(eta - inner, eta_new - inner, used);
            let p_out = bridge_crossing(outer - eta, outer - eta_new, used);
            if p_in + p_out > 1e-12 {
                let u: f64 = rng.random();
                if u < p_in {
                    return Some(true);
                }
                if u < p_in + p_out {
                    return Some(false);
                }
            }
        }
        eta = eta_new;
    }
    None
}

fn check_annulus(cfg: &SimConfig, eta: f64, inner: f64, outer: f64) -> Result<()> {
    cfg.validate()?;
    ensure(0.0 < inner && inner < eta && eta < outer && outer.is_finite(), || {
        format!("need 0 < eta1 < eta < eta2, got {inner}, {eta}, {outer}")
    })
}

fn start_point(n: usize, eta: f64) -> HalfSpacePoint {
    polar_to_halfspace(&PolarPoint::new(eta, vec![0.0; n - 1]).expect("valid polar point"))
}

/// Estimates `P{T_{η₁} < T_{η₂}}` from radius η.
pub fn first_exit_annulus(cfg: &SimConfig, eta: f64, eta1: f64, eta2: f64, exec: Execution) -> Result<ProbabilityEstimate> {
    check_annulus(cfg, eta, eta1, eta2)?;
    let z0 = start_point(cfg.dimension, eta);
    let outcomes = exec.map_paths(cfg.num_paths, |i| annulus_path(cfg, &z0, eta1, eta2, i));
    Ok(ProbabilityEstimate::from_outcomes(&outcomes, None))
}

/// Estimates `P{T_{η₁} < ∞}` by `P{T_{η₁} < T_cap}`, with `cap = cfg.escape_cap`.
///
/// Paths that would return from beyond the cap are lost, so the estimator
/// is biased low; the bias `hit_prob − exit_prob(cap)` is reported.
pub fn escape_estimate(cfg: &SimConfig, eta: f64, eta1: f64, exec: Execution) -> Result<ProbabilityEstimate> {
    let cap = cfg.escape_cap;
    check_annulus(cfg, eta, eta1, cap)?;
    let bias = hit_prob_hn(cfg.dimension, eta, eta1)? - exit_prob_hn(cfg.dimension, eta, eta1, cap)?;
    let z0 = start_point(cfg.dimension, eta);
    let outcomes = exec.map_paths(cfg.num_paths, |i| annulus_path(cfg, &z0, eta1, cap, i));
    Ok(ProbabilityEstimate::from_outcomes(&outcomes, Some(bias.abs())))
}
