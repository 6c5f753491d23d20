//! Monte Carlo simulation of Brownian motion on ℍⁿ and S² with
//! first-passage detection.
//!
//! The hyperbolic diffusion is integrated in half-space coordinates by
//! Euler–Maruyama for `dXᵢ = Y dWᵢ`, `dY = −((n−2)/2) Y dt + Y dWₙ`, whose
//! generator is half the Laplace–Beltrami operator. The spherical one uses
//! colatitude/longitude, `dθ = ½ cot θ dt + dW₁`, `dφ = dW₂ / sin θ`. Hitting
//! laws do not depend on the time normalization.
//!
//! Each path draws from its own ChaCha stream (see [`path_rng`]), so a
//! configuration reproduces bit-for-bit under any scheduling.

mod exec;
mod hyperbolic;
mod spherical;

use serde::Serialize;

pub use exec::{path_rng, Execution};
pub use hyperbolic::{
    escape_estimate, first_exit_annulus, first_hit_sphere, first_hit_sphere_batch, hbm_step,
};
pub use spherical::{
    first_exit_spherical_annulus, first_hit_spherical_circle, first_hit_spherical_circle_batch,
    sbm_step, sphere_advance, SphereExit, SphereHitBatch,
};

use crate::error::{ensure, Result};
use crate::exitprob::MAX_DIMENSION;

/// Fraction of truncated paths above which a run is flagged.
pub const TRUNCATION_WARNING_FRACTION: f64 = 1e-3;

/// Largest admissible time step.
pub const MAX_STEP: f64 = 1e-2;

/// Boundary distance, in units of `√h`, below which adaptive stepping
/// falls back to the base step: `h_eff = clamp((d / 6)², step, max_step)`.
const ADAPTIVE_DIVISOR: f64 = 6.0;

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dimension: usize,
    /// Base time step `h`, used within reach of a boundary.
    pub step: f64,
    pub num_paths: u64,
    pub seed: u64,
    /// Per-path step cap; a path reaching it is counted as truncated.
    pub max_steps: u64,
    /// Radius standing in for infinity in escape estimates.
    pub escape_cap: f64,
    /// When set, steps grow up to this size far from every boundary.
    pub max_step: Option<f64>,
    /// Test for boundary crossings between grid points with the Brownian
    /// bridge probability `exp(−2 d₀ d₁ / h)` (annulus and escape runs only).
    pub bridge_correction: bool,
}

impl SimConfig {
    pub fn new(dimension: usize, step: f64, num_paths: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            dimension,
            step,
            num_paths,
            seed,
            max_steps: 50_000_000,
            escape_cap: 10.0,
            max_step: None,
            bridge_correction: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Result<Self> {
        self.max_steps = max_steps;
        self.validate().map(|_| self)
    }

    pub fn with_escape_cap(mut self, cap: f64) -> Result<Self> {
        self.escape_cap = cap;
        self.validate().map(|_| self)
    }

    pub fn with_adaptive_step(mut self, max_step: f64) -> Result<Self> {
        self.max_step = Some(max_step);
        self.validate().map(|_| self)
    }

    pub fn with_bridge_correction(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure((2..=MAX_DIMENSION).contains(&self.dimension), || {
            format!("dimension must lie in 2..={MAX_DIMENSION}, got {}", self.dimension)
        })?;
        ensure(self.step > 0.0 && self.step <= MAX_STEP, || {
            format!("step must lie in (0, {MAX_STEP}], got {}", self.step)
        })?;
        ensure(self.num_paths >= 1, || "need at least one path".into())?;
        ensure(self.max_steps >= 1, || "max_steps must be positive".into())?;
        ensure(self.escape_cap > 0.0 && self.escape_cap.is_finite(), || {
            format!("escape cap must be finite and > 0, got {}", self.escape_cap)
        })?;
        if let Some(m) = self.max_step {
            ensure(m >= self.step && m <= MAX_STEP, || {
                format!("max_step must lie in [step, {MAX_STEP}], got {m}")
            })?;
        }
        Ok(())
    }

    /// Step size at boundary distance `d`.
    pub(crate) fn step_at(&self, d: f64) -> f64 {
        match self.max_step {
            Some(m) => (d / ADAPTIVE_DIVISOR).powi(2).clamp(self.step, m),
            None => self.step,
        }
    }
}

/// First exit of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitSample {
    /// Angle in [0, π] at `O` between the start and exit directions.
    pub psi: f64,
    /// Polar angle of the exit point (n = 2 only).
    pub signed_angle: Option<f64>,
    pub steps_taken: u64,
    /// Radius at detection minus the target radius.
    pub overshoot: f64,
}

/// Samples of a batch run in path order, with truncated paths counted.
#[derive(Debug, Clone, PartialEq)]
pub struct HitBatch {
    pub samples: Vec<ExitSample>,
    /// Indices of paths that hit `max_steps` or failed to keep `Y > 0`.
    pub truncated: Vec<u64>,
}

impl HitBatch {
    pub fn status(&self, num_paths: u64) -> RunStatus {
        RunStatus::from_truncated(self.truncated.len() as u64, num_paths)
    }
}

/// Whether a run's truncation count is acceptable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Warning,
}

impl RunStatus {
    pub fn from_truncated(truncated: u64, total: u64) -> Self {
        if truncated as f64 > TRUNCATION_WARNING_FRACTION * total as f64 {
            RunStatus::Warning
        } else {
            RunStatus::Ok
        }
    }
}

/// Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub successes: u64,
    /// Completed (non-truncated) paths.
    pub trials: u64,
    pub truncated: u64,
    pub status: RunStatus,
    /// Known deterministic bias of the estimator, when there is one.
    pub bias_bound: Option<f64>,
}

impl ProbabilityEstimate {
    pub(crate) fn from_outcomes(outcomes: &[Option<bool>], bias_bound: Option<f64>) -> Self {
        let truncated = outcomes.iter().filter(|o| o.is_none()).count() as u64;
        let trials = outcomes.len() as u64 - truncated;
        let successes = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
        let p = if trials > 0 { successes as f64 / trials as f64 } else { f64::NAN };
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            successes,
            trials,
            truncated,
            status: RunStatus::from_truncated(truncated, outcomes.len() as u64),
            bias_bound,
        }
    }
}

/// Crossing probability of a Brownian bridge with unit diffusion between
/// two points at distances `d0, d1 > 0` from a barrier over time `h`.
pub(crate) fn bridge_crossing(d0: f64, d1: f64, h: f64) -> f64 {
    (-2.0 * d0 * d1 / h).exp()
}
