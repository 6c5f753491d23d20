//! Acceptance checks: normalization, limits, oracle agreement, Monte Carlo
//! agreement, special functions and harmonicity.
//!
//! Each numbered criterion is a function returning one or more
//! [`CheckResult`]s; the CLI's `validate` command and the integration tests
//! both run them through [`run_suite`].

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exitprob::{
    exit_prob_d2, exit_prob_euclidean, exit_prob_h2, exit_prob_hn, exit_prob_sphere, hit_prob_h2,
};
use crate::geometry::{PolarPoint, SpherePoint};
use crate::kernels::{
    cauchy_hitting_density, euclidean_poisson_nd, poisson_d2, poisson_d2_boundary, poisson_h2,
    poisson_h2_boundary, poisson_h2_series, poisson_sphere, HnKernel, OuterRadius,
};
use crate::sim::{
    escape_estimate, first_exit_annulus, first_exit_spherical_annulus, first_hit_sphere_batch,
    first_hit_spherical_circle_batch, Execution, ProbabilityEstimate, RunStatus, SimConfig,
};
use crate::specialfn::{gauss_2f1, gauss_2f1_at_one, gegenbauer, gegenbauer_all, SeriesControl};
use crate::stats::{chi_square_test, integrate, EmpiricalDistribution};

/// Rounding allowance added to analytic tail bounds when comparing two
/// double-precision evaluations.
pub const ROUNDING_ALLOWANCE: f64 = 1e-14;

/// How a check's statistic is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: String,
    pub statistic: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(criterion: u8, name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            statistic,
            relation: Relation::AtMost,
            threshold,
            passed: statistic <= threshold,
        }
    }

    fn at_least(criterion: u8, name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            statistic,
            relation: Relation::AtLeast,
            threshold,
            passed: statistic >= threshold,
        }
    }

    /// A check whose computation itself failed.
    fn errored(criterion: u8, name: impl Into<String>, err: &crate::Error) -> Self {
        Self {
            criterion,
            name: format!("{} (error: {err})", name.into()),
            statistic: f64::NAN,
            relation: Relation::AtMost,
            threshold: f64::NAN,
            passed: false,
        }
    }

    fn with_status(mut self, status: RunStatus) -> Self {
        if status != RunStatus::Ok {
            self.passed = false;
            self.name.push_str(" [truncation warning]");
        }
        self
    }

    /// `PASS`/`FAIL` line for terminal output.
    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "[{}] criterion {}: {}: {:.6e} {rel} {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.statistic,
            self.threshold
        )
    }
}

/// Monte Carlo sizes and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    pub seed: u64,
    pub kernel_paths: u64,
    pub exit_paths: u64,
    pub step: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Budget {
    /// The acceptance sizes: 5·10⁴ paths per kernel, 10⁵ per exit estimate.
    pub fn full(seed: u64) -> Self {
        Self {
            seed,
            kernel_paths: 50_000,
            exit_paths: 100_000,
            step: 1e-4,
            exec: Execution::Parallel,
        }
    }

    /// A tenth of the full path counts, for smoke runs.
    pub fn fast(seed: u64) -> Self {
        Self {
            kernel_paths: 5_000,
            exit_paths: 10_000,
            ..Self::full(seed)
        }
    }
}

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Analytic criteria and the Monte Carlo kernel checks.
    Kernels,
    /// Monte Carlo exit and escape probabilities.
    Exits,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Kernels => &[1, 2, 3, 4, 5, 8, 9],
            Suite::Exits => &[6, 7],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
        }
    }
}

/// Full report with a fixed key set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub budget: Budget,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn run_suite(suite: Suite, budget: &Budget) -> Report {
    let checks: Vec<CheckResult> = suite.criteria().iter().flat_map(|&c| run_criterion(c, budget)).collect();
    Report {
        suite,
        budget: *budget,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Runs one numbered criterion (1–9); other numbers yield no checks.
pub fn run_criterion(criterion: u8, budget: &Budget) -> Vec<CheckResult> {
    match criterion {
        1 => normalization(budget.seed),
        2 => series_equivalence(budget.seed),
        3 => limit_chain(),
        4 => cross_model(budget.seed),
        5 => mc_kernels(budget),
        6 => mc_exits(budget),
        7 => transience(budget),
        8 => special_functions(),
        9 => harmonicity(),
        _ => Vec::new(),
    }
}

fn check<F>(criterion: u8, name: &str, f: F) -> CheckResult
where
    F: FnOnce() -> crate::Result<CheckResult>,
{
    f().unwrap_or_else(|e| CheckResult::errored(criterion, name, &e))
}

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> crate::Result<f64> {
    integrate(f, a, b, 1e-12).map(|r| r.0)
}

/// Random radii pair `0 ≤ η < η̄` with `η ≤ 0.9 η̄`.
fn radii(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64) {
    let outer = rng.random_range(lo..hi);
    (rng.random_range(0.0..0.9) * outer, outer)
}

/// Criterion 1: every kernel integrates to one over its angular domain.
pub fn normalization(seed: u64) -> Vec<CheckResult> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let h2 = check(1, "poisson_h2 normalization, 10 random radii", || {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let (e, eb) = radii(&mut rng, 0.1, 5.0);
            let v = quad(|a| poisson_h2(e, a, eb).unwrap_or(f64::NAN), -PI, PI)?;
            worst = worst.max((v - 1.0).abs());
        }
        Ok(CheckResult::at_most(1, "poisson_h2 normalization, 10 random radii", worst, 1e-8))
    });
    out.push(h2);

    for n in 3..=5 {
        let name = format!("poisson_hn normalization, n = {n}, 5 random radii");
        out.push(check(1, &name, || {
            let mut worst: f64 = 0.0;
            for _ in 0..5 {
                let (e, eb) = radii(&mut rng, 0.1, 3.0);
                let k = HnKernel::new(n, e, OuterRadius::Finite(eb), SeriesControl::default())?;
                let v = quad(|p| k.density(p), 0.0, PI)?;
                worst = worst.max((v - 1.0).abs());
            }
            Ok(CheckResult::at_most(1, name.clone(), worst, 1e-7))
        }));
    }

    out.push(check(1, "poisson_d2 normalization", || {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let rb = rng.random_range(0.1..0.99);
            let r = rng.random_range(0.0..0.9) * rb;
            let v = quad(|t| poisson_d2(r, t, rb).unwrap_or(f64::NAN), -PI, PI)?;
            worst = worst.max((v - 1.0).abs());
        }
        Ok(CheckResult::at_most(1, "poisson_d2 normalization", worst, 1e-8))
    }));

    out.push(check(1, "poisson_sphere normalization", || {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let tb = rng.random_range(0.1..3.0);
            let t = rng.random_range(0.0..0.9) * tb;
            let v = quad(|p| poisson_sphere(t, p, tb).unwrap_or(f64::NAN), -PI, PI)?;
            worst = worst.max((v - 1.0).abs());
        }
        Ok(CheckResult::at_most(1, "poisson_sphere normalization", worst, 1e-8))
    }));

    out.push(check(1, "boundary-limit kernels normalization", || {
        let mut worst: f64 = 0.0;
        for &e in &[0.0, 0.5, 1.5, 3.0] {
            let v = quad(|a| poisson_h2_boundary(e, a).unwrap_or(f64::NAN), -PI, PI)?;
            worst = worst.max((v - 1.0).abs());
            let r = (e / 2.0).tanh();
            let v = quad(|t| poisson_d2_boundary(r, t).unwrap_or(f64::NAN), -PI, PI)?;
            worst = worst.max((v - 1.0).abs());
        }
        // Cauchy law on ℝ, through x = tan u.
        for &(x, y) in &[(0.0, 1.0), (1.5, 0.4), (-2.0, 3.0)] {
            let v = quad(
                |u: f64| {
                    let c = u.cos();
                    if c == 0.0 {
                        0.0
                    } else {
                        cauchy_hitting_density(x, y, u.tan()).unwrap_or(f64::NAN) / (c * c)
                    }
                },
                -PI / 2.0,
                PI / 2.0,
            )?;
            worst = worst.max((v - 1.0).abs());
        }
        Ok(CheckResult::at_most(1, "boundary-limit kernels normalization", worst, 1e-8))
    }));

    out.push(CheckResult::at_most(
        1,
        "normalization runtime in seconds",
        started.elapsed().as_secs_f64(),
        10.0,
    ));
    out
}

/// Criterion 2: closed-form ℍ² kernel against its 200-term Fourier sum.
pub fn series_equivalence(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2);
    let mut excess: f64 = f64::NEG_INFINITY;
    let mut worst_bound: f64 = 0.0;
    let mut failure = None;
    for _ in 0..1000 {
        let eb: f64 = rng.random_range(0.1..6.0);
        let q: f64 = rng.random_range(0.0..0.85);
        let e = 2.0 * (q * (eb / 2.0).tanh()).atanh();
        let d = rng.random_range(-PI..PI);
        match (poisson_h2(e, d, eb), poisson_h2_series(e, d, eb, 200)) {
            (Ok(c), Ok(s)) => {
                excess = excess.max((c - s.density).abs() - s.truncation_error_bound - ROUNDING_ALLOWANCE);
                worst_bound = worst_bound.max(s.truncation_error_bound);
            }
            (Err(err), _) | (_, Err(err)) => failure = Some(err),
        }
    }
    if let Some(err) = failure {
        return vec![CheckResult::errored(2, "series vs closed form", &err)];
    }
    vec![
        CheckResult::at_most(2, "series vs closed form: |diff| - tail bound - 1e-14", excess, 0.0),
        CheckResult::at_most(2, "largest geometric tail bound", worst_bound, 1e-12),
    ]
}

/// Criterion 3: large-radius, small-radius and half-plane limits.
pub fn limit_chain() -> Vec<CheckResult> {
    let grid: Vec<f64> = (0..=100).map(|i| -PI + 2.0 * PI * i as f64 / 100.0).collect();
    let mut out = Vec::new();
    out.push(check(3, "(a) eta_bar = 12 vs boundary kernel", || {
        let mut sup: f64 = 0.0;
        for &e in &[0.0, 0.5, 1.0, 2.0] {
            for &d in &grid {
                sup = sup.max((poisson_h2(e, d, 12.0)? - poisson_h2_boundary(e, d)?).abs());
            }
        }
        Ok(CheckResult::at_most(3, "(a) eta_bar = 12 vs boundary kernel", sup, 1e-4))
    }));
    let s = 1e-3;
    out.push(check(3, "(b) scaled H2 kernel vs Euclidean disc", || {
        let mut sup: f64 = 0.0;
        for &(e, eb) in &[(0.3, 1.0), (0.5, 1.2), (0.8, 1.0)] {
            for &d in &grid {
                let h = poisson_h2(e * s, d, eb * s)?;
                sup = sup.max((h - poisson_d2_boundary(e / eb, d)?).abs());
            }
        }
        Ok(CheckResult::at_most(3, "(b) scaled H2 kernel vs Euclidean disc", sup, 1e-4))
    }));
    for n in [3, 4] {
        let name = format!("(c) scaled poisson_hn vs Euclidean ball, n = {n}");
        out.push(check(3, &name, || {
            let k = HnKernel::new(n, 0.5 * s, OuterRadius::Finite(1.2 * s), SeriesControl::default())?;
            let mut sup: f64 = 0.0;
            for i in 0..=100 {
                let p = PI * i as f64 / 100.0;
                sup = sup.max((k.evaluate(p)?.density - euclidean_poisson_nd(n, 0.5 / 1.2, p)?).abs());
            }
            Ok(CheckResult::at_most(3, name.clone(), sup, 1e-4))
        }));
    }
    out.push(check(3, "(d) Cauchy law from (0, 1)", || {
        let mut sup: f64 = 0.0;
        for i in 0..=200 {
            let x = -20.0 + 0.2 * i as f64;
            sup = sup.max((cauchy_hitting_density(0.0, 1.0, x)? - 1.0 / (PI * (1.0 + x * x))).abs());
        }
        Ok(CheckResult::at_most(3, "(d) Cauchy law from (0, 1)", sup, 1e-12))
    }));
    out
}

/// Criterion 4: half-plane and disc formulas agree under `r = tanh(η/2)`.
pub fn cross_model(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4);
    let kernel = check(4, "H2 vs D2 kernel", || {
        let mut sup: f64 = 0.0;
        for _ in 0..1000 {
            let (e, eb) = radii(&mut rng, 0.1, 5.0);
            let d = rng.random_range(-PI..PI);
            let h = poisson_h2(e, d, eb)?;
            let r = poisson_d2((e / 2.0).tanh(), d, (eb / 2.0).tanh())?;
            sup = sup.max((h - r).abs());
        }
        Ok(CheckResult::at_most(4, "H2 vs D2 kernel", sup, 1e-12))
    });
    let exits = check(4, "H2 vs D2 exit probability", || {
        let mut sup: f64 = 0.0;
        for _ in 0..1000 {
            let e1 = rng.random_range(0.05..2.0);
            let e2 = e1 + rng.random_range(0.05..4.0);
            let e = rng.random_range(e1..e2);
            let t = |x: f64| (x / 2.0).tanh();
            sup = sup.max((exit_prob_h2(e, e1, e2)? - exit_prob_d2(t(e), t(e1), t(e2))?).abs());
        }
        Ok(CheckResult::at_most(4, "H2 vs D2 exit probability", sup, 1e-12))
    });
    vec![kernel, exits]
}

fn chi_square_check(
    name: &str,
    samples: impl IntoIterator<Item = f64>,
    lo: f64,
    hi: f64,
    density: impl Fn(f64) -> f64,
    status: RunStatus,
) -> crate::Result<CheckResult> {
    let hist = EmpiricalDistribution::from_samples(EmpiricalDistribution::uniform(lo, hi, 40)?.bin_edges().to_vec(), samples)?;
    let report = chi_square_test(&hist, density, 0.01)?;
    Ok(CheckResult::at_most(5, name, report.statistic, report.threshold).with_status(status))
}

/// Criterion 5: simulated hitting angles against the kernels (χ², α = 0.01).
pub fn mc_kernels(budget: &Budget) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |out: &mut Vec<CheckResult>, case: &str| {
        let secs = clock.elapsed().as_secs_f64();
        out.push(CheckResult::at_most(5, format!("{case} runtime in seconds"), secs, 300.0));
        clock = Instant::now();
    };
    let name = "chi-square: H2 exit angle, eta = 0.8, eta_bar = 1.5";
    out.push(check(5, name, || {
        let cfg = SimConfig::new(2, budget.step, budget.kernel_paths, budget.seed)?;
        let batch = first_hit_sphere_batch(&cfg, &PolarPoint::planar(0.8, 0.0)?, 1.5, budget.exec)?;
        let status = batch.status(cfg.num_paths);
        let angles = batch.samples.iter().map(|s| s.signed_angle.unwrap_or(f64::NAN));
        chi_square_check(name, angles, -PI, PI, |a| poisson_h2(0.8, a, 1.5).unwrap_or(f64::NAN), status)
    }));
    lap(&mut out, "H2 case");
    let name = "chi-square: H3 exit angle psi, eta = 0.5, eta_bar = 1.2";
    out.push(check(5, name, || {
        let cfg = SimConfig::new(3, budget.step, budget.kernel_paths, budget.seed)?;
        let start = PolarPoint::new(0.5, vec![0.0, 0.0])?;
        let batch = first_hit_sphere_batch(&cfg, &start, 1.2, budget.exec)?;
        let status = batch.status(cfg.num_paths);
        let kernel = HnKernel::new(3, 0.5, OuterRadius::Finite(1.2), SeriesControl::default())?;
        chi_square_check(name, batch.samples.iter().map(|s| s.psi), 0.0, PI, |p| kernel.density(p), status)
    }));
    lap(&mut out, "H3 case");
    let name = "chi-square: S2 exit longitude, theta = 0.6, theta_bar = 1.2";
    out.push(check(5, name, || {
        let cfg = SimConfig::new(2, budget.step, budget.kernel_paths, budget.seed)?;
        let batch = first_hit_spherical_circle_batch(&cfg, &SpherePoint::new(0.6, 0.0)?, 1.2, budget.exec)?;
        let status = crate::sim::RunStatus::from_truncated(batch.truncated.len() as u64, cfg.num_paths);
        let dphi = batch.samples.iter().map(|s| s.dphi);
        chi_square_check(name, dphi, -PI, PI, |p| poisson_sphere(0.6, p, 1.2).unwrap_or(f64::NAN), status)
    }));
    lap(&mut out, "S2 case");
    out
}

/// Configuration of the annulus runs: base step `h` near the boundaries,
/// growing to `10⁻²` away from them, with Brownian-bridge crossing tests.
fn exit_config(dimension: usize, budget: &Budget, salt: u64) -> crate::Result<SimConfig> {
    Ok(SimConfig::new(dimension, budget.step, budget.exit_paths, budget.seed ^ salt)?
        .with_adaptive_step(crate::sim::MAX_STEP)?
        .with_bridge_correction(true))
}

fn sigma_check(criterion: u8, name: &str, est: &ProbabilityEstimate, exact: f64) -> CheckResult {
    let z = (est.estimate - exact).abs() / est.std_error;
    CheckResult::at_most(criterion, format!("{name}: |estimate - exact| / sigma"), z, 3.0).with_status(est.status)
}

/// Criterion 6: annulus exit probabilities within 3σ of the formulas.
pub fn mc_exits(budget: &Budget) -> Vec<CheckResult> {
    let started = Instant::now();
    let mut out = Vec::new();
    let name = "H2 exit, eta = 1 in (0.5, 2)";
    out.push(check(6, name, || {
        let est = first_exit_annulus(&exit_config(2, budget, 0x61)?, 1.0, 0.5, 2.0, budget.exec)?;
        Ok(sigma_check(6, name, &est, exit_prob_h2(1.0, 0.5, 2.0)?))
    }));
    let name = "H3 exit, eta = 1 in (0.5, 2)";
    out.push(check(6, name, || {
        let est = first_exit_annulus(&exit_config(3, budget, 0x62)?, 1.0, 0.5, 2.0, budget.exec)?;
        Ok(sigma_check(6, name, &est, exit_prob_hn(3, 1.0, 0.5, 2.0)?))
    }));
    let name = "S2 exit, theta = 1.2 in (0.8, 1.8)";
    out.push(check(6, name, || {
        let est = first_exit_spherical_annulus(&exit_config(2, budget, 0x63)?, 1.2, 1.8, 0.8, budget.exec)?;
        Ok(sigma_check(6, name, &est, exit_prob_sphere(1.2, 1.8, 0.8)?))
    }));
    out.push(CheckResult::at_most(6, "exit runs runtime in seconds", started.elapsed().as_secs_f64(), 300.0));
    out
}

/// Criterion 7: the escape estimate sits clearly below one and near the
/// hitting probability.
pub fn transience(budget: &Budget) -> Vec<CheckResult> {
    let run = || -> crate::Result<(ProbabilityEstimate, f64)> {
        let cfg = exit_config(2, budget, 0x71)?.with_escape_cap(10.0)?;
        let est = escape_estimate(&cfg, 1.5, 0.5, budget.exec)?;
        Ok((est, hit_prob_h2(1.5, 0.5)?))
    };
    match run() {
        Ok((est, exact)) => {
            let bias = est.bias_bound.unwrap_or(0.0);
            vec![
                CheckResult::at_least(7, "escape estimate: (1 - estimate) / sigma", (1.0 - est.estimate) / est.std_error, 5.0)
                    .with_status(est.status),
                CheckResult::at_most(
                    7,
                    "escape estimate: |estimate - hit_prob_h2| vs 3 sigma + bias",
                    (est.estimate - exact).abs(),
                    3.0 * est.std_error + bias,
                )
                .with_status(est.status),
            ]
        }
        Err(e) => vec![CheckResult::errored(7, "escape estimate", &e)],
    }
}

/// Largest `|∫ C_j C_k sin^{2λ}|` over `j ≠ k ≤ 8`.
pub fn gegenbauer_orthogonality(n: usize) -> crate::Result<f64> {
    let lam = (n as f64 - 2.0) / 2.0;
    let mut worst: f64 = 0.0;
    for j in 0..=8 {
        for k in (j + 1)..=8 {
            let v = quad(
                |t: f64| {
                    let x = t.cos();
                    gegenbauer(j, lam, x).unwrap_or(f64::NAN) * gegenbauer(k, lam, x).unwrap_or(f64::NAN) * t.sin().powf(2.0 * lam)
                },
                0.0,
                PI,
            )?;
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

/// Largest deviation of `Σₖ ρᵏ C_k^{(λ)}(t)` from `(1 − 2ρt + ρ²)^{−λ}`.
pub fn gegenbauer_generating_function(rho: f64) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for &lam in &[0.5, 1.0, 1.5, 2.5] {
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            let c = gegenbauer_all(60, lam, t)?;
            let sum: f64 = c.iter().enumerate().map(|(k, v)| rho.powi(k as i32) * v).sum();
            worst = worst.max((sum - (1.0 - 2.0 * rho * t + rho * rho).powf(-lam)).abs());
        }
    }
    Ok(worst)
}

/// Criterion 8: Gegenbauer identities and ₂F₁ at 1.
pub fn special_functions() -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(check(8, "Gegenbauer generating function, rho = 0.3", || {
        Ok(CheckResult::at_most(8, "Gegenbauer generating function, rho = 0.3", gegenbauer_generating_function(0.3)?, 1e-10))
    }));
    for n in 3..=5 {
        let name = format!("Gegenbauer orthogonality, n = {n}");
        out.push(check(8, &name, || Ok(CheckResult::at_most(8, name.clone(), gegenbauer_orthogonality(n)?, 1e-8))));
    }
    out.push(check(8, "2F1(k, 1 - n/2; k + n/2; 1) vs Gamma closed form", || {
        let ctrl = SeriesControl::new(1e-11, 2_000_000)?;
        let mut worst: f64 = 0.0;
        for n in 3..=5 {
            let nf = n as f64;
            for k in 0..=10 {
                let (a, b, c) = (k as f64, 1.0 - nf / 2.0, k as f64 + nf / 2.0);
                let s = gauss_2f1(a, b, c, 1.0, ctrl)?;
                worst = worst.max((s - gauss_2f1_at_one(a, b, c)?).abs());
            }
        }
        Ok(CheckResult::at_most(8, "2F1(k, 1 - n/2; k + n/2; 1) vs Gamma closed form", worst, 1e-9))
    }));
    out
}

/// Five-point finite-difference residual of `u'' + drift·u'` at `x`.
pub fn radial_residual(u: impl Fn(f64) -> f64, drift: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3;
    let (u2m, um, u0, up, u2p) = (u(x - 2.0 * h), u(x - h), u(x), u(x + h), u(x + 2.0 * h));
    let d2 = (-u2p + 16.0 * up - 30.0 * u0 + 16.0 * um - u2m) / (12.0 * h * h);
    let d1 = (-u2p + 8.0 * up - 8.0 * um + u2m) / (12.0 * h);
    d2 + drift(x) * d1
}

/// Criterion 9: every exit-probability solution is radially harmonic.
pub fn harmonicity() -> Vec<CheckResult> {
    let grid: Vec<f64> = (0..14).map(|i| 0.6 + 0.1 * i as f64 + 0.0123).collect();
    let worst = |u: &dyn Fn(f64) -> crate::Result<f64>, drift: &dyn Fn(f64) -> f64, pts: &[f64]| -> crate::Result<f64> {
        u(pts[0])?;
        let mut w: f64 = 0.0;
        for &x in pts {
            w = w.max(radial_residual(|e| u(e).unwrap_or(f64::NAN), drift, x).abs());
        }
        Ok(w)
    };
    let mut out = Vec::new();
    out.push(check(9, "H2 exit probability residual", || {
        let r = worst(&|e| exit_prob_h2(e, 0.5, 2.0), &|e: f64| 1.0 / e.tanh(), &grid)?;
        Ok(CheckResult::at_most(9, "H2 exit probability residual", r, 1e-6))
    }));
    for n in 3..=8 {
        let name = format!("H{n} exit probability residual");
        out.push(check(9, &name, || {
            let m = (n - 1) as f64;
            let r = worst(&|e| exit_prob_hn(n, e, 0.5, 2.0), &|e: f64| m / e.tanh(), &grid)?;
            Ok(CheckResult::at_most(9, name.clone(), r, 1e-6))
        }));
    }
    out.push(check(9, "D2 exit probability residual", || {
        let pts: Vec<f64> = (0..7).map(|i| 0.3 + 0.08 * i as f64).collect();
        let r = worst(&|r| exit_prob_d2(r, 0.2, 0.9), &|r: f64| 1.0 / r, &pts)?;
        Ok(CheckResult::at_most(9, "D2 exit probability residual", r, 1e-6))
    }));
    out.push(check(9, "S2 exit probability residual", || {
        let pts: Vec<f64> = (0..9).map(|i| 0.85 + 0.1 * i as f64).collect();
        let r = worst(&|t| exit_prob_sphere(t, 1.8, 0.8), &|t: f64| 1.0 / t.tan(), &pts)?;
        Ok(CheckResult::at_most(9, "S2 exit probability residual", r, 1e-6))
    }));
    for n in 2..=5 {
        let name = format!("Euclidean R{n} exit probability residual");
        out.push(check(9, &name, || {
            let m = (n - 1) as f64;
            let r = worst(&|e| exit_prob_euclidean(n, e, 0.5, 2.0), &|e: f64| m / e, &grid)?;
            Ok(CheckResult::at_most(9, name.clone(), r, 1e-6))
        }));
    }
    out
}
