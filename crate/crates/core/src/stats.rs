//! Quadrature, goodness-of-fit tests and binomial intervals.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ensure, Error, Result};

/// Levels of interval halving before [`integrate`] gives up (2²³ panels).
const MAX_LEVEL: u32 = 23;
const MIN_LEVEL: u32 = 5;

/// Composite Simpson on successively halved grids with Richardson
/// extrapolation. Returns `(value, error_estimate)`.
///
/// Refinement stops once two consecutive levels change by less than
/// `tol · max(1, |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    ensure(a.is_finite() && b.is_finite(), || "integration limits must be finite".into())?;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let width = b - a;
    let ends = f(a) + f(b);
    // Trapezoid sums: `interior` holds Σ f at all interior nodes of the current grid.
    let mut interior = 0.0;
    let mut n: u64 = 1;
    let mut trap_prev = 0.5 * width * ends;
    let mut simpson_prev = f64::NAN;
    let mut rich_prev = f64::NAN;
    let mut quiet_levels = 0;
    let mut last = (f64::NAN, f64::INFINITY);
    for level in 1..=MAX_LEVEL {
        let h = width / (2 * n) as f64;
        let mid: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        interior += mid;
        n *= 2;
        let trap = h * (0.5 * ends + interior);
        let simpson = (4.0 * trap - trap_prev) / 3.0;
        trap_prev = trap;
        if !simpson.is_finite() {
            return Err(crate::error::domain("integrand is not finite on the interval"));
        }
        if level >= 2 {
            let rich = (16.0 * simpson - simpson_prev) / 15.0;
            let err = (simpson - simpson_prev).abs() / 15.0 + if level >= 3 { (rich - rich_prev).abs() } else { 0.0 };
            last = (rich, err);
            if level >= MIN_LEVEL && err <= tol * rich.abs().max(1.0) {
                quiet_levels += 1;
                if quiet_levels >= 2 {
                    return Ok(last);
                }
            } else {
                quiet_levels = 0;
            }
            rich_prev = rich;
        }
        simpson_prev = simpson;
    }
    Err(Error::Quadrature {
        estimate: last.0,
        error: last.1,
    })
}

/// Which goodness-of-fit statistic a report holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GofMethod {
    #[serde(rename = "ks")]
    Ks,
    #[serde(rename = "chi_square")]
    ChiSquare,
}

/// Outcome of a goodness-of-fit test; `passed` iff `statistic < threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub passed: bool,
    pub method: GofMethod,
}

impl GofReport {
    fn new(statistic: f64, threshold: f64, n_samples: usize, method: GofMethod) -> Self {
        Self {
            statistic,
            threshold,
            n_samples,
            passed: statistic < threshold,
            method,
        }
    }
}

/// Asymptotic Kolmogorov constant `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

fn check_alpha(alpha: f64) -> Result<()> {
    ensure(alpha > 0.0 && alpha < 1.0, || format!("significance level must lie in (0, 1), got {alpha}"))
}

fn check_sorted(samples: &[f64]) -> Result<()> {
    ensure(samples.windows(2).all(|w| w[0] <= w[1]), || "samples must be sorted ascending".into())
}

/// One-sample Kolmogorov–Smirnov test of sorted `samples` against `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, alpha: f64) -> Result<GofReport> {
    check_alpha(alpha)?;
    ensure(samples.len() >= 100, || format!("KS test needs at least 100 samples, got {}", samples.len()))?;
    check_sorted(samples)?;
    let n = samples.len() as f64;
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    Ok(GofReport::new(d, ks_critical_value(alpha) / n.sqrt(), samples.len(), GofMethod::Ks))
}

/// Two-sample Kolmogorov–Smirnov test on sorted inputs.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<GofReport> {
    check_alpha(alpha)?;
    ensure(a.len() >= 100 && b.len() >= 100, || "two-sample KS needs at least 100 samples each".into())?;
    check_sorted(a)?;
    check_sorted(b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let threshold = ks_critical_value(alpha) * ((n + m) / (n * m)).sqrt();
    Ok(GofReport::new(d, threshold, a.len() + b.len(), GofMethod::Ks))
}

/// Binned samples over strictly increasing edges; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn new(bin_edges: Vec<f64>) -> Result<Self> {
        ensure(bin_edges.len() >= 2, || "histogram needs at least two edges".into())?;
        ensure(bin_edges.windows(2).all(|w| w[0] < w[1]), || "bin edges must be strictly increasing".into())?;
        let bins = bin_edges.len() - 1;
        Ok(Self {
            bin_edges,
            counts: vec![0; bins],
            total: 0,
        })
    }

    /// `bins` equal-width bins covering `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        ensure(bins >= 1 && lo < hi, || format!("invalid histogram range [{lo}, {hi}] with {bins} bins"))?;
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * w).collect();
        edges.push(hi);
        Self::new(edges)
    }

    pub fn from_samples(bin_edges: Vec<f64>, samples: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut h = Self::new(bin_edges)?;
        for x in samples {
            h.add(x)?;
        }
        Ok(h)
    }

    pub fn add(&mut self, x: f64) -> Result<()> {
        let (lo, hi) = (self.bin_edges[0], *self.bin_edges.last().unwrap());
        ensure((lo..=hi).contains(&x), || format!("sample {x} outside histogram range [{lo}, {hi}]"))?;
        let i = self.bin_edges.partition_point(|&e| e <= x).clamp(1, self.counts.len()) - 1;
        self.counts[i] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Upper `α` quantile of χ² with `dof` degrees of freedom (Wilson–Hilferty).
pub fn chi_square_quantile(dof: usize, alpha: f64) -> f64 {
    let k = dof as f64;
    let z = Normal::standard().inverse_cdf(1.0 - alpha);
    let s = 2.0 / (9.0 * k);
    k * (1.0 - s + z * s.sqrt()).powi(3)
}

/// Merges adjacent bins until every expected count is at least 5.
/// Returns `(observed, expected)` per merged bin.
pub fn merge_bins(observed: &[u64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o as f64;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(o), Some(e)) => {
                *o += o_acc;
                *e += e_acc;
            }
            _ => {
                obs.push(o_acc);
                exp.push(e_acc);
            }
        }
    }
    (obs, exp)
}

/// Pearson χ² test of a histogram against a density; expected counts come
/// from integrating the density over each bin.
pub fn chi_square_test<F: Fn(f64) -> f64>(hist: &EmpiricalDistribution, density: F, alpha: f64) -> Result<GofReport> {
    check_alpha(alpha)?;
    ensure(hist.total > 0, || "chi-square test on an empty histogram".into())?;
    let total = hist.total as f64;
    let expected = hist
        .bin_edges
        .windows(2)
        .map(|w| integrate(&density, w[0], w[1], 1e-10).map(|(v, _)| total * v))
        .collect::<Result<Vec<_>>>()?;
    let (obs, exp) = merge_bins(&hist.counts, &expected);
    ensure(obs.len() >= 2, || "too few samples for a chi-square test".into())?;
    let statistic: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let threshold = chi_square_quantile(obs.len() - 1, alpha);
    Ok(GofReport::new(statistic, threshold, hist.total as usize, GofMethod::ChiSquare))
}

/// Normal-approximation interval `p̂ ± z √(p̂(1−p̂)/N)` clamped to [0, 1].
///
/// At `p̂ = 0` or `1` the variance is floored at that of a single
/// success (failure), so the interval never collapses to a point.
pub fn binomial_ci(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    ensure(trials >= 1000, || format!("binomial interval needs at least 1000 trials, got {trials}"))?;
    ensure(successes <= trials, || "more successes than trials".into())?;
    let p = successes as f64 / trials as f64;
    let n = trials as f64;
    let floor = (1.0 / n) * (1.0 - 1.0 / n);
    let half = z * ((p * (1.0 - p)).max(floor) / n).sqrt();
    Ok(((p - half).max(0.0), (p + half).min(1.0)))
}

/// Cumulative distribution built from a density on `[a, b]`, tabulated on
/// `panels` equal panels and completed inside a panel by quadrature.
pub struct TabulatedCdf<F> {
    density: F,
    a: f64,
    width: f64,
    cumulative: Vec<f64>,
}

impl<F: Fn(f64) -> f64> TabulatedCdf<F> {
    pub fn new(density: F, a: f64, b: f64, panels: usize) -> Result<Self> {
        ensure(a < b && panels >= 1, || "invalid CDF domain".into())?;
        let width = (b - a) / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * width;
            acc += integrate(&density, lo, lo + width, 1e-13)?.0;
            cumulative.push(acc);
        }
        Ok(Self {
            density,
            a,
            width,
            cumulative,
        })
    }

    /// Total mass, which should be 1 for a normalized density.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let panels = self.cumulative.len() - 1;
        let t = (x - self.a) / self.width;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= panels as f64 {
            return self.total();
        }
        let i = t.floor() as usize;
        let lo = self.a + i as f64 * self.width;
        let inside = integrate(&self.density, lo, x, 1e-11).map(|r| r.0).unwrap_or(0.0);
        self.cumulative[i] + inside
    }
}
