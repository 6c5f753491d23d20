//! Annulus exit probabilities and escape (hitting) probabilities.
//!
//! For a rotationally symmetric annulus `{η₁ < d(O, z) < η₂}` the
//! probability of reaching the inner sphere first is the radial harmonic
//! function equal to 1 on the inner and 0 on the outer boundary. In ℍⁿ the
//! radial part of the Laplacian is `v″ + (n−1) coth η v′`, so every radial
//! harmonic function is an affine image of an antiderivative of
//! `sinh^{1−n} η`.

use crate::error::{ensure, Result};

/// Largest dimension accepted by the ℍⁿ formulas.
pub const MAX_DIMENSION: usize = 30;

/// Starts within this distance of a boundary return the exact boundary value.
pub const BOUNDARY_SNAP: f64 = 1e-12;

fn check_annulus(x: f64, inner: f64, outer: f64) -> Result<()> {
    ensure(x.is_finite() && inner.is_finite() && outer.is_finite(), || "radii must be finite".into())?;
    ensure(0.0 < inner && inner < outer, || {
        format!("need 0 < inner < outer, got inner = {inner}, outer = {outer}")
    })?;
    ensure(inner - BOUNDARY_SNAP <= x && x <= outer + BOUNDARY_SNAP, || {
        format!("start {x} outside the annulus [{inner}, {outer}]")
    })
}

fn check_exterior(x: f64, inner: f64) -> Result<()> {
    ensure(x.is_finite() && inner.is_finite(), || "radii must be finite".into())?;
    ensure(0.0 < inner, || format!("inner radius must be > 0, got {inner}"))?;
    ensure(x >= inner - BOUNDARY_SNAP, || format!("start {x} inside the inner radius {inner}"))
}

/// `(f(outer) − f(x)) / (f(outer) − f(inner))` for increasing `f`, with
/// exact values at the boundaries.
fn ratio(x: f64, inner: f64, outer: f64, f: impl Fn(f64) -> f64) -> f64 {
    if (x - inner).abs() < BOUNDARY_SNAP {
        return 1.0;
    }
    if (x - outer).abs() < BOUNDARY_SNAP {
        return 0.0;
    }
    let fo = f(outer);
    ((fo - f(x)) / (fo - f(inner))).clamp(0.0, 1.0)
}

/// `ln tanh(η/2)`, accurate for small and large η.
pub(crate) fn log_tanh_half(eta: f64) -> f64 {
    (-(-eta).exp_m1()).ln() - (-eta).exp().ln_1p()
}

/// Probability that ℍ² Brownian motion from radius η reaches η₁ before η₂.
pub fn exit_prob_h2(eta: f64, eta1: f64, eta2: f64) -> Result<f64> {
    check_annulus(eta, eta1, eta2)?;
    Ok(ratio(eta, eta1, eta2, log_tanh_half))
}

/// Probability that ℍ² Brownian motion from radius η ever reaches η₁.
pub fn hit_prob_h2(eta: f64, eta1: f64) -> Result<f64> {
    check_exterior(eta, eta1)?;
    if (eta - eta1).abs() < BOUNDARY_SNAP {
        return Ok(1.0);
    }
    Ok(log_tanh_half(eta) / log_tanh_half(eta1))
}

fn check_dimension(n: usize) -> Result<()> {
    ensure((2..=MAX_DIMENSION).contains(&n), || {
        format!("dimension must lie in 2..={MAX_DIMENSION}, got {n}")
    })
}

/// Product `Π_{j<k} (n−3−2j)/(n−2−2j)`.
fn coeff_product(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    (0..k).map(|j| (nf - 3.0 - 2.0 * j as f64) / (nf - 2.0 - 2.0 * j as f64)).product()
}

/// Largest admissible `k` in the antiderivative sum.
fn last_index(n: usize) -> Option<usize> {
    match n {
        0..=2 => None,
        3 => Some(0),
        _ if n % 2 == 1 => Some((n - 3) / 2),
        _ => Some((n - 4) / 2),
    }
}

/// Tabulated coefficient `c(n, k)` of the radial antiderivative:
/// `c(n, 0) = 1` and, for `k ≥ 1`,
/// `c(n, k) = (n−3)(n−5)⋯(n−2k−1) / ((n−2)(n−4)⋯(n−2k−2))`.
///
/// The `k = 0` entry is the conventional one. Differentiating shows the
/// leading coefficient of the antiderivative of `sinh^{1−n}` is `1/(n−2)`
/// (see [`radial_coeff`]); the two agree only for n = 3.
pub fn c_coeff(n: usize, k: usize) -> Result<f64> {
    ensure((3..=MAX_DIMENSION).contains(&n), || format!("c(n, k) needs 3 <= n <= {MAX_DIMENSION}, got {n}"))?;
    let last = last_index(n);
    ensure(last.is_some_and(|l| k <= l), || format!("k = {k} out of range for n = {n}"))?;
    if k == 0 {
        return Ok(1.0);
    }
    Ok(radial_coeff(n, k))
}

/// Coefficient of `cosh η / sinh^{n−2−2k} η` (up to sign) in the
/// antiderivative of `sinh^{1−n} η`: `Π_{j<k}(n−3−2j)/(n−2−2j) / (n−2−2k)`.
pub fn radial_coeff(n: usize, k: usize) -> f64 {
    coeff_product(n, k) / (n as f64 - 2.0 - 2.0 * k as f64)
}

/// `cosh η / sinh^p η` without overflow.
fn cosh_over_sinh_pow(eta: f64, p: usize) -> f64 {
    let ln_sinh = if eta > 1.0 {
        eta + (-(-2.0 * eta).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        eta.sinh().ln()
    };
    (1.0 / eta.tanh()) * ((1.0 - p as f64) * ln_sinh).exp()
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// An antiderivative `v` of `sinh^{1−n} η` in closed form:
/// `Σ_k (−1)^{k+1} c_k cosh η / sinh^{n−2−2k} η`, plus
/// `(−1)^{(n−2)/2} ((n−3)!!/(n−2)!!) ln tanh(η/2)` when n is even.
pub fn radial_antiderivative(n: usize, eta: f64) -> Result<f64> {
    check_dimension(n)?;
    ensure(eta > 0.0, || format!("need eta > 0, got {eta}"))?;
    Ok(antiderivative(n, eta))
}

fn antiderivative(n: usize, eta: f64) -> f64 {
    let mut v = 0.0;
    let terms = if n % 2 == 1 { (n - 1) / 2 } else { (n - 2) / 2 };
    for k in 0..terms {
        v += -sign(k) * radial_coeff(n, k) * cosh_over_sinh_pow(eta, n - 2 - 2 * k);
    }
    if n.is_multiple_of(2) {
        let k = (n - 2) / 2;
        v += sign(k) * coeff_product(n, k) * log_tanh_half(eta);
    }
    v
}

/// `w(η) = ∫_η^∞ sinh^{1−n} s ds`, the decreasing radial harmonic function
/// that vanishes at infinity (n ≥ 2).
pub fn escape_potential(n: usize, eta: f64) -> Result<f64> {
    check_dimension(n)?;
    ensure(eta > 0.0, || format!("need eta > 0, got {eta}"))?;
    Ok(potential(n, eta))
}

fn potential(n: usize, eta: f64) -> f64 {
    match n {
        2 => -log_tanh_half(eta),
        3 => 2.0 / (2.0 * eta).exp_m1(),
        _ if eta >= 1.0 => potential_tail_series(n, eta),
        _ => {
            let at_infinity = if n % 2 == 1 {
                let k = (n - 3) / 2;
                sign(k + 1) * radial_coeff(n, k)
            } else {
                0.0
            };
            at_infinity - antiderivative(n, eta)
        }
    }
}

/// `∫_η^∞ csch^m = 2^m Σ_j binom(m+j−1, j) e^{−(m+2j)η}/(m+2j)`, m = n − 1.
/// Free of the cancellation the closed form suffers for large η.
fn potential_tail_series(n: usize, eta: f64) -> f64 {
    let m = (n - 1) as f64;
    let q = (-2.0 * eta).exp();
    let mut binom = 1.0;
    let mut qj = 1.0;
    let mut sum = 0.0;
    for j in 0..400 {
        let jf = j as f64;
        if j > 0 {
            binom *= (m + jf - 1.0) / jf;
            qj *= q;
        }
        let term = binom * qj / (m + 2.0 * jf);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    (m * (std::f64::consts::LN_2 - eta)).exp() * sum
}

/// Probability that ℍⁿ Brownian motion from radius η reaches η₁ before η₂.
pub fn exit_prob_hn(n: usize, eta: f64, eta1: f64, eta2: f64) -> Result<f64> {
    check_dimension(n)?;
    if n == 2 {
        return exit_prob_h2(eta, eta1, eta2);
    }
    check_annulus(eta, eta1, eta2)?;
    // w is decreasing, so use −w as the increasing function.
    Ok(ratio(eta, eta1, eta2, |e| -potential(n, e)))
}

/// Probability that ℍⁿ Brownian motion from radius η ever reaches η₁.
pub fn hit_prob_hn(n: usize, eta: f64, eta1: f64) -> Result<f64> {
    check_dimension(n)?;
    if n == 2 {
        return hit_prob_h2(eta, eta1);
    }
    check_exterior(eta, eta1)?;
    if (eta - eta1).abs() < BOUNDARY_SNAP {
        return Ok(1.0);
    }
    Ok(potential(n, eta) / potential(n, eta1))
}

/// Disc-model annulus `{r₁ < r < r₂}` in Euclidean radii.
pub fn exit_prob_d2(r: f64, r1: f64, r2: f64) -> Result<f64> {
    ensure(r2 < 1.0, || format!("outer disc radius must be < 1, got {r2}"))?;
    check_annulus(r, r1, r2)?;
    Ok(ratio(r, r1, r2, f64::ln))
}

/// Escape limit `r₂ → 1` of [`exit_prob_d2`]: `ln r / ln r₁`.
pub fn hit_prob_d2(r: f64, r1: f64) -> Result<f64> {
    check_exterior(r, r1)?;
    ensure(r < 1.0, || format!("disc radius must be < 1, got {r}"))?;
    if (r - r1).abs() < BOUNDARY_SNAP {
        return Ok(1.0);
    }
    Ok(r.ln() / r1.ln())
}

/// Probability that spherical Brownian motion from colatitude θ reaches
/// colatitude θ₁ before θ₂, where `θ₂ < θ < θ₁`.
pub fn exit_prob_sphere(theta: f64, theta1: f64, theta2: f64) -> Result<f64> {
    ensure(0.0 < theta2 && theta1 < std::f64::consts::PI, || {
        format!("colatitudes must lie in (0, pi), got theta1 = {theta1}, theta2 = {theta2}")
    })?;
    check_annulus(theta, theta2, theta1)?;
    let l = |t: f64| (t / 2.0).tan().ln();
    // 1 at θ₁ (the outer argument of `ratio`), 0 at θ₂.
    Ok(1.0 - ratio(theta, theta2, theta1, l))
}

/// Euclidean annulus exit probability: logarithmic for n = 2, power law
/// `r^{2−n}` for n ≥ 3.
pub fn exit_prob_euclidean(n: usize, eta: f64, eta1: f64, eta2: f64) -> Result<f64> {
    ensure(n >= 2, || format!("dimension must be >= 2, got {n}"))?;
    check_annulus(eta, eta1, eta2)?;
    if n == 2 {
        return Ok(ratio(eta, eta1, eta2, f64::ln));
    }
    let p = 2.0 - n as f64;
    Ok(ratio(eta, eta1, eta2, |r| -r.powf(p)))
}

/// Euclidean hitting probability: 1 in the plane (recurrence),
/// `(η/η₁)^{2−n}` for n ≥ 3.
pub fn hit_prob_euclidean(n: usize, eta: f64, eta1: f64) -> Result<f64> {
    ensure(n >= 2, || format!("dimension must be >= 2, got {n}"))?;
    check_exterior(eta, eta1)?;
    if n == 2 {
        return Ok(1.0);
    }
    Ok((eta / eta1).powf(2.0 - n as f64).min(1.0))
}
