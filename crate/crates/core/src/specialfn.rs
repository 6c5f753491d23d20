//! Gegenbauer polynomials, the Gauss hypergeometric series, Gamma helpers
//! and unit-sphere surface areas.

use std::f64::consts::PI;

use statrs::function::gamma as sg;

use crate::error::{domain, ensure, Error, Result};

/// Truncation control for the infinite series in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    tol: f64,
    max_terms: usize,
}

impl SeriesControl {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        ensure(tol > 0.0 && tol.is_finite(), || format!("series tolerance must be > 0, got {tol}"))?;
        ensure(max_terms >= 1, || "max_terms must be at least 1".into())?;
        Ok(Self { tol, max_terms })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: 200_000,
        }
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    ensure(x > 0.0 && x.is_finite(), || format!("log_gamma needs x > 0, got {x}"))?;
    Ok(sg::ln_gamma(x))
}

/// `Γ(x)` for `x > 0`; overflows to infinity past x ≈ 171.6.
pub fn gamma(x: f64) -> Result<f64> {
    ensure(x > 0.0 && x.is_finite(), || format!("gamma needs x > 0, got {x}"))?;
    Ok(sg::gamma(x))
}

/// Surface area `Ωₙ = 2π^{n/2}/Γ(n/2)` of the unit sphere in ℝⁿ (Ω₂ = 2π).
pub fn surface_area(n: usize) -> Result<f64> {
    ensure(n >= 1, || "surface_area needs n >= 1".into())?;
    let h = n as f64 / 2.0;
    Ok((2f64.ln() + h * PI.ln() - sg::ln_gamma(h)).exp())
}

/// `Ωₙ₋₁ / Ωₙ = Γ(n/2) / (√π Γ((n−1)/2))`, the normalizing constant of
/// `sinⁿ⁻²ψ` on [0, π].
pub fn surface_area_ratio(n: usize) -> Result<f64> {
    ensure(n >= 2, || format!("surface_area_ratio needs n >= 2, got {n}"))?;
    let n = n as f64;
    Ok((sg::ln_gamma(n / 2.0) - sg::ln_gamma((n - 1.0) / 2.0) - 0.5 * PI.ln()).exp())
}

fn check_gegenbauer(lambda: f64, x: f64) -> Result<f64> {
    ensure(lambda > 0.0 && lambda.is_finite(), || {
        format!("Gegenbauer parameter must be > 0, got {lambda}")
    })?;
    ensure(x.abs() <= 1.0 + 1e-12, || format!("Gegenbauer argument {x} outside [-1, 1]"))?;
    Ok(x.clamp(-1.0, 1.0))
}

/// `C_k^{(λ)}(x)` by the three-term recurrence
/// `k C_k = 2(k+λ−1) x C_{k−1} − (k+2λ−2) C_{k−2}`.
pub fn gegenbauer(k: usize, lambda: f64, x: f64) -> Result<f64> {
    let x = check_gegenbauer(lambda, x)?;
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * lambda * x;
    for j in 2..=k {
        let jf = j as f64;
        let next = (2.0 * (jf + lambda - 1.0) * x * cur - (jf + 2.0 * lambda - 2.0) * prev) / jf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `C_0^{(λ)}(x), …, C_{k_max}^{(λ)}(x)` in one pass.
pub fn gegenbauer_all(k_max: usize, lambda: f64, x: f64) -> Result<Vec<f64>> {
    let x = check_gegenbauer(lambda, x)?;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    if k_max >= 1 {
        out.push(2.0 * lambda * x);
    }
    for j in 2..=k_max {
        let jf = j as f64;
        let v = (2.0 * (jf + lambda - 1.0) * x * out[j - 1] - (jf + 2.0 * lambda - 2.0) * out[j - 2]) / jf;
        out.push(v);
    }
    Ok(out)
}

/// `C_k^{(λ)}(1) = binom(k + 2λ − 1, k)`, the maximum of `|C_k^{(λ)}|` on [−1, 1].
pub fn gegenbauer_at_one(k: usize, lambda: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("Gegenbauer parameter must be > 0, got {lambda}"))?;
    let k = k as f64;
    Ok((sg::ln_gamma(k + 2.0 * lambda) - sg::ln_gamma(k + 1.0) - sg::ln_gamma(2.0 * lambda)).exp())
}

/// A truncated series value with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

fn nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// `₂F₁(a, b; c; x)` on `0 ≤ x ≤ 1` by direct summation.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64, ctrl: SeriesControl) -> Result<f64> {
    gauss_2f1_sum(a, b, c, x, ctrl).map(|s| s.value)
}

/// As [`gauss_2f1`], also reporting the number of terms and a bound on the
/// neglected tail.
///
/// When `a` or `b` is a nonpositive integer the series is a polynomial and is
/// summed exactly. Otherwise summation stops once the terms are monotone and
/// the tail estimate `|t_{m+1}| · min(1/(1−x), 1 + (m+1)/(c−a−b))` is below
/// `tol · |sum|`. The second factor covers the algebraic decay at `x = 1`.
pub fn gauss_2f1_sum(a: f64, b: f64, c: f64, x: f64, ctrl: SeriesControl) -> Result<SeriesSum> {
    ensure([a, b, c, x].iter().all(|v| v.is_finite()), || "non-finite 2F1 argument".into())?;
    ensure(!nonpositive_integer(c), || format!("2F1 undefined for c = {c}"))?;
    ensure((0.0..=1.0).contains(&x), || format!("2F1 argument {x} outside [0, 1]"))?;
    let terminating = nonpositive_integer(a) || nonpositive_integer(b);
    let s = c - a - b;
    ensure(x < 1.0 || terminating || s > 0.0, || {
        format!("2F1 diverges at x = 1 when c - a - b = {s} <= 0")
    })?;

    let mut term = 1.0;
    let mut sum = 1.0;
    // Past this index the term ratio is below x, so the terms shrink monotonically.
    let transient = if c + 1.0 - a - b > 0.0 {
        ((a * b - c) / (c + 1.0 - a - b)).max(0.0)
    } else {
        f64::INFINITY
    };
    for m in 0..ctrl.max_terms {
        let mf = m as f64;
        let ratio = (a + mf) * (b + mf) / ((c + mf) * (mf + 1.0)) * x;
        term *= ratio;
        if term == 0.0 {
            return Ok(SeriesSum {
                value: sum,
                terms: m + 1,
                tail_bound: 0.0,
            });
        }
        sum += term;
        if terminating || mf + 1.0 <= transient || ratio.abs() >= 1.0 {
            continue;
        }
        let next = term.abs() * ((a + mf + 1.0) * (b + mf + 1.0) / ((c + mf + 1.0) * (mf + 2.0)) * x).abs();
        let geometric = if x < 1.0 { 1.0 / (1.0 - x) } else { f64::INFINITY };
        let algebraic = if s > 0.0 { 1.0 + (mf + 2.0) / s } else { f64::INFINITY };
        let tail = next * geometric.min(algebraic);
        if tail <= ctrl.tol * sum.abs() {
            return Ok(SeriesSum {
                value: sum,
                terms: m + 2,
                tail_bound: tail,
            });
        }
    }
    Err(Error::Convergence {
        what: "2F1 series",
        terms: ctrl.max_terms,
        partial_sum: sum,
    })
}

/// Gauss's closed form `₂F₁(a, b; c; 1) = Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b))`
/// for `c − a − b > 0`, with `c − a` and `c − b` not nonpositive integers.
pub fn gauss_2f1_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    let s = c - a - b;
    if s <= 0.0 {
        return Err(domain(format!("2F1(1) diverges for c - a - b = {s}")));
    }
    if nonpositive_integer(c) {
        return Err(domain(format!("2F1 undefined for c = {c}")));
    }
    if nonpositive_integer(c - a) || nonpositive_integer(c - b) {
        return Ok(0.0);
    }
    // Γ of possibly negative non-integer arguments: use signed log-Gamma.
    let (lc, sc) = signed_ln_gamma(c);
    let (ls, ss) = signed_ln_gamma(s);
    let (la, sa) = signed_ln_gamma(c - a);
    let (lb, sb) = signed_ln_gamma(c - b);
    Ok(sc * ss * sa * sb * (lc + ls - la - lb).exp())
}

/// `(ln|Γ(x)|, sign Γ(x))` for x not a nonpositive integer.
fn signed_ln_gamma(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (sg::ln_gamma(x), 1.0);
    }
    // Γ(x) Γ(1−x) = π / sin(πx)
    let s = (PI * x).sin();
    let l = PI.ln() - s.abs().ln() - sg::ln_gamma(1.0 - x);
    (l, s.signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gamma_exact_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-13);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn surface_areas() {
        assert!(rel(surface_area(2).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(surface_area(3).unwrap(), 4.0 * PI) < 1e-14);
        assert!(rel(surface_area(4).unwrap(), 2.0 * PI * PI) < 1e-14);
        for n in 2..12 {
            let r = surface_area(n - 1).unwrap() / surface_area(n).unwrap();
            assert!(rel(surface_area_ratio(n).unwrap(), r) < 1e-13);
        }
    }

    #[test]
    fn sin_power_normalization_by_quadrature() {
        for n in 3..=8 {
            let p = (n - 2) as i32;
            let (v, _) = crate::stats::integrate(|t: f64| t.sin().powi(p), 0.0, PI, 1e-13).unwrap();
            assert!((surface_area_ratio(n).unwrap() * v - 1.0).abs() < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn gegenbauer_low_orders() {
        for &(lam, x) in &[(0.5, 0.3), (1.0, -0.7), (2.5, 0.99)] {
            assert_eq!(gegenbauer(0, lam, x).unwrap(), 1.0);
            assert!((gegenbauer(1, lam, x).unwrap() - 2.0 * lam * x).abs() < 1e-15);
        }
        assert!(gegenbauer(2, 1.0, 0.5).unwrap().abs() < 1e-15);
        assert!(gegenbauer(3, 1.0, 1.2).is_err());
        assert!(gegenbauer(3, 0.0, 0.2).is_err());
    }

    // Explicit sum C_k(x) = Σ_j (−1)^j Γ(k−j+λ)/(Γ(λ) j! (k−2j)!) (2x)^{k−2j}.
    // Returns the sum and the sum of absolute terms (its rounding scale).
    fn gegenbauer_explicit(k: usize, lam: f64, x: f64) -> (f64, f64) {
        let terms: Vec<f64> = (0..=k / 2)
            .map(|j| {
                let lg = sg::ln_gamma((k - j) as f64 + lam)
                    - sg::ln_gamma(lam)
                    - sg::ln_gamma(j as f64 + 1.0)
                    - sg::ln_gamma((k - 2 * j) as f64 + 1.0);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * lg.exp() * (2.0 * x).powi((k - 2 * j) as i32)
            })
            .collect();
        (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
    }

    #[test]
    fn gegenbauer_matches_explicit_polynomial() {
        for k in 0..12 {
            for &lam in &[0.5, 1.0, 1.5, 3.0] {
                for &x in &[-0.9, -0.2, 0.0, 0.5, 1.0] {
                    let r = gegenbauer(k, lam, x).unwrap();
                    let (e, scale) = gegenbauer_explicit(k, lam, x);
                    assert!((r - e).abs() < 1e-12 * scale.max(1.0), "k={k} lam={lam} x={x}");
                }
            }
        }
        // C₂^{(λ)}(x) = 2λ(λ+1)x² − λ
        assert!(gegenbauer_explicit(2, 1.0, 0.5).0.abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_value_at_one() {
        for n in 3..10 {
            let lam = (n as f64 - 2.0) / 2.0;
            for k in 0..15 {
                let direct = gegenbauer(k, lam, 1.0).unwrap();
                let closed = gegenbauer_at_one(k, lam).unwrap();
                assert!(rel(direct, closed) < 1e-12, "n={n} k={k}");
            }
        }
        // binom(k+n−3, k) at n = 5, k = 4: binom(6, 4) = 15
        assert!(rel(gegenbauer_at_one(4, 1.5).unwrap(), 15.0) < 1e-13);
    }

    #[test]
    fn gegenbauer_all_agrees_with_single() {
        let all = gegenbauer_all(20, 1.5, 0.37).unwrap();
        for (k, v) in all.iter().enumerate() {
            assert_eq!(*v, gegenbauer(k, 1.5, 0.37).unwrap());
        }
    }

    #[test]
    fn gegenbauer_orthogonality() {
        for n in 3..=5 {
            let lam = (n as f64 - 2.0) / 2.0;
            for j in 0..=8 {
                for k in 0..=8 {
                    if j == k {
                        continue;
                    }
                    let f = |t: f64| {
                        gegenbauer(j, lam, t.cos()).unwrap()
                            * gegenbauer(k, lam, t.cos()).unwrap()
                            * t.sin().powf(2.0 * lam)
                    };
                    let (v, _) = crate::stats::integrate(f, 0.0, PI, 1e-12).unwrap();
                    assert!(v.abs() < 1e-8, "n={n} j={j} k={k}: {v}");
                }
            }
        }
    }

    #[test]
    fn gegenbauer_generating_function() {
        let rho: f64 = 0.3;
        for &lam in &[0.5, 1.0, 1.5, 2.7] {
            for &t in &[-1.0, -0.4, 0.1, 0.8, 1.0] {
                let closed = (1.0 - 2.0 * rho * t + rho * rho).powf(-lam);
                let c = gegenbauer_all(60, lam, t).unwrap();
                let s: f64 = c.iter().enumerate().map(|(k, v)| rho.powi(k as i32) * v).sum();
                assert!((s - closed).abs() < 1e-10, "lam={lam} t={t}");
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.05..60.0f64) {
            let r = (log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap()).exp();
            prop_assert!(rel(r, x) < 1e-11);
        }

        #[test]
        fn gegenbauer_contiguous(k in 2usize..25, lam in 0.2..4.0f64, t in -1.0..1.0f64) {
            let lhs = k as f64 * gegenbauer(k, lam, t).unwrap();
            let rhs = 2.0 * lam * (t * gegenbauer(k - 1, lam + 1.0, t).unwrap()
                - gegenbauer(k - 2, lam + 1.0, t).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn gegenbauer_bounded_by_value_at_one(k in 0usize..40, lam in 0.5..3.0f64, t in -1.0..1.0f64) {
            let v = gegenbauer(k, lam, t).unwrap();
            prop_assert!(v.abs() <= gegenbauer_at_one(k, lam).unwrap() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn hypergeometric_trivial_parameter() {
        for &x in &[0.0, 0.3, 0.99, 1.0] {
            assert_eq!(gauss_2f1(0.0, -2.5, 3.0, x, SeriesControl::default()).unwrap(), 1.0);
        }
    }

    #[test]
    fn hypergeometric_log_identity() {
        let x = 0.5;
        let v = gauss_2f1(1.0, 1.0, 2.0, x, SeriesControl::default()).unwrap();
        assert!(rel(v, -(1.0f64 - x).ln() / x) < 1e-12);
    }

    #[test]
    fn hypergeometric_polynomial_termination() {
        for n in (4..=16).step_by(2) {
            let b = 1.0 - n as f64 / 2.0;
            let s = gauss_2f1_sum(3.0, b, 3.0 + n as f64 / 2.0, 0.7, SeriesControl::default()).unwrap();
            assert_eq!(s.terms, n / 2, "n = {n}");
            assert_eq!(s.tail_bound, 0.0);
        }
    }

    #[test]
    fn hypergeometric_at_one_matches_gauss_sum() {
        let ctrl = SeriesControl::new(1e-11, 2_000_000).unwrap();
        for n in 3..=5 {
            for k in 0..=10 {
                let (a, b, c) = (k as f64, 1.0 - n as f64 / 2.0, k as f64 + n as f64 / 2.0);
                let series = gauss_2f1(a, b, c, 1.0, ctrl).unwrap();
                let closed = gauss_2f1_at_one(a, b, c).unwrap();
                assert!((series - closed).abs() < 1e-9, "n={n} k={k}: {series} vs {closed}");
            }
        }
    }

    #[test]
    fn hypergeometric_reports_nonconvergence() {
        let ctrl = SeriesControl::new(1e-15, 50).unwrap();
        match gauss_2f1(0.5, 0.5, 1.5, 0.999, ctrl) {
            Err(Error::Convergence { terms, partial_sum, .. }) => {
                assert_eq!(terms, 50);
                assert!(partial_sum > 1.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
        assert!(gauss_2f1(1.0, 1.0, 1.5, 1.0, SeriesControl::default()).is_err());
        assert!(gauss_2f1(1.0, 1.0, -2.0, 0.5, SeriesControl::default()).is_err());
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1e-3, 0).is_err());
    }

    #[test]
    fn hypergeometric_tail_bound_is_honest() {
        // F(1/2, 1/2; 1; x) = (2/π) K(√x); compare a coarse truncation to a tight one.
        let tight = gauss_2f1(0.5, 0.5, 1.0, 0.9, SeriesControl::new(1e-15, 1_000_000).unwrap()).unwrap();
        let coarse = gauss_2f1_sum(0.5, 0.5, 1.0, 0.9, SeriesControl::new(1e-6, 1_000_000).unwrap()).unwrap();
        assert!((tight - coarse.value).abs() <= coarse.tail_bound);
    }
}
