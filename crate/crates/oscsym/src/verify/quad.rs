//! Adaptive Gauss-Legendre quadrature at arbitrary precision.
//!
//! Nodes and weights are computed on demand by Newton iteration on the
//! Legendre recurrence, so the rule works at any significand width. Error
//! control pairs a 20-point with a 40-point rule per subinterval and bisects
//! until the pairwise difference meets the local budget.

use crate::error::{Error, Result};
use crate::real::{KahanSum, Precision, Real};

/// Legendre P_n and its derivative at `x`, by the three-term recurrence.
fn legendre(n: usize, x: &Real, prec: Precision) -> (Real, Real) {
    let one = Real::one(prec);
    let mut p_prev = one.clone();
    let mut p = x.clone();
    for k in 1..n {
        let a = Real::from_u64(2 * k as u64 + 1, prec);
        let b = Real::from_u64(k as u64, prec);
        let c = Real::from_u64(k as u64 + 1, prec);
        let next = &(&(&(&a * x) * &p) - &(&b * &p_prev)) / &c;
        p_prev = p;
        p = next;
    }
    // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = &Real::from_u64(n as u64, prec) * &(&(x * &p) - &p_prev);
    let den = &(x * x) - &one;
    (p.clone(), &num / &den)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize, prec: Precision) -> Vec<(Real, Real)> {
    let work = prec.widened(16);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        // Tricomi-style seed, then Newton at full precision
        let seed = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut x = Real::from_f64(seed, work);
        for _ in 0..40 {
            let (p, dp) = legendre(n, &x, work);
            let step = &p / &dp;
            x = &x - &step;
            if let (Some(se), Some(_)) = (step.exponent(), x.exponent()) {
                if se < -(work.bits() as i64) {
                    break;
                }
            } else {
                break;
            }
        }
        let (_, dp) = legendre(n, &x, work);
        let one = Real::one(work);
        let w = &Real::from_i64(2, work) / &(&(&one - &(&x * &x)) * &(&dp * &dp));
        out.push((x.rounded(prec), w.rounded(prec)));
    }
    out
}

fn rule_sum(
    f: &mut dyn FnMut(&Real) -> Result<Real>,
    rule: &[(Real, Real)],
    a: &Real,
    b: &Real,
    prec: Precision,
) -> Result<Real> {
    let half = Real::exp2i(-1, prec);
    let mid = &(a + b) * &half;
    let rad = &(b - a) * &half;
    let mut acc = KahanSum::new(prec);
    for (x, w) in rule {
        let t = &mid + &(&rad * x);
        acc.add(&(w * &f(&t)?));
    }
    Ok(&acc.value() * &rad)
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns the value and the accumulated error estimate. Fails with
/// `InsufficientSignal` if the interval queue exceeds a depth consistent
/// with the tolerance (integrand too rough for the rule).
pub fn integrate(
    f: &mut dyn FnMut(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    tol: &Real,
    prec: Precision,
) -> Result<(Real, Real)> {
    let rule_lo = gauss_legendre(20, prec);
    let rule_hi = gauss_legendre(40, prec);
    let total_len = (b - a).abs();
    let mut queue: Vec<(Real, Real)> = vec![(a.clone(), b.clone())];
    let mut value = KahanSum::new(prec);
    let mut err = KahanSum::new(prec);
    let mut splits = 0usize;
    while let Some((lo, hi)) = queue.pop() {
        let coarse = rule_sum(f, &rule_lo, &lo, &hi, prec)?;
        let fine = rule_sum(f, &rule_hi, &lo, &hi, prec)?;
        let diff = (&fine - &coarse).abs();
        let local_budget = &(tol * &(&hi - &lo).abs()) / &total_len;
        if diff <= local_budget {
            value.add(&fine);
            err.add(&diff);
        } else {
            splits += 1;
            if splits > 4000 {
                return Err(Error::InsufficientSignal(
                    "quadrature subdivision limit reached".into(),
                ));
            }
            let mid = &(&lo + &hi) * &Real::exp2i(-1, prec);
            queue.push((lo, mid.clone()));
            queue.push((mid, hi));
        }
    }
    Ok((value.value(), err.value()))
}
