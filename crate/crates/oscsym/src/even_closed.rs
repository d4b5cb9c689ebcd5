//! Elementary closed forms for even dimensions `d = 2n`.
//!
//! For even `d` the profile is a finite combination of the functions
//!
//! ```text
//! g_j(t) = (1 - e^-t p_2j(t)) / t^(2j+1),
//! c_2n(t) = sum_{j<n} C(n-1, j) (-1)^j (2j)! g_j(t),
//! ```
//!
//! where `p_k` is the Taylor polynomial of `e^t` of order `k`. The numerator
//! `1 - e^-t p_2j(t)` is a difference of nearly equal quantities for small
//! `t`; the identity `1 - e^-t p_2j(t) = e^-t sum_{m>2j} t^m / m!` turns it
//! into a positive, cancellation-free series, used below the switch point
//! `t = 2j + 1`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::radial::{self, DerivativeStack};
use crate::real::{KahanSum, Precision, Real};

/// Switch point between the series and direct branches of [`g_term`].
pub fn g_switch(j: usize) -> f64 {
    (2 * j + 1) as f64
}

fn factorial_big(n: usize) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Taylor polynomial of `e^t` of order `j`: `p_j(t) = sum_{m<=j} t^m / m!`.
pub fn taylor_poly_exp(j: usize, t: &Real) -> Real {
    let prec = t.precision();
    let mut sum = KahanSum::new(prec);
    let mut term = Real::one(prec);
    sum.add(&term);
    for m in 1..=j {
        term = &(&term * t) / &Real::from_u64(m as u64, prec);
        sum.add(&term);
    }
    sum.value()
}

/// `g_j(t)`, evaluated by the branch appropriate for `t`.
pub fn g_term(j: usize, t: &Real) -> Result<Real> {
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let prec = t.precision();
    if t.to_f64() >= g_switch(j) {
        let p2j = taylor_poly_exp(2 * j, t);
        let num = &Real::one(prec) - &(&(-t).exp() * &p2j);
        Ok(&num / &t.powi(2 * j + 1))
    } else {
        // e^-t * sum_{i>=0} t^i / (2j+1+i)!
        Ok(&(-t).exp() * &remainder_series(j, 0, t))
    }
}

/// `S_j^(m)(t) = sum_{l>=0} ((l+m)!/l!) t^l / (l+m+2j+1)!` - the m-th
/// derivative of `sum_{i} t^i/(2j+1+i)!`. All terms are positive.
fn remainder_series(j: usize, m: usize, t: &Real) -> Real {
    let prec = t.precision();
    let bits = prec.bits() as i64;
    let mut sum = KahanSum::new(prec);
    // T_0 = m! / (m+2j+1)!  = 1 / prod_{i=m+1..m+2j+1} i
    let mut denom = BigInt::from(1u32);
    for i in m + 1..=m + 2 * j + 1 {
        denom *= i;
    }
    let mut term = Real::from_bigint(&denom, prec).recip();
    let mut l = 0usize;
    loop {
        sum.add(&term);
        // ratio T_{l+1}/T_l = t (l+m+1) / ((l+1)(l+m+2j+2))
        term = &(&(&term * t) * &Real::from_u64((l + m + 1) as u64, prec))
            / &Real::from_u64(((l + 1) * (l + m + 2 * j + 2)) as u64, prec);
        l += 1;
        let done = match (term.exponent(), sum.value().exponent()) {
            (None, _) => true,
            (Some(te), Some(se)) => te < se - (bits + 8) && l > 2,
            _ => false,
        };
        if done {
            break;
        }
    }
    sum.value()
}

/// `c_d(t)` for even `d = 2n` from the finite closed form.
pub fn c_even(n: u32, t: &Real) -> Result<Real> {
    let stack = c_even_derivatives(n, t, 0)?;
    Ok(stack.value(0).clone())
}

/// Derivative stack of the even-dimensional closed form.
///
/// Above the switch point each `g_j` is differentiated by
/// `t g_j'(t) = -(2j+1) g_j(t) + e^-t/(2j)!` extended to order `k`; below it,
/// by termwise differentiation of the remainder series.
pub fn c_even_derivatives(n: u32, t: &Real, kmax: usize) -> Result<DerivativeStack> {
    if n < 1 {
        return Err(Error::Domain("even profile needs n >= 1".into()));
    }
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let prec = t.precision();
    let work = prec.widened(16 + 4 * kmax as u32);
    let tw = t.rounded(work);
    let emt = (-&tw).exp();
    let mut slots: Vec<KahanSum> = (0..=kmax).map(|_| KahanSum::new(work)).collect();
    for j in 0..n as usize {
        // weight C(n-1, j) (-1)^j (2j)!
        let w = binomial_big(n as usize - 1, j) * factorial_big(2 * j);
        let mut weight = Real::from_bigint(&w, work);
        if j % 2 == 1 {
            weight = -&weight;
        }
        let g_stack = g_derivatives(j, &tw, &emt, kmax, work);
        for (k, g) in g_stack.iter().enumerate() {
            slots[k].add(&(&weight * g));
        }
    }
    let values = slots
        .into_iter()
        .map(|s| s.value().rounded(prec))
        .collect();
    Ok(DerivativeStack::new(2 * n, t.clone(), values))
}

fn g_derivatives(j: usize, t: &Real, emt: &Real, kmax: usize, work: Precision) -> Vec<Real> {
    if t.to_f64() >= g_switch(j) {
        // g^(k) = ((-1)^(k-1) e^-t / (2j)! - (2j+k) g^(k-1)) / t
        let inv_fact = Real::from_bigint(&factorial_big(2 * j), work).recip();
        let mut out = Vec::with_capacity(kmax + 1);
        let p2j = taylor_poly_exp(2 * j, t);
        let num = &Real::one(work) - &(emt * &p2j);
        out.push(&num / &t.powi(2 * j + 1));
        for k in 1..=kmax {
            let sign = if k % 2 == 1 {
                inv_fact.clone()
            } else {
                -&inv_fact
            };
            let num = &(&sign * emt)
                - &(&Real::from_u64((2 * j + k) as u64, work) * &out[k - 1]);
            out.push(&num / t);
        }
        out
    } else {
        // g^(k) = sum_m C(k,m) (-1)^(k-m) e^-t S_j^(m)(t)
        let s: Vec<Real> = (0..=kmax).map(|m| remainder_series(j, m, t)).collect();
        (0..=kmax)
            .map(|k| {
                let mut acc = KahanSum::new(work);
                for m in 0..=k {
                    let mut c = Real::from_bigint(&binomial_big(k, m), work);
                    if (k - m) % 2 == 1 {
                        c = -&c;
                    }
                    acc.add(&(&c * &s[m]));
                }
                emt * &acc.value()
            })
            .collect()
    }
}

/// Residuals of the two dimension-lowering identities linking `c_d` and
/// `c_(d-2)`:
///
/// ```text
/// r1 = |t c_d(t) - (d-2) c_(d-2)'(t) - 1|
/// r2 = |(d-1) c_d(t) + t c_d'(t) - (d-2) c_(d-2)(t)|
/// ```
pub fn recursion_residuals(
    stack_d: &DerivativeStack,
    stack_dm2: &DerivativeStack,
) -> Result<(Real, Real)> {
    let d = stack_d.dim();
    if d < 3 {
        return Err(Error::Domain("dimension recursion requires d >= 3".into()));
    }
    if stack_dm2.dim() != d - 2 {
        return Err(Error::Domain(
            "stacks must be for dimensions d and d-2".into(),
        ));
    }
    let t = stack_d.point();
    let prec = t.precision();
    let dm2 = Real::from_u64(d as u64 - 2, prec);
    let r1 = &(&(t * stack_d.value(0)) - &(&dm2 * stack_dm2.value(1))) - &Real::one(prec);
    let r2 = &(&(&Real::from_u64(d as u64 - 1, prec) * stack_d.value(0))
        + &(t * stack_d.value(1)))
        - &(&dm2 * stack_dm2.value(0));
    Ok((r1.abs(), r2.abs()))
}

/// Convenience wrapper building both stacks (closed form for even `d`,
/// series for odd `d` with cancellation-compensating widening).
pub fn recursion_cross_check(d: u32, t: &Real, prec: Precision) -> Result<(Real, Real)> {
    if d < 3 {
        return Err(Error::Domain("dimension recursion requires d >= 3".into()));
    }
    let stack = |dim: u32| -> Result<DerivativeStack> {
        if dim % 2 == 0 {
            c_even_derivatives(dim / 2, &t.rounded(prec), 1)
        } else {
            let tf = t.to_f64();
            let inner = prec.widened(radial::cancellation_bits_at(tf) + 16);
            let order = radial::required_order(dim, tf, inner.bits())?;
            let coeffs = radial::compute_coefficients(dim, order, inner)?;
            let s = radial::c_derivatives_series(&coeffs, &t.rounded(inner), 1)?;
            Ok(DerivativeStack::new(
                dim,
                t.rounded(prec),
                s.values().iter().map(|v| v.rounded(prec)).collect(),
            ))
        }
    };
    recursion_residuals(&stack(d)?, &stack(d - 2)?)
}
