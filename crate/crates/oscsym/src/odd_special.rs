//! Special-function layer for odd dimensions `d = 2n + 1`.
//!
//! The two parity sub-series of `c_(2n+1)` are, after double-factorial
//! algebra,
//!
//! ```text
//! u_n(t) = sum_p t^p / (p! (p+n)!)              (even part, = 2^n-scaled)
//! w_n(t) = sum_p t^(2p+1) / ((2p+1)!! (2p+2n+1)!!)   (odd part)
//! ```
//!
//! with `c_(2n+1)(t) = (d!!/d) ((pi/2) 2^-n u_n(t^2/4) - w_n(t))`. Both grow
//! like `e^t` while their combination stays `O(1/t)`, which is the narrow
//! cancellation this module quantifies. The Laplace transform of `c_1`,
//!
//! ```text
//! F(s) = arctan(sqrt(s^2-1)) / sqrt(s^2-1)   (s > 1),
//! ```
//!
//! continues through `F(1) = 1` to `artanh(sqrt(1-s^2)) / sqrt(1-s^2)` on
//! `0 < s < 1` and gives the independent route to `c_1(0) = pi/2`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::radial::DerivativeStack;
use crate::real::{KahanSum, Precision, Real};

fn fac2_big(n: u64) -> BigInt {
    let mut acc = BigInt::from(1u32);
    let mut k = n;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// `u_n(t) = sum_p t^p / (p! (p+n)!)`; positive terms, entire.
pub fn bessel_u(n: u32, t: &Real, prec: Precision) -> Result<Real> {
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let t = t.rounded(prec);
    let bits = prec.bits() as i64;
    let mut sum = KahanSum::new(prec);
    let mut term = Real::from_bigint(&fac2_big(0), prec); // placeholder 1
    let mut nfact = BigInt::from(1u32);
    for i in 2..=n as u64 {
        nfact *= i;
    }
    term = &term / &Real::from_bigint(&nfact, prec); // 1/n!
    let mut p = 0u64;
    loop {
        sum.add(&term);
        term = &(&term * &t) / &Real::from_u64((p + 1) * (p + 1 + n as u64), prec);
        p += 1;
        let done = match (term.exponent(), sum.value().exponent()) {
            (None, _) => true,
            (Some(te), Some(se)) => te < se - (bits + 8) && p > 2,
            _ => false,
        };
        if done {
            break;
        }
        if p > 100_000 {
            return Err(Error::Underresolved("u series did not converge".into()));
        }
    }
    Ok(sum.value())
}

/// `w_n(t) = sum_p t^(2p+1) / ((2p+1)!! (2p+2n+1)!!)`; positive terms, entire.
pub fn w_series(n: u32, t: &Real, prec: Precision) -> Result<Real> {
    Ok(w_derivatives(n, t, 0, prec)?.pop().unwrap())
}

/// Termwise derivative slots of `w_n`.
fn w_derivatives(n: u32, t: &Real, kmax: usize, prec: Precision) -> Result<Vec<Real>> {
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let t = t.rounded(prec);
    let bits = prec.bits() as i64;
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut sum = KahanSum::new(prec);
        // term_p = ((2p+1)!/(2p+1-k)!) t^(2p+1-k) / ((2p+1)!!(2p+2n+1)!!), p from ceil...
        let mut p = 0usize;
        // exponent 2p+1-k must be >= 0
        while 2 * p + 1 < k {
            p += 1;
        }
        let start_p = p;
        // base coefficient at p = start_p, exact rationals via BigInt
        let mut num = BigInt::from(1u32);
        let e = 2 * start_p + 1;
        for i in (e - k + 1)..=e {
            num *= i as u64;
        }
        let den = fac2_big(e as u64) * fac2_big((2 * start_p + 2 * n as usize + 1) as u64);
        let mut coef = &Real::from_bigint(&num, prec) / &Real::from_bigint(&den, prec);
        let mut tpow = t.powi(e - k);
        let t2 = t.powi(2);
        loop {
            let term = &coef * &tpow;
            sum.add(&term);
            // advance p -> p+1: multiply coefficient by
            // (2p+2)(2p+3).../(falling-adjust) / ((2p+3)(2p+2n+3)) and tpow by t^2
            // falling factor ratio: (2p+3)!/(2p+3-k)! / [(2p+1)!/(2p+1-k)!]
            //   = (2p+3)(2p+2) / ((2p+3-k)(2p+2-k))
            let e_old = 2 * p + 1;
            let ratio_num = ((e_old + 2) * (e_old + 1)) as u64;
            let ratio_den = ((e_old + 2 - k) * (e_old + 1 - k)) as u64;
            let dd = ((e_old + 2) as u64) * ((e_old + 2 * n as usize + 2) as u64);
            coef = &(&coef * &Real::from_u64(ratio_num, prec))
                / &(&Real::from_u64(ratio_den, prec) * &Real::from_u64(dd, prec));
            tpow = &tpow * &t2;
            p += 1;
            let done = match (
                (&coef * &tpow).exponent(),
                sum.value().exponent(),
            ) {
                (None, _) => true,
                (Some(te), Some(se)) => te < se - (bits + 8) && p > start_p + 2,
                _ => false,
            };
            if done {
                break;
            }
            if p > 100_000 {
                return Err(Error::Underresolved("w series did not converge".into()));
            }
        }
        out.push(sum.value());
    }
    Ok(out)
}

/// Termwise derivative slots (in `t`) of `U(t) = u_n(t^2/4)`.
fn u_derivatives_scaled(n: u32, t: &Real, kmax: usize, prec: Precision) -> Result<Vec<Real>> {
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let t = t.rounded(prec);
    let bits = prec.bits() as i64;
    // U(t) = sum_p t^(2p) / (4^p p! (p+n)!)
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut sum = KahanSum::new(prec);
        let mut p = 0usize;
        while 2 * p < k {
            p += 1;
        }
        let start_p = p;
        let e = 2 * start_p;
        let mut num = BigInt::from(1u32);
        for i in (e - k + 1)..=e {
            num *= i as u64;
        }
        let mut den = fac2_big(0).clone(); // 1
        for i in 2..=start_p {
            den *= i as u64;
        }
        let mut fpn = BigInt::from(1u32);
        for i in 2..=(start_p + n as usize) {
            fpn *= i as u64;
        }
        den *= fpn;
        den <<= 2 * start_p; // 4^p
        let mut coef = &Real::from_bigint(&num, prec) / &Real::from_bigint(&den, prec);
        let mut tpow = t.powi(e - k);
        let t2 = t.powi(2);
        loop {
            let term = &coef * &tpow;
            sum.add(&term);
            let e_old = 2 * p;
            // p -> p+1: coefficient ratio
            //   falling: (2p+2)(2p+1)/((2p+2-k)(2p+1-k)), series: 1/(4 (p+1)(p+1+n))
            let ratio_num = ((e_old + 2) * (e_old + 1)) as u64;
            let ratio_den = ((e_old + 2 - k) * (e_old + 1 - k)) as u64;
            let dd = 4 * ((p + 1) as u64) * ((p + 1 + n as usize) as u64);
            coef = &(&coef * &Real::from_u64(ratio_num, prec))
                / &(&Real::from_u64(ratio_den, prec) * &Real::from_u64(dd, prec));
            tpow = &tpow * &t2;
            p += 1;
            let done = match ((&coef * &tpow).exponent(), sum.value().exponent()) {
                (None, _) => true,
                (Some(te), Some(se)) => te < se - (bits + 8) && p > start_p + 2,
                _ => false,
            };
            if done {
                break;
            }
            if p > 100_000 {
                return Err(Error::Underresolved("u series did not converge".into()));
            }
        }
        out.push(sum.value());
    }
    Ok(out)
}

/// Value of the Laplace transform of `c_1` together with a tail/rounding bound.
#[derive(Clone, Debug)]
pub struct LaplaceValue {
    pub value: Real,
    pub err_bound: Real,
    /// Set when `s` is small enough that the series branch converges slowly
    /// (ratio `1 - s^2` close to 1); the value is still returned.
    pub slow_convergence: bool,
}

/// One-sided Laplace transform `F(s)` of `c_1`, for `s > 0`.
pub fn laplace_f(s: &Real, prec: Precision) -> Result<LaplaceValue> {
    if s.is_zero() || s.is_negative() {
        return Err(Error::Domain("Laplace transform needs s > 0".into()));
    }
    let work = prec.widened(16);
    let s = s.rounded(work);
    let one = Real::one(work);
    let s2 = s.powi(2);
    let eps = Real::exp2i(2 - prec.bits() as i64, prec);
    if s > one {
        // arctan(sqrt(s^2-1)) / sqrt(s^2-1)
        let x = (&s2 - &one).sqrt();
        let v = &x.atan() / &x;
        return Ok(LaplaceValue {
            err_bound: &v.abs() * &eps,
            value: v.rounded(prec),
            slow_convergence: false,
        });
    }
    if s == one {
        return Ok(LaplaceValue {
            value: Real::one(prec),
            err_bound: eps,
            slow_convergence: false,
        });
    }
    // 0 < s < 1: sum_p (1-s^2)^p / (2p+1) == artanh(sqrt(1-s^2))/sqrt(1-s^2)
    let q = &one - &s2;
    let x = q.sqrt();
    let v = &x.atanh() / &x;
    // the series ratio -> (1-s^2); flag s below ~0.3 as slowly convergent
    let slow = s.to_f64() < 0.3;
    let tail = if slow {
        // report the scale of the series tail at the equivalent truncation
        &v.abs() * &(&eps * &(&one / &(&one - &q)))
    } else {
        &v.abs() * &eps
    };
    Ok(LaplaceValue {
        value: v.rounded(prec),
        err_bound: tail,
        slow_convergence: slow,
    })
}

/// Precision needed before the `w`/`u` cancellation at argument `t` leaves
/// meaningful bits: both sides grow like `e^t` while the difference is
/// `O(1/t)`, so `2t/ln 2` bits vanish.
pub fn residual_required_bits(t: f64) -> u32 {
    (2.0 * t / std::f64::consts::LN_2).ceil() as u32 + 64
}

/// Derivatives through order `kmax` of the residual
/// `w_n(t) - (pi/2) 2^-n u_n(t^2/4)`  ( = -(d/d!!) c_d(t) for d = 2n+1 ).
///
/// Both series are evaluated termwise at the stated precision and
/// subtracted; `prec` must cover the known `e^t`-scale cancellation, see
/// [`residual_required_bits`].
pub fn bessel_residual(n: u32, t: &Real, kmax: usize, prec: Precision) -> Result<DerivativeStack> {
    let tf = t.to_f64();
    let needed = residual_required_bits(tf);
    if prec.bits() < needed {
        return Err(Error::PrecisionExhausted(format!(
            "residual at t={tf} needs at least {needed} significand bits, got {}",
            prec.bits()
        )));
    }
    let w = w_derivatives(n, t, kmax, prec)?;
    let u = u_derivatives_scaled(n, t, kmax, prec)?;
    // (pi/2) 2^-n
    let scale = &(&Real::pi(prec) / &Real::from_i64(2, prec)) / &Real::exp2i(n as i64, prec);
    let values = w
        .into_iter()
        .zip(u)
        .map(|(wv, uv)| &wv - &(&scale * &uv))
        .collect();
    Ok(DerivativeStack::new(
        2 * n + 1,
        t.rounded(prec),
        values,
    ))
}
