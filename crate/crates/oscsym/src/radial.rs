//! Power-series representation of the radial profile `c_d`.
//!
//! `c_d` is the entire function with `b_d(X) = c_d(|X|^2)` and satisfies
//!
//! ```text
//! -t c'' - d c' + t c = 1,        c bounded on t >= 0.
//! ```
//!
//! Its Taylor coefficients obey `a_1 = -1/d` and `a_k = a_{k-2} / (k (k+d-1))`,
//! with `a_0 = alpha * d!! / (d (d-1)!!)` where `alpha = 1` for even `d` and
//! `pi/2` for odd `d`. Both parity sub-sums grow like `e^t`, so direct
//! summation cancels roughly `2t/ln 2` bits; callers are expected to widen the
//! working precision or dispatch to another route outside the trust region.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::real::{KahanSum, Precision, Real};

/// Largest series order the adaptive order estimate will request.
pub const ORDER_CAP: usize = 4000;

/// Extent of the series trust region at a given precision:
/// `t <= 0.25 * bits * ln 2` keeps at least half the significand after
/// cancellation (which costs about `2t / ln 2` bits).
pub fn trust_region(prec: Precision) -> f64 {
    0.25 * prec.bits() as f64 * std::f64::consts::LN_2
}

/// Bits lost to cancellation when summing the series at argument `t`.
pub fn cancellation_bits_at(t: f64) -> u32 {
    (2.0 * t / std::f64::consts::LN_2).ceil().max(0.0) as u32
}

fn double_factorial(n: u32) -> BigInt {
    let mut acc = BigInt::from(1u32);
    let mut k = n;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Taylor coefficients `a_0 ... a_K` of `c_d`, with the parity constant folded in.
#[derive(Clone, Debug)]
pub struct SeriesCoefficients {
    dim: u32,
    alpha: Real,
    coeffs: Vec<Real>,
    prec: Precision,
}

impl SeriesCoefficients {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// The parity constant: 1 for even `d`, `pi/2` for odd `d`.
    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Real {
        &self.coeffs[k]
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }
}

/// Build the coefficient table for dimension `d` up to order `K`.
pub fn compute_coefficients(d: u32, order: usize, prec: Precision) -> Result<SeriesCoefficients> {
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if order < 1 {
        return Err(Error::Domain("series order must be at least 1".into()));
    }
    let work = prec.widened(16);
    let alpha = if d % 2 == 0 {
        Real::one(work)
    } else {
        &Real::pi(work) / &Real::from_i64(2, work)
    };
    // a_0 = alpha * d!! / (d * (d-1)!!), exact integer fraction times alpha
    let num = Real::from_bigint(&double_factorial(d), work);
    let den = Real::from_bigint(&(double_factorial(d - 1) * d), work);
    let a0 = &(&alpha * &num) / &den;
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(a0);
    coeffs.push(&-&Real::one(work) / &Real::from_u64(d as u64, work));
    for k in 2..=order {
        let div = Real::from_u64(k as u64 * (k as u64 + d as u64 - 1), work);
        let a = &coeffs[k - 2] / &div;
        coeffs.push(a);
    }
    Ok(SeriesCoefficients {
        dim: d,
        alpha: alpha.rounded(prec),
        coeffs: coeffs.into_iter().map(|c| c.rounded(prec)).collect(),
        prec,
    })
}

/// Estimate the order needed so the first neglected term of `sum a_k t^k`
/// falls below `2^-(bits+8)` times the sum. Works in log space so large `t`
/// cannot overflow. Errors with `Underresolved` past [`ORDER_CAP`].
pub fn required_order(d: u32, t: f64, bits: u32) -> Result<usize> {
    required_order_with_derivatives(d, t, bits, 0)
}

/// Like [`required_order`], but covering the termwise-differentiated slots up
/// to `kmax`: slot `k` carries falling factorials that inflate the order-`m`
/// term by up to `m^k`, so the tail must sink correspondingly deeper.
pub fn required_order_with_derivatives(d: u32, t: f64, bits: u32, kmax: usize) -> Result<usize> {
    if t < 0.0 {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    if t == 0.0 {
        return Ok(2.max(kmax + 2));
    }
    let ln_t = t.ln();
    // The summed value is ~1/t while terms start at ~1, so the stopping rule
    // |term| < 2^-(bits+8) |sum| needs terms below 2^-(bits+..)/max(t,1).
    let threshold = -((bits as f64 + 12.0) * std::f64::consts::LN_2) - t.max(1.0).ln();
    // log |a_k t^k| up to the common factor |a_0|; parity strands tracked together.
    let mut lm_even = 0.0f64;
    let mut lm_odd = ln_t - (d as f64).ln();
    let mut k = 2usize;
    while k + 2 <= ORDER_CAP {
        lm_even += 2.0 * ln_t - ((k * (k + d as usize - 1)) as f64).ln();
        lm_odd += 2.0 * ln_t - (((k + 1) * (k + d as usize)) as f64).ln();
        let ratio_small = (t * t) < 0.5 * ((k + 2) * (k + 1 + d as usize)) as f64;
        let slot_inflation = kmax as f64 * ((k + 3) as f64).ln();
        if ratio_small && lm_even.max(lm_odd) + slot_inflation < threshold {
            return Ok(k + 3 + kmax);
        }
        k += 2;
    }
    Err(Error::Underresolved(format!(
        "series order cap {ORDER_CAP} reached for d={d}, t={t}, bits={bits}"
    )))
}

/// A series evaluation together with its reported accuracy.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Real,
    /// Bound on |computed - exact|: rounding plus the truncation tail.
    pub err_bound: Real,
    pub terms_used: usize,
}

/// Evaluate `c_d(t)` by compensated ascending summation of the power series.
pub fn c_series(coeffs: &SeriesCoefficients, t: &Real) -> Result<SeriesValue> {
    let stacks = sum_derivative_slots(coeffs, t, 0)?;
    Ok(stacks.into_iter().next().unwrap())
}

/// Values `c(t), c'(t), ..., c^(kmax)(t)` at one point.
#[derive(Clone, Debug)]
pub struct DerivativeStack {
    dim: u32,
    t: Real,
    values: Vec<Real>,
}

impl DerivativeStack {
    pub fn new(dim: u32, t: Real, values: Vec<Real>) -> Self {
        assert!(!values.is_empty());
        DerivativeStack { dim, t, values }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn point(&self) -> &Real {
        &self.t
    }

    pub fn kmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, k: usize) -> &Real {
        &self.values[k]
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    /// Residual of the k-times differentiated defining equation,
    /// `-(t c^(k+2) + k c^(k+1)) - d c^(k+1) + t c^(k) + k c^(k-1)`,
    /// which is `-t c'' - d c' + t c - 1` for `k = 0`. Needs `k + 2 <= kmax`.
    pub fn ode_residual(&self, k: usize) -> Real {
        assert!(k + 2 <= self.kmax());
        let prec = self.t.precision();
        let d = Real::from_u64(self.dim as u64, prec);
        let kr = Real::from_u64(k as u64, prec);
        let mut r = &-&(&(&self.t * &self.values[k + 2]) + &(&kr * &self.values[k + 1]))
            - &(&d * &self.values[k + 1]);
        r = &r + &(&self.t * &self.values[k]);
        if k > 0 {
            r = &r + &(&kr * &self.values[k - 1]);
        } else {
            r = &r - &Real::one(prec);
        }
        r
    }
}

/// Sum the termwise k-th derivatives of the series for all `k <= kmax`.
fn sum_derivative_slots(
    coeffs: &SeriesCoefficients,
    t: &Real,
    kmax: usize,
) -> Result<Vec<SeriesValue>> {
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    let prec = coeffs.prec;
    let bits = prec.bits();
    let order = coeffs.order();
    if kmax > order {
        return Err(Error::Underresolved(format!(
            "kmax={kmax} exceeds series order {order}"
        )));
    }
    let mut out = Vec::with_capacity(kmax + 1);
    if t.is_zero() {
        // Only the m = k term survives; c^(k)(0) = k! a_k.
        let mut fact = Real::one(prec);
        for k in 0..=kmax {
            if k > 0 {
                fact = &fact * &Real::from_u64(k as u64, prec);
            }
            out.push(SeriesValue {
                value: &fact * coeffs.coeff(k),
                err_bound: Real::zero(prec),
                terms_used: 1,
            });
        }
        return Ok(out);
    }
    let t_f = t.to_f64();
    for k in 0..=kmax {
        let mut sum = KahanSum::new(prec);
        // falling factorial m!/(m-k)! and power t^(m-k), maintained incrementally
        let mut fall = Real::one(prec);
        for i in 2..=k as u64 {
            fall = &fall * &Real::from_u64(i, prec);
        }
        let mut tpow = Real::one(prec);
        let mut stopped = None;
        let mut m = k;
        while m <= order {
            let term = &(&fall * coeffs.coeff(m)) * &tpow;
            // stop once the tail is provably below 2^-(bits+8) * |sum|
            let small = match (term.exponent(), sum.value().exponent()) {
                (None, _) => true,
                (Some(te), Some(se)) => te < se - (bits as i64 + 8),
                _ => false,
            };
            let ratio_small =
                t_f * t_f < 0.5 * ((m + 2) * (m + 1 + coeffs.dim as usize - k)) as f64;
            if small && ratio_small && m > k + 1 {
                stopped = Some((m, term.abs()));
                break;
            }
            sum.add(&term);
            fall = &(&fall * &Real::from_u64(m as u64 + 1, prec))
                / &Real::from_u64((m + 1 - k) as u64, prec);
            tpow = &tpow * t;
            m += 1;
        }
        let (terms_used, neglected) = match stopped {
            Some((m, tail)) => (m - k, tail),
            None => {
                return Err(Error::Underresolved(format!(
                    "series order {order} too small for t={t_f} at {bits} bits (slot {k})"
                )));
            }
        };
        let lost = sum.cancellation_bits();
        if lost + 8 > bits {
            return Err(Error::PrecisionExhausted(format!(
                "parity sub-sums cancel {lost} of {bits} bits at t={t_f} (slot {k})"
            )));
        }
        // rounding: each add commits O(ulp of max term); tail: geometric ratio < 1/2
        let rounding = &(&sum.max_abs_term() * &Real::exp2i(2 - bits as i64, prec))
            * &Real::from_u64(terms_used as u64 + 2, prec);
        let err_bound = &rounding + &(&neglected + &neglected);
        out.push(SeriesValue {
            value: sum.value(),
            err_bound,
            terms_used,
        });
    }
    Ok(out)
}

/// Termwise-differentiated series: slot `k` holds `sum_m m!/(m-k)! a_m t^(m-k)`.
pub fn c_derivatives_series(
    coeffs: &SeriesCoefficients,
    t: &Real,
    kmax: usize,
) -> Result<DerivativeStack> {
    let slots = sum_derivative_slots(coeffs, t, kmax)?;
    Ok(DerivativeStack::new(
        coeffs.dim,
        t.rounded(coeffs.prec),
        slots.into_iter().map(|s| s.value).collect(),
    ))
}

/// Extend `(c, c')` at `t > 0` to all orders through `kmax` by the
/// differentiated defining equation:
///
/// ```text
/// c''      = (-d c' + t c - 1) / t
/// c^(k+2)  = (t c^(k) + k c^(k-1) - (d+k) c^(k+1)) / t,   k >= 1.
/// ```
///
/// The recurrence mixes the growing and decaying solutions, so run it at
/// verification precision and cross-check against the series route.
pub fn derivative_recurrence(
    d: u32,
    t: &Real,
    c0: &Real,
    c1: &Real,
    kmax: usize,
) -> Result<DerivativeStack> {
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    if t.is_zero() {
        return Err(Error::SingularPoint(
            "derivative recurrence divides by t; use the series at t = 0".into(),
        ));
    }
    let prec = t.precision().max(c0.precision());
    let dr = Real::from_u64(d as u64, prec);
    let mut values = vec![c0.rounded(prec), c1.rounded(prec)];
    if kmax >= 2 {
        let num = &-&(&dr * c1) + &(&(t * c0) - &Real::one(prec));
        values.push(&num / t);
    }
    for k in 1..=kmax.saturating_sub(2) {
        let kr = Real::from_u64(k as u64, prec);
        let num = &(&(t * &values[k]) + &(&kr * &values[k - 1]))
            - &(&(&dr + &kr) * &values[k + 1]);
        values.push(&num / t);
    }
    values.truncate(kmax + 1);
    Ok(DerivativeStack::new(d, t.rounded(prec), values))
}

/// Derivative stack at the origin from the algebraic relation
/// `(d+k) c^(k+1)(0) = k c^(k-1)(0)` with `c(0) = a_0`, `c'(0) = -1/d`.
pub fn derivatives_at_zero(d: u32, kmax: usize, prec: Precision) -> Result<DerivativeStack> {
    let coeffs = compute_coefficients(d, 2.max(kmax), prec)?;
    let mut values = vec![coeffs.coeff(0).clone()];
    if kmax >= 1 {
        values.push(coeffs.coeff(1).clone());
    }
    for k in 1..kmax {
        // c^(k+1)(0) = k c^(k-1)(0) / (d + k)
        let num = &Real::from_u64(k as u64, prec) * &values[k - 1];
        values.push(&num / &Real::from_u64((d as usize + k) as u64, prec));
    }
    Ok(DerivativeStack::new(d, Real::zero(prec), values))
}
