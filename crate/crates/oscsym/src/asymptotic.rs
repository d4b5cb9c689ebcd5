//! Large-argument expansion of `c_d` in homogeneous terms.
//!
//! The expansion reads `c_d(t) ~ sum_j kappa_j t^(-1-2j)` with exact integer
//! coefficients
//!
//! ```text
//! kappa_0 = 1,      kappa_j = (-1)^j (2j-1)!! prod_{l=1..j} (d - 2l),
//! ```
//!
//! equivalently `kappa_j = -(2j-1)(d-2j) kappa_(j-1)`. For even `d` the
//! coefficients vanish from `j = d/2` on and the (regularized) expansion
//! terminates; for odd `d` they grow factorially and the series is asymptotic
//! only, so evaluation truncates at the smallest term.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::even_closed;
use crate::radial::DerivativeStack;
use crate::real::{KahanSum, Real};

/// Exact coefficient `kappa_j` of the homogeneous term `t^(-1-2j)`.
pub fn h_coeff(d: u32, j: usize) -> BigInt {
    let mut acc = BigInt::from(1i32);
    for l in 1..=j {
        acc *= -BigInt::from((2 * l - 1) as i64) * (BigInt::from(d) - BigInt::from(2 * l as i64));
    }
    acc
}

/// `log2 |kappa_j|`, or `None` when the coefficient is zero.
pub fn h_coeff_log2(d: u32, j: usize) -> Option<f64> {
    let mut acc = 0.0f64;
    for l in 1..=j {
        let f = (d as i64 - 2 * l as i64).abs();
        if f == 0 {
            return None;
        }
        acc += ((2 * l - 1) as f64).log2() + (f as f64).log2();
    }
    Some(acc)
}

/// The truncated expansion for one dimension: coefficients `kappa_0..kappa_(N-1)`.
#[derive(Clone, Debug)]
pub struct AsymptoticExpansion {
    dim: u32,
    coeffs: Vec<BigInt>,
}

impl AsymptoticExpansion {
    pub fn new(d: u32, terms: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if terms < 1 {
            return Err(Error::Domain("need at least one term".into()));
        }
        let mut coeffs = Vec::with_capacity(terms);
        let mut k = BigInt::from(1i32);
        coeffs.push(k.clone());
        for j in 1..terms {
            k *= -BigInt::from((2 * j - 1) as i64) * (BigInt::from(d) - BigInt::from(2 * j as i64));
            coeffs.push(k.clone());
        }
        Ok(AsymptoticExpansion { dim: d, coeffs })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, j: usize) -> &BigInt {
        &self.coeffs[j]
    }
}

/// A truncated-expansion value together with the first omitted term.
#[derive(Clone, Debug)]
pub struct AsymptoticValue {
    pub value: Real,
    /// Magnitude of the first omitted term - the standard error estimate.
    pub omitted: Real,
    /// Set when the omitted-term estimate exceeds the last included term,
    /// i.e. the truncation order is past the optimal one.
    pub divergence_floor: bool,
}

/// Sum of the first `N` homogeneous terms at `t > 0`.
pub fn c_asymptotic(d: u32, n_terms: usize, t: &Real) -> Result<AsymptoticValue> {
    if t.is_zero() || t.is_negative() {
        return Err(Error::Domain("asymptotic route needs t > 0".into()));
    }
    let exp = AsymptoticExpansion::new(d, n_terms + 1)?;
    let prec = t.precision();
    let inv_t2 = t.powi(2).recip();
    let mut pow = t.recip();
    let mut sum = KahanSum::new(prec);
    let mut last = Real::zero(prec);
    for j in 0..n_terms {
        let term = &Real::from_bigint(exp.coeff(j), prec) * &pow;
        sum.add(&term);
        last = term.abs();
        pow = &pow * &inv_t2;
    }
    let omitted = (&Real::from_bigint(exp.coeff(n_terms), prec) * &pow).abs();
    let divergence_floor = !omitted.is_zero() && omitted > last;
    Ok(AsymptoticValue {
        value: sum.value(),
        omitted,
        divergence_floor,
    })
}

/// Termwise derivatives of the truncated expansion:
/// slot `k` holds `sum_{j<N} kappa_j (-1-2j)(-2-2j)...(-2j-k) t^(-1-2j-k)`.
pub fn c_asymptotic_derivatives(
    d: u32,
    n_terms: usize,
    t: &Real,
    kmax: usize,
) -> Result<DerivativeStack> {
    if t.is_zero() || t.is_negative() {
        return Err(Error::Domain("asymptotic route needs t > 0".into()));
    }
    let exp = AsymptoticExpansion::new(d, n_terms)?;
    let prec = t.precision();
    let inv_t = t.recip();
    let inv_t2 = &inv_t * &inv_t;
    let mut values = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut sum = KahanSum::new(prec);
        let mut pow = inv_t.powi(1 + k); // t^(-1-k) for j = 0
        for j in 0..n_terms {
            // falling product (-1-2j)(-2-2j)...(-k-2j), exact in i128 for sane k, j
            let mut fall = BigInt::from(1i32);
            for i in 1..=k {
                fall *= -BigInt::from((2 * j + i) as i64);
            }
            let coef = exp.coeff(j) * fall;
            sum.add(&(&Real::from_bigint(&coef, prec) * &pow));
            pow = &pow * &inv_t2;
        }
        values.push(sum.value());
    }
    Ok(DerivativeStack::new(d, t.clone(), values))
}

/// Exponentially regularized expansion `sum_{j<N} kappa_j g_j(t)`, finite at 0.
///
/// Differs from [`c_asymptotic`] by `e^-t` times a polynomial, so it has the
/// same asymptotic expansion; for even `d` with `N >= d/2` it equals the
/// closed form identically.
pub fn c_asymptotic_tilde(d: u32, n_terms: usize, t: &Real) -> Result<Real> {
    let exp = AsymptoticExpansion::new(d, n_terms)?;
    let prec = t.precision();
    let mut sum = KahanSum::new(prec);
    for j in 0..n_terms {
        let g = even_closed::g_term(j, t)?;
        sum.add(&(&Real::from_bigint(exp.coeff(j), prec) * &g));
    }
    Ok(sum.value())
}

/// Far-field value of the symbol: `b_d(X) ~ sum_{j<N} kappa_j |X|^(-2-4j)`,
/// i.e. the radial expansion at `t = |X|^2`.
pub fn b_asymptotic(
    d: u32,
    n_terms: usize,
    x: &crate::symbol::PhasePoint,
) -> Result<AsymptoticValue> {
    if x.dim() != d {
        return Err(Error::Domain("phase point dimension mismatch".into()));
    }
    c_asymptotic(d, n_terms, x.radial())
}

/// Truncation order minimizing the first-omitted-term estimate at `t`, with
/// the estimate itself (`log2` of the relative size is also exposed through
/// [`optimal_rel_bits`]). For even `d` the expansion terminates at `d/2`.
pub fn optimal_truncation(d: u32, t: f64) -> (usize, f64) {
    if d % 2 == 0 {
        return (d as usize / 2, 0.0);
    }
    let lt = t.log2();
    let mut best = f64::INFINITY;
    let mut best_n = 1usize;
    let mut lk = 0.0f64; // log2 |kappa_n|
    for n in 1..400usize {
        lk += ((2 * n - 1) as f64).log2() + ((d as i64 - 2 * n as i64).abs() as f64).log2();
        let m = lk - (1.0 + 2.0 * n as f64) * lt;
        if m < best {
            best = m;
            best_n = n;
        } else if m > best + 8.0 {
            break;
        }
    }
    (best_n, best.exp2())
}

/// Bits of relative accuracy the optimally truncated expansion delivers at `t`
/// (relative to the leading magnitude `1/t`). Unbounded for even `d`.
pub fn optimal_rel_bits(d: u32, t: f64) -> f64 {
    if d % 2 == 0 {
        return f64::INFINITY;
    }
    let (_, omitted) = optimal_truncation(d, t);
    // relative to |c_d| ~ 1/t
    -(omitted * t).log2()
}

/// One reference sample for the order fit: abscissa, trusted value of `c_d`,
/// and the reference route's own error bound.
#[derive(Clone, Debug)]
pub struct ReferencePoint {
    pub t: Real,
    pub c: Real,
    pub err_bound: Real,
}

#[derive(Clone, Debug)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    /// Remainder decays faster than any tested power: the expansion is exact
    /// up to exponentially small terms at this order.
    pub exponential_regime: bool,
}

/// Least-squares slope of `log |c_d - sum_{j<N} h_j|` against `log t`.
///
/// Only grid points where the remainder exceeds 32x the reference error bound
/// enter the fit; fewer than three such points is an `InsufficientSignal`
/// error. A slope below `-(1+2N) - 8` is flagged as the exponential regime.
pub fn error_order_probe(d: u32, n_terms: usize, refs: &[ReferencePoint]) -> Result<SlopeFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let thirty_two = 32.0;
    for pt in refs {
        let approx = c_asymptotic(d, n_terms, &pt.t)?;
        let rem = (&pt.c - &approx.value).abs();
        if rem.to_f64() <= thirty_two * pt.err_bound.to_f64() {
            continue;
        }
        xs.push(pt.t.to_f64().ln());
        ys.push(rem.to_f64().ln());
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSignal(format!(
            "only {} of {} remainders rise above the reference error floor",
            xs.len(),
            refs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        points_used: xs.len(),
        exponential_regime: slope < -(1.0 + 2.0 * n_terms as f64) - 8.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial;
    use crate::real::Precision;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn r(x: f64, prec: Precision) -> Real {
        Real::from_f64(x, prec)
    }

    #[test]
    fn kappa_values() {
        assert_eq!(h_coeff(4, 1), BigInt::from(-2));
        assert_eq!(h_coeff(2, 1), BigInt::from(0));
        assert_eq!(h_coeff(3, 2), BigInt::from(-3));
        assert_eq!(h_coeff(1, 2), BigInt::from(9)); // ((2j-1)!!)^2 for d=1
    }

    #[test]
    fn kappa_recurrence_identity() {
        for d in 1..=12u32 {
            for j in 1..=10usize {
                let lhs = h_coeff(d, j);
                let rhs = h_coeff(d, j - 1)
                    * -BigInt::from((2 * j - 1) as i64)
                    * (BigInt::from(d) - BigInt::from(2 * j as i64));
                assert_eq!(lhs, rhs, "d={d} j={j}");
            }
        }
    }

    #[test]
    fn even_dimension_terminates() {
        for n in 1..=6u32 {
            let d = 2 * n;
            for j in (d as usize / 2)..(d as usize / 2 + 5) {
                assert_eq!(h_coeff(d, j), BigInt::from(0), "d={d} j={j}");
            }
        }
    }

    #[test]
    fn two_term_arithmetic() {
        let prec = p(128);
        let v = c_asymptotic(4, 2, &r(10.0, prec)).unwrap();
        assert!((v.value.to_f64() - 0.098).abs() < 1e-30);
        // d=2: all higher terms vanish
        let v2 = c_asymptotic(2, 7, &r(8.0, prec)).unwrap();
        assert_eq!(v2.value.to_f64(), 0.125);
        assert!(v2.omitted.is_zero());
    }

    #[test]
    fn b_asymptotic_goes_through_radius_squared() {
        use crate::symbol::PhasePoint;
        let prec = p(128);
        // |X| = 2 -> t = 4: d=2 gives 1/4
        let x = PhasePoint::from_f64(2, &[2.0, 0.0, 0.0, 0.0], prec).unwrap();
        let v = b_asymptotic(2, 1, &x).unwrap();
        assert_eq!(v.value.to_f64(), 0.25);
        // |X|^2 = 10 for d=4 matches the two-term radial value
        let s = (10.0f64 / 8.0).sqrt();
        let x4 = PhasePoint::from_f64(4, &[s; 8], prec).unwrap();
        let v4 = b_asymptotic(4, 2, &x4).unwrap();
        assert!((v4.value.to_f64() - 0.098).abs() < 1e-15);
        assert!(b_asymptotic(3, 1, &x).is_err());
    }

    #[test]
    fn difference_to_even_closed_form_is_exponential() {
        // c_4(10) - (1/10 - 2/1000) = 2 (10+1) e^{-10} / 1000
        let prec = p(192);
        let t = r(10.0, prec);
        let asym = c_asymptotic(4, 2, &t).unwrap();
        let closed = even_closed::c_even(2, &t).unwrap();
        let diff = &closed - &asym.value;
        let want = &(&Real::from_i64(22, prec) * &(-&t).exp()) / &Real::from_i64(1000, prec);
        let rel = (&(&diff - &want) / &want).abs().to_f64();
        assert!(rel < 1e-40, "rel={rel}");
    }

    #[test]
    fn tilde_equals_closed_form_for_even_d() {
        let prec = p(160);
        for n in 1..=4u32 {
            for &t in &[0.25, 1.0, 7.0, 30.0] {
                let tr = r(t, prec);
                let tilde = c_asymptotic_tilde(2 * n, n as usize, &tr).unwrap();
                let closed = even_closed::c_even(n, &tr).unwrap();
                let rel = (&(&tilde - &closed) / &closed).abs().to_f64();
                assert!(rel < 1e-38, "n={n} t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn tilde_finite_at_zero() {
        let prec = p(128);
        let v = c_asymptotic_tilde(3, 1, &Real::zero(prec)).unwrap();
        assert_eq!(v.to_f64(), 1.0); // g_0(0)
    }

    #[test]
    fn tilde_close_to_plain_at_large_t() {
        let prec = p(192);
        let t = r(20.0, prec);
        let tilde = c_asymptotic_tilde(5, 2, &t).unwrap();
        let plain = c_asymptotic(5, 2, &t).unwrap().value;
        let diff = (&tilde - &plain).abs().to_f64();
        assert!(diff < 1e-9 && diff > 0.0, "diff={diff}");
    }

    #[test]
    fn optimal_truncation_behaviour() {
        let (n30, e30) = optimal_truncation(3, 30.0);
        assert!((14..=16).contains(&n30), "N*={n30}");
        assert!(e30 < 1e-13 && e30 > 1e-17, "est={e30}");
        let (n_even, e_even) = optimal_truncation(6, 25.0);
        assert_eq!(n_even, 3);
        assert_eq!(e_even, 0.0);
    }

    #[test]
    fn divergence_floor_advisory() {
        let prec = p(128);
        // far past the optimal order at small t
        let v = c_asymptotic(3, 12, &r(3.0, prec)).unwrap();
        assert!(v.divergence_floor);
        let ok = c_asymptotic(3, 2, &r(30.0, prec)).unwrap();
        assert!(!ok.divergence_floor);
    }

    #[test]
    fn derivative_slots_match_series_route() {
        // at large t the termwise-differentiated expansion reproduces the
        // series-route derivatives up to the truncation error
        let prec = p(320);
        let tf = 35.0;
        let order = radial::required_order(3, tf, prec.bits()).unwrap();
        let coeffs = radial::compute_coefficients(3, order, prec).unwrap();
        let t = r(tf, prec);
        let series = radial::c_derivatives_series(&coeffs, &t, 2).unwrap();
        let (n_opt, _) = optimal_truncation(3, tf);
        let asym = c_asymptotic_derivatives(3, n_opt, &t, 2).unwrap();
        for k in 0..=2 {
            let diff = (series.value(k) - asym.value(k)).abs().to_f64();
            assert!(diff < 1e-13, "k={k} diff={diff}");
        }
    }

    #[test]
    fn slope_fit_recovers_synthetic_order() {
        let prec = p(128);
        // synthetic: c = asym(N) + t^{-7}, so the N-term remainder is t^{-7}
        let n = 2usize;
        let refs: Vec<ReferencePoint> = (0..20)
            .map(|i| {
                let t = r(10.0 * 1.2f64.powi(i), prec);
                let base = c_asymptotic(3, n, &t).unwrap().value;
                ReferencePoint {
                    c: &base + &t.powi(7).recip(),
                    err_bound: Real::exp2i(-100, prec),
                    t,
                }
            })
            .collect();
        let fit = error_order_probe(3, n, &refs).unwrap();
        assert!((fit.slope + 7.0).abs() < 0.05, "slope={}", fit.slope);
        assert!(!fit.exponential_regime);
        assert_eq!(fit.points_used, 20);
    }

    #[test]
    fn insufficient_signal_detected() {
        let prec = p(128);
        let refs: Vec<ReferencePoint> = (0..10)
            .map(|i| {
                let t = r(10.0 + i as f64, prec);
                let c = c_asymptotic(3, 3, &t).unwrap().value;
                ReferencePoint {
                    c,
                    err_bound: Real::one(prec), // absurdly loose reference
                    t,
                }
            })
            .collect();
        assert!(matches!(
            error_order_probe(3, 3, &refs),
            Err(Error::InsufficientSignal(_))
        ));
    }
}
