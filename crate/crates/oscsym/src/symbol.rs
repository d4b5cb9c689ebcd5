//! User-facing evaluation of the phase-space symbol `b_d(X) = c_d(|X|^2)`.
//!
//! Route dispatch: even dimensions always use the elementary closed form;
//! odd dimensions use the power series up to a computed switch point and the
//! optimally truncated asymptotic expansion beyond it. The switch point is
//! where the series cancellation bound (at the stated precision) crosses the
//! optimal-truncation error, so it moves with the requested precision.
//!
//! Partial derivatives go through an exact integer-polynomial representation
//! `d^alpha b = sum_k P_k(X) c^(k)(|X|^2)` built by repeated differentiation,
//! evaluated against a derivative stack from the dispatched route.

use crate::asymptotic;
use crate::error::{Error, Result};
use crate::even_closed;
use crate::poly::RadialDerivativeRep;
use crate::radial::{self, DerivativeStack};
use crate::real::{KahanSum, Precision, Real};

/// Which evaluation route produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Series,
    EvenClosed,
    Asymptotic,
}

impl Route {
    pub fn tag(self) -> &'static str {
        match self {
            Route::Series => "series",
            Route::EvenClosed => "even-closed",
            Route::Asymptotic => "asymptotic",
        }
    }
}

/// A dispatched evaluation: value, reported error bound, route taken.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Real,
    pub err_bound: Real,
    pub route: Route,
}

/// A point `X = (x, xi)` in phase space `R^2d`, with `t = |X|^2` cached.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    dim: u32,
    coords: Vec<Real>,
    radial: Real,
}

impl PhasePoint {
    pub fn new(dim: u32, coords: Vec<Real>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if coords.len() != 2 * dim as usize {
            return Err(Error::Domain(format!(
                "phase point for d={dim} needs {} coordinates, got {}",
                2 * dim,
                coords.len()
            )));
        }
        let prec = coords
            .iter()
            .map(|c| c.precision())
            .max()
            .expect("nonempty");
        let mut radial = KahanSum::new(prec);
        for c in &coords {
            radial.add(&(c * c));
        }
        Ok(PhasePoint {
            dim,
            coords,
            radial: radial.value(),
        })
    }

    pub fn from_f64(dim: u32, coords: &[f64], prec: Precision) -> Result<Self> {
        PhasePoint::new(
            dim,
            coords.iter().map(|&c| Real::from_f64(c, prec)).collect(),
        )
    }

    pub fn origin(dim: u32, prec: Precision) -> Self {
        PhasePoint::from_f64(dim, &vec![0.0; 2 * dim as usize], prec).expect("valid origin")
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn coords(&self) -> &[Real] {
        &self.coords
    }

    /// `t = |x|^2 + |xi|^2`.
    pub fn radial(&self) -> &Real {
        &self.radial
    }
}

/// Dispatch options. `require_rel_bits` turns an unmet accuracy requirement
/// into a `Gap` error instead of a silently loose bound.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    pub require_rel_bits: Option<u32>,
}

/// Series/asymptotic switch point for odd `d` at the given precision: the
/// crossing of the series cancellation bound `bits - 8 - 2t/ln 2` with the
/// optimal-truncation accuracy of the expansion. Computed, not hard-coded.
pub fn t_switch(d: u32, prec: Precision) -> f64 {
    debug_assert!(d % 2 == 1);
    let series_bits = |t: f64| prec.bits() as f64 - 8.0 - 2.0 * t / std::f64::consts::LN_2;
    let mut lo = 0.5f64;
    let mut hi = 0.75 * prec.bits() as f64 * std::f64::consts::LN_2;
    // asymptotic accuracy rises with t, series accuracy falls: bisect the crossing
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if asymptotic::optimal_rel_bits(d, mid) >= series_bits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn series_eval(d: u32, t: &Real, prec: Precision) -> Result<Evaluation> {
    let tf = t.to_f64();
    let inner = prec.widened(radial::cancellation_bits_at(tf) + 16);
    let order = radial::required_order(d, tf, inner.bits())?;
    let coeffs = radial::compute_coefficients(d, order, inner)?;
    let sv = radial::c_series(&coeffs, &t.rounded(inner))?;
    let value = sv.value.rounded(prec);
    // the inner evaluation error plus the final rounding
    let ulp = &value.abs() * &Real::exp2i(1 - prec.bits() as i64, prec);
    Ok(Evaluation {
        err_bound: &sv.err_bound.rounded(prec) + &ulp,
        value,
        route: Route::Series,
    })
}

fn asym_eval(d: u32, t: &Real, prec: Precision) -> Result<Evaluation> {
    let (n_opt, _) = asymptotic::optimal_truncation(d, t.to_f64());
    let av = asymptotic::c_asymptotic(d, n_opt, t)?;
    let ulp = &av.value.abs() * &Real::exp2i(4 - prec.bits() as i64, prec);
    Ok(Evaluation {
        value: av.value.rounded(prec),
        err_bound: &av.omitted.rounded(prec) + &ulp,
        route: Route::Asymptotic,
    })
}

/// Evaluate `c_d(t)` by the dispatched route.
pub fn c(d: u32, t: &Real, prec: Precision) -> Result<Evaluation> {
    c_with_options(d, t, prec, EvalOptions::default())
}

pub fn c_with_options(
    d: u32,
    t: &Real,
    prec: Precision,
    opts: EvalOptions,
) -> Result<Evaluation> {
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    if let Some(req) = opts.require_rel_bits {
        if req > prec.bits() - 2 {
            return Err(Error::Gap(format!(
                "cannot deliver {req} relative bits at {} bits of working precision",
                prec.bits()
            )));
        }
    }
    let eval = if d % 2 == 0 {
        let t = t.rounded(prec);
        let value = even_closed::c_even(d / 2, &t)?;
        let err_bound = &value.abs() * &Real::exp2i(6 - prec.bits() as i64, prec);
        Evaluation {
            value,
            err_bound,
            route: Route::EvenClosed,
        }
    } else if t.to_f64() <= t_switch(d, prec) {
        series_eval(d, t, prec)?
    } else {
        let asym = asym_eval(d, t, prec)?;
        match opts.require_rel_bits {
            Some(req) if unmet(&asym, req) => {
                // fall back to the widened series before declaring a gap
                match series_eval(d, t, prec) {
                    Ok(s) if !unmet(&s, req) => s,
                    _ => {
                        return Err(Error::Gap(format!(
                            "neither series nor asymptotic route reaches {req} relative bits at t={}",
                            t.to_f64()
                        )))
                    }
                }
            }
            _ => asym,
        }
    };
    if let Some(req) = opts.require_rel_bits {
        if unmet(&eval, req) {
            return Err(Error::Gap(format!(
                "route {} delivers only a bound of {:e} at t={}",
                eval.route.tag(),
                eval.err_bound.to_f64(),
                t.to_f64()
            )));
        }
    }
    Ok(eval)
}

fn unmet(eval: &Evaluation, req_bits: u32) -> bool {
    let scale = if eval.value.is_zero() {
        Real::one(eval.value.precision())
    } else {
        eval.value.abs()
    };
    eval.err_bound > &scale * &Real::exp2i(-(req_bits as i64), eval.value.precision())
}

/// Evaluate the symbol `b_d(X) = c_d(|X|^2)`.
pub fn b(d: u32, x: &PhasePoint, prec: Precision) -> Result<Evaluation> {
    if x.dim() != d {
        return Err(Error::Domain(format!(
            "phase point dimension {} does not match d={d}",
            x.dim()
        )));
    }
    c(d, x.radial(), prec)
}

/// Derivative stack `c, c', ..., c^(kmax)` at `t` by the dispatched route.
pub fn derivative_stack(d: u32, t: &Real, kmax: usize, prec: Precision) -> Result<DerivativeStack> {
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if t.is_negative() {
        return Err(Error::Domain("t must be nonnegative".into()));
    }
    if t.is_zero() {
        return radial::derivatives_at_zero(d, kmax, prec);
    }
    if d % 2 == 0 {
        return even_closed::c_even_derivatives(d / 2, &t.rounded(prec), kmax);
    }
    let tf = t.to_f64();
    if tf <= t_switch(d, prec) {
        // termwise differentiation inflates terms by roughly order^k
        let mut extra = radial::cancellation_bits_at(tf)
            + 16
            + (kmax as u32) * ((tf.max(2.0) + kmax as f64).log2().ceil() as u32 + 2);
        for attempt in 0..2 {
            let inner = prec.widened(extra);
            let order = radial::required_order_with_derivatives(d, tf, inner.bits(), kmax)?;
            let coeffs = radial::compute_coefficients(d, order, inner)?;
            match radial::c_derivatives_series(&coeffs, &t.rounded(inner), kmax) {
                Ok(stack) => {
                    let values = stack.values().iter().map(|v| v.rounded(prec)).collect();
                    return Ok(DerivativeStack::new(d, t.rounded(prec), values));
                }
                Err(Error::PrecisionExhausted(_)) if attempt == 0 => {
                    extra *= 2;
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!("second widening attempt returned above");
    } else {
        let (n_opt, _) = asymptotic::optimal_truncation(d, tf);
        asymptotic::c_asymptotic_derivatives(d, n_opt, &t.rounded(prec), kmax)
    }
}

/// Order cap for partial-derivative representations.
pub const MULTI_INDEX_CAP: u32 = 40;

/// Partial derivative `d^alpha b_d(X)` via the radial chain-rule
/// representation. `alpha` has one entry per phase-space coordinate (2d).
pub fn partial_derivative(d: u32, alpha: &[u32], x: &PhasePoint, prec: Precision) -> Result<Real> {
    if x.dim() != d {
        return Err(Error::Domain("phase point dimension mismatch".into()));
    }
    if alpha.len() != 2 * d as usize {
        return Err(Error::Domain(format!(
            "multi-index needs {} slots for d={d}, got {}",
            2 * d,
            alpha.len()
        )));
    }
    let total: u32 = alpha.iter().sum();
    if total > MULTI_INDEX_CAP {
        return Err(Error::RepOverflow(format!(
            "|alpha| = {total} exceeds the representation cap {MULTI_INDEX_CAP}"
        )));
    }
    if total == 0 {
        return Ok(b(d, x, prec)?.value);
    }
    let work = prec.widened(16);
    let rep = RadialDerivativeRep::for_multi_index(alpha);
    let stack = derivative_stack(d, x.radial(), rep.order(), work)?;
    let coords: Vec<Real> = x.coords().iter().map(|c| c.rounded(work)).collect();
    let mut acc = KahanSum::new(work);
    for (k, poly) in rep.polys.iter().enumerate() {
        if poly.is_zero() {
            continue;
        }
        acc.add(&(&poly.eval(&coords, work) * stack.value(k)));
    }
    Ok(acc.value().rounded(prec))
}

/// Weyl symbol of the inverse of the dilated oscillator `-Lap + w^2 |x|^2`:
/// the exact metaplectic scaling `w^-1 c_d(w |x|^2 + |xi|^2 / w)`.
pub fn b_scaled(d: u32, omega: &Real, x: &PhasePoint, prec: Precision) -> Result<Evaluation> {
    if omega.is_zero() || omega.is_negative() {
        return Err(Error::Domain("omega must be positive".into()));
    }
    if x.dim() != d {
        return Err(Error::Domain("phase point dimension mismatch".into()));
    }
    let work = prec.widened(8);
    let om = omega.rounded(work);
    let mut u = KahanSum::new(work);
    let n = d as usize;
    for (i, ci) in x.coords().iter().enumerate() {
        let sq = &ci.rounded(work) * &ci.rounded(work);
        if i < n {
            u.add(&(&sq * &om));
        } else {
            u.add(&(&sq / &om));
        }
    }
    let inner = c(d, &u.value(), work)?;
    Ok(Evaluation {
        value: (&inner.value / &om).rounded(prec),
        err_bound: (&inner.err_bound / &om).rounded(prec),
        route: inner.route,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn r(x: f64, prec: Precision) -> Real {
        Real::from_f64(x, prec)
    }

    #[test]
    fn c2_at_three() {
        let prec = p(128);
        let e = c(2, &r(3.0, prec), prec).unwrap();
        assert_eq!(e.route, Route::EvenClosed);
        let want = (1.0 - (-3.0f64).exp()) / 3.0;
        assert!((e.value.to_f64() - want).abs() < 1e-15);
    }

    #[test]
    fn c1_at_zero_is_half_pi() {
        let prec = p(128);
        let e = c(1, &Real::zero(prec), prec).unwrap();
        assert_eq!(e.route, Route::Series);
        let half_pi = &Real::pi(prec) / &Real::from_i64(2, prec);
        assert!((&e.value - &half_pi).abs().to_f64() < 1e-36);
    }

    #[test]
    fn c3_far_field_uses_asymptotics() {
        let prec = p(128);
        let e = c(3, &r(40.0, prec), prec).unwrap();
        assert_eq!(e.route, Route::Asymptotic);
        // reference: 60-digit series evaluation
        assert!((e.value.to_f64() - 0.02498434542220594).abs() < 1e-12);
        assert!(e.err_bound.to_f64() < 1e-12);
    }

    #[test]
    fn switch_point_scales_with_precision() {
        let t128 = t_switch(3, p(128));
        let t256 = t_switch(3, p(256));
        assert!(t128 > 10.0 && t128 < 40.0, "t_switch(128) = {t128}");
        assert!(t256 > t128 + 10.0, "t_switch(256) = {t256}");
    }

    #[test]
    fn routes_agree_in_overlap_window() {
        for d in [1u32, 3, 5] {
            let prec = p(128);
            let tsw = t_switch(d, prec);
            for &dt in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
                let t = r(tsw + dt, prec);
                let s = series_eval(d, &t, prec).unwrap();
                let a = asym_eval(d, &t, prec).unwrap();
                let diff = (&s.value - &a.value).abs();
                let combined = &s.err_bound + &a.err_bound;
                assert!(
                    diff <= combined,
                    "d={d} t={} diff={:e} bound={:e}",
                    t.to_f64(),
                    diff.to_f64(),
                    combined.to_f64()
                );
            }
        }
    }

    #[test]
    fn b_is_radial() {
        let prec = p(128);
        let x1 = PhasePoint::from_f64(2, &[1.0, 0.0, 0.0, 0.0], prec).unwrap();
        let x2 = PhasePoint::from_f64(2, &[0.0, 0.0, -1.0, 0.0], prec).unwrap();
        let x3 = PhasePoint::from_f64(2, &[0.5, 0.5, 0.5, 0.5], prec).unwrap();
        let b1 = b(2, &x1, prec).unwrap().value;
        let b2 = b(2, &x2, prec).unwrap().value;
        let b3 = b(2, &x3, prec).unwrap().value;
        assert!(b1 == b2 && b1 == b3);
        let want = 1.0 - (-1.0f64).exp();
        assert!((b1.to_f64() - want).abs() < 1e-15);
    }

    #[test]
    fn b4_at_unit_radius() {
        let prec = p(128);
        let x = PhasePoint::from_f64(4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], prec).unwrap();
        let e = b(4, &x, prec).unwrap();
        let want = 4.0 * (-1.0f64).exp() - 1.0;
        assert!((e.value.to_f64() - want).abs() < 1e-15);
    }

    #[test]
    fn partial_derivative_empty_index_is_b() {
        let prec = p(128);
        let x = PhasePoint::from_f64(1, &[0.6, -0.8], prec).unwrap();
        let pd = partial_derivative(1, &[0, 0], &x, prec).unwrap();
        let bv = b(1, &x, prec).unwrap().value;
        assert!(pd == bv);
    }

    #[test]
    fn partial_derivative_first_order() {
        // d/dx1 b_2 at X = (1,0,0,0): 2 x1 c'(1) = 2 (2/e - 1)
        let prec = p(128);
        let x = PhasePoint::from_f64(2, &[1.0, 0.0, 0.0, 0.0], prec).unwrap();
        let v = partial_derivative(2, &[1, 0, 0, 0], &x, prec).unwrap();
        let want = 2.0 * (2.0 * (-1.0f64).exp() - 1.0);
        assert!((v.to_f64() - want).abs() < 1e-15, "{}", v.to_f64());
    }

    #[test]
    fn partial_derivative_second_order_at_origin() {
        // d^2/dx1^2 b_2 at 0: 2 c'(0) = -1
        let prec = p(128);
        let x = PhasePoint::origin(2, prec);
        let v = partial_derivative(2, &[2, 0, 0, 0], &x, prec).unwrap();
        assert!((v.to_f64() + 1.0).abs() < 1e-30, "{}", v.to_f64());
    }

    #[test]
    fn partial_derivative_matches_finite_differences() {
        let prec = p(192);
        let h = 1e-4f64;
        // (d, alpha, base point)
        let cases: Vec<(u32, Vec<u32>, Vec<f64>)> = vec![
            (1, vec![1, 0], vec![0.7, -0.2]),
            (1, vec![0, 2], vec![0.3, 1.1]),
            (2, vec![1, 0, 1, 0], vec![0.5, -0.4, 0.8, 0.1]),
            (2, vec![2, 1, 0, 0], vec![1.0, 0.5, -0.3, 0.2]),
            (3, vec![0, 1, 0, 0, 0, 1], vec![0.4, 0.6, -0.2, 0.1, 0.9, -0.5]),
        ];
        for (d, alpha, base) in cases {
            let x = PhasePoint::from_f64(d, &base, prec).unwrap();
            let exact = partial_derivative(d, &alpha, &x, prec).unwrap().to_f64();
            let base_r: Vec<Real> = base.iter().map(|&c| r(c, prec)).collect();
            let fd = central_difference(d, &alpha, &base_r, h, prec).to_f64();
            let denom = exact.abs().max(1e-3);
            assert!(
                ((exact - fd) / denom).abs() < 1e-6,
                "d={d} alpha={alpha:?}: exact={exact} fd={fd}"
            );
        }
    }

    // full-precision nested central differences: the divisions by (2h)^|alpha|
    // amplify rounding, so the ladder must not drop to f64
    fn central_difference(d: u32, alpha: &[u32], base: &[Real], h: f64, prec: Precision) -> Real {
        match alpha.iter().position(|&a| a > 0) {
            None => {
                let x = PhasePoint::new(d, base.to_vec()).unwrap();
                b(d, &x, prec).unwrap().value
            }
            Some(j) => {
                let mut a2 = alpha.to_vec();
                a2[j] -= 1;
                let hr = r(h, prec);
                let mut up = base.to_vec();
                up[j] = &up[j] + &hr;
                let mut dn = base.to_vec();
                dn[j] = &dn[j] - &hr;
                let num = &central_difference(d, &a2, &up, h, prec)
                    - &central_difference(d, &a2, &dn, h, prec);
                &num / &(&hr + &hr)
            }
        }
    }

    #[test]
    fn rep_overflow_cap() {
        let prec = p(64);
        let x = PhasePoint::origin(1, prec);
        let err = partial_derivative(1, &[41, 0], &x, prec).unwrap_err();
        assert!(matches!(err, Error::RepOverflow(_)));
    }

    #[test]
    fn scaled_symbol_values() {
        let prec = p(128);
        // omega = 1: identity
        let x = PhasePoint::from_f64(2, &[0.3, 0.1, -0.2, 0.4], prec).unwrap();
        let plain = b(2, &x, prec).unwrap().value;
        let scaled = b_scaled(2, &Real::one(prec), &x, prec).unwrap().value;
        assert!(plain == scaled);
        // d=2, omega=4, x=0, |xi|^2=4: (1/4) c_2(1)
        let x2 = PhasePoint::from_f64(2, &[0.0, 0.0, 2.0, 0.0], prec).unwrap();
        let v = b_scaled(2, &r(4.0, prec), &x2, prec).unwrap().value;
        let want = (1.0 - (-1.0f64).exp()) / 4.0;
        assert!((v.to_f64() - want).abs() < 1e-15);
        // d=1, omega=1/4, X=0: 4 * pi/2 = 2 pi
        let origin = PhasePoint::origin(1, prec);
        let v2 = b_scaled(1, &r(0.25, prec), &origin, prec).unwrap().value;
        assert!((v2.to_f64() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        // rejects omega <= 0
        assert!(b_scaled(1, &Real::zero(prec), &origin, prec).is_err());
    }

    #[test]
    fn gap_when_requirement_exceeds_precision() {
        let prec = p(53);
        let err = c_with_options(
            3,
            &r(12.0, prec),
            prec,
            EvalOptions {
                require_rel_bits: Some(80),
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Gap(_)));
    }

    #[test]
    fn x_xi_exchange_symmetry() {
        let prec = p(128);
        let a = PhasePoint::from_f64(2, &[0.7, -0.1, 0.4, 0.9], prec).unwrap();
        let swapped = PhasePoint::from_f64(2, &[0.4, 0.9, 0.7, -0.1], prec).unwrap();
        assert!(b(2, &a, prec).unwrap().value == b(2, &swapped, prec).unwrap().value);
    }
}
