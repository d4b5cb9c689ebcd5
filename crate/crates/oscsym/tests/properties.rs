//! Cross-route and structural invariants: exact rational oracles for the
//! coefficient recurrences, randomized agreement checks between evaluation
//! routes, and decay-order measurements for the far-field remainder.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use oscsym::asymptotic;
use oscsym::even_closed;
use oscsym::radial;
use oscsym::real::{Precision, Real};
use oscsym::symbol::{self, PhasePoint};

fn p(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn big_fac2(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Exact rational oracle: the two-term recurrence must reproduce the closed
/// double-factorial products
/// `a_2p / a_0 = (d-1)!! / ((2p)!! (2p+d-1)!!)` and
/// `a_2p+1 = -(1/d) d!! / ((2p+1)!! (2p+d)!!)`, for all k <= 60, d <= 12.
#[test]
fn coefficient_recurrence_matches_closed_products_exactly() {
    for d in 1..=12u64 {
        // recurrence on rational coefficients, alpha factored out of the
        // even strand (a_0 = 1) since it scales linearly through it
        let mut even = vec![BigRational::one()];
        let mut odd = vec![BigRational::new(BigInt::from(-1), BigInt::from(d))];
        for k in 2..=60u64 {
            let div = BigRational::from(BigInt::from(k * (k + d - 1)));
            if k % 2 == 0 {
                let prev = even[(k as usize - 2) / 2].clone();
                even.push(prev / div);
            } else {
                let prev = odd[(k as usize - 3) / 2].clone();
                odd.push(prev / div);
            }
        }
        for (idx, val) in even.iter().enumerate() {
            let pp = 2 * idx as u64;
            let want = BigRational::new(big_fac2(d - 1), big_fac2(pp) * big_fac2(pp + d - 1));
            assert_eq!(val, &want, "even d={d} k={pp}");
        }
        for (idx, val) in odd.iter().enumerate() {
            let pp = 2 * idx as u64 + 1; // the index k = 2p+1, so 2p = pp-1
            let want = -BigRational::new(big_fac2(d), big_fac2(pp) * big_fac2(pp - 1 + d))
                / BigRational::from(BigInt::from(d));
            assert_eq!(val, &want, "odd d={d} k={pp}");
        }
    }
}

/// The floating coefficients match the exact rationals to working precision.
#[test]
fn float_coefficients_match_rationals() {
    let prec = p(192);
    for d in [1u32, 2, 5, 12] {
        let coeffs = radial::compute_coefficients(d, 40, prec).unwrap();
        let alpha = coeffs.alpha().clone();
        let mut rat_even = BigRational::one();
        for k in (2..=40u64).step_by(2) {
            rat_even /= BigRational::from(BigInt::from(k * (k + d as u64 - 1)));
            // a_k = alpha * (d!!/(d (d-1)!!)) * rat_even
            let scale = BigRational::new(big_fac2(d as u64), BigInt::from(d) * big_fac2(d as u64 - 1));
            let want_over_alpha = &rat_even * &scale;
            let num = Real::from_bigint(want_over_alpha.numer(), prec);
            let den = Real::from_bigint(want_over_alpha.denom(), prec);
            let want = &(&alpha * &num) / &den;
            let rel = (&(coeffs.coeff(k as usize) - &want) / &want).abs().to_f64();
            assert!(rel < 1e-50, "d={d} k={k} rel={rel}");
        }
    }
}

/// Remainder derivatives: the n-th derivative of `c_d - S_N` decays at least
/// like `t^-(1+2N+n)` for n <= 2, measured by finite differences of the
/// remainder on a geometric grid.
#[test]
fn remainder_derivative_orders() {
    let d = 3u32;
    let n_terms = 2usize;
    let prec = p(320);
    for fd_order in 1..=2usize {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..16 {
            let t = 30.0 * (300.0f64 / 30.0).powf(i as f64 / 15.0);
            let h = t * 1e-3;
            // central differences of the remainder
            let rem = |tt: f64| -> Real {
                let inner = prec.widened(radial::cancellation_bits_at(tt) + 16);
                let order = radial::required_order(d, tt, inner.bits()).unwrap();
                let coeffs = radial::compute_coefficients(d, order, inner).unwrap();
                let tr = Real::from_f64(tt, inner);
                let c = radial::c_series(&coeffs, &tr).unwrap().value;
                let s = asymptotic::c_asymptotic(d, n_terms, &tr).unwrap().value;
                &c - &s
            };
            let hr = Real::from_f64(h, prec);
            let val = match fd_order {
                1 => &(&rem(t + h) - &rem(t - h)) / &(&hr + &hr),
                2 => {
                    let mid = rem(t);
                    &(&(&rem(t + h) + &rem(t - h)) - &(&mid + &mid)) / &(&hr * &hr)
                }
                _ => unreachable!(),
            };
            xs.push(t.ln());
            ys.push(val.abs().to_f64().ln());
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let bound = -(1.0 + 2.0 * n_terms as f64 + fd_order as f64);
        assert!(
            slope <= bound + 0.15,
            "fd_order={fd_order}: slope {slope:.3} vs bound {bound}"
        );
    }
}

/// External oracle for the Bessel-type series: `u_0(t) = I_0(2 sqrt(t))` has
/// the integral representation `(1/pi) int_0^pi e^(2 sqrt(t) cos h) dh`,
/// evaluated here by adaptive quadrature with no series code on the path.
#[test]
fn u0_matches_integral_representation() {
    use oscsym::odd_special;
    use oscsym::verify::quad;
    let prec = p(160);
    for &t in &[0.25, 1.0, 4.0, 9.0] {
        let series = odd_special::bessel_u(0, &Real::from_f64(t, prec), prec).unwrap();
        let two_sqrt_t = &Real::from_f64(t, prec).sqrt() * &Real::from_i64(2, prec);
        let (val, qerr) = quad::integrate(
            &mut |theta: &Real| Ok((&two_sqrt_t * &theta.cos()).exp()),
            &Real::zero(prec),
            &Real::pi(prec),
            &Real::exp2i(-130, prec),
            prec,
        )
        .unwrap();
        let recon = &val / &Real::pi(prec);
        let rel = (&(&recon - &series) / &series).abs().to_f64();
        assert!(rel < 1e-35, "t={t}: rel={rel} qerr={}", qerr.to_f64());
    }
}

/// The k-times differentiated defining equation holds along the stack:
/// `-(t c^(k+2) + k c^(k+1)) - d c^(k+1) + t c^(k) + k c^(k-1) = 0`.
#[test]
fn differentiated_ode_relations_hold_along_stack() {
    let prec = p(256);
    for d in [1u32, 2, 4, 7] {
        for &t in &[0.0, 0.8, 3.5, 11.0] {
            let stack = symbol::derivative_stack(d, &Real::from_f64(t, prec), 12, prec).unwrap();
            for k in 0..=10usize {
                let res = stack.ode_residual(k).abs().to_f64();
                assert!(res < 1e-40, "d={d} t={t} k={k}: residual {res}");
            }
        }
    }
}

/// The shooting oracle's cleaned trajectory agrees with the series route to
/// 1e-9 on [0, 20] for the odd dimensions (and far better in practice).
#[test]
fn shooting_trajectory_matches_series_for_odd_d() {
    let prec = p(192);
    let samples = [20.0, 15.0, 10.0, 5.0, 2.0, 1.0, 0.5];
    for d in [1u32, 3, 5] {
        let res = oscsym::verify::ode_shooting_oracle(d, 40.0, prec, &samples).unwrap();
        assert_eq!(res.samples.len(), samples.len());
        for (t, c, _) in &res.samples {
            let tf = t.to_f64();
            let inner = prec.widened(radial::cancellation_bits_at(tf) + 16);
            let order = radial::required_order(d, tf, inner.bits()).unwrap();
            let coeffs = radial::compute_coefficients(d, order, inner).unwrap();
            let reference = radial::c_series(&coeffs, &t.rounded(inner)).unwrap().value;
            let dev = (c - &reference).abs().to_f64();
            assert!(dev < 1e-9, "d={d} t={tf}: dev={dev}");
        }
    }
}

/// Per-order constants of the two symbol estimates stay geometrically stable
/// (d = 2, |alpha| <= 10, grid |X| <= 10):
/// s=1 reading: |d^a b| <X>^(2+|a|) / a!,  s=0 reading: |d^a b| <X>^2 / sqrt(a!).
#[test]
fn symbol_estimate_constants_stable() {
    let d = 2u32;
    let prec = p(192);
    let kmax = 10usize;
    // sample points: a few directions at several radii up to |X| = 10
    let mut points = Vec::new();
    for &r in &[0.0, 0.5, 1.5, 3.0, 6.0, 10.0] {
        for dir in [
            [1.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, -0.5, 0.5],
            [0.0, 0.6, 0.0, -0.8],
        ] {
            points.push([r * dir[0], r * dir[1], r * dir[2], r * dir[3]]);
        }
    }
    // enumerate multi-indices of each total order over 4 slots
    fn multi_indices(order: u32, slots: usize) -> Vec<Vec<u32>> {
        if slots == 1 {
            return vec![vec![order]];
        }
        let mut out = Vec::new();
        for first in 0..=order {
            for rest in multi_indices(order - first, slots - 1) {
                let mut v = vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
        out
    }
    let fact = |a: &[u32]| -> f64 {
        a.iter()
            .map(|&x| (1..=x as u64).map(|v| v as f64).product::<f64>())
            .product()
    };
    let mut c_s1 = Vec::new();
    let mut c_s0 = Vec::new();
    for order in 0..=kmax as u32 {
        let mut m_s1 = 0.0f64;
        let mut m_s0 = 0.0f64;
        for alpha in multi_indices(order, 4) {
            let a_fact = fact(&alpha);
            for pt in &points {
                let x = PhasePoint::from_f64(d, pt, prec).unwrap();
                let v = symbol::partial_derivative(d, &alpha, &x, prec)
                    .unwrap()
                    .to_f64()
                    .abs();
                let jap = (1.0 + x.radial().to_f64()).sqrt(); // <X> = (1+|X|^2)^(1/2)
                m_s1 = m_s1.max(v * jap.powi(2 + order as i32) / a_fact);
                m_s0 = m_s0.max(v * jap.powi(2) / a_fact.sqrt());
            }
        }
        c_s1.push(m_s1.powf(1.0 / (order as f64 + 1.0)));
        c_s0.push(m_s0.powf(1.0 / (order as f64 + 1.0)));
    }
    for (name, seq) in [("s=1", &c_s1), ("s=0", &c_s0)] {
        let hi = seq.iter().cloned().fold(f64::MIN, f64::max);
        let lo = seq.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            hi / lo <= 3.0,
            "{name}: constants {seq:.3?} vary by {:.2}",
            hi / lo
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, .. ProptestConfig::default() })]

    /// Derivative stacks from the upward recurrence and from termwise series
    /// differentiation agree to the error-propagation floor: feeding
    /// correctly-rounded (c, c') through the recurrence moves slot k by about
    /// `2^-prec` times the ODE scale `max(1, |c|)(1+t)`, amplified by
    /// `max(1, (d+j)/t)` per level. Ten such ulps is the agreement target.
    #[test]
    fn recurrence_vs_series_stacks(d in 1u32..=12, t_raw in 0.5f64..10.0, kmax in 2usize..=8) {
        let prec = p(256);
        let t = Real::from_f64(t_raw, prec);
        let order = radial::required_order_with_derivatives(d, t_raw, 256, kmax).unwrap();
        let coeffs = radial::compute_coefficients(d, order, prec).unwrap();
        let series = radial::c_derivatives_series(&coeffs, &t, kmax).unwrap();
        let rec = radial::derivative_recurrence(d, &t, series.value(0), series.value(1), kmax).unwrap();
        // the series slots themselves carry rounding at the scale of the
        // largest term (~e^t), so the agreement floor includes that factor
        let series_noise = (t_raw / std::f64::consts::LN_2).ceil() as i32 + 8;
        let mut amplification = 1.0f64;
        for k in 0..=kmax {
            if k >= 2 {
                amplification *= 1.0f64.max((d as f64 + k as f64) / t_raw);
            }
            let s = series.value(k);
            let r = rec.value(k);
            let scale = s.abs().to_f64().max(1.0) * (1.0 + t_raw) * amplification;
            let bound = 10.0 * scale * 2.0f64.powi(-(256 - 4 - series_noise));
            prop_assert!(
                (s - r).abs().to_f64() <= bound,
                "d={} t={} k={}: diff {} vs {}", d, t_raw, k, (s - r).abs().to_f64(), bound
            );
        }
    }

    /// Radiality: evaluation factors through t = |X|^2, so points whose
    /// computed radial arguments coincide give bit-identical values, and
    /// permutations/sign flips can move the computed t by at most summation
    /// rounding (a few ulps), never more.
    #[test]
    fn radiality_exact(
        d in 1u32..=4,
        coords_raw in prop::collection::vec(-3.0f64..3.0, 8),
        flip_mask in 0usize..256,
        rotate in 0usize..8,
    ) {
        let prec = p(128);
        let n = 2 * d as usize;
        let mut coords: Vec<f64> = coords_raw[..n].to_vec();
        let x1 = PhasePoint::from_f64(d, &coords, prec).unwrap();
        for (i, c) in coords.iter_mut().enumerate() {
            if flip_mask & (1 << i) != 0 {
                *c = -*c;
            }
        }
        coords.rotate_left(rotate % n);
        let x2 = PhasePoint::from_f64(d, &coords, prec).unwrap();
        let t1 = x1.radial();
        let t2 = x2.radial();
        if let Some(e) = t1.exponent() {
            let ulps4 = Real::exp2i(e - 126, prec);
            prop_assert!((t1 - t2).abs() <= ulps4, "radial arguments drifted");
        }
        let b1 = symbol::b(d, &x1, prec).unwrap().value;
        let b2 = symbol::b(d, &x2, prec).unwrap().value;
        if t1 == t2 {
            prop_assert!(b1 == b2);
        } else {
            // |db/dt| <= 1 near the origin and decays; a few ulps of t move
            // b by a comparable amount
            let slack = Real::exp2i(t1.exponent().unwrap_or(0) - 120, prec);
            prop_assert!((&b1 - &b2).abs() <= slack);
        }
    }

    /// g_j(t) > 0 for all j, t >= 0.
    #[test]
    fn g_term_positive(j in 0usize..=12, t in 0.0f64..60.0) {
        let prec = p(96);
        let v = even_closed::g_term(j, &Real::from_f64(t, prec)).unwrap();
        prop_assert!(!v.is_negative() && !v.is_zero());
    }

    /// The closed form and the series agree for even d across the trust region.
    #[test]
    fn even_closed_matches_series(n in 1u32..=6, t_raw in 0.0f64..20.0) {
        let prec = p(160);
        let d = 2 * n;
        let order = radial::required_order(d, t_raw, 160).unwrap();
        let coeffs = radial::compute_coefficients(d, order, prec).unwrap();
        let t = Real::from_f64(t_raw, prec);
        let closed = even_closed::c_even(n, &t).unwrap();
        let series = radial::c_series(&coeffs, &t).unwrap().value;
        let rel = (&(&closed - &series) / &series).abs().to_f64();
        prop_assert!(rel < 1e-30, "n={} t={} rel={}", n, t_raw, rel);
    }

    /// Scaled symbol reduces to the plain one at omega = 1 and respects the
    /// exact dilation relation b_w(x, xi) = w^-1 b(sqrt(w) x, xi / sqrt(w)).
    #[test]
    fn scaled_symbol_dilation(
        d in 1u32..=3,
        omega in 0.3f64..3.0,
        coords_raw in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let prec = p(128);
        let n = 2 * d as usize;
        let coords: Vec<f64> = coords_raw[..n].to_vec();
        let x = PhasePoint::from_f64(d, &coords, prec).unwrap();
        let scaled = symbol::b_scaled(d, &Real::from_f64(omega, prec), &x, prec).unwrap().value;
        let sw = omega.sqrt();
        let mapped: Vec<f64> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| if i < d as usize { c * sw } else { c / sw })
            .collect();
        let xm = PhasePoint::from_f64(d, &mapped, prec).unwrap();
        let direct = &symbol::b(d, &xm, prec).unwrap().value / &Real::from_f64(omega, prec);
        let rel = (&(&scaled - &direct) / &direct).abs().to_f64();
        prop_assert!(rel < 1e-12, "rel={}", rel);
    }
}
