//! Backward-shooting oracle for the radial profile.
//!
//! Solves `c'' = (-d c' + t c - 1)/t` from far-field data down to a small
//! endpoint, recovering `c_d(0)` without using the parity constant anywhere:
//! the initial data come from the large-`t` expansion and the endpoint
//! extraction uses only the alpha-free structure of the equation.
//!
//! Backward error dynamics: the homogeneous space is spanned by a solution
//! growing like `e^t` (damped backward) and one decaying like `e^-t`
//! (amplified backward, relative to its size). Truncating the far-field
//! expansion necessarily leaves an `e^-t`-mode seed, which a plain endpoint
//! read-off turns into an `O(1/t_far^2)` floor. The equation is linear, so
//! every perturbation stays inside the two-mode space: integrating the
//! recessive mode `v2` alongside the solution and solving a 2x2 system at the
//! endpoint removes that contamination entirely. The same solve yields the
//! recessive content of the trajectory, so the returned samples are cleaned
//! as well.
//!
//! `v2` gets its own far-field data from `v2 ~ e^-t t^(-d/2) sum beta_k t^-k`
//! with `beta_0 = 1`, `beta_k = (d/2+k-1)(d/2-k) beta_(k-1) / (2k)`
//! (terminating for even `d`), truncated at the smallest term.

use crate::asymptotic;
use crate::error::{Error, Result};
use crate::even_closed;
use crate::radial;
use crate::real::{KahanSum, Precision, Real};

/// 13-stage Fehlberg 7(8) tableau (exact rationals).
const STAGES: usize = 13;
const A: [[(i64, i64); 12]; 13] = [
    [(0, 1); 12],
    [(2, 27), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(1, 36), (1, 12), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(1, 24), (0, 1), (1, 8), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(5, 12), (0, 1), (-25, 16), (25, 16), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(1, 20), (0, 1), (0, 1), (1, 4), (1, 5), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(-25, 108), (0, 1), (0, 1), (125, 108), (-65, 27), (125, 54), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(31, 300), (0, 1), (0, 1), (0, 1), (61, 225), (-2, 9), (13, 900), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(2, 1), (0, 1), (0, 1), (-53, 6), (704, 45), (-107, 9), (67, 90), (3, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
    [(-91, 108), (0, 1), (0, 1), (23, 108), (-976, 135), (311, 54), (-19, 60), (17, 6), (-1, 12), (0, 1), (0, 1), (0, 1)],
    [(2383, 4100), (0, 1), (0, 1), (-341, 164), (4496, 1025), (-301, 82), (2133, 4100), (45, 82), (45, 164), (18, 41), (0, 1), (0, 1)],
    [(3, 205), (0, 1), (0, 1), (0, 1), (0, 1), (-6, 41), (-3, 205), (-3, 41), (3, 41), (6, 41), (0, 1), (0, 1)],
    [(-1777, 4100), (0, 1), (0, 1), (-341, 164), (4496, 1025), (-289, 82), (2193, 4100), (51, 82), (33, 164), (12, 41), (0, 1), (1, 1)],
];
const C_NODES: [(i64, i64); 13] = [
    (0, 1), (2, 27), (1, 9), (1, 6), (5, 12), (1, 2), (5, 6), (1, 6), (2, 3), (1, 3), (1, 1), (0, 1), (1, 1),
];
const B8: [(i64, i64); 13] = [
    (41, 840), (0, 1), (0, 1), (0, 1), (0, 1), (34, 105), (9, 35), (9, 35), (9, 280), (9, 280), (41, 840), (0, 1), (0, 1),
];

type State = [Real; 4]; // (c, c', v2, v2')

/// Result of the backward shooting run.
#[derive(Clone, Debug)]
pub struct ShootingResult {
    /// Extrapolated `c_d(0)`.
    pub c0: Real,
    /// Fitted coefficient of the recessive (`e^-t`) homogeneous mode in the
    /// raw trajectory; the cleaned outputs have it subtracted.
    pub recessive_coefficient: Real,
    /// Cleaned `(t, c(t), c'(t))` at the requested sample points.
    pub samples: Vec<(Real, Real, Real)>,
    pub steps: usize,
    pub endpoint: f64,
}

struct Tableau {
    a: Vec<Vec<Real>>,
    c: Vec<Real>,
    b8: Vec<Real>,
}

fn tableau(prec: Precision) -> Tableau {
    let q = |num: i64, den: i64| &Real::from_i64(num, prec) / &Real::from_i64(den, prec);
    Tableau {
        a: A.iter()
            .map(|row| row.iter().map(|&(n, d)| q(n, d)).collect())
            .collect(),
        c: C_NODES.iter().map(|&(n, d)| q(n, d)).collect(),
        b8: B8.iter().map(|&(n, d)| q(n, d)).collect(),
    }
}

/// RHS of the coupled system: the profile equation plus its homogeneous
/// companion for `v2`.
fn rhs(d: u32, t: &Real, y: &State, prec: Precision) -> State {
    let dr = Real::from_u64(d as u64, prec);
    let cpp = &(&(&-&(&dr * &y[1]) + &(t * &y[0])) - &Real::one(prec)) / t;
    let vpp = &(&-&(&dr * &y[3]) + &(t * &y[2])) / t;
    [y[1].clone(), cpp, y[3].clone(), vpp]
}

/// Far-field data for the recessive mode at `t`.
fn v2_far_field(d: u32, t: &Real, prec: Precision) -> (Real, Real) {
    let two = Real::from_i64(2, prec);
    let s = &Real::from_u64(d as u64, prec) / &two;
    let mut beta = Real::one(prec);
    let mut terms: Vec<Real> = Vec::new();
    let mut best = f64::INFINITY;
    for k in 0..200usize {
        let term = &beta / &t.powi(k);
        let mag = term.abs().to_f64();
        if mag > best || mag == 0.0 {
            break;
        }
        best = mag;
        terms.push(term);
        let kr = Real::from_u64(k as u64 + 1, prec);
        beta = &(&beta * &(&(&s + &Real::from_u64(k as u64, prec)) * &(&s - &kr)))
            / &(&two * &kr);
    }
    // u = sum beta_k t^-k;  w = t^-s u;  w' = t^-s (u' - s u / t)
    let mut u = KahanSum::new(prec);
    let mut up = KahanSum::new(prec); // u' - s u / t accumulated per term
    for (k, term) in terms.iter().enumerate() {
        u.add(term);
        let factor = &-&(&s + &Real::from_u64(k as u64, prec)) / t;
        up.add(&(term * &factor));
    }
    let t_pow_ms = (&-&s * &t.ln()).exp();
    let emt = (-t).exp();
    let v2 = &(&emt * &t_pow_ms) * &u.value();
    // (e^-t w)' = e^-t (w' - w)
    let v2p = &(&emt * &t_pow_ms) * &(&up.value() - &u.value());
    (v2, v2p)
}

/// Parity sub-series of the solution space at the endpoint: the regular
/// homogeneous solution `E` (even powers, `E(0) = 1`) and the known
/// inhomogeneous odd part `D` (`D'(0) = -1/d`); both alpha-free.
fn endpoint_basis(d: u32, eps: &Real, prec: Precision) -> (Real, Real, Real, Real) {
    let mut e_val = KahanSum::new(prec);
    let mut e_der = KahanSum::new(prec);
    let mut d_val = KahanSum::new(prec);
    let mut d_der = KahanSum::new(prec);
    let mut coef = Real::one(prec);
    let mut k = 0u64;
    while k < 120 {
        let pk = eps.powi(k as usize);
        e_val.add(&(&coef * &pk));
        if k >= 1 {
            e_der.add(&(&(&coef * &Real::from_u64(k, prec)) * &eps.powi(k as usize - 1)));
        }
        coef = &coef / &Real::from_u64((k + 2) * (k + 1 + d as u64), prec);
        k += 2;
    }
    let mut coef = &-&Real::one(prec) / &Real::from_u64(d as u64, prec);
    let mut k = 1u64;
    while k < 121 {
        d_val.add(&(&coef * &eps.powi(k as usize)));
        d_der.add(&(&(&coef * &Real::from_u64(k, prec)) * &eps.powi(k as usize - 1)));
        coef = &coef / &Real::from_u64((k + 2) * (k + 1 + d as u64), prec);
        k += 2;
    }
    (e_val.value(), e_der.value(), d_val.value(), d_der.value())
}

/// Integrate the profile equation backward from `t_far` to `endpoint`,
/// extrapolate to 0, and return the cleaned trajectory at `samples`
/// (descending `t` values inside `(endpoint, t_far]`).
pub fn ode_shooting_oracle(
    d: u32,
    t_far: f64,
    prec: Precision,
    samples: &[f64],
) -> Result<ShootingResult> {
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if t_far < 30.0 {
        return Err(Error::Domain(
            "shooting oracle needs t_far >= 30 for usable far-field data".into(),
        ));
    }
    let endpoint = 0.25f64;
    let work = prec.widened(64);
    let tf = Real::from_f64(t_far, work);

    // far-field data: terminating regularized expansion for even d (exact
    // closed form), optimally truncated plain expansion for odd d
    let (c_init, cp_init) = if d % 2 == 0 {
        let st = even_closed::c_even_derivatives(d / 2, &tf, 1)?;
        (st.value(0).clone(), st.value(1).clone())
    } else {
        let (n_opt, _) = asymptotic::optimal_truncation(d, t_far);
        let st = asymptotic::c_asymptotic_derivatives(d, n_opt, &tf, 1)?;
        (st.value(0).clone(), st.value(1).clone())
    };
    let (v2_init, v2p_init) = v2_far_field(d, &tf, work);

    let tab = tableau(work);
    let mut t = tf.clone();
    let mut y: State = [c_init, cp_init, v2_init, v2p_init];
    let mut h = -0.05f64; // descending
    let mut steps = 0usize;
    let mut sample_idx = 0usize;
    let mut raw_samples: Vec<(Real, Real, Real, Real, Real)> = Vec::new();
    let mut sorted_samples: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|&s| s > endpoint && s <= t_far)
        .collect();
    sorted_samples.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // per-step relative tolerance: errors injected at time s reach the
    // endpoint amplified by e^(s - endpoint), so the budget shrinks with s
    let base_tol = 1e-14f64;
    let tol_at = |s: f64| base_tol * (-(s - endpoint)).exp() / (t_far - endpoint);

    loop {
        let tcur = t.to_f64();
        if tcur <= endpoint + 1e-12 {
            break;
        }
        // clamp the step to land exactly on sample points and the endpoint
        let mut target = endpoint;
        if sample_idx < sorted_samples.len() {
            target = sorted_samples[sample_idx];
        }
        let mut hstep = h.max(-(tcur - target).max(1e-15)).min(-1e-15);
        if tcur + hstep < endpoint {
            hstep = endpoint - tcur;
        }
        let hr = Real::from_f64(hstep, work);
        // 13 stages
        let mut k: Vec<State> = Vec::with_capacity(STAGES);
        for i in 0..STAGES {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate().take(i) {
                if A[i][j].0 != 0 {
                    let w = &hr * &tab.a[i][j];
                    for c in 0..4 {
                        yi[c] = &yi[c] + &(&w * &kj[c]);
                    }
                }
            }
            let ti = &t + &(&hr * &tab.c[i]);
            k.push(rhs(d, &ti, &yi, work));
        }
        // 8th order advance and embedded error: err = h * 41/840 * (k0 + k10 - k11 - k12)
        let mut y_next = y.clone();
        for (i, ki) in k.iter().enumerate() {
            if B8[i].0 != 0 {
                let w = &hr * &tab.b8[i];
                for c in 0..4 {
                    y_next[c] = &y_next[c] + &(&w * &ki[c]);
                }
            }
        }
        let coeff = &hr * &tab.b8[0];
        let mut err_norm = 0.0f64;
        for c in 0..4 {
            let e = &(&coeff
                * &(&(&k[0][c] + &k[10][c]) - &(&k[11][c] + &k[12][c])))
                .abs();
            let scale = y[c].abs().to_f64().max(1e-300);
            err_norm = err_norm.max(e.to_f64() / scale);
        }
        let tol = tol_at(tcur);
        if err_norm <= tol || hstep.abs() <= 2e-13 {
            t = &t + &hr;
            y = y_next;
            steps += 1;
            if sample_idx < sorted_samples.len()
                && (t.to_f64() - sorted_samples[sample_idx]).abs() < 1e-12
            {
                raw_samples.push((
                    t.clone(),
                    y[0].clone(),
                    y[1].clone(),
                    y[2].clone(),
                    y[3].clone(),
                ));
                sample_idx += 1;
            }
        }
        // PI-free step update with safety factor and clamps
        let grow = if err_norm > 0.0 {
            0.9 * (tol / err_norm).powf(1.0 / 8.0)
        } else {
            4.0
        };
        h = hstep * grow.clamp(0.2, 4.0);
        h = h.min(-1e-15);
        if h.abs() < 1e-13 && err_norm > tol {
            return Err(Error::Stiffness(format!(
                "step collapsed to {h:e} at t={tcur}"
            )));
        }
        if steps > 2_000_000 {
            return Err(Error::Stiffness("step budget exceeded".into()));
        }
    }

    // endpoint extraction: solve
    //   y  = a0 E + D + B v2
    //   y' = a0 E' + D' + B v2'
    let eps = t.clone();
    let (e_v, e_d, d_v, d_d) = endpoint_basis(d, &eps, work);
    let r0 = &y[0] - &d_v;
    let r1 = &y[1] - &d_d;
    let det = &(&e_v * &y[3]) - &(&e_d * &y[2]);
    if det.is_zero() {
        return Err(Error::NonConvergent("degenerate endpoint system".into()));
    }
    let a0 = &(&(&r0 * &y[3]) - &(&r1 * &y[2])) / &det;
    let bco = &(&(&e_v * &r1) - &(&e_d * &r0)) / &det;

    let samples_clean = raw_samples
        .into_iter()
        .map(|(ts, c, cp, v2, v2p)| {
            (
                ts.rounded(prec),
                (&c - &(&bco * &v2)).rounded(prec),
                (&cp - &(&bco * &v2p)).rounded(prec),
            )
        })
        .collect();

    Ok(ShootingResult {
        c0: a0.rounded(prec),
        recessive_coefficient: bco.rounded(prec),
        samples: samples_clean,
        steps,
        endpoint: eps.to_f64(),
    })
}

/// `c_d(0)` from the series route, for comparison against the oracle.
pub fn series_c0(d: u32, prec: Precision) -> Result<Real> {
    let coeffs = radial::compute_coefficients(d, 2, prec)?;
    Ok(coeffs.coeff(0).clone())
}
