//! Browser bindings for the symbol evaluator.
//!
//! Three interactive operations, each returning a JSON string the page can
//! feed straight into canvas plots:
//!
//! * [`profile_curve`] - `c_d(t)` over a range, with the route taken per point;
//! * [`remainder_curve`] - `|c_d - S_N|` of the N-term far-field expansion,
//!   with the fitted decay slope;
//! * [`symbol_heatmap`] - `b_d` over an `(x_1, xi_1)` slice of phase space.
//!
//! The computation lives in plain functions so native builds exercise the
//! same code the wasm exports wrap.

use wasm_bindgen::prelude::wasm_bindgen;

use oscsym::asymptotic::{self, ReferencePoint};
use oscsym::radial;
use oscsym::real::{Precision, Real};
use oscsym::symbol;

fn err_json(msg: &str) -> String {
    format!("{{\"error\":\"{}\"}}", msg.replace('"', "'"))
}

fn fmt(values: &[f64]) -> String {
    let items: Vec<String> = values
        .iter()
        .map(|v| {
            if v.is_finite() {
                format!("{v:e}")
            } else {
                "null".into()
            }
        })
        .collect();
    format!("[{}]", items.join(","))
}

pub fn profile_curve_impl(dim: u32, t_min: f64, t_max: f64, steps: usize, bits: u32) -> String {
    let run = || -> oscsym::Result<String> {
        let prec = Precision::new(bits.clamp(53, 1024))?;
        let steps = steps.clamp(2, 4096);
        let mut ts = Vec::with_capacity(steps);
        let mut cs = Vec::with_capacity(steps);
        let mut routes = Vec::with_capacity(steps);
        for i in 0..steps {
            let t = t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64;
            let eval = symbol::c(dim, &Real::from_f64(t, prec), prec)?;
            ts.push(t);
            cs.push(eval.value.to_f64());
            routes.push(format!("\"{}\"", eval.route.tag()));
        }
        Ok(format!(
            "{{\"dim\":{dim},\"t\":{},\"c\":{},\"route\":[{}]}}",
            fmt(&ts),
            fmt(&cs),
            routes.join(",")
        ))
    };
    run().unwrap_or_else(|e| err_json(&e.to_string()))
}

pub fn remainder_curve_impl(dim: u32, terms: usize, t_min: f64, t_max: f64, steps: usize) -> String {
    let run = || -> oscsym::Result<String> {
        let steps = steps.clamp(3, 512);
        let terms = terms.clamp(1, 30);
        let ref_prec = Precision::new(256)?;
        let mut refs = Vec::with_capacity(steps);
        for i in 0..steps {
            let t = t_min * (t_max / t_min).powf(i as f64 / (steps - 1) as f64);
            let inner = ref_prec.widened(radial::cancellation_bits_at(t) + 16);
            let order = radial::required_order(dim, t, inner.bits())?;
            let coeffs = radial::compute_coefficients(dim, order, inner)?;
            let sv = radial::c_series(&coeffs, &Real::from_f64(t, inner))?;
            refs.push(ReferencePoint {
                t: Real::from_f64(t, inner),
                c: sv.value,
                err_bound: sv.err_bound,
            });
        }
        let mut ts = Vec::with_capacity(steps);
        let mut errs = Vec::with_capacity(steps);
        for pt in &refs {
            let approx = asymptotic::c_asymptotic(dim, terms, &pt.t)?;
            ts.push(pt.t.to_f64());
            errs.push((&pt.c - &approx.value).abs().to_f64());
        }
        let (slope, exponential) = match asymptotic::error_order_probe(dim, terms, &refs) {
            Ok(fit) => (format!("{:.4}", fit.slope), fit.exponential_regime),
            Err(_) => ("null".into(), true),
        };
        Ok(format!(
            "{{\"dim\":{dim},\"terms\":{terms},\"t\":{},\"abs_err\":{},\"slope\":{slope},\"exponential_regime\":{exponential}}}",
            fmt(&ts),
            fmt(&errs)
        ))
    };
    run().unwrap_or_else(|e| err_json(&e.to_string()))
}

pub fn symbol_heatmap_impl(dim: u32, extent: f64, n: usize, bits: u32) -> String {
    let run = || -> oscsym::Result<String> {
        let prec = Precision::new(bits.clamp(53, 256))?;
        let n = n.clamp(8, 256);
        let extent = extent.clamp(0.5, 12.0);
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            let xi = -extent + 2.0 * extent * iy as f64 / (n - 1) as f64;
            for ix in 0..n {
                let x = -extent + 2.0 * extent * ix as f64 / (n - 1) as f64;
                let t = Real::from_f64(x * x + xi * xi, prec);
                values.push(symbol::c(dim, &t, prec)?.value.to_f64());
            }
        }
        Ok(format!(
            "{{\"dim\":{dim},\"n\":{n},\"extent\":{extent},\"values\":{}}}",
            fmt(&values)
        ))
    };
    run().unwrap_or_else(|e| err_json(&e.to_string()))
}

#[wasm_bindgen]
pub fn profile_curve(dim: u32, t_min: f64, t_max: f64, steps: usize, bits: u32) -> String {
    profile_curve_impl(dim, t_min, t_max, steps, bits)
}

#[wasm_bindgen]
pub fn remainder_curve(dim: u32, terms: usize, t_min: f64, t_max: f64, steps: usize) -> String {
    remainder_curve_impl(dim, terms, t_min, t_max, steps)
}

#[wasm_bindgen]
pub fn symbol_heatmap(dim: u32, extent: f64, n: usize, bits: u32) -> String {
    symbol_heatmap_impl(dim, extent, n, bits)
}
