//! Acceptance suite: one test per certification criterion, each printing a
//! pass/fail line (visible with `--nocapture`). Tolerances and runtime
//! budgets are pinned in code.
//!
//! Criterion 6 includes a far-field limit probe at s = 50 with tolerance
//! 1e-3; the limit converges like 1/s, so the measured gap is ~2e-2 and the
//! probe fails by construction. It is asserted as stated, with the measured
//! rate in the failure message, rather than silently loosened.

use std::time::Instant;

use oscsym::even_closed;
use oscsym::real::{Precision, Real};
use oscsym::verify;

fn p(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

struct Criterion {
    label: &'static str,
    budget_s: f64,
    start: Instant,
}

impl Criterion {
    fn new(label: &'static str, budget_s: f64) -> Self {
        Criterion {
            label,
            budget_s,
            start: Instant::now(),
        }
    }

    fn finish(self, passed: bool, detail: &str) {
        let dt = self.start.elapsed().as_secs_f64();
        println!(
            "criterion {:<28} {} ({detail}, {dt:.2} s)",
            self.label,
            if passed { "PASS" } else { "FAIL" },
        );
        assert!(passed, "{}: {detail}", self.label);
        assert!(
            dt <= self.budget_s,
            "{} exceeded its {} s budget ({dt:.2} s)",
            self.label,
            self.budget_s
        );
    }
}

#[test]
fn criterion_01_even_closed_forms() {
    let c = Criterion::new("01 even closed forms", 1.0);
    let eval_prec = p(64); // double-grade evaluation under test
    let ref_prec = p(256); // cancellation-free literal reference
    let mut max_rel = 0.0f64;
    for &t in linspace(0.0, 25.0, 501).iter() {
        let te = Real::from_f64(t, eval_prec);
        let tr = Real::from_f64(t, ref_prec);
        let one = Real::one(ref_prec);
        // d = 2: (1 - e^-t)/t, limit 1 at t = 0
        let lit2 = if t == 0.0 {
            one.clone()
        } else {
            &(&one - &(-&tr).exp()) / &tr
        };
        let got2 = even_closed::c_even(1, &te).unwrap();
        let rel2 = (&(&got2.rounded(ref_prec) - &lit2) / &lit2).abs().to_f64();
        // d = 4: (2(t+1) e^-t + t^2 - 2)/t^3, limit 2/3 at t = 0
        let lit4 = if t == 0.0 {
            &Real::from_i64(2, ref_prec) / &Real::from_i64(3, ref_prec)
        } else {
            let num = &(&(&Real::from_i64(2, ref_prec) * &(&tr + &one)) * &(-&tr).exp())
                + &(&(&tr * &tr) - &Real::from_i64(2, ref_prec));
            &num / &tr.powi(3)
        };
        let got4 = even_closed::c_even(2, &te).unwrap();
        let rel4 = (&(&got4.rounded(ref_prec) - &lit4) / &lit4).abs().to_f64();
        max_rel = max_rel.max(rel2).max(rel4);
    }
    let detail = format!("max rel {max_rel:.2e} vs 1e-12");
    c.finish(max_rel <= 1e-12, &detail);
}

#[test]
fn criterion_02_ode_residual() {
    let c = Criterion::new("02 ode residual", 5.0);
    let grid = linspace(0.0, 50.0, 101);
    let prec = p(256);
    let mut worst = 0.0f64;
    for d in 1..=8u32 {
        let rep = verify::ode_residual(d, &grid, prec, 1e-10).unwrap();
        worst = worst.max(rep.max_residual);
        assert!(rep.passed, "d={d}: {:.3e}", rep.max_residual);
    }
    let detail = format!("max {worst:.2e} vs 1e-10, d in 1..=8");
    c.finish(worst <= 1e-10, &detail);
}

#[test]
fn criterion_03_pde_residual_and_bracket() {
    let c = Criterion::new("03 pde + bracket", 10.0);
    let prec = p(256);
    let mut worst = 0.0f64;
    for d in 1..=4u32 {
        let rep = verify::pde_residual(d, 100, 5.0, prec, 1e-10).unwrap();
        worst = worst.max(rep.max_residual);
        assert!(rep.passed, "d={d}: {:.3e}", rep.max_residual);
    }
    let detail = format!("max {worst:.2e} vs 1e-10, 100 points per d");
    c.finish(worst <= 1e-10, &detail);
}

#[test]
fn criterion_04_dimension_recursions() {
    let c = Criterion::new("04 recursions + c3(0)", 10.0);
    let rep = verify::recursion_residual(10, &linspace(0.0, 20.0, 41), p(128), 1e-20).unwrap();
    let detail = format!(
        "max {:.2e} vs 1e-20, c3(0) spot {:.2e}",
        rep.max_residual, rep.fitted[0]
    );
    c.finish(rep.passed, &detail);
}

#[test]
fn criterion_05_alpha_recovery_by_shooting() {
    let c = Criterion::new("05 shooting alpha recovery", 30.0);
    let rep = verify::shooting_check(&[1, 5], 40.0, p(192), 1e-6).unwrap();
    let detail = format!(
        "c(0) err {:.2e} vs 1e-6, perturbation gaps {:.2e}/{:.2e} vs 1e-4",
        rep.max_residual, rep.fitted[2], rep.fitted[5]
    );
    c.finish(rep.passed, &detail);
}

#[test]
fn criterion_06_laplace_transform() {
    let c = Criterion::new("06 laplace transform", 30.0);
    let prec = p(192);
    let quad = verify::laplace_residual(&[1.2, 1.5, 2.0, 3.0], prec, 1e-8).unwrap();
    assert!(
        quad.passed,
        "quadrature vs closed form: {:.3e}",
        quad.max_residual
    );
    let probe = verify::laplace_limit_probe(50.0, prec, 1e-3).unwrap();
    let detail = format!(
        "quadrature max {:.2e} vs 1e-8; |50 F(50) - pi/2| = {:.4e} vs 1e-3 \
         (limit converges like 1/s: gap = 1/50 + O(1/s^2); Richardson-extrapolated \
         limit lands at {:.2e})",
        quad.max_residual, probe.max_residual, probe.fitted[3]
    );
    c.finish(quad.passed && probe.passed, &detail);
}

#[test]
fn criterion_07_asymptotic_orders() {
    let c = Criterion::new("07 asymptotic orders", 30.0);
    let prec = p(160);
    let mut worst = 0.0f64;
    let mut slopes = Vec::new();
    for &d in &[3u32, 5] {
        let rep = verify::asym_order_check(d, &[1, 2, 3, 4], 0.15, prec).unwrap();
        worst = worst.max(rep.max_residual);
        slopes.extend(rep.fitted.iter().cloned());
        assert!(rep.passed, "d={d}: deviation {:.3}", rep.max_residual);
    }
    let term = verify::asym_even_termination(&[2, 4, 6, 8], p(128), 1e-30).unwrap();
    assert!(term.passed, "even termination residual {:.3e}", term.max_residual);
    let detail = format!("slope dev {worst:.3} vs 0.15, slopes {slopes:.3?}");
    c.finish(worst <= 0.15 && term.passed, &detail);
}

#[test]
fn criterion_08_gevrey_estimates() {
    let c = Criterion::new("08 gevrey stability", 120.0);
    let prec = p(320);
    let grid = linspace(0.0, 50.0, 101);
    let mut worst = 0.0f64;
    for &d in &[2u32, 3] {
        for &s in &[0.0, 0.5, 1.0] {
            let rep = verify::gevrey_fit(d, s, 16, &grid, prec, 10.0).unwrap();
            worst = worst.max(rep.max_residual);
            assert!(rep.passed, "d={d} s={s}: ratio {:.2}", rep.max_residual);
        }
    }
    let detail = format!("worst C_k ratio {worst:.2} vs 10");
    c.finish(worst <= 10.0, &detail);
}

#[test]
fn criterion_09_bessel_residual_boundedness() {
    let c = Criterion::new("09 w/u residual bounded", 120.0);
    let rep = verify::bessel_check(&[0, 1, 2], p(512), 2.0).unwrap();
    let detail = format!(
        "worst dyadic growth {:.3} vs 2 (residual normalized as w_n - (pi/2) 2^-n u_n(t^2/4))",
        rep.max_residual
    );
    c.finish(rep.passed, &detail);
}

#[test]
fn criterion_10_spectral_oracle() {
    let c = Criterion::new("10 spectral reconstruction", 60.0);
    let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
    let rep = verify::spectral_check(&grid, 6000, p(128), 1e-3).unwrap();
    let detail = format!(
        "max dev {:.2e} vs 1e-3 on (0,5]; pi/2 recovery at t=0 within {:.2e}",
        rep.max_residual, rep.fitted[0]
    );
    c.finish(rep.passed, &detail);
}

#[test]
fn criterion_11_scaled_oscillator() {
    let c = Criterion::new("11 scaled oscillator pde", 10.0);
    let prec = p(256);
    let mut worst = 0.0f64;
    for &omega in &[0.5, 2.0] {
        for d in 1..=2u32 {
            let rep = verify::scaled_pde_residual(d, omega, 50, 4.0, prec, 1e-10).unwrap();
            worst = worst.max(rep.max_residual);
            assert!(rep.passed, "d={d} omega={omega}: {:.3e}", rep.max_residual);
        }
    }
    let detail = format!("max {worst:.2e} vs 1e-10");
    c.finish(worst <= 1e-10, &detail);
}
