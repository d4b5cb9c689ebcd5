//! Batch front end for the symbol evaluator: evaluate, tabulate, verify,
//! and export machine-readable residual reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 domain error,
//! 3 accuracy/precision error, 4 I/O error.

use std::io::Write;
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oscsym::asymptotic::{self, ReferencePoint};
use oscsym::radial;
use oscsym::real::{Precision, Real};
use oscsym::symbol::{self, EvalOptions, PhasePoint};
use oscsym::verify::{self, ResidualReport};
use oscsym::Error;

#[derive(Parser)]
#[command(name = "oscsym", about = "Radial symbol of the inverse harmonic oscillator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate c_d(t) or b_d at a phase-space point
    Eval {
        #[arg(long)]
        dim: u32,
        /// Radial argument t = |X|^2
        #[arg(long, conflicts_with = "point")]
        t: Option<f64>,
        /// Comma-separated phase-space coordinates (x then xi, 2d values)
        #[arg(long)]
        point: Option<String>,
        /// Significand bits (default: OSCSYM_BITS or 128)
        #[arg(long)]
        bits: Option<u32>,
        /// Fail with an accuracy-gap error unless the reported bound meets
        /// this many relative bits
        #[arg(long)]
        require_bits: Option<u32>,
    },
    /// Tabulate c_d over a t-range
    Table {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        bits: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Derivative stack c, c', ..., c^(k) at one point
    Derivs {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        bits: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Remainder magnitudes of the N-term asymptotic expansion plus a fitted
    /// decay slope
    Asym {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        terms: usize,
        #[arg(long, default_value_t = 10.0)]
        tmin: f64,
        #[arg(long, default_value_t = 100.0)]
        tmax: f64,
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long)]
        bits: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run verification checks; one JSON report per line, exit 0 iff all pass
    Verify {
        /// ode | pde | scaled-pde | recursion | laplace | gevrey |
        /// asym-order | bessel | spectral | shooting | all
        check: String,
        /// Significand bits override (default: per-check, OSCSYM_BITS wins
        /// over nothing)
        #[arg(long)]
        bits: Option<u32>,
        /// Restrict dimension where the check supports it
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long)]
        dmax: Option<u32>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        tfar: Option<f64>,
    },
    /// Run every check, write JSON-lines reports, print a summary table
    Report {
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        bits: Option<u32>,
    },
}

fn env_bits() -> Option<u32> {
    std::env::var("OSCSYM_BITS").ok().and_then(|v| v.parse().ok())
}

fn pick_bits(flag: Option<u32>, default: u32) -> u32 {
    flag.or_else(env_bits).unwrap_or(default)
}

/// Significant decimal digits for serialization: 17 in double mode,
/// `bits/3.32` otherwise.
fn digits_for(bits: u32) -> usize {
    if bits <= 64 {
        17
    } else {
        (bits as f64 / 3.32) as usize
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::SingularPoint(_) | Error::RepOverflow(_) => 2,
        Error::PrecisionExhausted(_) | Error::Underresolved(_) | Error::Gap(_) => 3,
        _ => 1,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err))
}

fn write_out(path: &Option<String>, content: &str) -> Result<(), std::io::Error> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Eval {
            dim,
            t,
            point,
            bits,
            require_bits,
        } => {
            let bits = pick_bits(bits, 128);
            let prec = Precision::new(bits)?;
            let opts = EvalOptions {
                require_rel_bits: require_bits,
            };
            let tr = match (t, point) {
                (Some(t), None) => Real::from_f64(t, prec),
                (None, Some(p)) => {
                    let coords: Vec<f64> = p
                        .split(',')
                        .map(|c| {
                            c.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::Domain(format!("bad coordinate '{c}'")))
                        })
                        .collect::<Result<_, _>>()?;
                    PhasePoint::from_f64(dim, &coords, prec)?.radial().clone()
                }
                _ => {
                    return Err(Error::Domain(
                        "exactly one of --t or --point is required".into(),
                    ))
                }
            };
            let eval = symbol::c_with_options(dim, &tr, prec, opts)?;
            println!(
                "{} (err_bound={}, route={})",
                eval.value.to_decimal(digits_for(bits)),
                eval.err_bound.to_decimal(2),
                eval.route.tag()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Table {
            dim,
            tmin,
            tmax,
            steps,
            bits,
            out,
        } => {
            if tmin < 0.0 || steps < 2 || tmax < tmin {
                return Err(Error::Domain(
                    "need tmin >= 0, tmax >= tmin, steps >= 2".into(),
                ));
            }
            let bits = pick_bits(bits, 128);
            let prec = Precision::new(bits)?;
            let digits = digits_for(bits);
            let mut rows = Vec::with_capacity(steps);
            for i in 0..steps {
                let t = tmin + (tmax - tmin) * i as f64 / (steps - 1) as f64;
                let eval = symbol::c(dim, &Real::from_f64(t, prec), prec)?;
                rows.push((
                    Real::from_f64(t, prec).to_decimal(digits),
                    eval.value.to_decimal(digits),
                    eval.err_bound.to_decimal(2),
                    eval.route.tag(),
                ));
            }
            let content = match out.format {
                Format::Csv => {
                    let mut s = String::from("t,c,err_bound,route\n");
                    for (t, c, e, r) in &rows {
                        s.push_str(&format!("{t},{c},{e},{r}\n"));
                    }
                    s
                }
                Format::Json => {
                    let items: Vec<String> = rows
                        .iter()
                        .map(|(t, c, e, r)| {
                            format!(
                                "{{\"t\":{t},\"c\":{c},\"err_bound\":{e},\"route\":\"{r}\"}}"
                            )
                        })
                        .collect();
                    format!("[{}]\n", items.join(","))
                }
            };
            write_out(&out.output, &content).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Derivs {
            dim,
            t,
            kmax,
            bits,
            out,
        } => {
            let bits = pick_bits(bits, 128);
            let prec = Precision::new(bits)?;
            let digits = digits_for(bits);
            let stack = symbol::derivative_stack(dim, &Real::from_f64(t, prec), kmax, prec)?;
            let content = match out.format {
                Format::Csv => {
                    let mut s = String::from("k,c_k\n");
                    for k in 0..=stack.kmax() {
                        s.push_str(&format!("{k},{}\n", stack.value(k).to_decimal(digits)));
                    }
                    s
                }
                Format::Json => {
                    let items: Vec<String> = (0..=stack.kmax())
                        .map(|k| format!("{{\"k\":{k},\"c_k\":{}}}", stack.value(k).to_decimal(digits)))
                        .collect();
                    format!("[{}]\n", items.join(","))
                }
            };
            write_out(&out.output, &content).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Asym {
            dim,
            terms,
            tmin,
            tmax,
            steps,
            bits,
            out,
        } => {
            if terms < 1 || tmin <= 0.0 || tmax <= tmin || steps < 3 {
                return Err(Error::Domain(
                    "need terms >= 1, 0 < tmin < tmax, steps >= 3".into(),
                ));
            }
            let bits = pick_bits(bits, 128);
            let digits = digits_for(bits);
            // reference route at enough precision that even exponentially
            // small remainders stay above its error floor
            let ref_prec = Precision::new(bits.max(256))?;
            let mut refs = Vec::with_capacity(steps);
            for i in 0..steps {
                let t = tmin * (tmax / tmin).powf(i as f64 / (steps - 1) as f64);
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
            let mut body = String::from("t,asym,reference,abs_err\n");
            for pt in &refs {
                let approx = asymptotic::c_asymptotic(dim, terms, &pt.t)?;
                let abs_err = (&pt.c - &approx.value).abs();
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    pt.t.to_decimal(digits),
                    approx.value.to_decimal(digits),
                    pt.c.to_decimal(digits),
                    abs_err.to_decimal(4)
                ));
            }
            let footer = match asymptotic::error_order_probe(dim, terms, &refs) {
                Ok(fit) => format!(
                    "# {{\"fitted_slope\":{:.6},\"points_used\":{},\"exponential_regime\":{}}}\n",
                    fit.slope, fit.points_used, fit.exponential_regime
                ),
                Err(Error::InsufficientSignal(msg)) => format!(
                    "# {{\"fitted_slope\":null,\"insufficient_signal\":\"{}\"}}\n",
                    json_escape(&msg)
                ),
                Err(e) => return Err(e),
            };
            body.push_str(&footer);
            write_out(&out.output, &body).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            check,
            bits,
            dim,
            dmax,
            s,
            kmax,
            omega,
            tfar,
        } => {
            let bits = bits.or_else(env_bits);
            let reports = run_verify(&check, bits, dim, dmax, s, kmax, omega, tfar)?;
            let mut all_ok = true;
            let mut stdout = std::io::stdout().lock();
            for r in &reports {
                all_ok &= r.passed;
                let line = serde_json::to_string(r).expect("report serialization");
                writeln!(stdout, "{line}").map_err(io_err)?;
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Report { output, bits } => {
            let bits = bits.or_else(env_bits);
            let mut all_reports = Vec::new();
            // checks are independent pure computations; run them concurrently
            // and assemble in deterministic order
            let handles: Vec<_> = verify::CHECK_NAMES
                .iter()
                .map(|name| {
                    thread::spawn(move || verify::run_check(name, bits))
                })
                .collect();
            for h in handles {
                all_reports.push(h.join().expect("check thread")?);
            }
            let mut all_ok = true;
            let mut jsonl = String::new();
            eprintln!("{:<22} {:>12} {:>10} {:>8}", "check", "max_residual", "tol", "status");
            for group in &all_reports {
                for r in group {
                    all_ok &= r.passed;
                    jsonl.push_str(&serde_json::to_string(r).expect("report serialization"));
                    jsonl.push('\n');
                    eprintln!(
                        "{:<22} {:>12.3e} {:>10.1e} {:>8}",
                        r.check,
                        r.max_residual,
                        r.tolerance,
                        if r.passed { "pass" } else { "FAIL" }
                    );
                }
            }
            write_out(&output, &jsonl).map_err(io_err)?;
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    check: &str,
    bits: Option<u32>,
    dim: Option<u32>,
    dmax: Option<u32>,
    s: Option<f64>,
    kmax: Option<usize>,
    omega: Option<f64>,
    tfar: Option<f64>,
) -> Result<Vec<ResidualReport>, Error> {
    let focused = dim.is_some() || dmax.is_some() || s.is_some() || kmax.is_some()
        || omega.is_some() || tfar.is_some();
    if check == "all" {
        if focused {
            return Err(Error::Domain(
                "parameter overrides apply to a single check, not 'all'".into(),
            ));
        }
        // checks are pure and independent; run concurrently, emit in the
        // canonical order
        let handles: Vec<_> = verify::CHECK_NAMES
            .iter()
            .map(|name| thread::spawn(move || verify::run_check(name, bits)))
            .collect();
        let mut out = Vec::new();
        for h in handles {
            out.extend(h.join().expect("check thread")?);
        }
        return Ok(out);
    }
    if !focused {
        return verify::run_check(check, bits);
    }
    let grid = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let p = |d: u32| Precision::new(d);
    match check {
        "ode" => {
            let d = dim.ok_or_else(|| Error::Domain("ode supports --dim".into()))?;
            let prec = p(bits.unwrap_or(256))?;
            Ok(vec![verify::ode_residual(d, &grid(0.0, 50.0, 101), prec, 1e-10)?])
        }
        "pde" => {
            let d = dim.ok_or_else(|| Error::Domain("pde supports --dim".into()))?;
            let prec = p(bits.unwrap_or(256))?;
            Ok(vec![verify::pde_residual(d, 100, 5.0, prec, 1e-10)?])
        }
        "scaled-pde" => {
            let d = dim.unwrap_or(2);
            let w = omega.unwrap_or(2.0);
            let prec = p(bits.unwrap_or(256))?;
            Ok(vec![verify::scaled_pde_residual(d, w, 50, 4.0, prec, 1e-10)?])
        }
        "recursion" => {
            let dm = dmax.unwrap_or(10);
            let prec = p(bits.unwrap_or(128))?;
            Ok(vec![verify::recursion_residual(dm, &grid(0.0, 20.0, 41), prec, 1e-20)?])
        }
        "gevrey" => {
            let d = dim.unwrap_or(2);
            let sv = s.unwrap_or(1.0);
            let km = kmax.unwrap_or(16);
            let prec = p(bits.unwrap_or(320))?;
            Ok(vec![verify::gevrey_fit(d, sv, km, &grid(0.0, 50.0, 101), prec, 10.0)?])
        }
        "asym-order" => {
            let d = dim.unwrap_or(3);
            let prec = p(bits.unwrap_or(160))?;
            Ok(vec![verify::asym_order_check(d, &[1, 2, 3, 4], 0.15, prec)?])
        }
        "shooting" => {
            let d = dim.unwrap_or(1);
            let tf = tfar.unwrap_or(40.0);
            let prec = p(bits.unwrap_or(192))?;
            Ok(vec![verify::shooting_check(&[d], tf, prec, 1e-6)?])
        }
        other => Err(Error::Domain(format!(
            "check '{other}' takes no parameter overrides (or is unknown)"
        ))),
    }
}

fn io_err(e: std::io::Error) -> Error {
    // exit code 4 for I/O problems
    eprintln!("error: {e}");
    std::process::exit(4);
}
