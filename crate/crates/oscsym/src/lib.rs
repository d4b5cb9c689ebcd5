//! Evaluation toolkit for the radial phase-space profile of the inverse
//! harmonic oscillator.
//!
//! The central object is the entire function `c_d` with
//! `b_d(x, xi) = c_d(|x|^2 + |xi|^2)`, the Weyl symbol of `(-Delta + |x|^2)^-1`
//! on `R^d`. The crate evaluates it by every available route and
//! cross-certifies them:
//!
//! * [`radial`] — power series, coefficient recurrences, derivative stacks;
//! * [`even_closed`] — elementary closed forms for even `d`;
//! * [`asymptotic`] — large-argument homogeneous expansion, optimal truncation;
//! * [`odd_special`] — the special-function layer for odd `d` (Bessel-type
//!   series, the Laplace transform of `c_1`);
//! * [`symbol`] — the user-facing evaluator with route dispatch and partial
//!   derivatives;
//! * [`verify`] — independent residual checks, fits, and oracles.

pub mod asymptotic;
pub mod error;
pub mod even_closed;
pub mod odd_special;
pub mod radial;
pub mod real;
pub mod symbol;
pub mod verify;

mod poly;

pub use error::{Error, Result};
pub use real::{Precision, Real};
