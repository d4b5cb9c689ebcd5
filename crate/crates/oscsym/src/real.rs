//! Arbitrary-precision real arithmetic used by every evaluation route.
//!
//! [`Real`] wraps `astro_float::BigFloat` and carries its working precision so
//! that arithmetic does not need explicit precision arguments at every call
//! site. Binary operations widen to the larger operand precision. All
//! operations round to nearest-even, so results are deterministic for a given
//! precision.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;

use crate::error::Error;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Significand width, in bits, for the high-precision evaluation paths.
///
/// The underlying arithmetic allocates whole 64-bit words, so the effective
/// width is `bits` rounded up to a multiple of 64. 53 bits is accepted and
/// means "double-grade accuracy".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    /// Double-grade precision (the minimum allowed).
    pub const DOUBLE: Precision = Precision { bits: 53 };

    pub fn new(bits: u32) -> Result<Self, Error> {
        if bits < 53 {
            return Err(Error::Domain(format!(
                "precision must be at least 53 significand bits, got {bits}"
            )));
        }
        Ok(Precision { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Widened precision for internal evaluation: `self` plus `extra` guard bits.
    pub fn widened(self, extra: u32) -> Precision {
        Precision {
            bits: self.bits + extra,
        }
    }

    pub(crate) fn p(self) -> usize {
        self.bits as usize
    }

    /// Unit in the last place relative to 1, i.e. `2^(1-bits)`.
    pub fn epsilon(self) -> Real {
        Real::exp2i(1 - self.bits as i64, self)
    }
}

/// An arbitrary-precision real number tagged with its working precision.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    pub fn zero(prec: Precision) -> Self {
        Real {
            v: BigFloat::from_i8(0, prec.p()),
            p: prec.p(),
        }
    }

    pub fn one(prec: Precision) -> Self {
        Real::from_i64(1, prec)
    }

    pub fn from_i64(x: i64, prec: Precision) -> Self {
        Real {
            v: BigFloat::from_i64(x, prec.p()),
            p: prec.p(),
        }
    }

    pub fn from_u64(x: u64, prec: Precision) -> Self {
        Real {
            v: BigFloat::from_u64(x, prec.p()),
            p: prec.p(),
        }
    }

    pub fn from_f64(x: f64, prec: Precision) -> Self {
        Real {
            v: BigFloat::from_f64(x, prec.p()),
            p: prec.p(),
        }
    }

    /// Exact conversion from a big integer (widened if the integer needs more bits).
    pub fn from_bigint(x: &BigInt, prec: Precision) -> Self {
        let bits = x.bits().max(1) as usize + 8;
        let p = prec.p().max(bits);
        let work = Precision { bits: p as u32 };
        let mut acc = Real::zero(work);
        let shift = Real::exp2i(64, work);
        let (sign, mag) = (x.sign(), x.magnitude());
        for limb in mag.iter_u64_digits().rev() {
            acc = &(&acc * &shift) + &Real::from_u64(limb, work);
        }
        if sign == num_bigint::Sign::Minus {
            acc = -&acc;
        }
        acc.rounded(prec)
    }

    /// `2^k` exactly.
    pub fn exp2i(k: i64, prec: Precision) -> Self {
        let mut v = BigFloat::from_i8(1, prec.p());
        v.set_exponent((k + 1) as astro_float::Exponent);
        Real { v, p: prec.p() }
    }

    pub fn pi(prec: Precision) -> Self {
        Real {
            v: with_consts(|cc| cc.pi(prec.p(), RM)),
            p: prec.p(),
        }
    }

    pub fn precision(&self) -> Precision {
        Precision { bits: self.p as u32 }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    /// Binary exponent: the value lies in `[2^(e-1), 2^e)` up to sign.
    /// Returns `None` for zero, NaN and infinities.
    pub fn exponent(&self) -> Option<i64> {
        if !self.is_finite() || self.is_zero() {
            return None;
        }
        self.v.exponent().map(|e| e as i64)
    }

    fn bin(&self, rhs: &Real, f: impl Fn(&BigFloat, &BigFloat, usize) -> BigFloat) -> Real {
        let p = self.p.max(rhs.p);
        Real {
            v: f(&self.v, &rhs.v, p),
            p,
        }
    }

    pub fn abs(&self) -> Real {
        let mut v = self.v.clone();
        v.set_sign(Sign::Pos);
        Real { v, p: self.p }
    }

    pub fn recip(&self) -> Real {
        Real {
            v: self.v.reciprocal(self.p, RM),
            p: self.p,
        }
    }

    pub fn sqrt(&self) -> Real {
        Real {
            v: self.v.sqrt(self.p, RM),
            p: self.p,
        }
    }

    pub fn exp(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.exp(self.p, RM, cc)),
            p: self.p,
        }
    }

    pub fn ln(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.ln(self.p, RM, cc)),
            p: self.p,
        }
    }

    pub fn atan(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.atan(self.p, RM, cc)),
            p: self.p,
        }
    }

    pub fn cos(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.cos(self.p, RM, cc)),
            p: self.p,
        }
    }

    pub fn atanh(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.atanh(self.p, RM, cc)),
            p: self.p,
        }
    }

    pub fn powi(&self, n: usize) -> Real {
        Real {
            v: self.v.powi(n, self.p, RM),
            p: self.p,
        }
    }

    /// Round (or widen) to a new working precision.
    pub fn rounded(&self, prec: Precision) -> Real {
        let mut v = self.v.clone();
        // set_precision fails only for NaN/Inf flavors; keep those as-is.
        let _ = v.set_precision(prec.p(), RM);
        Real { v, p: prec.p() }
    }

    pub fn max(&self, rhs: &Real) -> Real {
        if self >= rhs {
            self.clone()
        } else {
            rhs.clone()
        }
    }

    pub fn min(&self, rhs: &Real) -> Real {
        if self <= rhs {
            self.clone()
        } else {
            rhs.clone()
        }
    }

    /// Nearest `f64` (0 on underflow, +/-inf on overflow).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let (words, _n, sign, e, _inexact) = self.v.as_raw_parts().expect("finite value");
        // Value is 0.mantissa * 2^e with the mantissa's top bit set.
        // Collapse the top 128 bits of the mantissa into a f64 and scale.
        let top = *words.last().unwrap();
        let next = if words.len() >= 2 {
            words[words.len() - 2]
        } else {
            0
        };
        let mag = (top as f64) * 2f64.powi(64) + next as f64;
        // mag ~ mantissa * 2^128 / 2^(64*len) ... relative to 0.mantissa it is mag / 2^128.
        let scale = e - 128;
        let mut out = mag;
        // Apply the power-of-two scale in safe chunks.
        let mut s = scale;
        while s > 512 {
            out *= 2f64.powi(512);
            s -= 512;
            if out.is_infinite() {
                break;
            }
        }
        while s < -512 {
            out *= 2f64.powi(-512);
            s += 512;
            if out == 0.0 {
                break;
            }
        }
        out *= 2f64.powi(s);
        if sign == Sign::Neg {
            -out
        } else {
            out
        }
    }

    /// Decimal string with `digits` significant digits.
    ///
    /// Uses positional notation when the decimal exponent is in `[-4, 21)`,
    /// scientific notation (`d.dddde<exp>`) otherwise, mirroring the usual
    /// float display rules so output is stable across precisions.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.v.is_nan() {
            return "nan".into();
        }
        if self.v.is_inf_pos() {
            return "inf".into();
        }
        if self.v.is_inf_neg() {
            return "-inf".into();
        }
        if self.v.is_zero() {
            return "0".into();
        }
        let s = with_consts(|cc| self.v.format(Radix::Dec, RM, cc)).expect("decimal format");
        let (neg, mant, exp10) = split_decimal(&s);
        let (mant, exp10) = round_digit_string(&mant, exp10, digits);
        render_decimal(neg, &mant, exp10)
    }
}

/// Split astro-float's `[-]d.ddd...e+X` into (negative, digit string, exponent
/// of the leading digit).
fn split_decimal(s: &str) -> (bool, String, i64) {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mant_part, exp_part) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().expect("exponent")),
        None => (body, 0),
    };
    let digits: String = mant_part.chars().filter(|c| c.is_ascii_digit()).collect();
    let int_len = mant_part.split('.').next().unwrap().len() as i64;
    // Exponent of the first digit: value = 0.digits * 10^(int_len + exp_part)
    let lead = int_len + exp_part - 1;
    // Strip leading zeros, adjusting the exponent.
    let trimmed = digits.trim_start_matches('0');
    let shift = (digits.len() - trimmed.len()) as i64;
    (neg, trimmed.to_string(), lead - shift)
}

/// Round a digit string to `n` digits, half-even on the digit tail.
fn round_digit_string(digits: &str, exp10: i64, n: usize) -> (String, i64) {
    let mut d: Vec<u8> = digits.bytes().map(|b| b - b'0').collect();
    if d.len() <= n {
        while d.len() < n {
            d.push(0);
        }
        return (d.iter().map(|x| (x + b'0') as char).collect(), exp10);
    }
    let tail = &d[n..];
    let round_up = match tail[0].cmp(&5) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => tail[1..].iter().any(|&x| x != 0) || d[n - 1] % 2 == 1,
    };
    d.truncate(n);
    let mut exp = exp10;
    if round_up {
        let mut i = n;
        loop {
            if i == 0 {
                d.insert(0, 1);
                d.truncate(n);
                exp += 1;
                break;
            }
            i -= 1;
            if d[i] == 9 {
                d[i] = 0;
            } else {
                d[i] += 1;
                break;
            }
        }
    }
    (d.iter().map(|x| (x + b'0') as char).collect(), exp)
}

fn render_decimal(neg: bool, mant: &str, exp10: i64) -> String {
    let sign = if neg { "-" } else { "" };
    let trimmed = mant.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
    if (-4..21).contains(&exp10) {
        if exp10 >= 0 {
            let e = exp10 as usize;
            if e + 1 >= trimmed.len() {
                let zeros = "0".repeat(e + 1 - trimmed.len());
                format!("{sign}{trimmed}{zeros}")
            } else {
                format!("{sign}{}.{}", &trimmed[..e + 1], &trimmed[e + 1..])
            }
        } else {
            let zeros = "0".repeat((-exp10 - 1) as usize);
            format!("{sign}0.{zeros}{trimmed}")
        }
    } else {
        let head = &trimmed[..1];
        let tail = &trimmed[1..];
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({} @{}b)", self.to_decimal(20), self.p)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal((self.p as f64 / 3.32) as usize))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|s| s.cmp(&0))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl std::ops::$trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                self.bin(rhs, |a, b, p| a.$f(b, p, RM))
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl std::ops::Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        let mut v = self.v.clone();
        v.inv_sign();
        Real { v, p: self.p }
    }
}

/// Compensated (Kahan) accumulator over [`Real`] values.
///
/// With one extra rounding-error register the accumulated error stays at a
/// few ulps regardless of the number of terms. Also tracks the largest |term|
/// seen, which measures how many leading bits cancel in alternating sums.
pub struct KahanSum {
    sum: Real,
    comp: Real,
    max_abs: Real,
}

impl KahanSum {
    pub fn new(prec: Precision) -> Self {
        KahanSum {
            sum: Real::zero(prec),
            comp: Real::zero(prec),
            max_abs: Real::zero(prec),
        }
    }

    pub fn add(&mut self, term: &Real) {
        let y = term - &self.comp;
        let t = &self.sum + &y;
        self.comp = &(&t - &self.sum) - &y;
        self.sum = t;
        let a = term.abs();
        if a > self.max_abs {
            self.max_abs = a;
        }
    }

    pub fn value(&self) -> Real {
        self.sum.clone()
    }

    /// Largest summand magnitude seen so far.
    pub fn max_abs_term(&self) -> Real {
        self.max_abs.clone()
    }

    /// Bits of cancellation: how far the result dropped below the largest term.
    pub fn cancellation_bits(&self) -> u32 {
        match (self.max_abs.exponent(), self.sum.exponent()) {
            (Some(emax), Some(esum)) => (emax - esum).max(0) as u32,
            (Some(_), None) => self.sum.precision().bits(), // sum is zero: all bits gone
            _ => 0,
        }
    }
}
