//! Numeric abstraction shared by every table in the crate.
//!
//! Probabilities and coefficients are generic over [`Scalar`]. [`Rational`]
//! (arbitrary precision) is the exact reference mode; `f64` is the fast mode
//! and compares with a fixed tolerance.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rational = BigRational;

/// Feasibility and comparison tolerance of the double-precision mode.
pub const F64_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` for arithmetic without rounding.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Absolute tolerance used by comparisons; zero in exact mode.
    fn tolerance() -> Self;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Parses `"n/d"`, decimal strings (`"0.29"`, `"1e-3"`), or integers.
    fn parse(s: &str) -> Result<Self>;

    /// JSON representation: a number in double mode, an `"n/d"` string in
    /// exact mode.
    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Self::parse(s),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Self::from_int(i)),
                None => Self::parse(&n.to_string()),
            },
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    /// Human-readable form: 12 significant digits, or exact `n/d`.
    fn display(&self) -> String;

    fn is_positive_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_negative_tol(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn is_zero_tol(&self) -> bool {
        !self.is_positive_tol() && !self.is_negative_tol()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero_tol()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        F64_TOLERANCE
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            if d == 0.0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(n / d);
        }
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Parse(s.into()))
    }

    fn to_json(&self) -> Value {
        let rounded: f64 = format_sig(*self, 12).parse().unwrap_or(*self);
        serde_json::Number::from_f64(rounded)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn display(&self) -> String {
        format_sig(*self, 12)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn to_json(&self) -> Value {
        Value::String(self.display())
    }

    fn display(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Exact parse of `"n/d"`, integers, and decimal strings with an optional
/// exponent; `"0.27"` becomes `27/100`, not the nearest binary double.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `printf("%.{digits}g")`-style formatting.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub(crate) fn sum<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::zero(), |acc, x| acc + x)
}

/// Checks that `probs` is a probability vector within the scalar tolerance.
pub(crate) fn check_distribution<T: Scalar>(probs: &[T], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty")));
    }
    if let Some(p) = probs.iter().find(|p| p.is_negative_tol()) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: negative entry {}",
            p.display()
        )));
    }
    let total = sum(probs.iter().cloned());
    if !total.approx_eq(&T::one()) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {}",
            total.display()
        )));
    }
    Ok(())
}
