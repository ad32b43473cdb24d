//! Number types the simplex engine can pivot over.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Ordered field used by [`super::simplex`].
///
/// Floating point implementations compare against small tolerances; exact
/// implementations use a zero tolerance.
pub trait LpScalar:
    Clone
    + Debug
    + Display
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
{
    /// Threshold below which reduced costs and infeasibilities count as zero.
    fn optimality_tol() -> Self;
    /// Smallest admissible magnitude of a pivot element.
    fn pivot_tol() -> Self;
    fn from_f64(value: f64) -> Self;
    fn as_f64(&self) -> f64;
    fn abs_val(&self) -> Self;
    fn is_exact() -> bool;
}

impl LpScalar for f64 {
    fn optimality_tol() -> Self {
        1e-9
    }

    fn pivot_tol() -> Self {
        1e-9
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        false
    }
}

impl LpScalar for BigRational {
    fn optimality_tol() -> Self {
        BigRational::zero()
    }

    fn pivot_tol() -> Self {
        BigRational::zero()
    }

    /// Exact dyadic conversion; non-finite input maps to zero.
    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).unwrap_or_else(BigRational::zero)
    }

    fn as_f64(&self) -> f64 {
        let num = self.numer().to_f64().unwrap_or(f64::NAN);
        let den = self.denom().to_f64().unwrap_or(f64::NAN);
        if num.is_finite() && den.is_finite() {
            num / den
        } else {
            // very large numerators or denominators: shrink both first
            let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(1000);
            let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_exact() -> bool {
        true
    }
}

/// Parses `"p/q"`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(parse_rational("1/2"), Some(half.clone()));
        assert_eq!(parse_rational("0.5"), Some(half.clone()));
        assert_eq!(parse_rational("-0.5"), Some(-half));
        assert_eq!(parse_rational("3"), Some(BigRational::from_integer(3.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn rational_round_trips_dyadics() {
        let r = <BigRational as LpScalar>::from_f64(0.375);
        assert_eq!(r, BigRational::new(3.into(), 8.into()));
        assert_eq!(r.as_f64(), 0.375);
    }
}
