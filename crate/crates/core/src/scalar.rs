//! Scalar traits shared by the walk builders and the linear algebra.
//!
//! Everything that touches probabilities or matrix entries is generic over
//! one of these traits. Exact work uses [`crate::Rational`]; `f64` is
//! available for quick numerical experiments.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// A commutative ring of matrix entries.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl<T> Scalar for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
{
}

/// A scalar ring in which every nonzero element is invertible.
pub trait Field: Scalar + Div<Output = Self> {}

impl<T> Field for T where T: Scalar + Div<Output = T> {}

/// Ordered real scalars used for probability weights.
///
/// Exact types compare exactly; floating types compare within a few ulps of
/// accumulated rounding.
pub trait Real: Field + Num + PartialOrd + ToPrimitive + FromPrimitive {
    /// Equality up to the type's representation error.
    fn close(&self, other: &Self) -> bool;

    /// Parses a literal of the form `a`, `a/b` or a decimal.
    fn parse_literal(text: &str) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }
}

impl Real for f64 {
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * (1.0 + self.abs().max(other.abs()))
    }

    fn parse_literal(text: &str) -> Option<Self> {
        match text.split_once('/') {
            Some((n, d)) => Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
            None => text.trim().parse().ok(),
        }
    }
}

impl Real for f32 {
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-5 * (1.0 + self.abs().max(other.abs()))
    }

    fn parse_literal(text: &str) -> Option<Self> {
        f64::parse_literal(text).map(|x| x as f32)
    }
}

impl Real for BigRational {
    fn close(&self, other: &Self) -> bool {
        self == other
    }

    fn parse_literal(text: &str) -> Option<Self> {
        parse_rational(text)
    }
}

impl Real for Rational64 {
    fn close(&self, other: &Self) -> bool {
        self == other
    }

    fn parse_literal(text: &str) -> Option<Self> {
        let r = parse_rational(text)?;
        Some(Rational64::new(r.numer().to_i64()?, r.denom().to_i64()?))
    }
}

/// Parses `"a/b"`, `"a"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().ok()?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(numer, scale));
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Lossy conversion of an exact or floating entry to a complex double.
pub trait ToComplex64 {
    fn to_c64(&self) -> Complex64;
}

impl ToComplex64 for f64 {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl ToComplex64 for f32 {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(f64::from(*self), 0.0)
    }
}

impl ToComplex64 for BigRational {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl ToComplex64 for Rational64 {
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl<T: ToComplex64> ToComplex64 for Complex<T> {
    fn to_c64(&self) -> Complex64 {
        let re = self.re.to_c64().re;
        let im = self.im.to_c64().re;
        Complex64::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal_literals() {
        let r = parse_rational("2/5").unwrap();
        assert_eq!(r, BigRational::new(2.into(), 5.into()));
        assert_eq!(parse_rational("0.4").unwrap(), r);
        assert_eq!(parse_rational("-1.25").unwrap(), BigRational::new((-5).into(), 4.into()));
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1.").is_none());
    }

    #[test]
    fn float_closeness_tolerates_rounding() {
        assert!((0.1f64 + 0.2).close(&0.3));
        assert!(!1.0f64.close(&1.001));
    }
}
