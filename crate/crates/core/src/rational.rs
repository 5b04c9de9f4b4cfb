//! Exact rational weights.
//!
//! Every weight, floor, gadget parameter and bound is a [`Rational`]. Values
//! are always kept in lowest terms with a positive denominator, which is what
//! `num_rational::BigRational` guarantees after every operation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

/// Builds `num/den`. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Display adapter that always renders `num/den`, integers included.
pub struct Frac<'a>(pub &'a Rational);

impl fmt::Display for Frac<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub fn fmt_rational(r: &Rational) -> String {
    Frac(r).to_string()
}

/// Parses `num/den` or a bare integer. Returns `None` on malformed input or a
/// zero denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() || den.is_negative() {
        return None;
    }
    Some(Rational::new(num, den))
}

pub fn is_dyadic(r: &Rational) -> bool {
    let d = r.denom();
    // a power of two has exactly one set bit
    d.is_positive() && (d & (d - BigInt::one())).is_zero()
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}
