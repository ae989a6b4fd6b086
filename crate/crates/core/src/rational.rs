//! Arbitrary-precision rational numbers with a canonical text form.
//!
//! Every probability and utility in this crate is a [`Rational`]; no
//! floating point enters any bound, verdict, or ranking. The text grammar
//! is `[sign] integer [ "/" positive-integer ]`, rendered in lowest terms
//! with the denominator omitted when it is 1 (`"5/6"`, `"3"`, `"-1/3"`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An exact rational number, always stored in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_big(value: BigRational) -> Self {
        Rational(value)
    }

    pub fn from_big_ints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Closest `f64`; only for reporting, never for arithmetic.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let err = |reason: &'static str| Error::InvalidRational {
            input: s.to_string(),
            reason,
        };
        let (numer_text, denom_text) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let numer_digits = numer_text.strip_prefix(['+', '-']).unwrap_or(numer_text);
        if numer_digits.is_empty() || !numer_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected an integer numerator"));
        }
        let numer: BigInt = numer_text.parse().map_err(|_| err("bad numerator"))?;
        let denom = match denom_text {
            None => BigInt::one(),
            Some(d) => {
                if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err("expected a positive integer denominator"));
                }
                let d: BigInt = d.parse().map_err(|_| err("bad denominator"))?;
                if d.is_zero() {
                    return Err(err("denominator is zero"));
                }
                d
            }
        };
        Ok(Rational(BigRational::new(numer, denom)))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Compare exactly, then break ties; handy for deterministic sorts.
pub fn cmp_desc(a: &Rational, b: &Rational) -> Ordering {
    b.cmp(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_renders_canonically() {
        let cases = [
            ("1/6", "1/6"),
            ("5/6", "5/6"),
            ("2/4", "1/2"),
            ("-2/4", "-1/2"),
            ("7", "7"),
            ("+3/9", "1/3"),
            ("0/5", "0"),
            ("6/3", "2"),
        ];
        for (input, want) in cases {
            let r: Rational = input.parse().unwrap();
            assert_eq!(r.to_string(), want, "input {input}");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "1//6", "/3", "1/", "1/0", "1/-2", "a", "1.5", "1 / 2", "--3"] {
            assert!(bad.parse::<Rational>().is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn exact_arithmetic() {
        let a = Rational::new(1, 6);
        let b = Rational::new(5, 6);
        assert_eq!(&a + &b, Rational::one());
        assert_eq!(Rational::new(1, 2) - Rational::new(1, 3), Rational::new(1, 6));
        assert_eq!(Rational::new(2, 3) * Rational::new(3, 4), Rational::new(1, 2));
        assert_eq!(Rational::new(1, 2) / Rational::new(3, 2), Rational::new(1, 3));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(r in arb_rational()) {
            let text = r.to_string();
            let back: Rational = text.parse().unwrap();
            prop_assert_eq!(back, r);
        }

        #[test]
        fn add_then_subtract_restores(p in arb_rational(), q in arb_rational()) {
            prop_assert_eq!((&p + &q) - &q, p);
        }
    }
}
