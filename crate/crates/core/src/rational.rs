//! Arbitrary-precision rationals kept in lowest terms.
//!
//! `Rational` wraps [`num_rational::BigRational`], which already normalizes on
//! construction. The wrapper pins down the text format (`p/q`, `q` omitted
//! when 1) and the serde encoding used by every file this crate reads or
//! writes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// An exact fraction `num/den` with `den > 0` and `gcd(|num|, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// Builds `num/den`, reducing to lowest terms. Returns `None` when `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Option<Self> {
        let den = den.into();
        if den.is_zero() {
            return None;
        }
        Some(Rational(BigRational::new(num.into(), den)))
    }

    /// Shorthand for small literals; panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("zero denominator")
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    /// Multiplies by a machine integer without building a `BigRational` for it.
    pub fn mul_int(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        let g = k.gcd(self.0.denom());
        if g.is_one() {
            Rational(BigRational::new_raw(
                self.0.numer() * k,
                self.0.denom().clone(),
            ))
        } else {
            Rational(BigRational::new_raw(
                self.0.numer() * (k / &g),
                self.0.denom() / g,
            ))
        }
    }

    /// `self / 2`.
    pub fn half(&self) -> Self {
        if self.0.numer().is_even() {
            Rational(BigRational::new_raw(
                self.0.numer() / 2,
                self.0.denom().clone(),
            ))
        } else {
            Rational(BigRational::new_raw(
                self.0.numer().clone(),
                self.0.denom() * 2,
            ))
        }
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(&self, other: &Rational) -> Self {
        (self + other).half()
    }

    /// Lossy conversion for display only.
    pub fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }

    /// `10^-k` as an exact rational.
    pub fn pow10_neg(k: u32) -> Self {
        Rational(BigRational::new(BigInt::one(), BigInt::from(10u32).pow(k)))
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `-?[0-9]+(/[1-9][0-9]*)?`; unreduced input is reduced.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let malformed = || ParseRationalError::Malformed(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (num_str, den_str) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        if !all_digits(num_str) {
            return Err(malformed());
        }
        let mut num: BigInt = num_str.parse().map_err(|_| malformed())?;
        if negative {
            num = -num;
        }
        let den: BigInt = match den_str {
            None => BigInt::one(),
            Some(d) => {
                if !all_digits(d) {
                    return Err(malformed());
                }
                if d.starts_with('0') {
                    return Err(if d.bytes().all(|b| b == b'0') {
                        ParseRationalError::ZeroDenominator(s.to_string())
                    } else {
                        malformed()
                    });
                }
                d.parse().map_err(|_| malformed())?
            }
        };
        Ok(Rational(BigRational::new(num, den)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Panics on a zero divisor, like the integer types; use `checked_div` otherwise.
forward_binop!(Div, div);

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

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

/// Parses a rational literal, panicking on malformed input. Intended for constants and tests.
pub fn q(s: &str) -> Rational {
    s.parse()
        .unwrap_or_else(|e| panic!("bad rational literal {s:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_format_is_canonical() {
        assert_eq!(q("6/4").to_string(), "3/2");
        assert_eq!(q("-6/3").to_string(), "-2");
        assert_eq!(q("0/7").to_string(), "0");
        assert_eq!(q("-0").to_string(), "0");
        assert_eq!(q("007").to_string(), "7");
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in [
            "", "-", "1/", "/2", "1/0", "1/00", "1/02", "+1", "1.5", "1/-2", "a", "1//2", " 1",
        ] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should not parse");
        }
        assert_eq!(
            "3/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator("3/0".into()))
        );
    }

    #[test]
    fn mul_int_and_half_match_generic_ops() {
        let r = q("-325/16");
        assert_eq!(r.mul_int(8), &r * &Rational::from(8));
        assert_eq!(r.mul_int(-3), &r * &Rational::from(-3));
        assert_eq!(r.mul_int(0), Rational::zero());
        assert_eq!(r.half(), &r / &Rational::from(2));
        assert_eq!(q("7").half(), q("7/2"));
    }

    #[test]
    fn twenty_digit_endpoints_survive_serde() {
        let r = q("90028408624696264845/175783207694477729162");
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, "\"90028408624696264845/175783207694477729162\"");
        assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), r);
    }

    fn big_digits(len: usize) -> impl Strategy<Value = String> {
        proptest::collection::vec(0u8..10, len).prop_map(|d| {
            let mut s: String = d.iter().map(|x| char::from(b'0' + x)).collect();
            s.insert(0, '1');
            s
        })
    }

    proptest! {
        #[test]
        fn text_roundtrip_for_256_digit_values(n in big_digits(256), d in big_digits(256), neg in any::<bool>()) {
            let lit = format!("{}{}/{}", if neg { "-" } else { "" }, n, d);
            let r: Rational = lit.parse().unwrap();
            let back: Rational = r.to_string().parse().unwrap();
            prop_assert_eq!(&back, &r);
            // reduced form: gcd is 1 and the denominator positive
            prop_assert!(r.denom().is_positive());
            prop_assert!(r.numer().gcd(r.denom()).is_one());
        }

        #[test]
        fn add_then_sub_is_identity(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
            let r = Rational::frac(a, b);
            let s = Rational::frac(c, d);
            prop_assert_eq!(&(&r + &s) - &s, r);
        }

        #[test]
        fn ordering_agrees_with_cross_multiplication(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
            let r = Rational::frac(a, b);
            let s = Rational::frac(c, d);
            prop_assert_eq!(r.cmp(&s), (a as i128 * d as i128).cmp(&(c as i128 * b as i128)));
        }
    }
}
