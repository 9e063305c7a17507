//! Arbitrary-precision rational scalars.
//!
//! Every coefficient in the crate is a [`Rational`]. The wrapper keeps the
//! canonical form (reduced, positive denominator, zero as `0/1`) that
//! `num-rational` maintains and adds the `"p/q"` text form used on every
//! serialization boundary.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

/// Reduces `numerator / denominator` to its canonical representative.
pub fn normalize(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Rational> {
    let denominator = denominator.into();
    if denominator.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(Rational(BigRational::new(numerator.into(), denominator)))
}

impl Rational {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        normalize(numerator, denominator)
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Integer value, if this is an integer that fits in an `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// `self^exp` with `0^0 = 1`.
    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
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
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (t, "1"),
        };
        // Only the numerator may carry a sign.
        if q.starts_with(['-', '+']) || p.starts_with('+') {
            return Err(bad());
        }
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        normalize(p, q).map_err(|e| match e {
            Error::DivisionByZero => Error::DivisionByZero,
            _ => bad(),
        })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $assign_tr<Rational> for Rational {
            fn $assign(&mut self, rhs: Rational) {
                (self.0).$assign(rhs.0);
            }
        }
        impl<'a> $assign_tr<&'a Rational> for Rational {
            fn $assign(&mut self, rhs: &'a Rational) {
                (self.0).$assign(&rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

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

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Shorthand for building constants in code and tests; panics on a zero denominator.
pub fn q(numerator: i64, denominator: i64) -> Rational {
    Rational::new(numerator, denominator).expect("nonzero denominator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(2, 4).unwrap().to_string(), "1/2");
        assert_eq!(normalize(3, -6).unwrap().to_string(), "-1/2");
        let z = normalize(0, 7).unwrap();
        assert_eq!(z.to_string(), "0");
        assert_eq!(z.denom(), &BigInt::from(1));
        assert_eq!(normalize(1, 0), Err(Error::DivisionByZero));
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(q(1, 3) + q(1, 6), q(1, 2));
        assert_eq!(q(-2, 5) * q(5, 2), q(-1, 1));
        assert_eq!(q(1, 1).checked_div(&q(3, 1)).unwrap(), q(1, 3));
        assert_eq!(
            q(1, 1).checked_div(&Rational::zero()),
            Err(Error::DivisionByZero)
        );
        assert_eq!(Rational::zero().recip(), Err(Error::DivisionByZero));
    }

    #[test]
    fn parsing() {
        assert_eq!("-3/6".parse::<Rational>().unwrap(), q(-1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), q(7, 1));
        assert_eq!(" 11/3 ".parse::<Rational>().unwrap(), q(11, 3));
        assert!("3/-6".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert_eq!("1/0".parse::<Rational>(), Err(Error::DivisionByZero));
        assert_eq!(serde_json::to_string(&q(-21, 8)).unwrap(), "\"-21/8\"");
        let back: Rational = serde_json::from_str("\"4/2\"").unwrap();
        assert_eq!(back, q(2, 1));
    }

    #[test]
    fn zero_power_is_one() {
        assert_eq!(Rational::zero().pow(0), Rational::one());
        assert_eq!(q(-2, 3).pow(3), q(-8, 27));
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..30).prop_map(|(p, d)| q(p, d))
    }

    proptest! {
        #[test]
        fn field_axioms(a in rational(), b in rational(), c in rational()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a - &a, Rational::zero());
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.recip().unwrap(), Rational::one());
            }
        }

        #[test]
        fn normalize_is_idempotent(p in -1000i64..1000, d in 1i64..1000, neg in any::<bool>()) {
            let d = if neg { -d } else { d };
            let x = normalize(p, d).unwrap();
            let again = normalize(x.numer().clone(), x.denom().clone()).unwrap();
            prop_assert_eq!(&again, &x);
            prop_assert!(x.denom() > &BigInt::from(0));
            prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
        }
    }
}
