//! Exact rational scalars for the inequality engine.
//!
//! Regularity windows are intersections of strict and non-strict inequalities
//! whose endpoints are small rationals (certificate strips, `2/(l - mu)`,
//! `3/(l - c)`).  Evaluating them in floating point would blur exactly the
//! endpoint semantics the verdicts are about, so every comparison in the
//! `windows` module runs over arbitrary-precision rationals.  Floating-point
//! inputs are converted exactly (every finite `f64` is a dyadic rational).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(BigRational);

impl Exact {
    pub fn zero() -> Self {
        Exact(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// `n/d`; panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Exact conversion; `None` for NaN/infinite inputs.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Exact)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
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

    pub fn recip(&self) -> Self {
        Exact(self.0.recip())
    }

    /// Parses `"p/q"`, integer, or decimal strings exactly (no float round
    /// trip, so `"2.5"` is 5/2 and `"8/3"` stays 8/3).
    pub fn parse(s: &str) -> Result<Self, ExactParseError> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim()).map_err(|_| ExactParseError(s.to_string()))?;
            let d = BigInt::from_str(den.trim()).map_err(|_| ExactParseError(s.to_string()))?;
            if d.is_zero() {
                return Err(ExactParseError(s.to_string()));
            }
            return Ok(Exact(BigRational::new(n, d)));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let digits = format!(
                "{}{}",
                if int_part == "-" || int_part.is_empty() { format!("{}0", int_part) } else { int_part.to_string() },
                frac_part
            );
            let n = BigInt::from_str(&digits).map_err(|_| ExactParseError(s.to_string()))?;
            let d = BigInt::from(10u32).pow(frac_part.len() as u32);
            return Ok(Exact(BigRational::new(n, d)));
        }
        BigInt::from_str(s)
            .map(|n| Exact(BigRational::from_integer(n)))
            .map_err(|_| ExactParseError(s.to_string()))
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("not a rational number: {0:?}")]
pub struct ExactParseError(pub String);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &BigInt::from(1) {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl PartialEq<i64> for Exact {
    fn eq(&self, other: &i64) -> bool {
        *self == Exact::from_int(*other)
    }
}

impl PartialOrd<i64> for Exact {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.partial_cmp(&Exact::from_int(*other))
    }
}

macro_rules! exact_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                Exact((&self.0).$method(&rhs.0))
            }
        }
    };
}

exact_binop!(Add, add);
exact_binop!(Sub, sub);
exact_binop!(Mul, mul);
exact_binop!(Div, div);

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact(-self.0)
    }
}

// Serialized as a string so JSON reports stay exact and byte-stable.
impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => Exact::parse(&s).map_err(serde::de::Error::custom),
            Repr::Number(x) => Exact::from_f64(x)
                .ok_or_else(|| serde::de::Error::custom("non-finite number")),
        }
    }
}
