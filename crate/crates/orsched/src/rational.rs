//! Exact rational time values.
//!
//! All schedule arithmetic is carried out over reduced rationals so that
//! preemptive optima such as `3/2` compare exactly. Integers embed with
//! denominator 1 and serialize as `[num, den]` pairs in reduced form.

use num::rational::Ratio;
use num::{Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// An exact point in time (or duration): reduced rational with positive
/// denominator, totally ordered by value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatTime(Ratio<i128>);

// `Ratio`'s comparison cross-multiplies numerators and denominators, so the
// components must stay below 2^63 for i128 products to be exact.
const MAG_LIMIT: i128 = 1 << 63;

impl RatTime {
    pub fn new(num: i128, den: i128) -> RatTime {
        assert!(den != 0, "rational with zero denominator");
        RatTime(Ratio::new(num, den)).guarded()
    }

    pub fn zero() -> RatTime {
        RatTime(Ratio::zero())
    }

    pub fn from_int<T: Into<i128>>(v: T) -> RatTime {
        RatTime(Ratio::from_integer(v.into()))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Largest integer not exceeding the value.
    pub fn floor_int(&self) -> i128 {
        self.0.floor().to_integer()
    }

    pub fn min(self, other: RatTime) -> RatTime {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: RatTime) -> RatTime {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn guarded(self) -> RatTime {
        assert!(
            self.numer().abs() < MAG_LIMIT && self.denom() < MAG_LIMIT,
            "rational magnitude overflow: {}/{}",
            self.numer(),
            self.denom()
        );
        self
    }
}

impl fmt::Display for RatTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for RatTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for RatTime {
    type Output = RatTime;
    fn add(self, rhs: RatTime) -> RatTime {
        RatTime(self.0 + rhs.0).guarded()
    }
}

impl Sub for RatTime {
    type Output = RatTime;
    fn sub(self, rhs: RatTime) -> RatTime {
        RatTime(self.0 - rhs.0).guarded()
    }
}

impl Mul for RatTime {
    type Output = RatTime;
    fn mul(self, rhs: RatTime) -> RatTime {
        RatTime(self.0 * rhs.0).guarded()
    }
}

impl Div for RatTime {
    type Output = RatTime;
    fn div(self, rhs: RatTime) -> RatTime {
        assert!(!rhs.is_zero(), "division of rational time by zero");
        RatTime(self.0 / rhs.0).guarded()
    }
}

impl Neg for RatTime {
    type Output = RatTime;
    fn neg(self) -> RatTime {
        RatTime(-self.0)
    }
}

impl AddAssign for RatTime {
    fn add_assign(&mut self, rhs: RatTime) {
        *self = *self + rhs;
    }
}

impl SubAssign for RatTime {
    fn sub_assign(&mut self, rhs: RatTime) {
        *self = *self - rhs;
    }
}

impl Sum for RatTime {
    fn sum<I: Iterator<Item = RatTime>>(iter: I) -> RatTime {
        iter.fold(RatTime::zero(), |a, b| a + b)
    }
}

impl From<u64> for RatTime {
    fn from(v: u64) -> RatTime {
        RatTime::from_int(v)
    }
}

impl Serialize for RatTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.numer(), self.denom()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<RatTime, D::Error> {
        let (num, den) = <(i128, i128)>::deserialize(deserializer)?;
        if den == 0 {
            return Err(D::Error::custom("rational with zero denominator"));
        }
        Ok(RatTime::new(num, den))
    }
}
