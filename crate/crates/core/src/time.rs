//! Exact rational time.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// A point or a span on the time axis, stored as an exact rational.
///
/// Every schedule endpoint, the latency and the period share one abstract
/// unit. Comparisons are exact, so right-open interval boundaries behave
/// exactly as written.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(Rational64);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid time literal `{0}`")]
pub struct ParseTimeError(pub String);

impl Time {
    pub const ZERO: Time = Time(Rational64::new_raw(0, 1));
    pub const ONE: Time = Time(Rational64::new_raw(1, 1));

    pub fn new(numer: i64, denom: i64) -> Self {
        Time(Rational64::new(numer, denom))
    }

    pub fn from_int(v: i64) -> Self {
        Time(Rational64::from_integer(v))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
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

    /// Largest integer `k` with `k * span <= self`.
    pub fn div_floor(self, span: Time) -> i64 {
        (self.0 / span.0).floor().to_integer()
    }

    /// `self mod span`, always in `[0, span)`.
    pub fn rem_euclid(self, span: Time) -> Time {
        let k = self.div_floor(span);
        self - span * k
    }

    pub fn halfway(self, other: Time) -> Time {
        Time((self.0 + other.0) / Rational64::from_integer(2))
    }

    /// Point at fraction `num/den` of the way from `self` to `other`.
    pub fn lerp(self, other: Time, num: i64, den: i64) -> Time {
        Time(self.0 + (other.0 - self.0) * Rational64::new(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Time) -> Time {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Time) -> Time {
        std::cmp::max(self, other)
    }
}

impl From<i64> for Time {
    fn from(v: i64) -> Self {
        Time::from_int(v)
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<i64> for Time {
    type Output = Time;
    fn mul(self, rhs: i64) -> Time {
        Time(self.0 * Rational64::from_integer(rhs))
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, |a, b| a + b)
    }
}

/// Integers print bare, everything else as `num/den`.
impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `12`, `-3`, `0.125` (converted exactly) and `7/10`.
impl FromStr for Time {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTimeError(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            return Ok(Time::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
                return Err(err());
            }
            let negative = int.starts_with('-');
            let int_part: i64 = if int.is_empty() || int == "-" || int == "+" {
                0
            } else {
                int.parse().map_err(|_| err())?
            };
            let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(err)?;
            let frac_num: i64 = frac.parse().map_err(|_| err())?;
            let mag = int_part.abs().checked_mul(den).ok_or_else(err)? + frac_num;
            let num = if negative { -mag } else { mag };
            return Ok(Time::new(num, den));
        }
        let v: i64 = s.parse().map_err(|_| err())?;
        Ok(Time::from_int(v))
    }
}

/// Least common multiple of the denominators, handy for sampling grids.
pub fn common_denominator<'a>(times: impl IntoIterator<Item = &'a Time>) -> i64 {
    times.into_iter().fold(1i64, |acc, t| acc.lcm(&t.denom()))
}
