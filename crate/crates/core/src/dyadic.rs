//! Exact dyadic rationals `m / 2^n`.
//!
//! Every paperfolding overlap and every probability in the paperfolding
//! overlap law is dyadic, so this type carries all of the exact arithmetic in
//! the crate. Values are kept canonical: the numerator is odd unless the
//! exponent is zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Largest denominator exponent that still leaves headroom in an `i128`.
pub const MAX_LOG2_DENOMINATOR: u32 = 124;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: i128,
    log2_denominator: u32,
}

impl DyadicRational {
    pub const ZERO: Self = Self {
        numerator: 0,
        log2_denominator: 0,
    };
    pub const ONE: Self = Self {
        numerator: 1,
        log2_denominator: 0,
    };
    pub const MINUS_ONE: Self = Self {
        numerator: -1,
        log2_denominator: 0,
    };
    pub const HALF: Self = Self {
        numerator: 1,
        log2_denominator: 1,
    };

    /// Builds `numerator / 2^log2_denominator` and reduces it.
    ///
    /// Panics if the exponent exceeds [`MAX_LOG2_DENOMINATOR`].
    pub fn new(numerator: i128, log2_denominator: u32) -> Self {
        assert!(
            log2_denominator <= MAX_LOG2_DENOMINATOR,
            "dyadic exponent {log2_denominator} out of range"
        );
        Self {
            numerator,
            log2_denominator,
        }
        .canonical()
    }

    pub fn from_integer(n: i128) -> Self {
        Self {
            numerator: n,
            log2_denominator: 0,
        }
    }

    /// `2^(-n)`.
    pub fn pow2_neg(n: u32) -> Self {
        Self::new(1, n)
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    fn canonical(self) -> Self {
        if self.numerator == 0 {
            return Self::ZERO;
        }
        let tz = self.numerator.trailing_zeros().min(self.log2_denominator);
        Self {
            numerator: self.numerator >> tz,
            log2_denominator: self.log2_denominator - tz,
        }
    }

    /// Numerator rescaled to the denominator `2^exp` (`exp` must not be
    /// below the current exponent).
    fn numerator_at(&self, exp: u32) -> Option<i128> {
        let shift = exp - self.log2_denominator;
        if shift >= 127 {
            return if self.numerator == 0 { Some(0) } else { None };
        }
        let scaled = self.numerator.checked_mul(1i128 << shift)?;
        Some(scaled)
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        let exp = self.log2_denominator.max(rhs.log2_denominator);
        let a = self.numerator_at(exp)?;
        let b = rhs.numerator_at(exp)?;
        Some(
            Self {
                numerator: a.checked_add(b)?,
                log2_denominator: exp,
            }
            .canonical(),
        )
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        let exp = self.log2_denominator.checked_add(rhs.log2_denominator)?;
        let num = self.numerator.checked_mul(rhs.numerator)?;
        let out = Self {
            numerator: num,
            log2_denominator: exp,
        }
        .canonical();
        (out.log2_denominator <= MAX_LOG2_DENOMINATOR).then_some(out)
    }

    /// Division by `2^k`, always exact.
    pub fn halve_n(self, k: u32) -> Self {
        Self::new(self.numerator, self.log2_denominator + k)
    }

    pub fn abs(self) -> Self {
        Self {
            numerator: self.numerator.abs(),
            ..self
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Split the exponent so 2^-e never underflows to zero prematurely.
        let mut v = self.numerator as f64;
        let mut e = self.log2_denominator;
        while e > 0 {
            let step = e.min(60);
            v /= (1u64 << step) as f64;
            e -= step;
        }
        v
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for DyadicRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("dyadic addition overflow")
    }
}

impl Sub for DyadicRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DyadicRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs)
            .expect("dyadic multiplication overflow")
    }
}

impl Neg for DyadicRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            numerator: -self.numerator,
            ..self
        }
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.log2_denominator.max(other.log2_denominator);
        match (self.numerator_at(exp), other.numerator_at(exp)) {
            (Some(a), Some(b)) => a.cmp(&b),
            // Only reachable for huge magnitudes; fall back to sign + float.
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `m/2^n`, `m/d` with `d` a power of two, or a bare integer.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("not a dyadic rational: {s:?}"));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let numerator: i128 = num.parse().map_err(|_| bad())?;
        let exp = match den {
            None => 0,
            Some(d) => {
                if let Some(e) = d.strip_prefix("2^") {
                    e.parse::<u32>().map_err(|_| bad())?
                } else {
                    let d: u128 = d.parse().map_err(|_| bad())?;
                    if !d.is_power_of_two() {
                        return Err(bad());
                    }
                    d.trailing_zeros()
                }
            }
        };
        if exp > MAX_LOG2_DENOMINATOR {
            return Err(bad());
        }
        Ok(Self::new(numerator, exp))
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRecord {
    numerator: i128,
    log2_denominator: u32,
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRecord {
            numerator: self.numerator,
            log2_denominator: self.log2_denominator,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = DyadicRecord::deserialize(deserializer)?;
        if rec.log2_denominator > MAX_LOG2_DENOMINATOR {
            return Err(serde::de::Error::custom("log2_denominator out of range"));
        }
        Ok(Self::new(rec.numerator, rec.log2_denominator))
    }
}
