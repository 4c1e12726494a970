use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::StreamError;

/// Non-negative timestamp in whole milliseconds.
///
/// Decimal seconds on the millisecond grid (3.1, 4.4, 0.001) map to exact
/// integers, so timestamps compare exactly instead of through float equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(u64);

const GRID_TOLERANCE: f64 = 1e-6;

impl Time {
    pub const ZERO: Time = Time(0);

    pub const fn from_millis(ms: u64) -> Self {
        Time(ms)
    }

    pub const fn as_millis(self) -> u64 {
        self.0
    }

    /// Strict conversion: rejects negative, non-finite and off-grid values.
    pub fn from_secs_f64(secs: f64) -> Result<Self, StreamError> {
        if !secs.is_finite() || secs < 0.0 {
            return Err(StreamError::InvalidTime(format!("{secs}")));
        }
        let ms = secs * 1000.0;
        let rounded = ms.round();
        if (ms - rounded).abs() > GRID_TOLERANCE * ms.abs().max(1.0) || rounded > u64::MAX as f64 {
            return Err(StreamError::InvalidTime(format!("{secs} is not a multiple of 0.001 s")));
        }
        Ok(Time(rounded as u64))
    }

    /// Rounds to the nearest millisecond; negative input saturates at zero.
    pub fn round_secs(secs: f64) -> Self {
        if secs.is_nan() || secs <= 0.0 {
            return Time::ZERO;
        }
        Time((secs * 1000.0).round() as u64)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn checked_sub(self, rhs: Time) -> Option<Time> {
        self.0.checked_sub(rhs.0).map(Time)
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0.saturating_sub(rhs.0))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 1000;
        let frac = self.0 % 1000;
        if frac == 0 {
            write!(f, "{whole}.0")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_secs_f64())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(deserializer)?;
        Time::from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}
