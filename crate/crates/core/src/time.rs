//! Exact simulated-time accounting.
//!
//! Simulated time is an integer number of nanoseconds. Accumulating `f64`
//! step sizes drifts after a few thousand ticks, which would break bit-exact
//! replay and the `k × agent_period` time invariant.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NANOS_PER_SEC: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeError {
    #[error("step size must be positive and finite, got {0}")]
    NonPositive(f64),
    #[error("step size {0} s is not a whole number of nanoseconds")]
    NotWholeNanos(f64),
}

/// A point in simulated time, measured from the start of the episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_nanos(nanos: u64) -> Self {
        SimTime(nanos)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    /// Seconds as `f64`. The division is correctly rounded, so equal tick
    /// counts always map to the same float.
    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC
    }
}

impl Add<StepSize> for SimTime {
    type Output = SimTime;

    fn add(self, rhs: StepSize) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign<StepSize> for SimTime {
    fn add_assign(&mut self, rhs: StepSize) {
        self.0 += rhs.0;
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}s", self.as_secs_f64())
    }
}

/// A strictly positive duration with nanosecond resolution (physics step,
/// agent period).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct StepSize(u64);

impl StepSize {
    pub fn from_nanos(nanos: u64) -> Option<Self> {
        (nanos > 0).then_some(StepSize(nanos))
    }

    /// Converts seconds to a step size, rejecting values that are not a whole
    /// number of nanoseconds (within float representation error).
    pub fn from_secs_f64(secs: f64) -> Result<Self, TimeError> {
        if !secs.is_finite() || secs <= 0.0 {
            return Err(TimeError::NonPositive(secs));
        }
        let nanos = (secs * NANOS_PER_SEC).round();
        if nanos < 1.0 || nanos > u64::MAX as f64 {
            return Err(TimeError::NotWholeNanos(secs));
        }
        if (nanos / NANOS_PER_SEC - secs).abs() > secs * 1e-9 {
            return Err(TimeError::NotWholeNanos(secs));
        }
        Ok(StepSize(nanos as u64))
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC
    }

    /// `Some(k)` when `self == k × other` exactly.
    pub fn ratio(self, other: StepSize) -> Option<u64> {
        self.0.is_multiple_of(other.0).then_some(self.0 / other.0)
    }

    pub fn times(self, k: u64) -> SimTime {
        SimTime(self.0 * k)
    }
}

impl TryFrom<u64> for StepSize {
    type Error = &'static str;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        StepSize::from_nanos(value).ok_or("step size must be positive")
    }
}

impl From<StepSize> for u64 {
    fn from(value: StepSize) -> u64 {
        value.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn millisecond_is_exact() {
        let dt = StepSize::from_secs_f64(0.001).unwrap();
        assert_eq!(dt.as_nanos(), 1_000_000);
        assert_eq!(dt.as_secs_f64(), 0.001);
    }

    #[test]
    fn rejects_sub_nanosecond_and_nonpositive() {
        assert!(StepSize::from_secs_f64(1.5e-10).is_err());
        assert!(StepSize::from_secs_f64(0.0).is_err());
        assert!(StepSize::from_secs_f64(-1.0).is_err());
        assert!(StepSize::from_secs_f64(f64::NAN).is_err());
    }

    #[test]
    fn ratio_requires_exact_multiple() {
        let dt = StepSize::from_secs_f64(0.001).unwrap();
        let period = StepSize::from_secs_f64(0.01).unwrap();
        assert_eq!(period.ratio(dt), Some(10));
        let odd = StepSize::from_secs_f64(0.0105).unwrap();
        assert_eq!(odd.ratio(dt), None);
    }

    #[test]
    fn k_periods_equal_k_times_period() {
        let period = StepSize::from_secs_f64(0.02).unwrap();
        let mut t = SimTime::ZERO;
        for _ in 0..1000 {
            t += period;
        }
        assert_eq!(t, period.times(1000));
        assert_eq!(t.as_secs_f64(), 20.0);
    }
}
