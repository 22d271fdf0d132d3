//! Simulation time: a nonnegative extended real.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use crate::error::KernelError;

/// A point or span on the simulation clock.
///
/// Values are nonnegative `f64`s or `+inf`. NaN and negative values are
/// rejected at construction, which makes the ordering total.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);
    pub const INFINITY: SimTime = SimTime(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self, KernelError> {
        if value.is_nan() || value < 0.0 {
            Err(KernelError::InvalidTime(value))
        } else {
            // normalise -0.0 so that bit patterns of equal times agree
            Ok(SimTime(value + 0.0))
        }
    }

    /// Panicking constructor for literals and values already known to be valid.
    pub fn from_f64(value: f64) -> Self {
        Self::new(value).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// `self - earlier`, clamped at zero. Callers guarantee `earlier <= self`
    /// up to rounding; the clamp only absorbs ulp-level noise.
    pub fn since(self, earlier: SimTime) -> SimTime {
        debug_assert!(earlier <= self || (earlier.0 - self.0) < 1e-9 * earlier.0.max(1.0));
        if self.is_infinite() {
            return SimTime::INFINITY;
        }
        SimTime((self.0 - earlier.0).max(0.0))
    }
}

impl Eq for SimTime {}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    /// Saturating difference; see [`SimTime::since`].
    fn sub(self, rhs: SimTime) -> SimTime {
        self.since(rhs)
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimTime({})", self.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl TryFrom<f64> for SimTime {
    type Error = KernelError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        SimTime::new(value)
    }
}

/// Least element of a non-empty list of times.
pub fn time_min(times: &[SimTime]) -> Result<SimTime, KernelError> {
    times
        .iter()
        .copied()
        .min()
        .ok_or(KernelError::EmptyInput("time_min"))
}
