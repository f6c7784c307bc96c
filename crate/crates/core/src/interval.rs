use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval endpoints out of order: {lo} > {hi}")]
    Reversed { lo: Rational, hi: Rational },
    #[error("degenerate interval at {0} must be closed at both ends")]
    EmptySingleton(Rational),
}

/// A real interval with rational endpoints and per-end closure.
///
/// `lo <= hi`; when `lo == hi` both ends are closed (a single point).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct RInterval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl TryFrom<RawInterval> for RInterval {
    type Error = IntervalError;
    fn try_from(r: RawInterval) -> Result<Self, Self::Error> {
        RInterval::new(r.lo, r.hi, r.lo_closed, r.hi_closed)
    }
}

impl From<RInterval> for RawInterval {
    fn from(r: RInterval) -> Self {
        RawInterval {
            lo: r.lo,
            hi: r.hi,
            lo_closed: r.lo_closed,
            hi_closed: r.hi_closed,
        }
    }
}

impl RInterval {
    pub fn new(
        lo: Rational,
        hi: Rational,
        lo_closed: bool,
        hi_closed: bool,
    ) -> Result<Self, IntervalError> {
        if lo > hi {
            return Err(IntervalError::Reversed { lo, hi });
        }
        if lo == hi && !(lo_closed && hi_closed) {
            return Err(IntervalError::EmptySingleton(lo));
        }
        Ok(RInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self, IntervalError> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self, IntervalError> {
        Self::new(lo, hi, true, true)
    }

    pub fn point(p: Rational) -> Self {
        RInterval {
            hi: p.clone(),
            lo: p,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed {
            *x >= self.lo
        } else {
            *x > self.lo
        };
        let below = if self.hi_closed {
            *x <= self.hi
        } else {
            *x < self.hi
        };
        above && below
    }

    pub fn interior_contains(&self, x: &Rational) -> bool {
        *x > self.lo && *x < self.hi
    }

    pub fn closure_contains(&self, x: &Rational) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }

    /// Point at fraction `num/den` of the way from `lo` to `hi`.
    pub fn lerp(&self, num: i64, den: i64) -> Rational {
        &self.lo + &(&self.width() * &Rational::frac(num, den))
    }

    /// Returns a copy with the given end closure flags. Fails when that would
    /// make a single point non-closed.
    pub fn with_closure(&self, lo_closed: bool, hi_closed: bool) -> Result<Self, IntervalError> {
        Self::new(self.lo.clone(), self.hi.clone(), lo_closed, hi_closed)
    }
}

impl fmt::Display for RInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl fmt::Debug for RInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
