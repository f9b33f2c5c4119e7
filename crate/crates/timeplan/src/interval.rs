//! Intervals over the non-negative reals with natural endpoints.
//!
//! An [`Interval`] has a natural lower endpoint, an upper endpoint that is
//! either natural or infinite, and independent strictness on each side.
//! Construction rejects empty intervals, so every value of the type denotes
//! a non-empty subset of the non-negative reals.

use std::fmt;
use std::str::FromStr;

use crate::rational::Rational;

/// A non-empty interval `[lo, hi]` / `]lo, hi[` / mixed, with `hi` possibly
/// infinite. The upper side of an unbounded interval is always open.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    lo: u64,
    lo_closed: bool,
    hi: Option<u64>,
    hi_closed: bool,
}

/// Rejected interval shapes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("empty interval: upper endpoint {hi} below lower endpoint {lo}")]
    Inverted { lo: u64, hi: u64 },
    #[error("empty interval: degenerate at {at} with an open side")]
    EmptyPoint { at: u64 },
}

impl Interval {
    pub fn new(
        lo: u64,
        lo_closed: bool,
        hi: Option<u64>,
        hi_closed: bool,
    ) -> Result<Self, IntervalError> {
        if let Some(h) = hi {
            if h < lo {
                return Err(IntervalError::Inverted { lo, hi: h });
            }
            if h == lo && !(lo_closed && hi_closed) {
                return Err(IntervalError::EmptyPoint { at: lo });
            }
        }
        Ok(Interval {
            lo,
            lo_closed,
            hi,
            // An infinite upper side carries no meaningful closedness.
            hi_closed: hi.is_some() && hi_closed,
        })
    }

    /// `[lo, hi]`.
    pub fn closed(lo: u64, hi: u64) -> Self {
        Self::new(lo, true, Some(hi), true).expect("closed interval with lo <= hi")
    }

    /// `[n, n]`.
    pub fn point(n: u64) -> Self {
        Self::closed(n, n)
    }

    /// `[n, oo[`.
    pub fn at_least(n: u64) -> Self {
        Self::new(n, true, None, false).expect("unbounded interval")
    }

    /// `]n, oo[`.
    pub fn greater_than(n: u64) -> Self {
        Self::new(n, false, None, false).expect("unbounded interval")
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    /// `None` means unbounded above.
    pub fn hi(&self) -> Option<u64> {
        self.hi
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    /// Membership of an exact rational.
    pub fn contains(&self, q: &Rational) -> bool {
        let lo = Rational::from_natural(self.lo);
        let lo_ok = if self.lo_closed { *q >= lo } else { *q > lo };
        if !lo_ok {
            return false;
        }
        match self.hi {
            None => true,
            Some(h) => {
                let hi = Rational::from_natural(h);
                if self.hi_closed {
                    *q <= hi
                } else {
                    *q < hi
                }
            }
        }
    }

    /// True for intervals that are unbounded above or left-closed at 0:
    /// exactly the intervals expressible as a one-sided comparison with a
    /// natural number.
    pub fn is_zero_infty(&self) -> bool {
        self.hi.is_none() || (self.lo == 0 && self.lo_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { ']' };
        match self.hi {
            Some(h) => {
                let close = if self.hi_closed { ']' } else { '[' };
                write!(f, "{}{},{}{}", open, self.lo, h, close)
            }
            None => write!(f, "{}{},inf[", open, self.lo),
        }
    }
}

/// Parse error for interval expressions.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseIntervalError {
    #[error("invalid interval expression {0:?}")]
    Syntax(String),
    #[error("interval expression {0:?} denotes an empty interval")]
    Empty(String),
}

impl FromStr for Interval {
    type Err = ParseIntervalError;

    /// Accepts bracket notation (`[1,4]`, `]0,inf[`, `[0,1[`) and one-sided
    /// comparisons with a natural number (`>= 1`, `<3`, `> 0`, `<= 2`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = s;
        let s = s.trim();
        let syntax = || ParseIntervalError::Syntax(raw.to_string());
        let empty = || ParseIntervalError::Empty(raw.to_string());

        let parse_nat = |t: &str| t.trim().parse::<u64>().map_err(|_| syntax());

        if let Some(rest) = s.strip_prefix("<=") {
            return Ok(Interval::closed(0, parse_nat(rest)?));
        }
        if let Some(rest) = s.strip_prefix(">=") {
            return Ok(Interval::at_least(parse_nat(rest)?));
        }
        if let Some(rest) = s.strip_prefix('<') {
            let n = parse_nat(rest)?;
            // [0, n[ ; empty when n = 0.
            return Interval::new(0, true, Some(n), false).map_err(|_| empty());
        }
        if let Some(rest) = s.strip_prefix('>') {
            let n = parse_nat(rest)?;
            return Ok(Interval::greater_than(n));
        }

        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some(']') => false,
            _ => return Err(syntax()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some('[') => false,
            _ => return Err(syntax()),
        };
        let inner = &s[1..s.len() - 1];
        let (lo, hi) = inner.split_once(',').ok_or_else(syntax)?;
        let lo = parse_nat(lo)?;
        let hi = hi.trim();
        let hi = if hi == "inf" || hi == "oo" {
            None
        } else {
            Some(parse_nat(hi)?)
        };
        Interval::new(lo, lo_closed, hi, hi_closed).map_err(|_| empty())
    }
}
