//! Half-open intervals `[a,b)` and the Hom calculus between interval sheaves.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::endpoint::{Endpoint, ParseNumberError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("empty interval [{lo},{hi})")]
    Empty { lo: Endpoint, hi: Endpoint },
    #[error("left endpoint cannot be +inf")]
    LeftPosInf,
    #[error("right endpoint cannot be -inf")]
    RightNegInf,
    #[error("malformed interval literal `{0}`")]
    Syntax(String),
    #[error(transparent)]
    Number(#[from] ParseNumberError),
    #[error("composition needs two nonzero generators, got {first:?} then {second:?}")]
    NotComposable { first: HomType, second: HomType },
}

/// A nonempty interval `[lo, hi)`; `lo` may be `-inf`, `hi` may be `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: Endpoint,
    hi: Endpoint,
}

/// Which degree (if any) carries the one-dimensional Hom between two interval sheaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HomType {
    Zero,
    Deg0,
    Deg1,
}

impl Interval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Result<Self, IntervalError> {
        if lo == Endpoint::PosInf {
            return Err(IntervalError::LeftPosInf);
        }
        if hi == Endpoint::NegInf {
            return Err(IntervalError::RightNegInf);
        }
        if lo >= hi {
            return Err(IntervalError::Empty { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Convenience constructor for integer endpoints; panics on an empty interval.
    pub fn ints(lo: i64, hi: i64) -> Self {
        Interval::new(Endpoint::int(lo), Endpoint::int(hi)).expect("nonempty interval")
    }

    pub fn lo(&self) -> &Endpoint {
        &self.lo
    }

    pub fn hi(&self) -> &Endpoint {
        &self.hi
    }

    /// `hi - lo`, which is `+inf` for unbounded intervals.
    pub fn length(&self) -> Endpoint {
        &self.hi - &self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, t: &Endpoint) -> bool {
        &self.lo <= t && t < &self.hi
    }

    pub fn shifted(&self, c: &Rational) -> Interval {
        Interval {
            lo: self.lo.shifted(c),
            hi: self.hi.shifted(c),
        }
    }

    /// Reflection `t -> -t`, written back in the half-open convention.
    pub fn reflected(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    /// `true` when the length exceeds `c`, i.e. the Tamarkin map by `c` is nonzero on this bar.
    pub fn longer_than(&self, c: &Rational) -> bool {
        self.length() > Endpoint::Finite(c.clone())
    }
}

/// The product order: both endpoints weakly increase.
pub fn leq(i: &Interval, j: &Interval) -> bool {
    i.lo <= j.lo && i.hi <= j.hi
}

/// Hom between `k_[a,b)` and `k_[c,d)`.
pub fn hom(i: &Interval, j: &Interval) -> HomType {
    let (a, b, c, d) = (&i.lo, &i.hi, &j.lo, &j.hi);
    if a <= c && c < b && b <= d {
        HomType::Deg0
    } else if c < a && a <= d && d < b {
        HomType::Deg1
    } else {
        HomType::Zero
    }
}

pub fn is_deg0(i: &Interval, j: &Interval) -> bool {
    hom(i, j) == HomType::Deg0
}

/// Composite of the canonical generators `I -> J -> K`; may vanish.
pub fn compose_generator(i: &Interval, j: &Interval, k: &Interval) -> Result<HomType, IntervalError> {
    let first = hom(i, j);
    let second = hom(j, k);
    if first != HomType::Deg0 || second != HomType::Deg0 {
        return Err(IntervalError::NotComposable { first, second });
    }
    Ok(hom(i, k))
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = IntervalError;

    /// Accepts `[a,b)` (whitespace allowed around the endpoints).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(')').or_else(|| r.strip_suffix('[')))
            .ok_or_else(|| IntervalError::Syntax(t.to_string()))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| IntervalError::Syntax(t.to_string()))?;
        Interval::new(lo.parse()?, hi.parse()?)
    }
}
