//! Extended reals `R ∪ {+inf}`.
//!
//! Lipschitz constants may be infinite (one partial gradient need not be
//! Lipschitz) and non-smooth terms take the value `+inf` outside of their
//! domain. The division conventions `x / inf = 0` and `inf / x = inf` are
//! total here so rate formulas never special-case at the call site.

use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    /// Maps `f64::INFINITY` to [`Extended::Infinite`]; every other value is
    /// kept as is (NaN and `-inf` stay finite-tagged and should not occur).
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Extended::Infinite
        } else {
            Extended::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// Value as `f64`, with `+inf` for the infinite case.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        }
    }

    /// `1 / self` with `1 / inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Extended::Finite(x) => 1.0 / x,
            Extended::Infinite => 0.0,
        }
    }

    /// `numerator / self` with `x / inf = 0`.
    pub fn divide(numerator: f64, denominator: Extended) -> f64 {
        numerator * denominator.recip()
    }

    /// `self / beta`. A zero `beta` or an infinite `self` gives `+inf`.
    pub fn over(self, beta: f64) -> Extended {
        match self {
            Extended::Infinite => Extended::Infinite,
            Extended::Finite(_) if beta <= 0.0 => Extended::Infinite,
            Extended::Finite(x) => Extended::Finite(x / beta),
        }
    }

    pub fn min(self, other: Extended) -> Extended {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Extended) -> Extended {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl Add<f64> for Extended {
    type Output = Extended;

    fn add(self, rhs: f64) -> Extended {
        self + Extended::Finite(rhs)
    }
}

impl From<f64> for Extended {
    fn from(x: f64) -> Self {
        Extended::from_f64(x)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite values serialize as numbers, the infinite value as the string `"inf"`.
impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(x) => serializer.serialize_f64(*x),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}
