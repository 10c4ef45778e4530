//! Valuations with an explicit +infinity sentinel.
//!
//! The valuation of a nonzero element is the lowest exponent of its
//! expansion in `e`; the zero element gets `Valuation::Infinite`. All
//! arithmetic on valuations handles the sentinel explicitly instead of
//! overloading some large integer.

use std::cmp::Ordering;
use std::fmt;

/// Lowest `e`-exponent of an element, or `Infinite` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Finite value, or `None` for the sentinel.
    pub fn finite(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }

    /// v(a*b) = v(a) + v(b), with Infinite absorbing.
    pub fn add(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.saturating_add(b)),
            _ => Valuation::Infinite,
        }
    }

    pub fn add_i64(self, k: i64) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a.saturating_add(k)),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// v(n * a) for an n-fold product, n >= 0.
    pub fn scale(self, n: i64) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a.saturating_mul(n)),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// True when the valuation certifies at least `precision`.
    pub fn at_least(&self, precision: i64) -> bool {
        match self {
            Valuation::Finite(v) => *v >= precision,
            Valuation::Infinite => true,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", v),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinite_on_top() {
        assert!(Valuation::Finite(1_000_000) < Valuation::Infinite);
        assert!(Valuation::Finite(-3) < Valuation::Finite(0));
        assert_eq!(
            Valuation::Infinite.min(Valuation::Finite(2)),
            Valuation::Finite(2)
        );
    }

    #[test]
    fn arithmetic_absorbs_sentinel() {
        assert_eq!(
            Valuation::Finite(2).add(Valuation::Finite(3)),
            Valuation::Finite(5)
        );
        assert_eq!(
            Valuation::Finite(2).add(Valuation::Infinite),
            Valuation::Infinite
        );
        assert_eq!(Valuation::Infinite.scale(0), Valuation::Infinite);
    }
}
