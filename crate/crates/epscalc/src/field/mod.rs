//! Exact arithmetic, valuation, order, and absolute value for the field
//! Q((e)) of formal Laurent series over the rationals, the completion of
//! Q(e) in which `e` is a positive topologically nilpotent infinitesimal.
//!
//! Elements are kept as reduced rational functions in `e`; truncated
//! Laurent expansions of any precision are available on demand, so limits
//! are represented by exact heads plus certified tails elsewhere in the
//! crate.

pub mod display;
pub mod element;
pub mod expansion;
pub mod poly;

pub use element::{FieldElement, FieldError};
pub use expansion::Expansion;
pub use poly::Poly;

/// Exact rational coefficients.
pub type Rat = num_rational::BigRational;

/// `n/d` as a rational; panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}
