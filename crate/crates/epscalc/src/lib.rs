//! Exact arithmetic and certified series calculus over the field Q((e))
//! of formal Laurent series in a positive infinitesimal `e`.
//!
//! The crate provides:
//! - [`field`]: the exact non-Archimedean field kernel (arithmetic,
//!   valuation, total order, absolute value, truncated expansions);
//! - [`series`]: term streams with certified tail bounds, convergence
//!   verdicts, splitting, reordering, and the comparison test;
//! - [`double_series`]: double series over the grid, linearization by
//!   pairings, Fubini-type row/column/partition sums, Goursat exhaustion
//!   sums, products of series, and the classic counterexample where the
//!   iterated-absolute-sum hypothesis fails;
//! - [`power_series`]: power series evaluation with verdicts, Cauchy
//!   products, power tables, expected coefficients of a composition, the
//!   substitution criterion, and composite evaluation;
//! - [`faa_di_bruno`]: set partitions and the Faa di Bruno formula,
//!   including the derivative blow-up example;
//! - [`parse`] and [`scenario`]: an expression parser, a line-oriented
//!   scenario format, and a runner with structured reports;
//! - [`cli`]: the command-line front end used by the `epscalc` binary.
//!
//! Start with the `examples/` directory for runnable walkthroughs of each
//! capability.

pub mod cli;
pub mod double_series;
pub mod faa_di_bruno;
pub mod field;
pub mod parse;
pub mod power_series;
pub mod scenario;
pub mod series;
pub mod valuation;

pub use field::{rat, rat_int, Expansion, FieldElement, FieldError, Rat};
pub use series::{ApproxElement, ConvergenceVerdict, SampleConfig, TermStream};
pub use valuation::Valuation;
