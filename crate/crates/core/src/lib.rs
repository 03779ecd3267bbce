//! Exact stability invariants of pairs of representation vectors along arcs.
//!
//! An arc is an invertible matrix over the field of formal Laurent series
//! ℂ((z)). Everything in the exact core is computed over ℚ(i) with explicit
//! truncation tracking; the [`slope`] module cross-checks the exact
//! invariants against floating-point log-norm asymptotics.

pub mod arcs;
pub mod error;
pub mod gaussian;
pub mod laurent;
pub mod literal;
pub mod lp;
pub mod parallel;
pub mod random;
pub mod repr;
pub mod slope;
pub mod stability;

pub use arcs::{is_equivalent, ArcMatrix, EquivalenceConvention, SnfDecomposition};
pub use error::{Error, Result};
pub use gaussian::GaussianRational;
pub use laurent::LaurentSeries;
pub use repr::{RepExpr, RepVector, TorusData, WeightTable};
pub use stability::{NamedArc, Pair, SlotOrder};
