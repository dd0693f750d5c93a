//! Fair division of indivisible goods.
//!
//! Computes allocations that are simultaneously MXS (a relaxation of
//! proportionality) and EFL (a relaxation of envy-freeness) for monotone,
//! restricted-MMS-feasible valuations, and independently verifies a wide set
//! of fairness notions (EF1, α-EFX, α-MMS, GMMS, PMMS, ...) by brute-force
//! enumeration. All arithmetic is exact rational; no floating point enters
//! any feasibility decision.

pub mod envygraph;
pub mod error;
pub mod fairness;
pub mod instances;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
pub use model::{Bundle, GoodId, Instance, Valuation, ValuationKind};
pub use rational::Rat;
