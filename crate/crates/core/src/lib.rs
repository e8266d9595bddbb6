//! Forward-backward and Douglas-Rachford splitting for monotone inclusions,
//! with diagnostics for problems that have no solution.
//!
//! The crate is organised bottom-up:
//!
//! * [`convex`]: vectors, affine maps and a catalog of closed convex sets.
//! * [`operators`]: maximally monotone operators and their resolvents.
//! * [`splitting`]: the fixed-point maps and the iteration engine.
//! * [`displacement`]: minimal displacement vectors, the perturbed (normal)
//!   problem, affine closed forms and rate estimates.
//! * [`product_space`]: parallel splitting for sums of several operators.
//! * [`scenarios`]: worked examples with independent reference values.
//! * [`cli`]: the config-driven command-line front end.

pub mod cli;
pub mod convex;
pub mod displacement;
pub mod error;
pub mod operators;
pub mod product_space;
pub mod scenarios;
mod serde_util;
pub mod splitting;
pub mod tolerance;

pub use convex::{checked_vector, vector, AffineMap, AffineSubspace, ConvexSet, LinearMap, Sign, Vector};
pub use error::{Error, Result};
pub use operators::MonotoneOp;
pub use splitting::{FixedPointMap, IterationTrace, SplitProblem};
