//! Points, affine maps and closed convex sets of R^n.

mod linear;
mod set;

pub use linear::{checked_vector, complement_basis, project_onto_span, range_basis, vector, AffineMap, LinearMap, Vector};
pub(crate) use linear::all_finite;
pub(crate) use set::{block_mean, lift_blocks};
pub use set::{project_hyperbola_epigraph, AffineSubspace, ConvexSet, Sign};
