//! Cone-ordered steepest descent and lower-envelope regularity analysis.
//!
//! * [`cone`]: cones given by finite dual generating sets, their gauge and orders.
//! * [`minnorm`]: minimum-norm point of a convex hull (the dual of the
//!   steepest-descent subproblem).
//! * [`envelope`]: parameterized fiber families, lower envelopes, and
//!   sampled semicontinuity / c-regularity analysis.
//! * [`objective`] and [`descent`]: smooth vector objectives, steepest descent
//!   directions with respect to a cone family, criticality and line search.
//! * [`harness`]: problem files, bundled fixtures, and report generation.

pub mod cone;
pub mod descent;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod minnorm;
pub mod objective;

pub use cone::{orthant_generators, GeneratorSet, OrderTolerance};
pub use error::{Error, Result};
pub use minnorm::{dist_to_hull, min_norm_point, MinNormResult, SimplexWeights};
