//! Monotone density estimation by the Grenander estimator, together with the
//! numerical machinery around its law of the iterated logarithm: the
//! switching relation, Chernoff-distribution samplers, and the Strassen-set
//! variational problem whose value is `(3/4)^(1/3)`.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chernoff;
pub mod error;
pub mod exact;
pub mod grenander;
pub mod harness;
pub mod majorant;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod strassen;
pub mod switching;

pub use error::{Error, Result};
pub use majorant::{
    brute_force_lcm, greatest_convex_minorant, least_concave_majorant, left_derivative_step,
    ConvexMinorant, HullPointSet, Ordinates, PiecewiseLinearConcave,
};
pub use sample::{evaluate_step, Continuity, EmpiricalCdf, SortedSample, StepFunction};
