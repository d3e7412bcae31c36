//! Weighted coverage objectives over state–action occupancy measures of
//! finite MDPs, and the machinery to optimize them.
//!
//! The objective family `U_rho` interpolates between `mu`-weighted log coverage
//! (`rho = 1`, equivalent to KL matching against normalized `mu`) and the
//! worst-case coverage ratio `max mu / d` (`rho -> infinity`). The crate
//! provides
//!
//! * [`mdp`]: models, policies, validation, stationary distributions, simulation;
//! * [`occupancy`]: exact and empirical occupancy measures;
//! * [`objective`]: `U_rho`, its gradient, smoothness constant and limit quantities;
//! * [`polytope`]: exact LPs over the restricted occupancy polytope, including
//!   the minimax coverage LP;
//! * [`explorer`]: the episodic Frank–Wolfe explorer and its full-information
//!   comparator.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the LP layer
//! is generic over [`Field`] and also runs on exact rationals. The aliases
//! below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting comparisons

pub mod error;
pub mod explorer;
pub mod mdp;
pub mod model_file;
pub mod objective;
pub mod occupancy;
pub mod polytope;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use scalar::{Field, Scalar};

pub use num_rational::BigRational;

pub type MdpModelF64 = mdp::MdpModel<f64>;
pub type MdpModelF32 = mdp::MdpModel<f32>;
pub type PolicyF64 = mdp::Policy<f64>;
pub type OccupancyMeasureF64 = occupancy::OccupancyMeasure<f64>;
pub type CoverageWeightsF64 = objective::CoverageWeights<f64>;
pub type CoverageWeightsF32 = objective::CoverageWeights<f32>;
pub type RhoObjectiveF64 = objective::RhoObjective<f64>;
pub type RhoObjectiveF32 = objective::RhoObjective<f32>;
pub type OccupancyPolytopeF64 = polytope::OccupancyPolytope<f64>;
pub type ExactPolytope = polytope::OccupancyPolytope<BigRational>;
pub type ExplorationConfigF64 = explorer::ExplorationConfig<f64>;
pub type ExplorationTraceF64 = explorer::ExplorationTrace<f64>;
