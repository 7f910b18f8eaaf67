//! Random access transport capacity of multihop wireless networks.
//!
//! A packet travels a distance `R` over `M` equidistant hops through a Poisson
//! field of interferers with Rayleigh fading. Every hop retransmits until it
//! succeeds, and the whole route has a budget of `A` attempts. The modules
//! compute:
//!
//! - [`analytic`]: the closed-form upper bound, the optimal hop count and
//!   the dense-network scaling constant.
//! - [`finite`]: the exact capacity for a finite budget from Pascal/binomial tails.
//! - [`montecarlo`]: a direct simulation of the SINR model used to validate both.
//! - [`verify`]: grid checks of the identities and solvers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod finite;
pub mod model;
pub mod montecarlo;
pub mod verify;

pub use analytic::{CapacityMethod, CapacityResult, HopPlan, MStarMethod, MStarSolution, SolveMode};
pub use error::{Error, Result};
pub use finite::{FiniteCapacityResult, PascalModel};
pub use model::{kappa_alpha, DerivedConstants, NetworkParams, RateLogBase};
pub use montecarlo::{SimConfig, SimEstimate};
