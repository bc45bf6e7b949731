//! Dynamics of a Josephson junction described as an open quantum system.
//!
//! The reduced model has three real degrees of freedom, the voltage `v` and
//! the coherence `zeta = i_S + i i_J`, driven by a bias current `i_tot` and
//! controlled by a single coupling `alpha`. The crate provides the stationary
//! characteristic, linear stability, time integration, trajectory analysis
//! and radiation estimates.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod characteristic;
pub mod cubic;
pub mod error;
pub mod integrate;
pub mod model;
pub mod radiation;
pub mod stability;

pub use error::{Error, Result};
pub use model::{DimensionlessParams, MdmState, PhysicalConstants, PhysicalParams, Scales, State3};
pub use num_complex::Complex64;
