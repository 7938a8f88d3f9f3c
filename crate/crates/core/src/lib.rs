//! Numerical evaluation of densities, distribution and survivor functions of
//! linear combinations and differences of (non-central) chi-square random
//! variables, by deforming the Laplace-inversion line onto the branch cuts of
//! the integrand. The same machinery yields normalizing constants of the
//! Bingham family of directional distributions and a saddlepoint
//! approximation for cross-checking, plus independent oracles (vertical-line
//! inversion, Monte Carlo, convolution) used by the test and `check` suites.

pub mod error;
pub mod model;
pub mod quad;
pub mod integrand;
pub(crate) mod contour;
pub mod inversion;
pub mod difference;
pub mod directional;
pub mod spa;
pub mod oracles;
pub mod checks;

pub use error::{Error, Result};
pub use model::{BranchCutLayout, ChiSquareTerm, QuadraticFormSpec};
