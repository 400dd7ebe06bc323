//! Equivariant and orbifold elliptic genera of smooth toric pairs, computed
//! by summing theta-function ratios over torus-fixed points.
//!
//! The crate is organised bottom-up:
//!
//! - [`theta`]: the Jacobi theta function and the per-weight factors built on it.
//! - [`lattice`] and [`fan`]: exact integer lattice algebra, smooth fans, star
//!   subdivisions, fan morphisms and the A-type ALE resolution fans.
//! - [`poly`] and [`pwpoly`]: exact multivariate polynomials and the ring of
//!   piecewise polynomial functions on a fan with its pushforward and pullback.
//! - [`genus`]: fixed-point sums for toric pairs, the chi_y genus and stringy
//!   Euler numbers.
//! - [`orbifold`]: orbifold genera of cyclic quotients of the plane and the
//!   comparison with their crepant resolutions.
//! - [`scenario`]: the JSON file formats.

pub mod error;
pub mod fan;
pub mod genus;
pub mod lattice;
pub mod orbifold;
pub mod poly;
pub mod pwpoly;
pub mod rational;
pub mod scenario;
pub mod theta;
pub use error::{Error, Result};
pub use fan::{ale_fan, DualFrame, Fan, FanMorphism, WeightSubstitution};
pub use genus::{Divisor, ToricPair, TorusSample};
pub use num_complex::Complex64;
pub use orbifold::{CyclicAction, OrbifoldFixedDatum};
pub use poly::{Poly, RationalFunctionValue};
pub use pwpoly::PiecewisePoly;
pub use rational::Rational;
pub use scenario::{DivisorFile, FanSource, Scenario};
pub use theta::{EvalContext, SL2Matrix, Truncation};
