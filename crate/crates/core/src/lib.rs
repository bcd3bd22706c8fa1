//! Flat superdeterminants at desk scale: graded complexes and their
//! characteristic operators, spectral zeta regularization, twisted cochain
//! complexes, discrete Hodge theory, heat-kernel parametrices on the circle
//! and Ruelle zeta functions of toy hyperbolic systems.

pub mod error;
pub mod graded;
pub mod hodge;
pub mod linalg;
pub mod parametrix;
pub mod quadrature;
pub mod report;
pub mod ruelle;
pub mod special;
pub mod twisted;
pub mod zeta;

pub use error::{Error, Result};
