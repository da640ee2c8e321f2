//! Verification laboratory for entropy-bump two-weight inequalities on finite
//! non-homogeneous dyadic models.

pub mod bellman;
pub mod bumps;
pub mod error;
pub mod functionals;
pub mod model;
pub mod operators;
pub mod random;
pub mod sharpness;
pub mod stopping;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use model::{AtomId, DyadicModel, Weight};

#[cfg(test)]
mod tests;
