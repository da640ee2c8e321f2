//! Penalty functions, entropy bumps, Young functions and the comparison lemmas
//! relating Orlicz, Lorentz and entropy bumps.

pub mod entropy;
pub mod integral;
pub mod orlicz;
pub mod penalty;
pub mod young;

pub use entropy::{bump_supremum, entropy_bump, BumpMode, BumpSup};
pub use integral::Bracket;
pub use orlicz::{alpha_from_psi, alpha_from_young, luxemburg_norm, min_young, orlicz_to_lorentz, young_llogl_floor};
pub use penalty::{CAlpha, Convention, PenaltyFn};
pub use young::YoungFn;
