//! Differential forms, gauge electromagnetism, geodesics and gauged quantum
//! evolution on coordinate charts, with numerical checks of the classical
//! identities.

pub mod bundle;
pub mod chartcalc;
pub mod error;
pub mod exterior;
pub mod maxwell;
pub mod mechanics;
pub mod geometry;
pub mod numerics;
pub mod quantum;
pub mod relativity;

pub use error::{Error, Result};
