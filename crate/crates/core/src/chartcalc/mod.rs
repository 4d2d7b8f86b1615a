//! Charts, jets, fields and the classical vector-calculus operators.

mod chart;
mod field;
mod jet;
mod ops;

pub use chart::{Chart, UnitMode, UnitSystem};
pub use field::{Curve, Patch, ScalarField, VectorField};
pub use jet::{Jet, Scalar, MAX_VARS};
pub use ops::{
    curl, curl_field, divergence, divergence_field, gradient, gradient_field, laplacian,
};
