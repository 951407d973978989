//! Pseudo-spectral laboratory for the non-resistive fractional MHD system
//! on the periodic torus.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod random;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Grid, SpectralField, VectorField};
pub mod checks;
pub mod littlewood_paley;
pub mod norms;
pub mod scheme;
pub mod uniqueness;
