//! Fields on the periodic box and the operators acting on them.

mod fft;
mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{FieldLike, SpectralField, VectorField, SOLENOIDAL_TOL};
pub use grid::{Grid, ModeTable, MAX_DIM};
pub use ops::{
    advect, advection_integral, divergence, fractional_laplacian, gradient, inner, inner_product,
    leray_project, partial, product, product_padding, sup_norm, symbol, transform_forward,
    transform_inverse, triple_integral, triple_padding, Advected,
};
