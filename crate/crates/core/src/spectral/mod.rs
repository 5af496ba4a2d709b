//! Periodic-grid field arithmetic: exact heat semigroup, spectral derivatives,
//! dealiased products, the Duhamel integrator and field snapshot I/O.

pub mod fft;
mod field;
mod grid;
pub mod io;
mod ops;

pub use field::SpectralField;
pub use grid::{Grid, TimeGrid};
pub use ops::{
    divergence, duhamel_step, gradient, heat_semigroup, laplacian, pointwise_product, semigroup_div_commute_check,
};
pub(crate) use ops::{exponential_step, phi1};
