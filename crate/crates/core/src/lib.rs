//! Numerical toolkit for singular McKean-Vlasov / Fokker-Planck problems with
//! distributional drifts on periodic grids.
//!
//! - [`spectral`]: grids, fields, exact heat semigroup, spectral calculus, Duhamel steps.
//! - [`besov`]: Littlewood-Paley blocks, Besov and Hölder norms, estimate harness.
//! - [`drift`]: random drifts of prescribed negative regularity and their mollifications.
//! - [`solver`]: mild-formulation Picard solver, a-priori bounds, weak residuals, stability.
//! - [`particles`]: frozen and moderately interacting particle systems, KDE, law comparison.

pub mod besov;
pub mod drift;
mod error;
pub mod fit;
pub mod particles;
pub mod solver;
pub mod spectral;

pub use besov::{besov_norm, decompose, holder_norm, BesovProfile, BlockDecomposition, Partition};
pub use drift::{mollification_rate, mollify, Drift, DriftField, MollifiedDrift, TimeMode};
pub use error::{Error, Result};
pub use spectral::{Grid, SpectralField, TimeGrid};
