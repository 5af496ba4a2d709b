//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use sfp_core::particles::gaussian_density;
use sfp_core::{mollify, Drift, Grid, MollifiedDrift, SpectralField, TimeMode};

/// Wrapped Gaussian density and a mollified rough drift on a 1D grid of `n` points.
pub fn rough_instance(n: usize, seed: u64) -> (SpectralField, MollifiedDrift) {
    let grid = Grid::new(1, n, 2.0 * PI).expect("valid grid");
    let v0 = gaussian_density(grid, [PI, 0.0], 0.25).expect("positive variance");
    let b = Drift::synthesize(grid, -0.2, seed, TimeMode::Static).expect("regularity in range");
    (v0, mollify(&b, 64).expect("positive index"))
}
