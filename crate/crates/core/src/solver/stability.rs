use serde::Serialize;

use super::nonlinearity::Nonlinearity;
use super::params::SolverParams;
use super::picard::{solve_picard, SolverResult};
use crate::besov;
use crate::drift::DriftField;
use crate::error::{usage, Result};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// `sup_t ‖v¹(t) − v²(t)‖_α`.
    pub distance: f64,
    /// `sup_t ‖b¹(t) − b²(t)‖_{−β}` over the time nodes.
    pub drift_distance: f64,
    /// `distance / drift_distance`, absent when the drifts coincide.
    pub ratio: Option<f64>,
}

/// Solves both instances and compares solutions against drifts.
pub fn stability_in_b(
    v0: &SpectralField,
    b1: &dyn DriftField,
    b2: &dyn DriftField,
    f: Nonlinearity,
    params: &SolverParams,
) -> Result<(StabilityReport, SolverResult, SolverResult)> {
    if b1.grid() != b2.grid() {
        return usage("drifts must share one grid");
    }
    let (r1, r2) = rayon::join(|| solve_picard(v0, b1, f, params), || solve_picard(v0, b2, f, params));
    let (r1, r2) = (r1?, r2?);
    let distance =
        r1.v.sub(&r2.v)?
            .nodes()
            .iter()
            .try_fold(0.0_f64, |m, d| Ok::<_, crate::Error>(m.max(besov::norm(d, params.alpha)?)))?;
    let drift_distance = params.time_grid.nodes().iter().try_fold(0.0_f64, |m, &t| {
        Ok::<_, crate::Error>(m.max(besov::norm(&b1.at(t).sub(&b2.at(t))?, -params.beta)?))
    })?;
    let ratio = (drift_distance > 0.0).then(|| distance / drift_distance);
    Ok((StabilityReport { distance, drift_distance, ratio }, r1, r2))
}
