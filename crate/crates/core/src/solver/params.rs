use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::mittag_leffler::mittag_leffler;
use crate::besov::EstimateReport;
use crate::error::{domain, Result};
use crate::spectral::TimeGrid;

/// Regularity and iteration parameters of a Picard solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub alpha: f64,
    pub beta: f64,
    /// Weight of the stopping metric `d_ρ`.
    pub rho: f64,
    /// Radius of the ball the iterates are expected to stay in.
    pub ball_radius: f64,
    pub time_grid: TimeGrid,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// Require `v0` to be a nonnegative probability density.
    pub density_mode: bool,
    /// Working constant `c` of the analytic bounds, see [`WorkingConstant`].
    pub working_constant: f64,
}

/// Checks `0 < β < 1/2` and `α ∈ (β, 1−β)`.
pub fn check_regularity(alpha: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 0.5) {
        return domain(format!("β must lie in (0, 1/2), got {beta}"));
    }
    if !(alpha > beta && alpha < 1.0 - beta) {
        return domain(format!("α ∈ (β, 1−β) violated: α = {alpha}, β = {beta}"));
    }
    Ok(())
}

impl SolverParams {
    pub fn new(alpha: f64, beta: f64, time_grid: TimeGrid) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            rho: 0.0,
            ball_radius: f64::INFINITY,
            time_grid,
            picard_tol: 1e-8,
            picard_max_iters: 200,
            density_mode: false,
            working_constant: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `θ = (1 − α − β)/2`.
    pub fn theta(&self) -> f64 {
        (1.0 - self.alpha - self.beta) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        check_regularity(self.alpha, self.beta)?;
        if !(self.rho >= 0.0) {
            return domain(format!("ρ must be >= 0, got {}", self.rho));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iters == 0 {
            return domain("Picard tolerance must be positive and the iteration cap nonzero");
        }
        if !(self.working_constant >= 1.0) {
            return domain(format!("working constant must be >= 1, got {}", self.working_constant));
        }
        Ok(())
    }
}

/// The working constant `c` of the analytic bounds. Fitted from the Schauder
/// harness and never taken below 1, the exact constant of `‖P_t f‖_γ ≤ c‖f‖_γ`
/// on our blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingConstant(pub f64);

impl WorkingConstant {
    pub fn from_schauder(report: &EstimateReport) -> Self {
        Self(report.worst_ratio.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionParams {
    pub rho0: f64,
    pub m_star: f64,
    pub theta: f64,
    pub constant: f64,
}

/// `θ = (1−α−β)/2`; `ρ₀` is the smallest power of two with
/// `2c‖b‖Γ(θ)ρ₀^{−θ} ≤ 1/2`; `M_* = max(q/(1 − 2q), ‖v0‖_α)` with `q = c‖b‖Γ(θ)ρ₀^{−θ}`.
pub fn pick_contraction_params(
    b_norm: f64,
    alpha: f64,
    beta: f64,
    v0_norm: f64,
    c: WorkingConstant,
) -> Result<ContractionParams> {
    check_regularity(alpha, beta)?;
    if !(b_norm >= 0.0) || !(v0_norm >= 0.0) {
        return domain("norms must be nonnegative");
    }
    let theta = (1.0 - alpha - beta) / 2.0;
    let k = c.0 * b_norm * gamma(theta);
    let rho0 = if k == 0.0 {
        1.0
    } else {
        // 2kρ^{-θ} ≤ 1/2  ⇔  ρ ≥ (4k)^{1/θ}
        let needed_log2 = (4.0 * k).log2() / theta;
        let mut e = needed_log2.ceil().max(0.0);
        while 2.0 * k * (-theta * e).exp2() > 0.5 {
            e += 1.0;
        }
        while e > 0.0 && 2.0 * k * (-theta * (e - 1.0)).exp2() <= 0.5 {
            e -= 1.0;
        }
        e.exp2()
    };
    let q = k * rho0.powf(-theta);
    let m_star = (q / (1.0 - 2.0 * q)).max(v0_norm);
    Ok(ContractionParams { rho0, m_star, theta, constant: c.0 })
}

/// `K = [c‖v0‖_α + c‖b‖T] · E_η(c‖b‖Γ(1)T)`, `η = (1−α−β)/2`.
pub fn apriori_bound(
    v0_norm: f64,
    b_norm: f64,
    alpha: f64,
    beta: f64,
    horizon: f64,
    c: WorkingConstant,
) -> Result<f64> {
    check_regularity(alpha, beta)?;
    let eta = (1.0 - alpha - beta) / 2.0;
    let c = c.0;
    Ok((c * v0_norm + c * b_norm * horizon) * mittag_leffler(eta, c * b_norm * horizon)?)
}
