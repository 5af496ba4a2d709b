use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{block_sups, norm, profile_from_sups};
use crate::drift::gaussian_series;
use crate::error::{domain, Result};
use crate::fit;
use crate::spectral::{gradient, heat_semigroup, pointwise_product, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// `‖P_t f‖_{γ+2θ} ≤ c t^{−θ} ‖f‖_γ`
    Schauder,
    /// `‖P_t f − f‖_γ ≤ c t^θ ‖f‖_{γ+2θ}`
    SchauderDiff,
    /// `‖∇g‖_γ ≤ c ‖g‖_{γ+1}`
    Bernstein,
    /// `‖∇P_t g‖_{γ+2θ−1} ≤ c t^{−θ} ‖g‖_γ`
    GradSemigroup,
    /// `‖f g‖_{−β} ≤ c ‖f‖_α ‖g‖_{−β}`
    Bony,
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 5] = [
        EstimateKind::Schauder,
        EstimateKind::SchauderDiff,
        EstimateKind::Bernstein,
        EstimateKind::GradSemigroup,
        EstimateKind::Bony,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimateKind::Schauder => "schauder",
            EstimateKind::SchauderDiff => "schauder_diff",
            EstimateKind::Bernstein => "bernstein",
            EstimateKind::GradSemigroup => "grad_semigroup",
            EstimateKind::Bony => "bony",
        }
    }

    fn uses_time(&self) -> bool {
        matches!(self, EstimateKind::Schauder | EstimateKind::SchauderDiff | EstimateKind::GradSemigroup)
    }
}

/// Sweep and inequality parameters. The sweep is the product `resolutions × times`
/// (times are ignored by the time-free inequalities).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateParams {
    pub kind: EstimateKind,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub dim: usize,
    pub length: f64,
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub times: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Allowed `(max − min)/max` of the per-point fitted constants.
    #[serde(default = "default_tolerance")]
    pub stability_tolerance: f64,
}

fn default_tolerance() -> f64 {
    0.25
}

impl EstimateParams {
    /// Parameter set used by the verification suites for each inequality.
    pub fn default_for(kind: EstimateKind) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let base = EstimateParams {
            kind,
            gamma: 0.0,
            theta: 0.0,
            alpha: 0.0,
            beta: 0.0,
            dim: 1,
            length: two_pi,
            resolutions: vec![512],
            times: vec![1e-3, 1.78e-3, 3.16e-3, 5.62e-3, 1e-2],
            trials: 8,
            seed: 2024,
            stability_tolerance: default_tolerance(),
        };
        match kind {
            EstimateKind::Schauder => EstimateParams { gamma: -0.2, theta: 0.5, ..base },
            EstimateKind::SchauderDiff => EstimateParams { gamma: -0.4, theta: 0.1, ..base },
            EstimateKind::GradSemigroup => EstimateParams { gamma: -0.2, theta: 0.5, ..base },
            EstimateKind::Bernstein => {
                EstimateParams { gamma: -0.8, resolutions: vec![128, 256, 512], times: vec![], ..base }
            }
            EstimateKind::Bony => {
                EstimateParams { alpha: 0.4, beta: 0.2, resolutions: vec![128, 256, 512], times: vec![], ..base }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let in_range = |g: f64| (super::GAMMA_RANGE.0..=super::GAMMA_RANGE.1).contains(&g);
        if self.trials == 0 || self.resolutions.is_empty() {
            return domain("estimate harness needs at least one trial and one resolution");
        }
        if self.kind.uses_time() && (self.times.is_empty() || self.times.iter().any(|&t| !(t > 0.0))) {
            return domain("time sweep must be non-empty with t > 0");
        }
        match self.kind {
            EstimateKind::Schauder => {
                if self.theta < 0.0 || !in_range(self.gamma) || !in_range(self.gamma + 2.0 * self.theta) {
                    return domain(format!(
                        "schauder needs θ ≥ 0 and γ, γ+2θ in range (γ={}, θ={})",
                        self.gamma, self.theta
                    ));
                }
            }
            EstimateKind::SchauderDiff | EstimateKind::GradSemigroup => {
                if !(self.theta > 0.0 && self.theta < 1.0) {
                    return domain(format!("θ must lie in (0,1), got {}", self.theta));
                }
                let top = if self.kind == EstimateKind::GradSemigroup {
                    self.gamma + 2.0 * self.theta - 1.0
                } else {
                    self.gamma + 2.0 * self.theta
                };
                if !in_range(self.gamma) || !in_range(top) {
                    return domain("Besov exponents outside supported range");
                }
            }
            EstimateKind::Bernstein => {
                if !in_range(self.gamma) || !in_range(self.gamma + 1.0) {
                    return domain("bernstein needs γ and γ+1 in range");
                }
            }
            EstimateKind::Bony => {
                if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha - self.beta > 0.0) {
                    return domain(format!("bony needs α, β > 0 and α − β > 0 (α={}, β={})", self.alpha, self.beta));
                }
                if !in_range(self.alpha) || !in_range(-self.beta) {
                    return domain("Besov exponents outside supported range");
                }
            }
        }
        Ok(())
    }

    fn sweep(&self) -> Vec<(usize, Option<f64>)> {
        let mut points = Vec::new();
        for &n in &self.resolutions {
            if self.kind.uses_time() {
                points.extend(self.times.iter().map(|&t| (n, Some(t))));
            } else {
                points.push((n, None));
            }
        }
        points
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub seed: u64,
    pub n: usize,
    pub t: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub params: EstimateParams,
    pub rows: Vec<EstimateRow>,
    /// Sup over trials of the ratio at each sweep point, in sweep order.
    pub point_constants: Vec<f64>,
    /// Median of the per-point constants.
    pub fitted_constant: f64,
    pub worst_ratio: f64,
    /// `(max − min)/max` of the per-point constants.
    pub variation: f64,
    pub pass: bool,
}

impl EstimateReport {
    pub fn parameter_string(&self) -> String {
        let p = &self.params;
        match p.kind {
            EstimateKind::Bony => format!("alpha={};beta={}", p.alpha, p.beta),
            EstimateKind::Bernstein => format!("gamma={}", p.gamma),
            _ => format!("gamma={};theta={}", p.gamma, p.theta),
        }
    }

    /// `kind,seed,parameters,lhs,rhs,ratio` rows followed by a `# summary` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,seed,parameters,lhs,rhs,ratio\n");
        let base = self.parameter_string();
        for r in &self.rows {
            let t = r.t.map(|t| format!(";t={t}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{};N={}{},{:.17e},{:.17e},{:.17e}",
                self.params.kind.name(),
                r.seed,
                base,
                r.n,
                t,
                r.lhs,
                r.rhs,
                r.ratio
            );
        }
        let _ = writeln!(
            out,
            "# summary,{},fitted_constant={:.6e},worst_ratio={:.6e},variation={:.4},pass={}",
            self.params.kind.name(),
            self.fitted_constant,
            self.worst_ratio,
            self.variation,
            self.pass
        );
        out
    }
}

fn trial(p: &EstimateParams, grid: Grid, t: Option<f64>, seed: u64) -> Result<(f64, f64)> {
    let field = |s: f64, key: u64| gaussian_series(grid, s, seed.wrapping_mul(2).wrapping_add(key), 1, 1.0);
    let t = t.unwrap_or(0.0);
    Ok(match p.kind {
        EstimateKind::Schauder => {
            let f = field(p.gamma, 0);
            let lhs = norm(&heat_semigroup(&f, t)?, p.gamma + 2.0 * p.theta)? * t.powf(p.theta);
            (lhs, norm(&f, p.gamma)?)
        }
        EstimateKind::SchauderDiff => {
            let f = field(p.gamma + 2.0 * p.theta, 0);
            let lhs = norm(&heat_semigroup(&f, t)?.sub(&f)?, p.gamma)?;
            (lhs, t.powf(p.theta) * norm(&f, p.gamma + 2.0 * p.theta)?)
        }
        EstimateKind::Bernstein => {
            let g = field(p.gamma + 1.0, 0);
            (norm(&gradient(&g)?, p.gamma)?, norm(&g, p.gamma + 1.0)?)
        }
        EstimateKind::GradSemigroup => {
            let g = field(p.gamma, 0);
            let lhs = norm(&gradient(&heat_semigroup(&g, t)?)?, p.gamma + 2.0 * p.theta - 1.0)? * t.powf(p.theta);
            (lhs, norm(&g, p.gamma)?)
        }
        EstimateKind::Bony => {
            let f = field(p.alpha, 0);
            let g = field(-p.beta, 1);
            let fg = pointwise_product(&f, &g)?;
            let lhs = norm(&fg, -p.beta)?;
            let sups_g = block_sups(&g);
            let rhs = norm(&f, p.alpha)? * profile_from_sups(&sups_g, -p.beta)?.norm;
            (lhs, rhs)
        }
    })
}

/// Draws `trials` random fields per sweep point, evaluates both sides of the
/// chosen inequality and checks that the fitted constant is stable over the sweep.
pub fn estimate_harness(params: &EstimateParams) -> Result<EstimateReport> {
    params.validate()?;
    let mut grids = Vec::new();
    for &n in &params.resolutions {
        grids.push((n, Grid::new(params.dim, n, params.length)?));
    }
    let points = params.sweep();
    let jobs: Vec<(usize, Option<f64>, u64)> =
        points.iter().flat_map(|&(n, t)| (0..params.trials as u64).map(move |k| (n, t, params.seed + k))).collect();
    let rows: Vec<EstimateRow> = jobs
        .par_iter()
        .map(|&(n, t, seed)| {
            let grid = grids.iter().find(|g| g.0 == n).expect("grid built above").1;
            let (lhs, rhs) = trial(params, grid, t, seed)?;
            Ok(EstimateRow { seed, n, t, lhs, rhs, ratio: lhs / rhs })
        })
        .collect::<Result<_>>()?;
    let point_constants: Vec<f64> =
        rows.chunks(params.trials).map(|c| c.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)).collect();
    let worst_ratio = point_constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variation = fit::relative_spread(&point_constants);
    let pass = point_constants.iter().all(|c| c.is_finite() && *c > 0.0) && variation <= params.stability_tolerance;
    Ok(EstimateReport {
        params: params.clone(),
        rows,
        fitted_constant: fit::median(&point_constants),
        point_constants,
        worst_ratio,
        variation,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bony_constraint_is_checked() {
        let mut p = EstimateParams::default_for(EstimateKind::Bony);
        p.alpha = 0.1;
        p.beta = 0.2;
        assert!(matches!(estimate_harness(&p), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn theta_range_is_checked() {
        let mut p = EstimateParams::default_for(EstimateKind::GradSemigroup);
        p.theta = 1.2;
        assert!(estimate_harness(&p).is_err());
    }

    #[test]
    fn csv_has_summary() {
        let mut p = EstimateParams::default_for(EstimateKind::Bernstein);
        p.trials = 2;
        p.resolutions = vec![64];
        let r = estimate_harness(&p).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 + 1);
        assert!(csv.lines().last().unwrap().starts_with("# summary,bernstein"));
    }
}
