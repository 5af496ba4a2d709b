use rayon::prelude::*;

use super::mild::{heat_flow, mild_map_j, Trajectory};
use super::nonlinearity::Nonlinearity;
use super::params::{apriori_bound, SolverParams, WorkingConstant};
use super::weak::{first_test_modes, weak_residual, WeakResidualRow};
use crate::besov;
use crate::drift::DriftField;
use crate::error::{domain, usage, Error, Result};
use crate::fit;
use crate::spectral::SpectralField;

/// Per-node differences below this multiple of the solution scale are
/// indistinguishable from round-off and are treated as zero.
const ROUNDOFF_FLOOR: f64 = 1e-11;

/// Output of a converged Picard solve.
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// The mild solution `v = w* + P_·v0`.
    pub v: Trajectory,
    /// Fixed point `w*` of the shifted map `J`.
    pub w: Trajectory,
    pub params: SolverParams,
    pub nonlinearity: Nonlinearity,
    /// `d_ρ(w_{m+1}, w_m)` at `ρ = params.rho`, one entry per iteration.
    pub distances: Vec<f64>,
    /// `‖w_{m+1}(t_k) − w_m(t_k)‖_α` per iteration and node.
    pub diff_norms: Vec<Vec<f64>>,
    /// Median of successive distance ratios at `ρ = params.rho`.
    pub contraction_factor: f64,
    /// `d_ρ(J(w*), w*)`.
    pub fixed_point_residual: f64,
    pub v0_norm: f64,
    /// `‖b‖_{C_T C^{−β}}`.
    pub b_norm: f64,
    /// `sup_t ‖v(t)‖_α`.
    pub sup_norm: f64,
    /// A-priori bound `K`, absent when its Mittag-Leffler argument is out of range.
    pub apriori_k: Option<f64>,
    pub residuals: Vec<WeakResidualRow>,
}

impl SolverResult {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }

    fn floor(&self) -> f64 {
        ROUNDOFF_FLOOR * self.sup_norm.max(1.0)
    }

    /// `ln d_ρ(w_{m+1}, w_m)` for every iteration, `−∞` when the difference is at round-off level.
    pub fn log_distances_at(&self, rho: f64) -> Vec<f64> {
        let times = self.params.time_grid.nodes();
        let floor = self.floor();
        self.diff_norms.iter().map(|n| log_weighted(n, &times, rho, floor)).collect()
    }

    /// Successive ratios `d_ρ(w_{m+1}, w_m)/d_ρ(w_m, w_{m−1})` as `(m, ratio)`,
    /// skipping pairs whose distances are at round-off level.
    pub fn ratios_at(&self, rho: f64) -> Vec<(usize, f64)> {
        let logs = self.log_distances_at(rho);
        logs.windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].is_finite() && w[1].is_finite())
            .map(|(i, w)| (i + 1, (w[1] - w[0]).exp()))
            .collect()
    }

    /// Largest `|mean v(t_k) − mean v0|`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.v.at(0).mean(0);
        self.v.nodes().iter().map(|f| (f.mean(0) - m0).abs()).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.v.nodes().iter().map(|f| f.min_value()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Iteration history as CSV.
    pub fn distances_csv(&self) -> String {
        let mut out = String::from("iteration,distance\n");
        for (i, d) in self.distances.iter().enumerate() {
            out.push_str(&format!("{},{:.6e}\n", i + 1, d));
        }
        out
    }

    /// Per-node Besov norms of `v` as CSV.
    pub fn norms_csv(&self) -> Result<String> {
        let mut out = String::from("time,besov_norm,mean,min\n");
        for (t, f) in self.params.time_grid.nodes().iter().zip(self.v.nodes()) {
            out.push_str(&format!(
                "{:.6e},{:.6e},{:.15e},{:.6e}\n",
                t,
                besov::norm(f, self.params.alpha)?,
                f.mean(0),
                f.min_value()
            ));
        }
        Ok(out)
    }
}

/// `ln max_k e^{−ρ t_k} n_k`, with entries below `floor` ignored.
fn log_weighted(norms: &[f64], times: &[f64], rho: f64, floor: f64) -> f64 {
    norms
        .iter()
        .zip(times)
        .filter(|(n, _)| **n > floor)
        .map(|(n, t)| n.ln() - rho * t)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn node_norms(a: &Trajectory, b: &Trajectory, alpha: f64) -> Result<Vec<f64>> {
    let diff = a.sub(b)?;
    diff.nodes().par_iter().map(|f| besov::norm(f, alpha)).collect()
}

/// `d_ρ(w, z) = max_k e^{−ρ t_k} ‖w(t_k) − z(t_k)‖_α`.
pub fn weighted_distance(w: &Trajectory, z: &Trajectory, rho: f64, alpha: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return domain(format!("ρ must be >= 0, got {rho}"));
    }
    let norms = node_norms(w, z, alpha)?;
    let times = w.time_grid().nodes();
    Ok(log_weighted(&norms, &times, rho, 0.0).exp())
}

fn check_density(v0: &SpectralField) -> Result<()> {
    let min = v0.min_value();
    let mass = v0.integral(0);
    if min < -1e-12 || (mass - 1.0).abs() > 1e-10 {
        return domain(format!("density mode needs a nonnegative unit-mass v0 (min {min:.3e}, mass {mass:.12})"));
    }
    Ok(())
}

/// Picard iteration `w_{m+1} = J(w_m)` from `w_0 = 0`.
pub fn solve_picard(
    v0: &SpectralField,
    b: &dyn DriftField,
    f: Nonlinearity,
    params: &SolverParams,
) -> Result<SolverResult> {
    let start = Trajectory::zeros(v0.grid(), params.time_grid);
    solve_picard_from(v0, b, f, params, start)
}

/// Picard iteration from a caller-supplied start `w_0`.
pub fn solve_picard_from(
    v0: &SpectralField,
    b: &dyn DriftField,
    f: Nonlinearity,
    params: &SolverParams,
    start: Trajectory,
) -> Result<SolverResult> {
    params.validate()?;
    if !v0.is_scalar() {
        return usage("initial datum must be scalar");
    }
    if start.time_grid() != params.time_grid || start.grid() != v0.grid() {
        return usage("initial iterate does not match the solver grids");
    }
    if params.density_mode {
        check_density(v0)?;
    }
    let times = params.time_grid.nodes();
    let flow = heat_flow(v0, params.time_grid)?;
    let mut w = start;
    let mut distances = Vec::new();
    let mut diff_norms = Vec::new();
    let mut converged = false;
    for _ in 0..params.picard_max_iters {
        let next = mild_map_j(&w, v0, b, f)?;
        let norms = node_norms(&next, &w, params.alpha)?;
        let d = log_weighted(&norms, &times, params.rho, 0.0).exp();
        distances.push(d);
        diff_norms.push(norms);
        w = next;
        if d <= params.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationFailure {
            iterations: distances.len(),
            last: *distances.last().unwrap_or(&f64::NAN),
            history: distances,
        });
    }
    let v = w.add(&flow)?;
    let fixed_point_residual = weighted_distance(&mild_map_j(&w, v0, b, f)?, &w, params.rho, params.alpha)?;
    let v0_norm = besov::norm(v0, params.alpha)?;
    let b_norm = b.sup_norm_in_time(-params.beta)?;
    let sup_norm = v
        .nodes()
        .par_iter()
        .map(|x| besov::norm(x, params.alpha))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let apriori_k = apriori_bound(
        v0_norm,
        b_norm,
        params.alpha,
        params.beta,
        params.time_grid.horizon(),
        WorkingConstant(params.working_constant),
    )
    .ok();
    let residuals = weak_residual(&v, b, f, &first_test_modes(v0.grid(), 5))?;
    let mut result = SolverResult {
        v,
        w,
        params: *params,
        nonlinearity: f,
        distances,
        diff_norms,
        contraction_factor: f64::NAN,
        fixed_point_residual,
        v0_norm,
        b_norm,
        sup_norm,
        apriori_k,
        residuals,
    };
    let ratios: Vec<f64> = result.ratios_at(params.rho).into_iter().map(|r| r.1).collect();
    result.contraction_factor = if ratios.is_empty() { 0.0 } else { fit::median(&ratios) };
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{Drift, TimeMode};
    use crate::spectral::{Grid, TimeGrid};
    use std::f64::consts::PI;

    fn bump(grid: Grid) -> SpectralField {
        let f = SpectralField::from_fn(grid, 1, |x, _| (-(x[0] - PI).powi(2) / 0.5).exp());
        let mass = f.integral(0);
        f.scale(1.0 / mass)
    }

    fn params(steps: usize) -> SolverParams {
        SolverParams::new(0.4, 0.2, TimeGrid::new(0.25, steps).unwrap()).unwrap()
    }

    #[test]
    fn zero_drift_converges_immediately() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let v0 = bump(grid);
        let res = solve_picard(&v0, &Drift::zero(grid), Nonlinearity::Arctan, &params(20)).unwrap();
        assert_eq!(res.iterations(), 1);
        let flow = heat_flow(&v0, res.params.time_grid).unwrap();
        assert!(res.v.sup_distance(&flow).unwrap() < 1e-15);
        assert_eq!(res.apriori_k, Some(res.v0_norm));
    }

    #[test]
    fn rough_drift_converges_and_conserves_mass() {
        let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
        let v0 = bump(grid);
        let b = Drift::synthesize(grid, -0.2, 11, TimeMode::Static).unwrap();
        let b = crate::drift::mollify(&b, 64).unwrap();
        let mut p = params(40);
        p.density_mode = true;
        let res = solve_picard(&v0, &b, Nonlinearity::Arctan, &p).unwrap();
        assert!(res.mass_drift() < 1e-12);
        assert!(res.fixed_point_residual <= 2.0 * p.picard_tol);
        assert!(res.contraction_factor < 1.0);
        assert!(res.v.at(0).sup_distance(&v0).unwrap() < 1e-15);
    }

    #[test]
    fn iteration_cap_reports_history() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let v0 = bump(grid);
        let b = Drift::synthesize(grid, -0.2, 3, TimeMode::Static).unwrap();
        let mut p = params(20);
        p.picard_max_iters = 2;
        p.picard_tol = 1e-30;
        match solve_picard(&v0, &b, Nonlinearity::Arctan, &p) {
            Err(Error::IterationFailure { iterations, history, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 2);
            }
            other => panic!("expected iteration failure, got {other:?}"),
        }
    }

    #[test]
    fn density_mode_rejects_signed_data() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let v0 = SpectralField::from_fn(grid, 1, |x, _| x[0].sin());
        let mut p = params(10);
        p.density_mode = true;
        assert!(matches!(solve_picard(&v0, &Drift::zero(grid), Nonlinearity::Arctan, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn weighted_distance_basics() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let tg = TimeGrid::new(0.25, 10).unwrap();
        let g = crate::drift::gaussian_series(grid, 1.0, 4, 1, 1.0);
        let w = Trajectory::new(tg, tg.nodes().iter().map(|&t| g.scale(t)).collect()).unwrap();
        let z = Trajectory::zeros(grid, tg);
        assert_eq!(weighted_distance(&w, &w, 3.0, 0.4).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for rho in [0.0, 1.0, 10.0, 100.0] {
            let d = weighted_distance(&w, &z, rho, 0.4).unwrap();
            assert!(d <= prev);
            prev = d;
        }
        let sup = w.nodes().iter().map(|f| besov::norm(f, 0.4).unwrap()).fold(0.0, f64::max);
        assert!((weighted_distance(&w, &z, 0.0, 0.4).unwrap() - sup).abs() < 1e-15);
        assert!(weighted_distance(&w, &z, -1.0, 0.4).is_err());
    }
}
