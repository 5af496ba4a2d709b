use rayon::prelude::*;

use super::nonlinearity::Nonlinearity;
use crate::drift::DriftField;
use crate::error::{usage, Result};
use crate::spectral::{
    divergence, exponential_step, heat_semigroup, phi1, pointwise_product, Grid, SpectralField, TimeGrid,
};

/// Scalar fields sampled at every node of a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    time_grid: TimeGrid,
    nodes: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(time_grid: TimeGrid, nodes: Vec<SpectralField>) -> Result<Self> {
        if nodes.len() != time_grid.steps() + 1 {
            return usage(format!("trajectory has {} nodes, time grid needs {}", nodes.len(), time_grid.steps() + 1));
        }
        let grid = nodes[0].grid();
        let comps = nodes[0].components();
        if nodes.iter().any(|f| f.grid() != grid || f.components() != comps) {
            return usage("trajectory nodes live on different grids");
        }
        Ok(Self { time_grid, nodes })
    }

    pub fn zeros(grid: Grid, time_grid: TimeGrid) -> Self {
        let zero = SpectralField::zeros(grid, 1);
        Self { time_grid, nodes: vec![zero; time_grid.steps() + 1] }
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time_grid
    }

    pub fn grid(&self) -> Grid {
        self.nodes[0].grid()
    }

    pub fn nodes(&self) -> &[SpectralField] {
        &self.nodes
    }

    pub fn at(&self, k: usize) -> &SpectralField {
        &self.nodes[k]
    }

    pub fn last(&self) -> &SpectralField {
        self.nodes.last().expect("trajectories are never empty")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.time_grid != other.time_grid || self.grid() != other.grid() {
            return usage("trajectories use different space or time grids");
        }
        Ok(())
    }

    pub fn add(&self, other: &Trajectory) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Self { time_grid: self.time_grid, nodes })
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Self { time_grid: self.time_grid, nodes })
    }

    /// Largest sup-norm distance over the nodes.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        self.check_compatible(other)?;
        self.nodes.iter().zip(&other.nodes).try_fold(0.0_f64, |m, (a, b)| Ok(m.max(a.sup_distance(b)?)))
    }
}

/// `t_k ↦ P_{t_k} v0`.
pub fn heat_flow(v0: &SpectralField, time_grid: TimeGrid) -> Result<Trajectory> {
    let nodes = time_grid.nodes().par_iter().map(|&t| heat_semigroup(v0, t)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(time_grid, nodes)
}

/// The flux `F̃(v)·b` with a dealiased product.
pub fn flux(v: &SpectralField, b: &SpectralField, f: Nonlinearity) -> Result<SpectralField> {
    if !v.is_scalar() {
        return usage("the solution field must be scalar");
    }
    let tilde = v.map_values(|z| f.tilde(z));
    pointwise_product(&tilde, b)
}

fn check_inputs(v: &Trajectory, v0: &SpectralField, b: &dyn DriftField) -> Result<()> {
    let grid = v0.grid();
    if v.grid() != grid || b.grid() != grid {
        return usage("initial datum, trajectory and drift must share one grid");
    }
    if !v0.is_scalar() || !v.at(0).is_scalar() {
        return usage("initial datum and trajectory must be scalar");
    }
    if b.profile().components() != grid.dim() {
        return usage(format!("drift needs {} components", grid.dim()));
    }
    Ok(())
}

/// Fluxes `F̃(v(t_k))·b(t_k)` at every node.
fn fluxes(v: &Trajectory, b: &dyn DriftField, f: Nonlinearity) -> Result<Vec<SpectralField>> {
    let times = v.time_grid().nodes();
    v.nodes().par_iter().zip(times.par_iter()).map(|(vk, &t)| flux(vk, &b.at(t), f)).collect()
}

/// Duhamel part `−∫₀^{t_k} P_{t_k−s} div(F̃(v(s))b(s)) ds`, stepped with the
/// exponential integrator and the source frozen at each step midpoint.
fn duhamel(v: &Trajectory, b: &dyn DriftField, f: Nonlinearity) -> Result<Trajectory> {
    let tg = v.time_grid();
    let grid = v.grid();
    if b.is_zero() || f.is_identically_zero() {
        return Ok(Trajectory::zeros(grid, tg));
    }
    let sources = fluxes(v, b, f)?.par_iter().map(|h| Ok(divergence(h)?.scale(-1.0))).collect::<Result<Vec<_>>>()?;
    let mut nodes = Vec::with_capacity(tg.steps() + 1);
    nodes.push(SpectralField::zeros(grid, 1));
    for k in 0..tg.steps() {
        let dt = tg.node(k + 1) - tg.node(k);
        let mid = sources[k].scale(0.5).axpy(0.5, &sources[k + 1])?;
        let next = exponential_step(&nodes[k], &mid, dt);
        nodes.push(next);
    }
    Trajectory::new(tg, nodes)
}

/// `I(v)(t) = P_t v0 − ∫₀ᵗ P_{t−s} div(F̃(v(s)) b(s)) ds` on the time nodes of `v`.
pub fn mild_map_i(v: &Trajectory, v0: &SpectralField, b: &dyn DriftField, f: Nonlinearity) -> Result<Trajectory> {
    check_inputs(v, v0, b)?;
    heat_flow(v0, v.time_grid())?.add(&duhamel(v, b, f)?)
}

/// `J(w)(t) = I(w + P_·v0)(t) − P_t v0`.
pub fn mild_map_j(w: &Trajectory, v0: &SpectralField, b: &dyn DriftField, f: Nonlinearity) -> Result<Trajectory> {
    check_inputs(w, v0, b)?;
    let v = w.add(&heat_flow(v0, w.time_grid())?)?;
    duhamel(&v, b, f)
}

/// The same mild map written as an explicit kernel sum: each step's flux is
/// integrated, carried to `t_k` by its own semigroup factor and only then
/// differentiated, `Σ_i div P_{t_k−t_{i+1}} φ₁ h_i`. Quadratic in the number
/// of steps; used to cross-check [`mild_map_i`].
pub fn mild_map_kernel_sum(
    v: &Trajectory,
    v0: &SpectralField,
    b: &dyn DriftField,
    f: Nonlinearity,
) -> Result<Trajectory> {
    check_inputs(v, v0, b)?;
    let tg = v.time_grid();
    let grid = v.grid();
    let xi2 = grid.xi_squared();
    let h = fluxes(v, b, f)?;
    let integrated: Vec<SpectralField> = (0..tg.steps())
        .map(|i| {
            let dt = tg.node(i + 1) - tg.node(i);
            let mid = h[i].scale(0.5).axpy(0.5, &h[i + 1])?;
            Ok(mid.map_spectrum(|idx, z| z * (-phi1(0.5 * xi2[idx], dt))))
        })
        .collect::<Result<_>>()?;
    let flow = heat_flow(v0, tg)?;
    let nodes = (0..=tg.steps())
        .into_par_iter()
        .map(|k| {
            let tk = tg.node(k);
            let mut acc = SpectralField::zeros(grid, grid.dim());
            for (i, q) in integrated.iter().enumerate().take(k) {
                acc = acc.add(&heat_semigroup(q, tk - tg.node(i + 1))?)?;
            }
            flow.at(k).add(&divergence(&acc)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(tg, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::Drift;
    use std::f64::consts::PI;

    fn setup(n: usize, steps: usize) -> (Grid, TimeGrid, SpectralField) {
        let grid = Grid::new(1, n, 2.0 * PI).unwrap();
        let tg = TimeGrid::new(0.25, steps).unwrap();
        let v0 = SpectralField::from_fn(grid, 1, |x, _| 1.0 + 0.3 * x[0].sin() + 0.1 * (3.0 * x[0]).cos());
        (grid, tg, v0)
    }

    fn random_trajectory(grid: Grid, tg: TimeGrid, seed: u64) -> Trajectory {
        let g = crate::drift::gaussian_series(grid, 1.5, seed, 1, 0.5);
        let nodes = tg.nodes().iter().map(|&t| g.scale(1.0 + t)).collect();
        Trajectory::new(tg, nodes).unwrap()
    }

    #[test]
    fn zero_drift_gives_heat_flow() {
        let (grid, tg, v0) = setup(64, 20);
        let v = random_trajectory(grid, tg, 1);
        let out = mild_map_i(&v, &v0, &Drift::zero(grid), Nonlinearity::Arctan).unwrap();
        let flow = heat_flow(&v0, tg).unwrap();
        assert!(out.sup_distance(&flow).unwrap() < 1e-15);
        let b = Drift::synthesize(grid, -0.2, 3, crate::drift::TimeMode::Static).unwrap();
        let out = mild_map_i(&v, &v0, &b, Nonlinearity::Constant { kappa: 0.0 }).unwrap();
        assert!(out.sup_distance(&flow).unwrap() < 1e-15);
        let w = mild_map_j(&Trajectory::zeros(grid, tg), &v0, &Drift::zero(grid), Nonlinearity::Arctan).unwrap();
        assert!(w.nodes().iter().all(|f| f.sup_norm() == 0.0));
    }

    #[test]
    fn i_and_j_are_consistent() {
        let (grid, tg, v0) = setup(64, 20);
        let b = Drift::synthesize(grid, -0.2, 7, crate::drift::TimeMode::Modulated { frequency: 2.0 }).unwrap();
        let v = random_trajectory(grid, tg, 5);
        let flow = heat_flow(&v0, tg).unwrap();
        let via_j = mild_map_j(&v.sub(&flow).unwrap(), &v0, &b, Nonlinearity::Arctan).unwrap().add(&flow).unwrap();
        let direct = mild_map_i(&v, &v0, &b, Nonlinearity::Arctan).unwrap();
        assert!(via_j.sup_distance(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn kernel_sum_matches_stepping() {
        let (grid, tg, v0) = setup(64, 30);
        let b = Drift::synthesize(grid, -0.2, 9, crate::drift::TimeMode::Static).unwrap();
        let v = random_trajectory(grid, tg, 2);
        let a = mild_map_i(&v, &v0, &b, Nonlinearity::Rational).unwrap();
        let k = mild_map_kernel_sum(&v, &v0, &b, Nonlinearity::Rational).unwrap();
        assert!(a.sup_distance(&k).unwrap() < 1e-10);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let (grid, tg, v0) = setup(64, 10);
        let other = Grid::new(1, 32, 2.0 * PI).unwrap();
        let v = Trajectory::zeros(grid, tg);
        assert!(mild_map_i(&v, &v0, &Drift::zero(other), Nonlinearity::Arctan).is_err());
        let short = Trajectory::zeros(grid, TimeGrid::new(0.25, 5).unwrap());
        assert!(v.sub(&short).is_err());
    }

    #[test]
    fn duhamel_part_has_zero_mean() {
        let (grid, tg, v0) = setup(64, 20);
        let b = Drift::synthesize(grid, -0.3, 4, crate::drift::TimeMode::Static).unwrap();
        let v = random_trajectory(grid, tg, 8);
        let out = mild_map_i(&v, &v0, &b, Nonlinearity::Arctan).unwrap();
        for f in out.nodes() {
            assert!((f.mean(0) - v0.mean(0)).abs() < 1e-14);
        }
    }
}
