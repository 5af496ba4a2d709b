use rayon::prelude::*;
use serde::Serialize;

use super::mild::{flux, Trajectory};
use super::nonlinearity::Nonlinearity;
use crate::drift::DriftField;
use crate::error::{usage, Result};
use crate::spectral::{Grid, SpectralField};

/// A real Fourier test function `cos(ξ_m·x)` or `sin(ξ_m·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TestMode {
    pub wave: [i64; 2],
    pub sine: bool,
}

impl TestMode {
    pub fn constant() -> Self {
        Self { wave: [0, 0], sine: false }
    }

    fn xi(&self, grid: &Grid) -> [f64; 2] {
        let k = 2.0 * std::f64::consts::PI / grid.length();
        [k * self.wave[0] as f64, k * self.wave[1] as f64]
    }

    /// `(φ, ∇φ)` at a point.
    fn eval(&self, grid: &Grid, x: [f64; 2]) -> (f64, [f64; 2]) {
        let xi = self.xi(grid);
        let phase = xi[0] * x[0] + xi[1] * x[1];
        let (s, c) = phase.sin_cos();
        if self.sine {
            (s, [xi[0] * c, xi[1] * c])
        } else {
            (c, [-xi[0] * s, -xi[1] * s])
        }
    }

    fn half_laplacian_factor(&self, grid: &Grid) -> f64 {
        let xi = self.xi(grid);
        -0.5 * (xi[0] * xi[0] + xi[1] * xi[1])
    }

    pub fn label(&self) -> String {
        let f = if self.sine { "sin" } else { "cos" };
        format!("{f}({},{})", self.wave[0], self.wave[1])
    }
}

/// Cosine and sine of the `count` lowest nonzero modes, ordered by `|m|`.
pub fn first_test_modes(grid: Grid, count: usize) -> Vec<TestMode> {
    let mut waves: Vec<[i64; 2]> = Vec::new();
    let reach = count as i64 + 1;
    if grid.dim() == 1 {
        waves.extend((1..=count as i64).map(|m| [m, 0]));
    } else {
        for a in 0..=reach {
            for b in -reach..=reach {
                if a > 0 || b > 0 {
                    waves.push([a, b]);
                }
            }
        }
        waves.sort_by_key(|m| (m[0] * m[0] + m[1] * m[1], m[0], m[1]));
        waves.truncate(count);
    }
    waves.into_iter().flat_map(|wave| [TestMode { wave, sine: false }, TestMode { wave, sine: true }]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakResidualRow {
    pub mode: TestMode,
    pub time: f64,
    pub residual: f64,
}

struct Pairings {
    value: f64,
    laplace: f64,
    drift: f64,
}

fn pairings(mode: &TestMode, v: &SpectralField, g: Option<&SpectralField>) -> Pairings {
    let grid = v.grid();
    let vv = v.values(0);
    let mut value = 0.0;
    let mut drift = 0.0;
    for (idx, &vx) in vv.iter().enumerate() {
        let (phi, grad) = mode.eval(&grid, grid.coords(idx));
        value += phi * vx;
        if let Some(g) = g {
            for (c, dphi) in grad.iter().enumerate().take(grid.dim()) {
                drift += dphi * g.values(c)[idx];
            }
        }
    }
    let w = grid.cell_volume();
    Pairings { value: value * w, laplace: mode.half_laplacian_factor(&grid) * value * w, drift: drift * w }
}

/// `|⟨φ, v(t)⟩ − ⟨φ, v0⟩ − ∫₀ᵗ⟨½Δφ, v⟩ − ∫₀ᵗ⟨∇φ, F̃(v) b⟩|` at every time node,
/// with trapezoidal time integrals.
pub fn weak_residual(
    v: &Trajectory,
    b: &dyn DriftField,
    f: Nonlinearity,
    modes: &[TestMode],
) -> Result<Vec<WeakResidualRow>> {
    if b.grid() != v.grid() {
        return usage("drift and trajectory must share one grid");
    }
    let tg = v.time_grid();
    let times = tg.nodes();
    let active = !(b.is_zero() || f.is_identically_zero());
    let fluxes: Vec<Option<SpectralField>> = v
        .nodes()
        .par_iter()
        .zip(times.par_iter())
        .map(|(vk, &t)| if active { flux(vk, &b.at(t), f).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;
    let rows = modes
        .par_iter()
        .map(|mode| {
            let p: Vec<Pairings> =
                v.nodes().iter().zip(&fluxes).map(|(vk, g)| pairings(mode, vk, g.as_ref())).collect();
            let mut out = Vec::with_capacity(p.len());
            let mut integral = 0.0;
            for k in 0..p.len() {
                if k > 0 {
                    let dt = times[k] - times[k - 1];
                    let a = p[k - 1].laplace + p[k - 1].drift;
                    let c = p[k].laplace + p[k].drift;
                    integral += 0.5 * dt * (a + c);
                }
                let residual = (p[k].value - p[0].value - integral).abs();
                out.push(WeakResidualRow { mode: *mode, time: times[k], residual });
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{Drift, TimeMode};
    use crate::solver::mild::heat_flow;
    use crate::spectral::TimeGrid;
    use std::f64::consts::PI;

    #[test]
    fn mode_lists() {
        let g1 = Grid::new(1, 32, 2.0 * PI).unwrap();
        let m = first_test_modes(g1, 5);
        assert_eq!(m.len(), 10);
        assert_eq!(m[9], TestMode { wave: [5, 0], sine: true });
        let g2 = Grid::new(2, 32, 2.0 * PI).unwrap();
        let m = first_test_modes(g2, 5);
        assert_eq!(m.len(), 10);
        assert!(m.iter().all(|t| t.wave[0] * t.wave[0] + t.wave[1] * t.wave[1] <= 4));
    }

    #[test]
    fn constant_test_function_measures_mass() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let tg = TimeGrid::new(0.25, 20).unwrap();
        let v0 = SpectralField::from_fn(grid, 1, |x, _| 1.0 + 0.5 * x[0].cos());
        let v = heat_flow(&v0, tg).unwrap();
        let b = Drift::synthesize(grid, -0.2, 1, TimeMode::Static).unwrap();
        let rows = weak_residual(&v, &b, Nonlinearity::Arctan, &[TestMode::constant()]).unwrap();
        assert!(rows.iter().all(|r| r.residual < 1e-12));
    }

    #[test]
    fn heat_mode_residual_is_quadrature_error() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let tg = TimeGrid::new(0.25, 400).unwrap();
        let v0 = SpectralField::from_fn(grid, 1, |x, _| 1.0 + 0.5 * x[0].cos());
        let v = heat_flow(&v0, tg).unwrap();
        let mode = TestMode { wave: [1, 0], sine: false };
        let rows = weak_residual(&v, &Drift::zero(grid), Nonlinearity::Arctan, &[mode]).unwrap();
        let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert!(worst > 0.0);
    }
}
