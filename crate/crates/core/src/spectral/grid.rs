use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Periodic computational domain `[0, L)^d` sampled with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return domain(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if n < 8 || !n.is_power_of_two() {
            return domain(format!("points per axis must be a power of two >= 8, got {n}"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return domain(format!("side length must be positive, got {length}"));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Volume of one grid cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Largest resolved angular frequency along one axis.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Signed integer mode for FFT index `p` along one axis.
    pub fn mode(&self, p: usize) -> i64 {
        if p <= self.n / 2 {
            p as i64
        } else {
            p as i64 - self.n as i64
        }
    }

    pub fn is_nyquist_index(&self, p: usize) -> bool {
        p == self.n / 2
    }

    /// Angular wavenumbers `2πm/L` in FFT order for one axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let base = 2.0 * PI / self.length;
        (0..self.n).map(|p| base * self.mode(p) as f64).collect()
    }

    /// Per-axis FFT indices of a flat node or mode index (axis 0 is the slow index).
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flatten(&self, ix: [usize; 2]) -> usize {
        if self.dim == 1 {
            ix[0]
        } else {
            ix[0] * self.n + ix[1]
        }
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let ix = self.unflatten(idx);
        let h = self.spacing();
        [ix[0] as f64 * h, ix[1] as f64 * h]
    }

    /// `|ξ|²` for every flat mode index.
    pub fn xi_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        (0..self.len())
            .map(|idx| {
                let ix = self.unflatten(idx);
                if self.dim == 1 {
                    k[ix[0]] * k[ix[0]]
                } else {
                    k[ix[0]] * k[ix[0]] + k[ix[1]] * k[ix[1]]
                }
            })
            .collect()
    }

    /// Integer mode vector for a flat mode index.
    pub fn mode_vector(&self, idx: usize) -> [i64; 2] {
        let ix = self.unflatten(idx);
        if self.dim == 1 {
            [self.mode(ix[0]), 0]
        } else {
            [self.mode(ix[0]), self.mode(ix[1])]
        }
    }

    /// Wraps a coordinate into `[0, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let y = x.rem_euclid(self.length);
        if y >= self.length {
            0.0
        } else {
            y
        }
    }

    /// Minimum-image signed displacement on one periodic axis.
    pub fn min_image(&self, dx: f64) -> f64 {
        dx - self.length * (dx / self.length).round()
    }

    /// Same domain and dimension with a different resolution.
    pub fn with_resolution(&self, n: usize) -> Result<Self> {
        Self::new(self.dim, n, self.length)
    }
}

/// Uniform time grid `t_k = kT/M`, `k = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("time horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return domain("time grid needs at least one step");
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.horizon / self.steps as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    /// Index of the node closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 64, 1.0).is_err());
        assert!(Grid::new(1, 48, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(2, 64, 0.0).is_err());
        assert!(Grid::new(2, 64, 1.0).is_ok());
    }

    #[test]
    fn modes_follow_fft_order() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let m: Vec<i64> = (0..8).map(|p| g.mode(p)).collect();
        assert_eq!(m, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn time_nodes_span_horizon() {
        let tg = TimeGrid::new(0.25, 200).unwrap();
        let nodes = tg.nodes();
        assert_eq!(nodes.len(), 201);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[200], 0.25);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::new(-1.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn wrap_and_min_image() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        assert!((g.wrap(-0.5) - 1.5).abs() < 1e-15);
        assert!((g.wrap(4.25) - 0.25).abs() < 1e-15);
        assert!((g.min_image(1.9) + 0.1).abs() < 1e-12);
    }
}
