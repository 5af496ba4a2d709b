use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{usage, Result};

/// Scalar or vector field on a periodic grid, carrying both nodal samples and
/// normalised Fourier coefficients. Either representation is computed on first
/// access from the other and then cached; fields are immutable once built.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    values: OnceLock<Vec<Vec<f64>>>,
    spectrum: OnceLock<Vec<Vec<Complex64>>>,
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return usage("a field needs at least one component");
        }
        if let Some(bad) = values.iter().find(|c| c.len() != grid.len()) {
            return usage(format!("component has {} samples, grid has {} nodes", bad.len(), grid.len()));
        }
        let components = values.len();
        Ok(Self { grid, components, values: OnceLock::from(values), spectrum: OnceLock::new() })
    }

    pub fn scalar(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::from_values(grid, vec![values])
    }

    pub fn from_spectrum(grid: Grid, spectrum: Vec<Vec<Complex64>>) -> Result<Self> {
        if spectrum.is_empty() {
            return usage("a field needs at least one component");
        }
        if spectrum.iter().any(|c| c.len() != grid.len()) {
            return usage("spectrum length does not match grid");
        }
        let components = spectrum.len();
        Ok(Self { grid, components, values: OnceLock::new(), spectrum: OnceLock::from(spectrum) })
    }

    /// Samples `f(x, component)` at every node.
    pub fn from_fn(grid: Grid, components: usize, f: impl Fn([f64; 2], usize) -> f64) -> Self {
        let values = (0..components).map(|c| (0..grid.len()).map(|i| f(grid.coords(i), c)).collect()).collect();
        Self::from_values(grid, values).expect("shape is consistent by construction")
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self::from_values(grid, vec![vec![0.0; grid.len()]; components]).expect("shape is consistent by construction")
    }

    pub fn constant(grid: Grid, value: &[f64]) -> Self {
        Self::from_values(grid, value.iter().map(|&v| vec![v; grid.len()]).collect())
            .expect("shape is consistent by construction")
    }

    /// Stacks scalar fields into one vector field.
    pub fn stack(parts: &[SpectralField]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return usage("cannot stack zero fields");
        };
        let grid = first.grid;
        let mut values = Vec::new();
        for p in parts {
            if p.grid != grid {
                return usage("stacked fields live on different grids");
            }
            values.extend(p.all_values().iter().cloned());
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_scalar(&self) -> bool {
        self.components == 1
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        self.values.get_or_init(|| {
            let s = self.spectrum.get().expect("one cache is always valid");
            s.iter().map(|c| fft::inverse_real(c, self.grid.n(), self.grid.dim())).collect()
        })
    }

    pub fn all_spectra(&self) -> &[Vec<Complex64>] {
        self.spectrum.get_or_init(|| {
            let v = self.values.get().expect("one cache is always valid");
            v.iter().map(|c| fft::forward_real(c, self.grid.n(), self.grid.dim())).collect()
        })
    }

    pub fn values(&self, component: usize) -> &[f64] {
        &self.all_values()[component]
    }

    pub fn spectrum(&self, component: usize) -> &[Complex64] {
        &self.all_spectra()[component]
    }

    pub fn component(&self, c: usize) -> SpectralField {
        let values = self.values.get().map(|v| v[c].clone());
        let spectrum = self.spectrum.get().map(|s| s[c].clone());
        SpectralField {
            grid: self.grid,
            components: 1,
            values: values.map(|v| OnceLock::from(vec![v])).unwrap_or_default(),
            spectrum: spectrum.map(|s| OnceLock::from(vec![s])).unwrap_or_default(),
        }
    }

    /// Applies `f(flat mode index, coefficient)` to every coefficient of every component.
    pub fn map_spectrum(&self, f: impl Fn(usize, Complex64) -> Complex64) -> SpectralField {
        let spectrum =
            self.all_spectra().iter().map(|c| c.iter().enumerate().map(|(i, &z)| f(i, z)).collect()).collect();
        Self::from_spectrum(self.grid, spectrum).expect("shape preserved")
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let values = self.all_values().iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect();
        Self::from_values(self.grid, values).expect("shape preserved")
    }

    fn check_same_shape(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return usage("fields live on different grids");
        }
        if self.components != other.components {
            return usage(format!("component mismatch: {} vs {}", self.components, other.components));
        }
        Ok(())
    }

    /// `self + scale * other`, computed on whichever representation both fields already hold.
    pub fn axpy(&self, scale: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_shape(other)?;
        if self.spectrum.get().is_some() && other.spectrum.get().is_some() {
            let spectrum = self
                .all_spectra()
                .iter()
                .zip(other.all_spectra())
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y * scale).collect())
                .collect();
            return Self::from_spectrum(self.grid, spectrum);
        }
        let values = self
            .all_values()
            .iter()
            .zip(other.all_values())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + scale * y).collect())
            .collect();
        Self::from_values(self.grid, values)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        if self.spectrum.get().is_some() {
            self.map_spectrum(|_, z| z * factor)
        } else {
            self.map_values(|v| v * factor)
        }
    }

    /// Maximum absolute nodal value over all components.
    pub fn sup_norm(&self) -> f64 {
        self.all_values().iter().flat_map(|c| c.iter()).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.all_values().iter().flat_map(|c| c.iter()).fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Spatial mean of one component (its zero Fourier mode).
    pub fn mean(&self, component: usize) -> f64 {
        if let Some(s) = self.spectrum.get() {
            s[component][0].re
        } else {
            let v = self.values(component);
            v.iter().sum::<f64>() / v.len() as f64
        }
    }

    /// `∫ f dx` of one component over the torus.
    pub fn integral(&self, component: usize) -> f64 {
        self.values(component).iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Largest imaginary part of the inverse transform of the cached spectrum,
    /// relative to the field magnitude. Zero for fields built from real samples.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.sup_norm().max(f64::MIN_POSITIVE);
        self.all_spectra()
            .iter()
            .map(|c| {
                fft::inverse_complex(c, self.grid.n(), self.grid.dim()).iter().fold(0.0_f64, |m, z| m.max(z.im.abs()))
            })
            .fold(0.0, f64::max)
            / scale
    }

    /// Sup-norm distance to another field of the same shape.
    pub fn sup_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .all_values()
            .iter()
            .zip(other.all_values())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    /// `L¹(torus)` distance between two scalar fields.
    pub fn l1_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_shape(other)?;
        let sum: f64 = self
            .all_values()
            .iter()
            .zip(other.all_values())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .sum();
        Ok(sum * self.grid.cell_volume())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn caches_agree() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = SpectralField::from_fn(g, 2, |x, c| (2.0 * PI * x[0]).sin() + c as f64 * x[1]);
        let back = SpectralField::from_spectrum(g, f.all_spectra().to_vec()).unwrap();
        assert!(f.sup_distance(&back).unwrap() < 1e-12);
        assert!(f.hermitian_defect() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let h = Grid::new(1, 32, 1.0).unwrap();
        assert!(SpectralField::scalar(g, vec![0.0; 15]).is_err());
        let a = SpectralField::zeros(g, 1);
        assert!(a.add(&SpectralField::zeros(h, 1)).is_err());
        assert!(a.add(&SpectralField::zeros(g, 2)).is_err());
    }

    #[test]
    fn mean_and_integral() {
        let g = Grid::new(1, 32, 2.0).unwrap();
        let f = SpectralField::from_fn(g, 1, |x, _| 3.0 + (PI * x[0]).cos());
        assert!((f.mean(0) - 3.0).abs() < 1e-14);
        assert!((f.integral(0) - 6.0).abs() < 1e-13);
    }
}
