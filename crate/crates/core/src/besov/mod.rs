//! Littlewood-Paley blocks, Besov (Hölder-Zygmund) norms `sup_j 2^{jγ}‖Δ_j f‖_∞`,
//! the classical Hölder norm, and a harness that fits the constants of the
//! standard smoothing/product estimates on random fields.

mod estimates;
mod partition;

pub use estimates::{estimate_harness, EstimateKind, EstimateParams, EstimateReport, EstimateRow};
pub use partition::Partition;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::spectral::{fft, Grid, SpectralField};

/// One Littlewood-Paley block `Δ_j f`.
#[derive(Debug, Clone)]
pub struct Block {
    pub j: i32,
    pub field: SpectralField,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub partition: Partition,
    /// Largest block whose annulus lies inside the resolved frequency range.
    pub usable_max: i32,
}

impl BlockDecomposition {
    pub fn reconstruct(&self) -> SpectralField {
        let mut acc = SpectralField::zeros(self.blocks[0].field.grid(), self.blocks[0].field.components());
        for b in &self.blocks {
            acc = acc.add(&b.field).expect("blocks share the input's shape");
        }
        acc
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BesovProfile {
    pub gamma: f64,
    /// `(j, 2^{jγ}·sup|Δ_j f|)`.
    pub per_block: Vec<(i32, f64)>,
    pub norm: f64,
}

pub const GAMMA_RANGE: (f64, f64) = (-2.0, 2.0);

fn check_gamma(gamma: f64) -> Result<()> {
    if !(GAMMA_RANGE.0..=GAMMA_RANGE.1).contains(&gamma) {
        return domain(format!(
            "Besov exponent {gamma} outside supported range [{}, {}]",
            GAMMA_RANGE.0, GAMMA_RANGE.1
        ));
    }
    Ok(())
}

fn block_spectra(f: &SpectralField, partition: &Partition, j: i32, radii: &[f64]) -> Vec<Vec<Complex64>> {
    f.all_spectra()
        .iter()
        .map(|s| s.iter().zip(radii).map(|(&z, &r)| z * partition.multiplier(j, r)).collect())
        .collect()
}

pub(crate) fn radii(grid: &Grid) -> Vec<f64> {
    grid.xi_squared().into_iter().map(f64::sqrt).collect()
}

pub fn decompose(f: &SpectralField) -> BlockDecomposition {
    decompose_with(f, &Partition::standard())
}

pub fn decompose_with(f: &SpectralField, partition: &Partition) -> BlockDecomposition {
    let grid = f.grid();
    let r = radii(&grid);
    let blocks = partition
        .block_range(&grid)
        .map(|j| Block {
            j,
            field: SpectralField::from_spectrum(grid, block_spectra(f, partition, j, &r)).expect("shape preserved"),
        })
        .collect();
    BlockDecomposition { blocks, partition: partition.clone(), usable_max: partition.usable_max(&grid) }
}

/// `(j, sup|Δ_j f|)` over all blocks, maximised over components.
pub fn block_sups(f: &SpectralField) -> Vec<(i32, f64)> {
    block_sups_with(f, &Partition::standard())
}

pub fn block_sups_with(f: &SpectralField, partition: &Partition) -> Vec<(i32, f64)> {
    let grid = f.grid();
    let r = radii(&grid);
    partition
        .block_range(&grid)
        .map(|j| {
            let sup = block_spectra(f, partition, j, &r)
                .iter()
                .map(|s| {
                    if s.iter().all(|z| z.norm_sqr() == 0.0) {
                        0.0
                    } else {
                        fft::inverse_real(s, grid.n(), grid.dim()).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
                    }
                })
                .fold(0.0, f64::max);
            (j, sup)
        })
        .collect()
}

/// Weights precomputed block sups by `2^{jγ}`.
pub fn profile_from_sups(sups: &[(i32, f64)], gamma: f64) -> Result<BesovProfile> {
    check_gamma(gamma)?;
    let per_block: Vec<(i32, f64)> = sups.iter().map(|&(j, s)| (j, (j as f64 * gamma).exp2() * s)).collect();
    let norm = per_block.iter().fold(0.0_f64, |m, &(_, v)| m.max(v));
    Ok(BesovProfile { gamma, per_block, norm })
}

pub fn besov_norm(f: &SpectralField, gamma: f64) -> Result<BesovProfile> {
    check_gamma(gamma)?;
    profile_from_sups(&block_sups(f), gamma)
}

/// Shorthand for `besov_norm(f, γ)?.norm`.
pub fn norm(f: &SpectralField, gamma: f64) -> Result<f64> {
    Ok(besov_norm(f, gamma)?.norm)
}

/// `‖f‖_∞ + sup_{0<|x−y|<1} |f(x)−f(y)|/|x−y|^γ` over grid node pairs (periodic distance).
pub fn holder_norm(f: &SpectralField, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("Hölder exponent must lie in (0,1), got {gamma}"));
    }
    let grid = f.grid();
    let n = grid.n() as i64;
    let h = grid.spacing();
    let reach = ((1.0 / h).ceil() as i64).min(n / 2);
    let mut offsets = Vec::new();
    match grid.dim() {
        1 => {
            for o in 1..=reach {
                offsets.push(([o, 0], o as f64 * h));
            }
        }
        _ => {
            for o0 in 0..=reach {
                for o1 in -reach..=reach {
                    if o0 == 0 && o1 <= 0 {
                        continue;
                    }
                    offsets.push(([o0, o1], ((o0 * o0 + o1 * o1) as f64).sqrt() * h));
                }
            }
        }
    }
    offsets.retain(|&(_, d)| d < 1.0);
    let mut seminorm = 0.0_f64;
    for vals in f.all_values() {
        for &(o, dist) in &offsets {
            let w = dist.powf(-gamma);
            for idx in 0..grid.len() {
                let ix = grid.unflatten(idx);
                let jx = [
                    (ix[0] as i64 + o[0]).rem_euclid(n) as usize,
                    if grid.dim() == 1 { 0 } else { (ix[1] as i64 + o[1]).rem_euclid(n) as usize },
                ];
                let d = (vals[idx] - vals[grid.flatten(jx)]).abs();
                seminorm = seminorm.max(d * w);
            }
        }
    }
    Ok(f.sup_norm() + seminorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(1, 256, 2.0 * PI).unwrap()
    }

    #[test]
    fn constant_lives_in_low_block() {
        let f = SpectralField::constant(grid(), &[1.7]);
        let dec = decompose(&f);
        assert_eq!(dec.blocks[0].j, -1);
        assert!(dec.blocks[0].field.values(0).iter().all(|v| (v - 1.7).abs() < 1e-14));
        for b in &dec.blocks[1..] {
            assert!(b.field.sup_norm() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_and_disjoint_scales() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(g, 1, |x, _| (3.0 * x[0]).sin().exp() * (x[1] * 5.0).cos());
        let dec = decompose(&f);
        let rec = dec.reconstruct();
        assert!(rec.sup_distance(&f).unwrap() <= 1e-10 * f.sup_norm());
        let p = Partition::standard();
        for r in (0..4000).map(|i| i as f64 * 0.05) {
            for j in -1..8 {
                for jp in (j + 3)..10 {
                    assert_eq!(p.multiplier(j, r) * p.multiplier(jp, r), 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_field_and_gamma_range() {
        let z = SpectralField::zeros(grid(), 1);
        assert_eq!(besov_norm(&z, 0.3).unwrap().norm, 0.0);
        assert!(matches!(besov_norm(&z, 2.5), Err(crate::Error::Domain(_))));
        assert!(matches!(holder_norm(&z, 1.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn homogeneity() {
        let f = SpectralField::from_fn(grid(), 1, |x, _| (x[0]).sin() + 0.2 * (17.0 * x[0]).cos());
        let a = norm(&f, -0.3).unwrap();
        let b = norm(&f.scale(-2.5), -0.3).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn holder_of_constant() {
        let f = SpectralField::constant(grid(), &[-3.0]);
        assert!((holder_norm(&f, 0.5).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn corrupted_partition_breaks_reconstruction() {
        let f = SpectralField::from_fn(grid(), 1, |x, _| (x[0]).sin());
        let dec = decompose_with(&f, &Partition::corrupted(0.1));
        assert!(dec.reconstruct().sup_distance(&f).unwrap() > 1e-3);
    }
}
