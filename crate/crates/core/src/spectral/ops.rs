//! Exact heat semigroup, spectral differentiation, dealiased products and the
//! exponential-integrator Duhamel step.

use num_complex::Complex64;

use super::fft;
use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{domain, usage, Result};

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return domain(format!("semigroup time must be finite and >= 0, got {t}"));
    }
    Ok(())
}

/// `P_t f`: Fourier multiplier `exp(-t|ξ|²/2)` of the generator `½Δ`, applied componentwise.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let xi2 = f.grid().xi_squared();
    Ok(f.map_spectrum(|i, z| z * (-0.5 * t * xi2[i]).exp()))
}

/// Per-axis `iξ` with the Nyquist mode zeroed so derivatives of real fields stay real.
fn derivative_symbols(grid: &Grid) -> Vec<f64> {
    let mut k = grid.wavenumbers();
    k[grid.n() / 2] = 0.0;
    k
}

fn axis_symbol(grid: &Grid, k: &[f64], idx: usize, axis: usize) -> f64 {
    k[grid.unflatten(idx)[axis]]
}

/// Spectral gradient of a scalar field; returns `d` components.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    if !f.is_scalar() {
        return usage(format!("gradient expects a scalar field, got {} components", f.components()));
    }
    let grid = f.grid();
    let k = derivative_symbols(&grid);
    let s = f.spectrum(0);
    let spectrum = (0..grid.dim())
        .map(|axis| {
            s.iter().enumerate().map(|(i, &z)| z * Complex64::new(0.0, axis_symbol(&grid, &k, i, axis))).collect()
        })
        .collect();
    SpectralField::from_spectrum(grid, spectrum)
}

/// Spectral divergence of a `d`-component field. The zero mode of the result is exactly zero.
pub fn divergence(g: &SpectralField) -> Result<SpectralField> {
    let grid = g.grid();
    if g.components() != grid.dim() {
        return usage(format!("divergence expects {} components, got {}", grid.dim(), g.components()));
    }
    let k = derivative_symbols(&grid);
    let mut out = vec![Complex64::default(); grid.len()];
    for axis in 0..grid.dim() {
        for (i, (o, &z)) in out.iter_mut().zip(g.spectrum(axis)).enumerate() {
            *o += z * Complex64::new(0.0, axis_symbol(&grid, &k, i, axis));
        }
    }
    out[0] = Complex64::default();
    SpectralField::from_spectrum(grid, vec![out])
}

/// Spectral Laplacian `-|ξ|² f̂`, componentwise.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let xi2 = f.grid().xi_squared();
    f.map_spectrum(|i, z| -z * xi2[i])
}

/// Maps coarse FFT index `p` onto the padded grid of size `m`; the Nyquist
/// coefficient is split evenly between `±n/2` so it stays a real cosine.
fn pad_targets(p: usize, n: usize, m: usize) -> [(usize, f64); 2] {
    if p < n / 2 {
        [(p, 1.0), (usize::MAX, 0.0)]
    } else if p == n / 2 {
        [(n / 2, 0.5), (m - n / 2, 0.5)]
    } else {
        [(p + m - n, 1.0), (usize::MAX, 0.0)]
    }
}

/// Fine-grid index `q` (size `m`) back to coarse index, if the mode is kept.
fn truncate_target(q: usize, n: usize, m: usize) -> Option<usize> {
    let mode = if q <= m / 2 { q as i64 } else { q as i64 - m as i64 };
    if mode.unsigned_abs() as usize > n / 2 {
        None
    } else {
        Some(mode.rem_euclid(n as i64) as usize)
    }
}

fn pad_spectrum(s: &[Complex64], grid: &Grid, m: usize) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::default(); m.pow(grid.dim() as u32)];
    match grid.dim() {
        1 => {
            for (p, &z) in s.iter().enumerate() {
                for (q, w) in pad_targets(p, n, m) {
                    if w > 0.0 {
                        out[q] += z * w;
                    }
                }
            }
        }
        _ => {
            for (idx, &z) in s.iter().enumerate() {
                let [p0, p1] = grid.unflatten(idx);
                for (q0, w0) in pad_targets(p0, n, m) {
                    if w0 == 0.0 {
                        continue;
                    }
                    for (q1, w1) in pad_targets(p1, n, m) {
                        if w1 > 0.0 {
                            out[q0 * m + q1] += z * (w0 * w1);
                        }
                    }
                }
            }
        }
    }
    out
}

fn truncate_spectrum(fine: &[Complex64], grid: &Grid, m: usize) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::default(); grid.len()];
    match grid.dim() {
        1 => {
            for (q, &z) in fine.iter().enumerate() {
                if let Some(p) = truncate_target(q, n, m) {
                    out[p] += z;
                }
            }
        }
        _ => {
            for (qi, &z) in fine.iter().enumerate() {
                let (q0, q1) = (qi / m, qi % m);
                if let (Some(p0), Some(p1)) = (truncate_target(q0, n, m), truncate_target(q1, n, m)) {
                    out[p0 * n + p1] += z;
                }
            }
        }
    }
    out
}

/// Real samples of a spectrum zero-padded onto the 3/2-refined grid.
fn padded_values(s: &[Complex64], grid: &Grid) -> (usize, Vec<f64>) {
    let m = 3 * grid.n() / 2;
    let padded = pad_spectrum(s, grid, m);
    (m, fft::inverse_real(&padded, m, grid.dim()))
}

/// Dealiased product (3/2 zero-padding, i.e. the 2/3 rule). A scalar factor
/// multiplies every component of the other; otherwise componentry must match.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return usage("pointwise product of fields on different grids");
    }
    let grid = f.grid();
    let (fc, gc) = (f.components(), g.components());
    let components = if fc == gc || gc == 1 {
        fc
    } else if fc == 1 {
        gc
    } else {
        return usage(format!("cannot multiply {fc}-component by {gc}-component field"));
    };
    let fine_f: Vec<(usize, Vec<f64>)> = (0..fc).map(|c| padded_values(f.spectrum(c), &grid)).collect();
    let fine_g: Vec<(usize, Vec<f64>)> = (0..gc).map(|c| padded_values(g.spectrum(c), &grid)).collect();
    let spectrum = (0..components)
        .map(|c| {
            let (m, a) = &fine_f[if fc == 1 { 0 } else { c }];
            let (_, b) = &fine_g[if gc == 1 { 0 } else { c }];
            let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
            let fine = fft::forward_real(&prod, *m, grid.dim());
            truncate_spectrum(&fine, &grid, *m)
        })
        .collect();
    SpectralField::from_spectrum(grid, spectrum)
}

/// `(1 - e^{-λΔt}) / λ`, the exact integral of `e^{-λ(Δt-s)}` over one step.
pub(crate) fn phi1(lambda: f64, dt: f64) -> f64 {
    if lambda * dt < 1e-12 {
        dt
    } else {
        -(-lambda * dt).exp_m1() / lambda
    }
}

/// Source value frozen at the midpoint of `[t_from, t_to]`, linearly interpolated between nodes.
fn midpoint_source(sources: &[(f64, SpectralField)], t_mid: f64) -> Result<SpectralField> {
    if sources.len() == 1 {
        return Ok(sources[0].1.clone());
    }
    let mut sorted: Vec<&(f64, SpectralField)> = sources.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hi = sorted.iter().position(|(t, _)| *t >= t_mid).unwrap_or(sorted.len() - 1);
    if hi == 0 || sorted[hi].0 == t_mid {
        return Ok(sorted[hi].1.clone());
    }
    let (t0, g0) = sorted[hi - 1];
    let (t1, g1) = sorted[hi];
    let w = (t_mid - t0) / (t1 - t0);
    g0.scale(1.0 - w).axpy(w, g1)
}

/// One exponential-integrator step of `∂_t w = ½Δw + g`:
/// `P_{Δt} v + ∫ P_{t_to-s} g(s) ds` with `g` frozen at the step midpoint and the
/// per-mode integral evaluated in closed form.
pub fn duhamel_step(
    v: &SpectralField,
    sources: &[(f64, SpectralField)],
    t_from: f64,
    t_to: f64,
) -> Result<SpectralField> {
    if sources.is_empty() {
        return usage("duhamel step needs at least one source node");
    }
    if !(t_to >= t_from) {
        return domain(format!("step must go forward in time: {t_from} -> {t_to}"));
    }
    if sources.len() > 1 {
        let lo = sources.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = sources.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * t_to.abs().max(1.0);
        if lo > t_from + slack || hi < t_to - slack {
            return usage(format!("source nodes [{lo}, {hi}] do not cover [{t_from}, {t_to}]"));
        }
    }
    let g = midpoint_source(sources, 0.5 * (t_from + t_to))?;
    if g.grid() != v.grid() || g.components() != v.components() {
        return usage("source and state have different shapes");
    }
    Ok(exponential_step(v, &g, t_to - t_from))
}

/// `e^{-λΔt} v̂ + φ₁(λ, Δt) ĝ` per mode.
pub(crate) fn exponential_step(v: &SpectralField, g: &SpectralField, dt: f64) -> SpectralField {
    let grid = v.grid();
    let xi2 = grid.xi_squared();
    let spectrum = v
        .all_spectra()
        .iter()
        .zip(g.all_spectra())
        .map(|(vs, gs)| {
            vs.iter()
                .zip(gs)
                .zip(&xi2)
                .map(|((&a, &b), &k2)| {
                    let lambda = 0.5 * k2;
                    a * (-lambda * dt).exp() + b * phi1(lambda, dt)
                })
                .collect()
        })
        .collect();
    SpectralField::from_spectrum(grid, spectrum).expect("shape preserved")
}

/// Sup-norm of `P_t div f − div P_t f`. Both orderings are the same Fourier
/// multiplier, so the residual only measures round-off.
pub fn semigroup_div_commute_check(f: &SpectralField, t: f64) -> Result<f64> {
    check_time(t)?;
    let a = heat_semigroup(&divergence(f)?, t)?;
    let b = divergence(&heat_semigroup(f, t)?)?;
    a.sup_distance(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> Grid {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn heat_identity_and_constants() {
        let g = grid1(64, 1.0);
        let f = SpectralField::from_fn(g, 1, |x, _| (2.0 * PI * x[0]).sin() + 0.3);
        let p0 = heat_semigroup(&f, 0.0).unwrap();
        assert_eq!(p0.values(0), f.values(0));
        let c = SpectralField::constant(g, &[2.5]);
        let pc = heat_semigroup(&c, 3.0).unwrap();
        assert!(pc.values(0).iter().all(|v| (v - 2.5).abs() < 1e-14));
        assert!(matches!(heat_semigroup(&f, -1.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn heat_on_eigenfunction() {
        let l = 2.0;
        let m = 3.0;
        let t = 0.01;
        let g = grid1(64, l);
        let k = 2.0 * PI * m / l;
        let f = SpectralField::from_fn(g, 1, |x, _| (k * x[0]).cos());
        let p = heat_semigroup(&f, t).unwrap();
        let decay = (-t * k * k / 2.0).exp();
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            assert!((p.values(0)[i] - decay * (k * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_of_constant_and_divergence_mean() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let c = SpectralField::constant(g, &[4.0]);
        assert!(gradient(&c).unwrap().sup_norm() < 1e-14);
        let v = SpectralField::from_fn(g, 2, |x, c| ((c + 1) as f64 * x[0] * 7.0).sin() + x[1] * x[1]);
        let d = divergence(&v).unwrap();
        assert!(d.mean(0).abs() < 1e-14);
        assert!(matches!(gradient(&v), Err(crate::Error::Usage(_))));
        assert!(matches!(divergence(&c), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn product_with_one_is_identity() {
        let g = grid1(32, 1.0);
        let f = SpectralField::from_fn(g, 1, |x, _| (2.0 * PI * x[0]).sin().exp());
        let one = SpectralField::constant(g, &[1.0]);
        let p = pointwise_product(&f, &one).unwrap();
        assert!(p.sup_distance(&f).unwrap() < 1e-13);
    }

    #[test]
    fn product_of_modes_below_cutoff_is_exact() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let f = SpectralField::from_fn(g, 1, |x, _| (2.0 * PI * (3.0 * x[0] + 2.0 * x[1])).cos());
        let h = SpectralField::from_fn(g, 1, |x, _| (2.0 * PI * (5.0 * x[0] - 4.0 * x[1])).sin());
        let p = pointwise_product(&f, &h).unwrap();
        let exact = SpectralField::from_fn(g, 1, |x, _| {
            let a = 2.0 * PI * (3.0 * x[0] + 2.0 * x[1]);
            let b = 2.0 * PI * (5.0 * x[0] - 4.0 * x[1]);
            a.cos() * b.sin()
        });
        assert!(p.sup_distance(&exact).unwrap() < 1e-13);
    }

    #[test]
    fn product_grid_mismatch() {
        let a = SpectralField::zeros(grid1(16, 1.0), 1);
        let b = SpectralField::zeros(grid1(32, 1.0), 1);
        assert!(matches!(pointwise_product(&a, &b), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn duhamel_basic_cases() {
        let g = grid1(32, 1.0);
        let v = SpectralField::from_fn(g, 1, |x, _| (2.0 * PI * x[0]).cos());
        let zero = SpectralField::zeros(g, 1);
        let step = duhamel_step(&v, &[(0.0, zero.clone()), (0.1, zero.clone())], 0.0, 0.1).unwrap();
        let heat = heat_semigroup(&v, 0.1).unwrap();
        assert!(step.sup_distance(&heat).unwrap() < 1e-15);

        let c = SpectralField::constant(g, &[0.7]);
        let out = duhamel_step(&zero, &[(0.0, c)], 0.0, 0.2).unwrap();
        assert!((out.mean(0) - 0.14).abs() < 1e-15);

        assert!(matches!(duhamel_step(&v, &[], 0.0, 0.1), Err(crate::Error::Usage(_))));
        let late = [(0.05, zero.clone()), (0.1, zero)];
        assert!(matches!(duhamel_step(&v, &late, 0.0, 0.1), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn commute_check_trivial_cases() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let c = SpectralField::constant(g, &[1.0, -2.0]);
        assert_eq!(semigroup_div_commute_check(&c, 0.3).unwrap(), 0.0);
        let f = SpectralField::from_fn(g, 2, |x, c| (x[0] * 6.0 + c as f64).sin() * x[1]);
        assert_eq!(semigroup_div_commute_check(&f, 0.0).unwrap(), 0.0);
    }
}
