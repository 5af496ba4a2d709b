use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectral::{Grid, SpectralField};

/// Particles per partial sum. Fixed so that reductions never depend on the worker count.
const CHUNK: usize = 1024;

/// Gaussian factors below this are dropped when truncating the mode box.
const NEGLIGIBLE: f64 = 1e-17;

/// Largest mode index with `e^{−t|ξ|²/2}` above [`NEGLIGIBLE`], capped below Nyquist.
pub(crate) fn mode_cap(grid: &Grid, t: f64) -> usize {
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let limit = grid.n() / 2 - 1;
    if t <= 0.0 {
        return limit;
    }
    let xi = (-2.0 * NEGLIGIBLE.ln() / t).sqrt();
    ((xi / base).ceil() as usize).min(limit)
}

/// `e^{i m θ}` for `m = 0..=cap` by repeated multiplication.
fn powers(theta: f64, cap: usize) -> Vec<Complex64> {
    let step = Complex64::from_polar(1.0, theta);
    let mut out = Vec::with_capacity(cap + 1);
    let mut z = Complex64::new(1.0, 0.0);
    for _ in 0..=cap {
        out.push(z);
        z *= step;
    }
    out
}

/// Modes `m` with `|m_i| ≤ cap`, stored as a dense box of side `2cap+1`.
#[derive(Debug, Clone)]
pub(crate) struct ModeBox {
    pub dim: usize,
    pub cap: usize,
    pub base: f64,
    /// `(1/N) Σ_j e^{−iξ_m·X_j}`.
    pub coeffs: Vec<Complex64>,
}

impl ModeBox {
    fn side(&self) -> usize {
        2 * self.cap + 1
    }

    fn offset(&self, m: i64) -> usize {
        (m + self.cap as i64) as usize
    }

    pub fn at(&self, m: [i64; 2]) -> Complex64 {
        let s = self.side();
        if self.dim == 1 {
            self.coeffs[self.offset(m[0])]
        } else {
            self.coeffs[self.offset(m[0]) * s + self.offset(m[1])]
        }
    }

    fn modes(&self) -> Vec<[i64; 2]> {
        let c = self.cap as i64;
        if self.dim == 1 {
            (-c..=c).map(|a| [a, 0]).collect()
        } else {
            (-c..=c).flat_map(|a| (-c..=c).map(move |b| [a, b])).collect()
        }
    }
}

fn accumulate(acc: &mut [Complex64], x: [f64; 2], dim: usize, cap: usize, base: f64, weight: f64) {
    let side = 2 * cap + 1;
    let px = powers(-base * x[0], cap);
    let at = |p: &[Complex64], m: i64| if m >= 0 { p[m as usize] } else { p[(-m) as usize].conj() };
    let c = cap as i64;
    if dim == 1 {
        for a in -c..=c {
            acc[(a + c) as usize] += at(&px, a) * weight;
        }
    } else {
        let py = powers(-base * x[1], cap);
        for a in -c..=c {
            let ea = at(&px, a) * weight;
            let row = (a + c) as usize * side;
            for b in -c..=c {
                acc[row + (b + c) as usize] += ea * at(&py, b);
            }
        }
    }
}

/// Exact empirical Fourier coefficients of `(1/N) Σ δ_{X_j}` on the mode box.
pub(crate) fn empirical_modes(positions: &[[f64; 2]], grid: &Grid, cap: usize) -> ModeBox {
    let dim = grid.dim();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let size = (2 * cap + 1).pow(dim as u32);
    let weight = 1.0 / positions.len() as f64;
    let partials: Vec<Vec<Complex64>> = positions
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::default(); size];
            for x in chunk {
                accumulate(&mut acc, *x, dim, cap, base, weight);
            }
            acc
        })
        .collect();
    let mut coeffs = vec![Complex64::default(); size];
    for p in &partials {
        for (c, v) in coeffs.iter_mut().zip(p) {
            *c += v;
        }
    }
    ModeBox { dim, cap, base, coeffs }
}

/// `(1/N) Σ_j p_t(x − X_j)` sampled on the grid, with `p_t` the wrapped heat kernel of variance `t`.
pub(crate) fn smoothed_density(modes: &ModeBox, grid: Grid, t: f64) -> SpectralField {
    let n = grid.n() as i64;
    let inv_vol = 1.0 / grid.volume();
    let mut spectrum = vec![Complex64::default(); grid.len()];
    for m in modes.modes() {
        let xi2 = modes.base * modes.base * (m[0] * m[0] + m[1] * m[1]) as f64;
        let idx = grid.flatten([m[0].rem_euclid(n) as usize, m[1].rem_euclid(n) as usize]);
        spectrum[idx] = modes.at(m) * ((-0.5 * t * xi2).exp() * inv_vol);
    }
    SpectralField::from_spectrum(grid, vec![spectrum]).expect("shape is consistent by construction")
}

/// The same smoothed density evaluated off-grid at every point of `points`.
pub(crate) fn smoothed_at_points(modes: &ModeBox, grid: &Grid, t: f64, points: &[[f64; 2]]) -> Vec<f64> {
    let inv_vol = 1.0 / grid.volume();
    let cap = modes.cap;
    let c = cap as i64;
    let base = modes.base;
    let damp: Vec<f64> = (0..=cap).map(|m| (-0.5 * t * base * base * (m * m) as f64).exp()).collect();
    points
        .par_iter()
        .map(|x| {
            let px = powers(base * x[0], cap);
            let at = |p: &[Complex64], m: i64| if m >= 0 { p[m as usize] } else { p[(-m) as usize].conj() };
            let mut acc = 0.0;
            if modes.dim == 1 {
                for a in -c..=c {
                    acc += (modes.at([a, 0]) * at(&px, a)).re * damp[a.unsigned_abs() as usize];
                }
            } else {
                let py = powers(base * x[1], cap);
                for a in -c..=c {
                    let ea = at(&px, a) * damp[a.unsigned_abs() as usize];
                    for b in -c..=c {
                        acc += (modes.at([a, b]) * ea * at(&py, b)).re * damp[b.unsigned_abs() as usize];
                    }
                }
            }
            acc * inv_vol
        })
        .collect()
}

/// Wrapped heat kernel of variance `t` by image summation.
pub fn wrapped_gaussian(dx: [f64; 2], dim: usize, length: f64, t: f64) -> f64 {
    let reach = ((12.0 * t.sqrt()) / length).ceil() as i64 + 1;
    let one = |d: f64| -> f64 {
        (-reach..=reach)
            .map(|k| {
                let y = d + k as f64 * length;
                (-y * y / (2.0 * t)).exp()
            })
            .sum::<f64>()
            / (2.0 * std::f64::consts::PI * t).sqrt()
    };
    if dim == 1 {
        one(dx[0])
    } else {
        one(dx[0]) * one(dx[1])
    }
}
