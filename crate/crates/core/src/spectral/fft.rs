//! Thin n-dimensional wrappers over `rustfft` with a process-wide plan cache.
//!
//! Forward transforms are normalised by `1/n^d`, so the zero mode is the mean
//! and `values = Σ_m c_m e^{iξ_m·x}`.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    p.plan_fft(n, direction)
}

fn transform(data: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, direction);
    match dim {
        1 => fft.process(data),
        2 => {
            // rows are contiguous; columns go through a scratch buffer
            fft.process(data);
            let mut column = vec![Complex64::default(); n];
            for c in 0..n {
                for r in 0..n {
                    column[r] = data[r * n + c];
                }
                fft.process(&mut column);
                for r in 0..n {
                    data[r * n + c] = column[r];
                }
            }
        }
        _ => unreachable!("grids are 1-D or 2-D"),
    }
}

/// Normalised forward transform of real samples.
pub fn forward_real(values: &[f64], n: usize, dim: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut data, n, dim);
    data
}

pub fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

pub fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Inverse);
}

/// Inverse transform returning the complex samples (used for Hermitian-symmetry checks).
pub fn inverse_complex(coeffs: &[Complex64], n: usize, dim: usize) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    inverse(&mut data, n, dim);
    data
}

/// Inverse transform keeping only the real part.
pub fn inverse_real(coeffs: &[Complex64], n: usize, dim: usize) -> Vec<f64> {
    inverse_complex(coeffs, n, dim).into_iter().map(|c| c.re).collect()
}
