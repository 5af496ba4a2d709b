//! Numerical check of the fractional Gronwall inequality:
//! `f(t) ≤ a(t) + g(t)∫₀ᵗ(t−s)^{η−1}f(s)ds` implies `f(t) ≤ a(t)E_η(g(t)Γ(η)t^η)`.

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::mittag_leffler::mittag_leffler;
use crate::error::{domain, usage, Result};

pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GronwallVerdict {
    /// The conclusion holds at every node.
    Holds,
    /// The conclusion fails at the given node index.
    Fails { node: usize, f: f64, bound: f64 },
    /// The hypothesis inequality does not hold; no verdict on the conclusion.
    HypothesisViolated { node: usize },
}

/// Product-integration weights for `∫₀^{t_k}(t_k − s)^{η−1} f(s) ds` with `f`
/// piecewise linear on `times`. Row `k` holds the weight of every node `j ≤ k`.
pub fn singular_weights(times: &[f64], eta: f64) -> Vec<Vec<f64>> {
    (0..times.len())
        .map(|k| {
            let mut w = vec![0.0; k + 1];
            for j in 0..k {
                let h = times[j + 1] - times[j];
                let ua = times[k] - times[j];
                let ub = times[k] - times[j + 1];
                let i0 = (ua.powf(eta) - ub.powf(eta)) / eta;
                let i1 = (ua.powf(eta + 1.0) - ub.powf(eta + 1.0)) / (eta + 1.0);
                w[j] += (i1 - ub * i0) / h;
                w[j + 1] += (ua * i0 - i1) / h;
            }
            w
        })
        .collect()
}

/// Checks the hypothesis by quadrature, then the conclusion at every node.
pub fn gronwall_oracle(times: &[f64], f: &[f64], a: &[f64], g: &[f64], eta: f64) -> Result<GronwallVerdict> {
    if !(eta > 0.0) {
        return domain(format!("η must be positive, got {eta}"));
    }
    let n = times.len();
    if n < 2 || f.len() != n || a.len() != n || g.len() != n {
        return usage("f, a, g must be sampled on the same time nodes (at least two)");
    }
    if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return usage("time nodes must start at 0 and increase strictly");
    }
    let nonneg = |v: &[f64]| v.iter().all(|&x| x >= 0.0);
    let nondecreasing = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
    if !nonneg(f) || !nonneg(a) || !nonneg(g) || !nondecreasing(a) || !nondecreasing(g) {
        return usage("need f, a, g >= 0 with a and g nondecreasing");
    }
    let weights = singular_weights(times, eta);
    for k in 0..n {
        let integral: f64 = weights[k].iter().zip(f).map(|(w, v)| w * v).sum();
        let rhs = a[k] + g[k] * integral;
        if f[k] > rhs + QUADRATURE_TOLERANCE * rhs.max(1.0) {
            return Ok(GronwallVerdict::HypothesisViolated { node: k });
        }
    }
    let gamma_eta = gamma(eta);
    for k in 0..n {
        let bound = a[k] * mittag_leffler(eta, g[k] * gamma_eta * times[k].powf(eta))?;
        if f[k] > bound + QUADRATURE_TOLERANCE * bound.max(1.0) {
            return Ok(GronwallVerdict::Fails { node: k, f: f[k], bound });
        }
    }
    Ok(GronwallVerdict::Holds)
}

/// Solves `f = a + g∫₀ᵗ(t−s)^{η−1}f ds` on the nodes with the same quadrature
/// (the implicit diagonal term is resolved exactly).
pub fn solve_volterra(times: &[f64], a: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    let weights = singular_weights(times, eta);
    let mut f = vec![0.0; times.len()];
    for k in 0..times.len() {
        let known: f64 = weights[k][..k].iter().zip(&f[..k]).map(|(w, v)| w * v).sum();
        f[k] = (a[k] + g[k] * known) / (1.0 - g[k] * weights[k][k]);
    }
    f
}
