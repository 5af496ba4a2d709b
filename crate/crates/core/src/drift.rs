//! Random distributional drifts of prescribed Besov regularity and their
//! heat-semigroup mollifications `b^n = P_{1/n} b`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::besov;
use crate::error::{domain, usage, Result};
use crate::fit;
use crate::spectral::{gradient, heat_semigroup, Grid, SpectralField};

/// Time dependence of a drift: `b(t) = factor(t)·profile`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeMode {
    Static,
    Modulated { frequency: f64 },
}

impl TimeMode {
    pub fn factor(&self, t: f64) -> f64 {
        match *self {
            TimeMode::Static => 1.0,
            TimeMode::Modulated { frequency } => (2.0 * std::f64::consts::PI * frequency * t).cos(),
        }
    }
}

/// Anything that supplies a separable vector drift `factor(t)·profile(x)`.
pub trait DriftField: Send + Sync {
    fn profile(&self) -> &SpectralField;
    fn time_mode(&self) -> TimeMode;

    fn grid(&self) -> Grid {
        self.profile().grid()
    }

    fn at(&self, t: f64) -> SpectralField {
        match self.time_mode() {
            TimeMode::Static => self.profile().clone(),
            mode => self.profile().scale(mode.factor(t)),
        }
    }

    /// `‖b‖_{C_T C^γ}`. Both time modes attain `|factor| = 1` at `t = 0`, so the
    /// sup over time is the profile norm.
    fn sup_norm_in_time(&self, gamma: f64) -> Result<f64> {
        besov::norm(self.profile(), gamma)
    }

    fn is_zero(&self) -> bool {
        self.profile().sup_norm() == 0.0
    }
}

/// Key/value provenance record of a drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftManifest {
    pub seed: u64,
    pub regularity: f64,
    pub amplitude: f64,
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub time_mode: TimeMode,
}

impl DriftManifest {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifest is plain data")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| crate::Error::Format(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Drift {
    profile: SpectralField,
    time_mode: TimeMode,
    declared_regularity: f64,
    seed: u64,
    amplitude: f64,
}

fn stream_key(component: usize, m: [i64; 2]) -> u64 {
    const OFF: i64 = 1 << 19;
    ((component as u64) << 40) | (((m[0] + OFF) as u64) << 20) | (m[1] + OFF) as u64
}

/// Random trigonometric series `Σ_m A(1+|m|)^{-(d/2+s)}(a_m cos ξ_m·x + b_m sin ξ_m·x)`
/// with independent standard normal `a_m, b_m`. Each mode draws from its own
/// ChaCha stream, so low modes coincide across resolutions for a fixed seed.
/// Nyquist modes are left empty.
pub fn gaussian_series(grid: Grid, s: f64, seed: u64, components: usize, amplitude: f64) -> SpectralField {
    let n = grid.n() as i64;
    let d = grid.dim() as f64;
    let spectrum = (0..components)
        .map(|c| {
            let mut out = vec![Complex64::default(); grid.len()];
            if amplitude == 0.0 {
                return out;
            }
            for idx in 0..grid.len() {
                let m = grid.mode_vector(idx);
                let upper = m[0] > 0 || (m[0] == 0 && m[1] > 0);
                let nyquist = m[0].abs() == n / 2 || (grid.dim() == 2 && m[1].abs() == n / 2);
                if !upper || nyquist {
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream_key(c, m));
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                let norm = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
                let w = amplitude * (1.0 + norm).powf(-(0.5 * d + s));
                let z = Complex64::new(a, -b) * (0.5 * w);
                out[idx] = z;
                let neg = [(-m[0]).rem_euclid(n) as usize, (-m[1]).rem_euclid(n) as usize];
                out[grid.flatten(neg)] = z.conj();
            }
            out
        })
        .collect();
    SpectralField::from_spectrum(grid, spectrum).expect("shape is consistent by construction")
}

impl Drift {
    /// Random drift with target regularity `s ∈ (−1/2, 0)`.
    pub fn synthesize(grid: Grid, s: f64, seed: u64, time_mode: TimeMode) -> Result<Self> {
        Self::synthesize_scaled(grid, s, seed, time_mode, 1.0)
    }

    /// As [`Drift::synthesize`] with every coefficient multiplied by `amplitude`
    /// (`0` gives the zero drift).
    pub fn synthesize_scaled(grid: Grid, s: f64, seed: u64, time_mode: TimeMode, amplitude: f64) -> Result<Self> {
        if !(s > -0.5 && s < 0.0) {
            return domain(format!("drift regularity must lie in (-1/2, 0), got {s}"));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return domain(format!("amplitude must be finite and >= 0, got {amplitude}"));
        }
        if let TimeMode::Modulated { frequency } = time_mode {
            if !frequency.is_finite() {
                return domain("modulation frequency must be finite");
            }
        }
        let profile = gaussian_series(grid, s, seed, grid.dim(), amplitude);
        Ok(Self { profile, time_mode, declared_regularity: s, seed, amplitude })
    }

    pub fn zero(grid: Grid) -> Self {
        Self::from_profile(SpectralField::zeros(grid, grid.dim()), f64::INFINITY, TimeMode::Static)
            .expect("zero field has d components")
    }

    /// Spatially constant drift vector `c`.
    pub fn constant(grid: Grid, c: &[f64]) -> Result<Self> {
        Self::from_profile(SpectralField::constant(grid, c), f64::INFINITY, TimeMode::Static)
    }

    pub fn from_profile(profile: SpectralField, declared_regularity: f64, time_mode: TimeMode) -> Result<Self> {
        if profile.components() != profile.grid().dim() {
            return usage(format!("drift needs {} components, got {}", profile.grid().dim(), profile.components()));
        }
        Ok(Self { profile, time_mode, declared_regularity, seed: 0, amplitude: 1.0 })
    }

    pub fn declared_regularity(&self) -> f64 {
        self.declared_regularity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn manifest(&self) -> DriftManifest {
        let g = self.profile.grid();
        DriftManifest {
            seed: self.seed,
            regularity: self.declared_regularity,
            amplitude: self.amplitude,
            dim: g.dim(),
            n: g.n(),
            length: g.length(),
            time_mode: self.time_mode,
        }
    }

    /// Rebuilds a synthesized drift from its manifest.
    pub fn from_manifest(m: &DriftManifest) -> Result<Self> {
        let grid = Grid::new(m.dim, m.n, m.length)?;
        Self::synthesize_scaled(grid, m.regularity, m.seed, m.time_mode, m.amplitude)
    }
}

impl DriftField for Drift {
    fn profile(&self) -> &SpectralField {
        &self.profile
    }

    fn time_mode(&self) -> TimeMode {
        self.time_mode
    }
}

/// `b^n = P_{1/n} b` with derivative bounds.
#[derive(Debug, Clone)]
pub struct MollifiedDrift {
    base: Drift,
    index: usize,
    profile: SpectralField,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothnessReport {
    pub sup: f64,
    pub grad_sup: f64,
    pub hess_sup: f64,
}

pub fn mollify(b: &Drift, n: usize) -> Result<MollifiedDrift> {
    if n == 0 {
        return domain("mollification index must be >= 1");
    }
    let profile = heat_semigroup(b.profile(), 1.0 / n as f64)?;
    Ok(MollifiedDrift { base: b.clone(), index: n, profile })
}

impl MollifiedDrift {
    pub fn base(&self) -> &Drift {
        &self.base
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Sup norms of `b^n`, of its first derivatives and of its second derivatives.
    pub fn smoothness(&self) -> SmoothnessReport {
        let mut grad_sup = 0.0_f64;
        let mut hess_sup = 0.0_f64;
        for c in 0..self.profile.components() {
            let g = gradient(&self.profile.component(c)).expect("component is scalar");
            grad_sup = grad_sup.max(g.sup_norm());
            for a in 0..g.components() {
                let h = gradient(&g.component(a)).expect("component is scalar");
                hess_sup = hess_sup.max(h.sup_norm());
            }
        }
        SmoothnessReport { sup: self.profile.sup_norm(), grad_sup, hess_sup }
    }
}

impl DriftField for MollifiedDrift {
    fn profile(&self) -> &SpectralField {
        &self.profile
    }

    fn time_mode(&self) -> TimeMode {
        self.base.time_mode
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    /// `(n, ‖b^n − b‖_{C_T C^{−β}})`.
    pub distances: Vec<(usize, f64)>,
    pub slope: f64,
    /// `−(β − β′)/2 + 0.1`.
    pub required: f64,
    pub guaranteed: bool,
    pub pass: bool,
}

impl RateFit {
    pub fn verdict(&self) -> &'static str {
        if !self.guaranteed {
            "rate not guaranteed"
        } else if self.pass {
            "pass"
        } else {
            "fail"
        }
    }
}

/// Fits the slope of `log‖b^n − b‖_{−β}` against `log n`.
pub fn mollification_rate(b: &Drift, beta: f64, beta_prime: f64, n_list: &[usize]) -> Result<RateFit> {
    if n_list.len() < 3 {
        return usage(format!("need at least 3 mollification indices, got {}", n_list.len()));
    }
    if beta < beta_prime {
        return domain(format!("need β ≥ β′, got β = {beta}, β′ = {beta_prime}"));
    }
    let mut distances = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let bn = mollify(b, n)?;
        let diff = bn.profile().sub(b.profile())?;
        distances.push((n, besov::norm(&diff, -beta)?));
    }
    let xs: Vec<f64> = distances.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = distances.iter().map(|&(_, d)| d).collect();
    let slope = fit::log_log_slope(&xs, &ys);
    let required = -(beta - beta_prime) / 2.0 + 0.1;
    let guaranteed = beta > beta_prime;
    Ok(RateFit { distances, slope, required, guaranteed, pass: guaranteed && slope <= required })
}
