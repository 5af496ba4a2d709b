//! Euler–Maruyama particle systems on the torus: the SDE with drift frozen at
//! a solved density, the moderately interacting system, and kernel density
//! reconstruction of their laws.

mod deposit;
mod interp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::drift::DriftField;
use crate::error::{usage, Error, Result};
use crate::solver::{Nonlinearity, SolverResult};
use crate::spectral::{heat_semigroup, Grid, SpectralField};

pub use deposit::wrapped_gaussian;
pub use interp::interpolate;

/// Gaussian factors at Nyquist must fall below `e^{−27.6} ≈ 1e-12` for a kernel to count as resolved.
const RESOLVED_EXPONENT: f64 = 27.6;

/// Largest `N` for which the interaction sum may be evaluated pairwise.
pub const DIRECT_LIMIT: usize = 20_000;

fn particle_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Particle positions on the torus at one time, with the per-particle random
/// streams that continue the simulation.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    grid: Grid,
    pub positions: Vec<[f64; 2]>,
    pub t: f64,
    pub seed: u64,
    streams: Vec<ChaCha8Rng>,
}

impl ParticleEnsemble {
    /// Places particles at given points, wrapped into the box.
    pub fn from_positions(grid: Grid, positions: Vec<[f64; 2]>, seed: u64) -> Result<Self> {
        if positions.is_empty() {
            return usage("an ensemble needs at least one particle");
        }
        let positions = positions.into_iter().map(|x| [grid.wrap(x[0]), grid.wrap(x[1])]).collect::<Vec<_>>();
        let streams = (0..positions.len()).map(|i| particle_rng(seed, i)).collect();
        Ok(Self { grid, positions, t: 0.0, seed, streams })
    }

    /// Draws `n` particles from the density `v0`: inverse CDF of the
    /// piecewise-linear interpolant in one dimension, rejection from the cubic
    /// interpolant in two.
    pub fn sample(v0: &SpectralField, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return usage("an ensemble needs at least one particle");
        }
        if !v0.is_scalar() {
            return usage("the sampling density must be scalar");
        }
        let grid = v0.grid();
        let density: Vec<f64> = v0.values(0).iter().map(|v| v.max(0.0)).collect();
        let mut streams: Vec<ChaCha8Rng> = (0..n).map(|i| particle_rng(seed, i)).collect();
        let positions: Vec<[f64; 2]> = if grid.dim() == 1 {
            let cdf = Cdf::new(&grid, &density)?;
            streams.par_iter_mut().map(|rng| [cdf.invert(rng.random::<f64>()), 0.0]).collect()
        } else {
            let top = density.iter().cloned().fold(0.0, f64::max) * 1.25;
            if !(top > 0.0) {
                return usage("the sampling density vanishes");
            }
            let l = grid.length();
            streams
                .par_iter_mut()
                .map(|rng| loop {
                    let x = [rng.random::<f64>() * l, rng.random::<f64>() * l];
                    if rng.random::<f64>() * top <= interpolate(&grid, &density, x) {
                        break x;
                    }
                })
                .collect()
        };
        Ok(Self { grid, positions, t: 0.0, seed, streams })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of 32-bit words consumed so far on each particle stream.
    pub fn stream_counters(&self) -> Vec<u128> {
        self.streams.iter().map(|r| r.get_word_pos()).collect()
    }

    fn without_streams(&self) -> Self {
        Self { grid: self.grid, positions: self.positions.clone(), t: self.t, seed: self.seed, streams: Vec::new() }
    }

    pub fn mean(&self) -> [f64; 2] {
        let n = self.len() as f64;
        let mut m = [0.0; 2];
        for x in &self.positions {
            m[0] += x[0];
            m[1] += x[1];
        }
        [m[0] / n, m[1] / n]
    }

    /// `L/(2π)·sqrt(−2 ln R)` from the mean resultant length `R`, per axis, averaged.
    pub fn circular_spread(&self) -> f64 {
        let k = 2.0 * std::f64::consts::PI / self.grid.length();
        let n = self.len() as f64;
        let mut total = 0.0;
        for axis in 0..self.grid.dim() {
            let (s, c) =
                self.positions.iter().fold((0.0, 0.0), |(s, c), x| (s + (k * x[axis]).sin(), c + (k * x[axis]).cos()));
            let r = ((s / n).powi(2) + (c / n).powi(2)).sqrt().clamp(1e-300, 1.0);
            total += (-2.0 * r.ln()).sqrt() / k;
        }
        total / self.grid.dim() as f64
    }

    /// Positions as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = if self.grid.dim() == 1 { String::from("x\n") } else { String::from("x,y\n") };
        for x in &self.positions {
            if self.grid.dim() == 1 {
                out.push_str(&format!("{:.17e}\n", x[0]));
            } else {
                out.push_str(&format!("{:.17e},{:.17e}\n", x[0], x[1]));
            }
        }
        out
    }
}

/// Cumulative distribution of a piecewise-linear periodic density.
struct Cdf {
    grid: Grid,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Cdf {
    fn new(grid: &Grid, density: &[f64]) -> Result<Self> {
        let h = grid.spacing();
        let n = density.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let next = cumulative[i] + 0.5 * h * (density[i] + density[(i + 1) % n]);
            cumulative.push(next);
        }
        if !(cumulative[n] > 0.0) {
            return usage("the sampling density vanishes");
        }
        Ok(Self { grid: *grid, density: density.to_vec(), cumulative })
    }

    fn invert(&self, u: f64) -> f64 {
        let n = self.density.len();
        let target = u * self.cumulative[n];
        let i = self.cumulative.partition_point(|&c| c <= target).clamp(1, n) - 1;
        let r = target - self.cumulative[i];
        let h = self.grid.spacing();
        let (f0, f1) = (self.density[i], self.density[(i + 1) % n]);
        let slope = (f1 - f0) / h;
        // f0 s + slope s²/2 = r
        let s = if slope.abs() < 1e-300 {
            if f0 > 0.0 {
                r / f0
            } else {
                0.5 * h
            }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
            2.0 * r / (f0 + disc.sqrt()).max(1e-300)
        };
        self.grid.wrap(i as f64 * h + s.clamp(0.0, h))
    }
}

/// Snapshots of an ensemble at requested times.
#[derive(Debug, Clone)]
pub struct ParticleTrajectory {
    pub snapshots: Vec<ParticleEnsemble>,
    pub dt: f64,
}

impl ParticleTrajectory {
    pub fn last(&self) -> &ParticleEnsemble {
        self.snapshots.last().expect("trajectories keep at least the initial snapshot")
    }
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return usage(format!("time step must be positive, got {dt}"));
    }
    let steps = (horizon / dt).round();
    if (steps * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return usage(format!("time step {dt} does not divide the horizon {horizon}"));
    }
    Ok(steps as usize)
}

fn snapshot_steps(times: &[f64], dt: f64, steps: usize) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = times
        .iter()
        .map(|&t| {
            let k = (t / dt).round();
            if (k * dt - t).abs() > 1e-9 * t.max(1.0) || k < 0.0 || k as usize > steps {
                return usage(format!("snapshot time {t} is not a step of the simulation"));
            }
            Ok(k as usize)
        })
        .collect::<Result<_>>()?;
    out.push(0);
    out.push(steps);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Euler–Maruyama for `dX = F(v(t,X)) b(t,X) dt + dW` with `v` a converged
/// solver trajectory. `dt` must divide the solver's time step; the frozen
/// drift is linear in time between solver nodes.
pub fn simulate_frozen(
    v: &SolverResult,
    b: &dyn DriftField,
    f: Nonlinearity,
    n: usize,
    dt: f64,
    seed: u64,
    snapshot_times: &[f64],
) -> Result<ParticleTrajectory> {
    let converged = v.distances.last().is_some_and(|d| *d <= v.params.picard_tol);
    if !converged {
        return usage("the solver trajectory has not converged");
    }
    let grid = v.v.grid();
    if b.grid() != grid {
        return usage("drift and solution live on different grids");
    }
    let tg = v.params.time_grid;
    let ratio = tg.dt() / dt;
    if !(ratio >= 1.0 - 1e-9) || (ratio - ratio.round()).abs() > 1e-9 {
        return usage(format!("particle step {dt} must divide the solver step {}", tg.dt()));
    }
    let sub = ratio.round() as usize;
    let steps = tg.steps() * sub;
    let dt = tg.dt() / sub as f64;
    let marks = snapshot_steps(snapshot_times, dt, steps)?;
    let d = grid.dim();
    let frozen: Vec<Vec<Vec<f64>>> = tg
        .nodes()
        .par_iter()
        .zip(v.v.nodes().par_iter())
        .map(|(&t, vk)| {
            let bk = b.at(t);
            (0..d).map(|c| vk.values(0).iter().zip(bk.values(c)).map(|(&z, &bb)| f.gain(z) * bb).collect()).collect()
        })
        .collect();
    let start = ParticleEnsemble::sample(v.v.at(0), n, seed)?;
    let sqrt_dt = dt.sqrt();
    let mut paths: Vec<(Vec<[f64; 2]>, ChaCha8Rng)> = start
        .positions
        .par_iter()
        .zip(start.streams.into_par_iter())
        .map(|(x0, mut rng)| {
            let mut x = *x0;
            let mut record = Vec::with_capacity(marks.len());
            let mut next = 0;
            for s in 0..=steps {
                if next < marks.len() && marks[next] == s {
                    record.push(x);
                    next += 1;
                }
                if s == steps {
                    break;
                }
                let node = s / sub;
                let frac = (s % sub) as f64 / sub as f64;
                for c in 0..d {
                    let mut drift = interpolate(&grid, &frozen[node][c], x);
                    if frac > 0.0 {
                        let ahead = interpolate(&grid, &frozen[node + 1][c], x);
                        drift += frac * (ahead - drift);
                    }
                    let z: f64 = rng.sample(StandardNormal);
                    x[c] = grid.wrap(x[c] + drift * dt + sqrt_dt * z);
                }
            }
            (record, rng)
        })
        .collect();
    let streams: Vec<ChaCha8Rng> = paths.iter_mut().map(|(_, r)| r.clone()).collect();
    let mut snapshots: Vec<ParticleEnsemble> = marks
        .iter()
        .enumerate()
        .map(|(i, &s)| ParticleEnsemble {
            grid,
            positions: paths.iter().map(|(rec, _)| rec[i]).collect(),
            t: s as f64 * dt,
            seed,
            streams: Vec::new(),
        })
        .collect();
    snapshots.last_mut().expect("at least one snapshot").streams = streams;
    Ok(ParticleTrajectory { snapshots, dt })
}

/// How the interaction density `(1/N) Σ_j p_ε(X^j − X^i)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// Pairwise sum of wrapped Gaussians.
    Direct,
    /// Exact Fourier deposit over the modes where `p̂_ε` is not negligible.
    Spectral,
}

fn check_kernel_resolved(grid: &Grid, variance: f64, what: &str) -> Result<()> {
    let nyq = grid.nyquist();
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("{what} must be positive, got {variance}")));
    }
    if 0.5 * variance * nyq * nyq < RESOLVED_EXPONENT {
        return Err(Error::Resolution(format!(
            "{what} {variance:.3e} is not resolved at N = {} (needs ≥ {:.3e})",
            grid.n(),
            2.0 * RESOLVED_EXPONENT / (nyq * nyq)
        )));
    }
    Ok(())
}

/// Interaction density `(1/N) Σ_j p_ε(X^j − x)` at every particle.
pub fn interaction_density(ensemble: &ParticleEnsemble, epsilon: f64, mode: InteractionMode) -> Result<Vec<f64>> {
    let grid = ensemble.grid;
    check_kernel_resolved(&grid, epsilon, "interaction scale ε")?;
    let pos = &ensemble.positions;
    match mode {
        InteractionMode::Direct => {
            if pos.len() > DIRECT_LIMIT {
                return usage(format!("direct interaction sums are limited to N ≤ {DIRECT_LIMIT}"));
            }
            let n = pos.len() as f64;
            let d = grid.dim();
            let l = grid.length();
            Ok(pos
                .par_iter()
                .map(|xi| {
                    pos.iter().map(|xj| wrapped_gaussian([xj[0] - xi[0], xj[1] - xi[1]], d, l, epsilon)).sum::<f64>()
                        / n
                })
                .collect())
        }
        InteractionMode::Spectral => {
            let cap = deposit::mode_cap(&grid, epsilon);
            let modes = deposit::empirical_modes(pos, &grid, cap);
            Ok(deposit::smoothed_at_points(&modes, &grid, epsilon, pos))
        }
    }
}

/// Euler–Maruyama for the moderately interacting system
/// `dX^i = F((1/N) Σ_j p_ε(X^j − X^i)) b(t, X^i) dt + dW^i`, started from `v0`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_interacting(
    v0: &SpectralField,
    b: &dyn DriftField,
    f: Nonlinearity,
    n: usize,
    epsilon: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    mode: InteractionMode,
    snapshot_times: &[f64],
) -> Result<ParticleTrajectory> {
    let grid = v0.grid();
    if b.grid() != grid {
        return usage("drift and initial density live on different grids");
    }
    check_kernel_resolved(&grid, epsilon, "interaction scale ε")?;
    let steps = step_count(horizon, dt)?;
    let dt = horizon / steps as f64;
    let marks = snapshot_steps(snapshot_times, dt, steps)?;
    let mut ens = ParticleEnsemble::sample(v0, n, seed)?;
    let mut snapshots = Vec::new();
    let d = grid.dim();
    let sqrt_dt = dt.sqrt();
    let mut next = 0;
    for s in 0..=steps {
        ens.t = s as f64 * dt;
        if next < marks.len() && marks[next] == s {
            snapshots.push(ens.without_streams());
            next += 1;
        }
        if s == steps {
            break;
        }
        let rho = interaction_density(&ens, epsilon, mode)?;
        let bt = b.at(ens.t);
        let bvals: Vec<&[f64]> = (0..d).map(|c| bt.values(c)).collect();
        ens.positions.par_iter_mut().zip(ens.streams.par_iter_mut()).zip(rho.par_iter()).for_each(|((x, rng), &r)| {
            let gain = f.gain(r);
            let here = *x;
            for c in 0..d {
                let drift = gain * interpolate(&grid, bvals[c], here);
                let z: f64 = rng.sample(StandardNormal);
                x[c] = grid.wrap(here[c] + drift * dt + sqrt_dt * z);
            }
        });
    }
    snapshots.last_mut().expect("at least one snapshot").streams = ens.streams;
    Ok(ParticleTrajectory { snapshots, dt })
}

/// Unit-mass wrapped Gaussian density of variance `variance` centred at `centre`.
pub fn gaussian_density(grid: Grid, centre: [f64; 2], variance: f64) -> Result<SpectralField> {
    if !(variance > 0.0) {
        return Err(Error::Domain(format!("variance must be positive, got {variance}")));
    }
    let (d, l) = (grid.dim(), grid.length());
    Ok(SpectralField::from_fn(grid, 1, |x, _| wrapped_gaussian([x[0] - centre[0], x[1] - centre[1]], d, l, variance)))
}

/// Kernel density estimate on the grid.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    pub field: SpectralField,
    pub bandwidth: f64,
    pub particles: usize,
}

/// `max(2 grid spacings, N^{−1/(d+4)}·spread)`.
pub fn default_bandwidth(ensemble: &ParticleEnsemble) -> f64 {
    let grid = ensemble.grid;
    let d = grid.dim() as f64;
    let rule = (ensemble.len() as f64).powf(-1.0 / (d + 4.0)) * ensemble.circular_spread();
    rule.max(2.0 * grid.spacing())
}

/// Wrapped-Gaussian KDE `(1/N) Σ_j p_{h²}(x − X_j)`, computed as the heat
/// flow over time `h²` of the empirical measure by exact Fourier deposit.
pub fn kde_density(ensemble: &ParticleEnsemble, bandwidth: f64) -> Result<EmpiricalDensity> {
    let grid = ensemble.grid;
    if !(bandwidth >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
        return Err(Error::Resolution(format!(
            "bandwidth {bandwidth:.3e} is below two grid spacings ({:.3e})",
            2.0 * grid.spacing()
        )));
    }
    let t = bandwidth * bandwidth;
    let cap = deposit::mode_cap(&grid, t);
    let modes = deposit::empirical_modes(&ensemble.positions, &grid, cap);
    Ok(EmpiricalDensity { field: deposit::smoothed_density(&modes, grid, t), bandwidth, particles: ensemble.len() })
}

/// One row of a law comparison.
#[derive(Debug, Clone, Serialize)]
pub struct LawRow {
    pub time: f64,
    pub l1: f64,
    pub sup: f64,
    pub particles: usize,
    pub bandwidth: f64,
    pub seed: u64,
}

/// KDE of each snapshot against the bandwidth-smoothed solver density at the same time.
pub fn law_vs_pde(trajectory: &ParticleTrajectory, v: &SolverResult, bandwidth: f64) -> Result<Vec<LawRow>> {
    let tg = v.params.time_grid;
    trajectory
        .snapshots
        .iter()
        .map(|snap| {
            let k = tg.nearest(snap.t);
            if (tg.node(k) - snap.t).abs() > 1e-9 * tg.horizon().max(1.0) {
                return usage(format!("snapshot time {} is not a solver node", snap.t));
            }
            let kde = kde_density(snap, bandwidth)?;
            let pde = heat_semigroup(v.v.at(k), bandwidth * bandwidth)?;
            Ok(LawRow {
                time: snap.t,
                l1: kde.field.l1_distance(&pde)?,
                sup: kde.field.sup_distance(&pde)?,
                particles: snap.len(),
                bandwidth,
                seed: snap.seed,
            })
        })
        .collect()
}

/// Comparison rows as CSV.
pub fn law_csv(rows: &[LawRow]) -> String {
    let mut out = String::from("time,l1,sup,particles,bandwidth,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6e},{:.6e},{:.6e},{},{:.6e},{}\n",
            r.time, r.l1, r.sup, r.particles, r.bandwidth, r.seed
        ));
    }
    out
}

/// Euler–Maruyama estimate of `E[g(X_T)]` for `dX = a(t, X) dt + dW` on the
/// torus, with per-path streams. Used to probe the weak order of the scheme.
pub fn euler_maruyama_mean(
    grid: Grid,
    start: &[[f64; 2]],
    drift: impl Fn(f64, [f64; 2]) -> [f64; 2] + Sync,
    observable: impl Fn([f64; 2]) -> f64 + Sync,
    horizon: f64,
    steps: usize,
    seed: u64,
) -> f64 {
    let dt = horizon / steps as f64;
    let sq = dt.sqrt();
    let d = grid.dim();
    let total: f64 = start
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let mut rng = particle_rng(seed, i);
            let mut x = *x0;
            for s in 0..steps {
                let a = drift(s as f64 * dt, x);
                for c in 0..d {
                    let z: f64 = rng.sample(StandardNormal);
                    x[c] = grid.wrap(x[c] + a[c] * dt + sq * z);
                }
            }
            observable(x)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / start.len() as f64
}
