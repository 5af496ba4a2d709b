//! The verification suites: the ten acceptance criteria at their pinned
//! sizes and tolerances, and a reduced invariant suite for quick checks.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;
use sfp_core::besov::{decompose_with, estimate_harness, EstimateKind, EstimateParams, Partition};
use sfp_core::drift::{gaussian_series, DriftField};
use sfp_core::fit;
use sfp_core::particles::{
    default_bandwidth, gaussian_density, kde_density, law_vs_pde, simulate_frozen, simulate_interacting,
    InteractionMode, ParticleEnsemble,
};
use sfp_core::solver::{
    gronwall_oracle, mittag_leffler, pick_contraction_params, solve_picard, solve_picard_from, solve_volterra,
    stability_in_b, weighted_distance, GronwallVerdict, Nonlinearity, SolverParams, SolverResult, Trajectory,
    WorkingConstant,
};
use sfp_core::spectral::heat_semigroup;
use sfp_core::{besov, mollification_rate, mollify, Drift, Grid, MollifiedDrift, SpectralField, TimeGrid, TimeMode};
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

/// Verdict of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    /// The headline measured number.
    pub value: f64,
    /// The bound it is compared against.
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} value={:.3e} threshold={:.3e} ({:.1}s) {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.threshold,
            self.seconds,
            self.detail
        )
    }
}

/// Problem sizes of a suite.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub n: usize,
    pub steps: usize,
    pub instances: u64,
    pub ladder_instances: u64,
    pub particles: usize,
    pub interacting: usize,
}

impl Scale {
    pub fn full() -> Self {
        Self { n: 512, steps: 200, instances: 5, ladder_instances: 3, particles: 100_000, interacting: 20_000 }
    }

    pub fn fast() -> Self {
        Self { n: 256, steps: 100, instances: 2, ladder_instances: 1, particles: 20_000, interacting: 5_000 }
    }
}

/// Shared settings of the rough-drift instances.
pub const ALPHA: f64 = 0.35;
pub const BETA: f64 = 0.25;
pub const BETA_PRIME: f64 = 0.2;
pub const MOLLIFY: usize = 64;
pub const HORIZON: f64 = 0.25;
pub const INITIAL_VARIANCE: f64 = 0.25;

/// Summary of one converged solve, kept for the cross-run criteria.
#[derive(Debug, Clone)]
struct RunRecord {
    label: String,
    mass_drift: f64,
    sup_norm: f64,
    bound: Option<f64>,
}

pub struct Suite {
    pub scale: Scale,
    pub partition: Partition,
    pub constant: WorkingConstant,
    records: Vec<RunRecord>,
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn failed(id: usize, name: &str, err: impl std::fmt::Display, t: Instant) -> Outcome {
    Outcome {
        id,
        name: name.into(),
        pass: false,
        value: f64::NAN,
        threshold: f64::NAN,
        detail: format!("error: {err}"),
        seconds: secs(t),
    }
}

/// An instance of the rough-drift problem used across criteria.
pub struct Instance {
    pub seed: u64,
    pub v0: SpectralField,
    pub raw: Drift,
    pub drift: MollifiedDrift,
}

pub fn instance(n: usize, seed: u64) -> sfp_core::Result<Instance> {
    let grid = Grid::new(1, n, 2.0 * PI)?;
    let v0 = gaussian_density(grid, [PI, 0.0], INITIAL_VARIANCE)?;
    let raw = Drift::synthesize(grid, -BETA_PRIME, seed, TimeMode::Static)?;
    let drift = mollify(&raw, MOLLIFY)?;
    Ok(Instance { seed, v0, raw, drift })
}

impl Suite {
    pub fn new(scale: Scale, partition: Partition) -> sfp_core::Result<Self> {
        let schauder = estimate_harness(&EstimateParams::default_for(EstimateKind::Schauder))?;
        Ok(Self { scale, partition, constant: WorkingConstant::from_schauder(&schauder), records: Vec::new() })
    }

    pub fn params(&self, steps: usize) -> sfp_core::Result<SolverParams> {
        let mut p = SolverParams::new(ALPHA, BETA, TimeGrid::new(HORIZON, steps)?)?;
        p.working_constant = self.constant.0;
        p.density_mode = true;
        Ok(p)
    }

    fn record(&mut self, label: impl Into<String>, r: &SolverResult) {
        self.records.push(RunRecord {
            label: label.into(),
            mass_drift: r.mass_drift(),
            sup_norm: r.sup_norm,
            bound: r.apriori_k,
        });
    }

    /// Translated heat solution for `F ≡ 1` and a constant drift.
    pub fn translation(&mut self) -> Outcome {
        let (id, name) = (1, "translation oracle");
        let t = Instant::now();
        let run = || -> sfp_core::Result<(f64, SolverResult)> {
            let grid = Grid::new(1, self.scale.n, 2.0 * PI)?;
            let c = 0.5;
            let v0 = gaussian_density(grid, [PI, 0.0], INITIAL_VARIANCE)?;
            let b = Drift::constant(grid, &[c])?;
            let p = self.params(self.scale.steps)?;
            let r = solve_picard(&v0, &b, Nonlinearity::Constant { kappa: 1.0 }, &p)?;
            let mut err = 0.0_f64;
            for (k, &tk) in p.time_grid.nodes().iter().enumerate() {
                let exact = gaussian_density(grid, [PI + c * tk, 0.0], INITIAL_VARIANCE + tk)?;
                err = err.max(r.v.at(k).sup_distance(&exact)?);
            }
            Ok((err, r))
        };
        match run() {
            Ok((err, r)) => {
                self.record("translation", &r);
                let seconds = secs(t);
                Outcome {
                    id,
                    name: name.into(),
                    pass: err <= 1e-5 && seconds <= 30.0,
                    value: err,
                    threshold: 1e-5,
                    detail: format!("sup error over all nodes, {} iterations, runtime limit 30 s", r.iterations()),
                    seconds,
                }
            }
            Err(e) => failed(id, name, e, t),
        }
    }

    /// Contraction of the Picard map in `d_ρ` and uniqueness of its fixed point.
    pub fn contraction_and_uniqueness(&mut self) -> (Outcome, Outcome) {
        let t = Instant::now();
        let mut worst_ratio = 0.0_f64;
        let mut worst_trend = 0.0_f64;
        let mut worst_gap = 0.0_f64;
        let mut notes = Vec::new();
        let mut error = None;
        for seed in 1..=self.scale.instances {
            match self.contraction_instance(seed) {
                Ok((ratio, trend, gap, note)) => {
                    worst_ratio = worst_ratio.max(ratio);
                    worst_trend = worst_trend.max(trend);
                    worst_gap = worst_gap.max(gap);
                    notes.push(note);
                }
                Err(e) => {
                    error = Some(format!("seed {seed}: {e}"));
                    break;
                }
            }
        }
        let seconds = secs(t);
        if let Some(e) = error {
            return (failed(2, "contraction", &e, t), failed(3, "uniqueness probe", &e, t));
        }
        let contraction = Outcome {
            id: 2,
            name: "contraction".into(),
            pass: worst_ratio <= 0.9 && worst_trend <= 3.0,
            value: worst_ratio,
            threshold: 0.9,
            detail: format!(
                "max ratio at 4ρ₀ over iterations ≥ 2; ρ^θ-normalised spread {worst_trend:.3} (limit 3); {}",
                notes.join("; ")
            ),
            seconds,
        };
        let uniqueness = Outcome {
            id: 3,
            name: "uniqueness probe".into(),
            pass: worst_gap <= 1e-7,
            value: worst_gap,
            threshold: 1e-7,
            detail: format!("{} instances, distance of fixed points in d_0 (bounds d_ρ)", self.scale.instances),
            seconds,
        };
        (contraction, uniqueness)
    }

    fn contraction_instance(&mut self, seed: u64) -> sfp_core::Result<(f64, f64, f64, String)> {
        let inst = instance(self.scale.n, seed)?;
        let p = self.params(self.scale.steps)?;
        let b_norm = inst.drift.sup_norm_in_time(-BETA)?;
        let v0_norm = besov::norm(&inst.v0, ALPHA)?;
        let cp = pick_contraction_params(b_norm, ALPHA, BETA, v0_norm, self.constant)?;
        let r = solve_picard(&inst.v0, &inst.drift, Nonlinearity::Arctan, &p)?;
        self.record(format!("contraction seed {seed}"), &r);
        let late = |rho: f64| -> Vec<f64> { r.ratios_at(rho).into_iter().filter(|x| x.0 >= 2).map(|x| x.1).collect() };
        let at4 = late(4.0 * cp.rho0);
        let ratio = at4.iter().cloned().fold(0.0, f64::max);
        let scaled: Vec<f64> = [1.0, 4.0, 16.0]
            .iter()
            .map(|m| {
                let rho = m * cp.rho0;
                late(rho).iter().cloned().fold(0.0, f64::max) * rho.powf(cp.theta)
            })
            .collect();
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let trend = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        // second start: a smooth random element of the ball, vanishing at t = 0
        let g = gaussian_series(inst.v0.grid(), 1.5, seed + 1000, 1, 0.2);
        let tg = p.time_grid;
        let start = Trajectory::new(tg, tg.nodes().iter().map(|&t| g.scale(t / tg.horizon())).collect())?;
        let r2 = solve_picard_from(&inst.v0, &inst.drift, Nonlinearity::Arctan, &p, start)?;
        self.record(format!("uniqueness seed {seed}"), &r2);
        let gap = weighted_distance(&r.w, &r2.w, 0.0, ALPHA)?;
        let note = format!(
            "seed {seed}: ρ₀={:.2e}, {} iterations, max ratio {ratio:.3}, d_0 gap {gap:.1e}",
            cp.rho0,
            r.iterations()
        );
        Ok((ratio, trend, gap, note))
    }

    pub fn mass(&self) -> Outcome {
        let t = Instant::now();
        let worst = self.records.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
        Outcome {
            id: 4,
            name: "mass conservation".into(),
            pass: !self.records.is_empty() && worst <= 1e-12,
            value: worst,
            threshold: 1e-12,
            detail: format!("max |mean v(t_k) − mean v0| over {} converged runs", self.records.len()),
            seconds: secs(t),
        }
    }

    pub fn apriori(&self) -> Outcome {
        let t = Instant::now();
        let mut failures = Vec::new();
        let mut worst = 0.0_f64;
        for r in &self.records {
            match r.bound {
                Some(k) => {
                    worst = worst.max(r.sup_norm / k);
                    if r.sup_norm > k {
                        failures.push(r.label.clone());
                    }
                }
                None => failures.push(format!("{} (bound out of range)", r.label)),
            }
        }
        let ml = mittag_leffler_checks();
        let gw = gronwall_checks();
        let detail = format!(
            "max sup‖v‖_α/K over {} runs (c = {:.3}); Mittag-Leffler: {}; Gronwall: {}{}",
            self.records.len(),
            self.constant.0,
            ml.1,
            gw.1,
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
        );
        Outcome {
            id: 5,
            name: "a-priori bound".into(),
            pass: !self.records.is_empty() && failures.is_empty() && ml.0 && gw.0,
            value: worst,
            threshold: 1.0,
            detail,
            seconds: secs(t),
        }
    }

    pub fn mollification(&self) -> Outcome {
        let (id, name) = (6, "mollification rate");
        let t = Instant::now();
        let mut worst = f64::NEG_INFINITY;
        let mut required = f64::NAN;
        let mut all = true;
        for seed in 1..=3 {
            let fit = Grid::new(1, self.scale.n, 2.0 * PI)
                .and_then(|g| Drift::synthesize(g, -BETA_PRIME, seed, TimeMode::Static))
                .and_then(|b| mollification_rate(&b, 0.4, BETA_PRIME, &[4, 16, 64, 256]));
            match fit {
                Ok(f) => {
                    worst = worst.max(f.slope);
                    required = f.required;
                    all &= f.pass;
                }
                Err(e) => return failed(id, name, e, t),
            }
        }
        let seconds = secs(t);
        Outcome {
            id,
            name: name.into(),
            pass: all && seconds <= 60.0,
            value: worst,
            threshold: required,
            detail: "largest fitted slope of ‖b^n − b‖_{−0.4} over n ∈ {4,16,64,256}, 3 drifts of regularity −0.2"
                .into(),
            seconds,
        }
    }

    pub fn estimates(&self) -> Outcome {
        let (id, name) = (7, "estimate suites");
        let t = Instant::now();
        let mut worst_var = 0.0_f64;
        let mut notes = Vec::new();
        let mut all = true;
        for kind in EstimateKind::ALL {
            let mut p = EstimateParams::default_for(kind);
            p.resolutions = vec![128, 256, 512];
            match estimate_harness(&p) {
                Ok(rep) => {
                    worst_var = worst_var.max(rep.variation);
                    all &= rep.pass;
                    notes.push(format!("{} c={:.3} var={:.3}", kind.name(), rep.fitted_constant, rep.variation));
                }
                Err(e) => return failed(id, name, e, t),
            }
        }
        let recon = match reconstruction_error(&self.partition) {
            Ok(r) => r,
            Err(e) => return failed(id, name, e, t),
        };
        let recon_ok = recon <= 1e-10;
        if !recon_ok {
            notes.push(format!("partition-of-unity reconstruction FAILED: {recon:.3e} > 1e-10"));
        } else {
            notes.push(format!("reconstruction {recon:.1e}"));
        }
        Outcome {
            id,
            name: name.into(),
            pass: all && recon_ok,
            value: worst_var,
            threshold: 0.25,
            detail: notes.join("; "),
            seconds: secs(t),
        }
    }

    pub fn stability(&mut self) -> Outcome {
        let (id, name) = (8, "stability in b");
        let t = Instant::now();
        let mut notes = Vec::new();
        let mut all = true;
        let mut worst = 0.0_f64;
        for seed in 1..=self.scale.ladder_instances {
            match self.ladder_instance(seed) {
                Ok((pass, spread, note)) => {
                    all &= pass;
                    worst = worst.max(spread);
                    notes.push(note);
                }
                Err(e) => return failed(id, name, format!("seed {seed}: {e}"), t),
            }
        }
        Outcome {
            id,
            name: name.into(),
            pass: all,
            value: worst,
            threshold: 2.0,
            detail: format!(
                "distances to the n = 1024 solution must decrease; ratio to ‖b^n − b‖_{{−β}} ≤ 2× its n = 16 value; {}",
                notes.join("; ")
            ),
            seconds: secs(t),
        }
    }

    fn ladder_instance(&mut self, seed: u64) -> sfp_core::Result<(bool, f64, String)> {
        let inst = instance(self.scale.n, seed)?;
        let p = self.params(self.scale.steps)?;
        let top = mollify(&inst.raw, 1024)?;
        let mut dists = Vec::new();
        let mut ratios = Vec::new();
        for n in [16usize, 64, 256] {
            let bn = mollify(&inst.raw, n)?;
            let (rep, r1, r2) = stability_in_b(&inst.v0, &bn, &top, Nonlinearity::Arctan, &p)?;
            self.record(format!("ladder seed {seed} n {n}"), &r1);
            if n == 16 {
                self.record(format!("ladder seed {seed} reference"), &r2);
            }
            let db = besov::norm(&bn.profile().sub(inst.raw.profile())?, -BETA)?;
            dists.push(rep.distance);
            ratios.push(rep.distance / db);
        }
        let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
        let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios[0];
        let pass = decreasing && ratios.iter().all(|r| r.is_finite()) && spread <= 2.0;
        let note = format!(
            "seed {seed}: distances {:.3e}/{:.3e}/{:.3e}, ratios {:.3}/{:.3}/{:.3}",
            dists[0], dists[1], dists[2], ratios[0], ratios[1], ratios[2]
        );
        Ok((pass, spread, note))
    }

    pub fn mckean(&mut self) -> Outcome {
        let (id, name) = (9, "McKean consistency");
        let t = Instant::now();
        match self.mckean_inner() {
            Ok((l1, calib, inter, note)) => {
                let seconds = secs(t);
                let threshold = 0.05;
                Outcome {
                    id,
                    name: name.into(),
                    pass: l1 <= threshold && l1 <= 2.0 * calib && inter <= 2.0 * threshold && seconds <= 600.0,
                    value: l1,
                    threshold,
                    detail: format!(
                        "L¹(frozen KDE, smoothed PDE) at T; 2× calibration = {:.4}; interacting vs frozen {inter:.4} (limit {:.2}); {note}",
                        2.0 * calib,
                        2.0 * threshold
                    ),
                    seconds,
                }
            }
            Err(e) => failed(id, name, e, t),
        }
    }

    fn mckean_inner(&mut self) -> sfp_core::Result<(f64, f64, f64, String)> {
        let inst = instance(self.scale.n, 1)?;
        let p = self.params(self.scale.steps)?;
        let f = Nonlinearity::Arctan;
        let seed = 7;
        let r = solve_picard(&inst.v0, &inst.drift, f, &p)?;
        self.record("mckean", &r);
        let frozen = simulate_frozen(&r, &inst.drift, f, self.scale.particles, p.time_grid.dt(), seed, &[])?;
        let h = default_bandwidth(frozen.last());
        let l1 = law_vs_pde(&frozen, &r, h)?.last().map(|row| row.l1).unwrap_or(f64::NAN);
        let zero = Drift::zero(inst.v0.grid());
        let r0 = solve_picard(&inst.v0, &zero, f, &p)?;
        let calm = simulate_frozen(&r0, &zero, f, self.scale.particles, p.time_grid.dt(), seed, &[])?;
        let calib = law_vs_pde(&calm, &r0, h)?.last().map(|row| row.l1).unwrap_or(f64::NAN);
        let inter = simulate_interacting(
            &inst.v0,
            &inst.drift,
            f,
            self.scale.interacting,
            0.05,
            p.time_grid.dt(),
            HORIZON,
            seed,
            InteractionMode::Spectral,
            &[],
        )?;
        let ki = kde_density(inter.last(), h)?;
        let kf = kde_density(frozen.last(), h)?;
        let inter_l1 = ki.field.l1_distance(&kf.field)?;
        let pde = heat_semigroup(r.v.last(), h * h)?;
        let note = format!(
            "N = {}, interacting N = {}, ε = 0.05, bandwidth {h:.4}, interacting vs PDE {:.4}",
            self.scale.particles,
            self.scale.interacting,
            ki.field.l1_distance(&pde)?
        );
        Ok((l1, calib, inter_l1, note))
    }

    pub fn weak(&mut self) -> Outcome {
        let (id, name) = (10, "weak-form residual");
        let t = Instant::now();
        let levels = [self.scale.steps / 2, self.scale.steps, 2 * self.scale.steps];
        let mut worst_final = 0.0_f64;
        let mut worst_slope = f64::NEG_INFINITY;
        let mut all = true;
        let mut notes = Vec::new();
        for seed in 1..=self.scale.ladder_instances.max(1) {
            let mut res = Vec::new();
            for &m in &levels {
                let out = instance(self.scale.n, seed).and_then(|inst| {
                    let p = self.params(m)?;
                    solve_picard(&inst.v0, &inst.drift, Nonlinearity::Arctan, &p)
                });
                match out {
                    Ok(r) => {
                        self.record(format!("weak seed {seed} M {m}"), &r);
                        res.push(r.max_residual());
                    }
                    Err(e) => return failed(id, name, format!("seed {seed}: {e}"), t),
                }
            }
            let ms: Vec<f64> = levels.iter().map(|&m| m as f64).collect();
            let slope = fit::log_log_slope(&ms, &res);
            let decreasing = res.windows(2).all(|w| w[1] < w[0]);
            all &= decreasing && slope <= -1.5 && res[2] <= 1e-4;
            worst_final = worst_final.max(res[2]);
            worst_slope = worst_slope.max(slope);
            notes.push(format!("seed {seed}: {:.2e}/{:.2e}/{:.2e} slope {slope:.2}", res[0], res[1], res[2]));
        }
        Outcome {
            id,
            name: name.into(),
            pass: all,
            value: worst_final,
            threshold: 1e-4,
            detail: format!(
                "max residual over 5 Fourier modes (cos and sin) at M = {}; slope limit −1.5; {}",
                levels[2],
                notes.join("; ")
            ),
            seconds: secs(t),
        }
    }

    /// Invariants checked by the quick suite besides the shared criteria.
    pub fn particle_invariants(&self) -> Outcome {
        let (id, name) = (11, "particle invariants");
        let t = Instant::now();
        let run = || -> sfp_core::Result<(f64, bool)> {
            let grid = Grid::new(1, self.scale.n, 2.0 * PI)?;
            let v0 = gaussian_density(grid, [PI, 0.0], INITIAL_VARIANCE)?;
            let a = ParticleEnsemble::sample(&v0, 1000, 5)?;
            let b = ParticleEnsemble::sample(&v0, 1000, 5)?;
            let kde = kde_density(&a, default_bandwidth(&a))?;
            Ok(((kde.field.integral(0) - 1.0).abs(), a.positions == b.positions))
        };
        match run() {
            Ok((mass, same)) => Outcome {
                id,
                name: name.into(),
                pass: mass <= 1e-10 && same,
                value: mass,
                threshold: 1e-10,
                detail: format!("KDE mass error; reproducible sampling: {same}"),
                seconds: secs(t),
            },
            Err(e) => failed(id, name, e, t),
        }
    }
}

/// `max |Σ_j Δ_j f − f|` for random fields in one and two dimensions.
pub fn reconstruction_error(partition: &Partition) -> sfp_core::Result<f64> {
    let mut worst = 0.0_f64;
    for (dim, n) in [(1, 512), (2, 64)] {
        let grid = Grid::new(dim, n, 2.0 * PI)?;
        for seed in 0..3 {
            let f = gaussian_series(grid, -0.3, 40 + seed, 1, 1.0);
            let back = decompose_with(&f, partition).reconstruct();
            worst = worst.max(back.sup_distance(&f)?);
        }
    }
    Ok(worst)
}

fn mittag_leffler_checks() -> (bool, String) {
    let mut worst_exp = 0.0_f64;
    for i in 0..=100 {
        let z = -5.0 + 0.1 * i as f64;
        match mittag_leffler(1.0, z) {
            Ok(v) => worst_exp = worst_exp.max((v - z.exp()).abs()),
            Err(_) => worst_exp = f64::INFINITY,
        }
    }
    // E_{1/2}(z) = e^{z²} erfc(−z) = e^{z²}(1 + erf z)
    let identity = std::f64::consts::E * (1.0 + erf(1.0));
    let half = mittag_leffler(0.5, 1.0).map(|v| (v - identity).abs()).unwrap_or(f64::INFINITY);
    (
        worst_exp <= 1e-12 && half <= 1e-10,
        format!("|E_1 − exp| ≤ {worst_exp:.1e} on [−5,5], erf identity error {half:.1e}"),
    )
}

fn gronwall_checks() -> (bool, String) {
    let times: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
    let n = times.len();
    let check = || -> sfp_core::Result<(bool, bool, bool, f64)> {
        let constant =
            gronwall_oracle(&times, &vec![1.5; n], &vec![1.5; n], &vec![0.0; n], 0.4)? == GronwallVerdict::Holds;
        let a = vec![1.0; n];
        let g = vec![0.8; n];
        let f = solve_volterra(&times, &a, &g, 0.4);
        let volterra = gronwall_oracle(&times, &f, &a, &g, 0.4)? == GronwallVerdict::Holds;
        let bound = mittag_leffler(0.4, 0.8 * gamma(0.4))?;
        let sharp = f[n - 1] / bound;
        let classical: Vec<f64> = times.iter().map(|t| (0.8 * t).exp()).collect();
        let exp_case = gronwall_oracle(&times, &classical, &a, &g, 1.0)? == GronwallVerdict::Holds;
        Ok((constant, volterra && sharp >= 0.95, exp_case, sharp))
    };
    match check() {
        Ok((a, b, c, sharp)) => {
            (a && b && c, format!("constant {a}, Volterra near-equality {b} (f/bound {sharp:.4}), classical {c}"))
        }
        Err(e) => (false, format!("error {e}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Runs every criterion of a suite, calling `progress` with one line per
/// criterion as it completes. Outcomes are returned in criterion order.
pub fn run_suite(
    level: Level,
    partition: Partition,
    mut progress: impl FnMut(&Outcome),
) -> sfp_core::Result<Vec<Outcome>> {
    let scale = match level {
        Level::Fast => Scale::fast(),
        Level::Full => Scale::full(),
    };
    let mut suite = Suite::new(scale, partition)?;
    let mut out = Vec::new();
    let mut push = |o: Outcome, out: &mut Vec<Outcome>| {
        progress(&o);
        out.push(o);
    };
    push(suite.translation(), &mut out);
    let (c2, c3) = suite.contraction_and_uniqueness();
    push(c2, &mut out);
    push(c3, &mut out);
    push(suite.mollification(), &mut out);
    push(suite.estimates(), &mut out);
    push(suite.stability(), &mut out);
    push(suite.mckean(), &mut out);
    push(suite.weak(), &mut out);
    push(suite.mass(), &mut out);
    push(suite.apriori(), &mut out);
    if level == Level::Fast {
        push(suite.particle_invariants(), &mut out);
    }
    out.sort_by_key(|o| o.id);
    Ok(out)
}

/// `verify`: runs a suite and writes its report under `<root>/verify-<level>`.
pub fn verify(
    level: Level,
    corrupt_partition: Option<f64>,
    root: &std::path::Path,
    mut progress: impl FnMut(&str),
) -> Result<crate::Report, crate::CliError> {
    let name = match level {
        Level::Fast => "fast",
        Level::Full => "full",
    };
    let partition = corrupt_partition.map(Partition::corrupted).unwrap_or_default();
    let mut report = crate::Report::new(format!("verify-{name}"), "verify");
    if let Some(c) = corrupt_partition {
        report.note(format!("partition of unity corrupted by factor {c}"));
    }
    let outcome = run_suite(level, partition, |o| progress(&o.line()));
    let dir = root.join(format!("verify-{name}"));
    match outcome {
        Ok(outcomes) => {
            for o in &outcomes {
                report.note(format!("{:02} {}: {:.1} s", o.id, o.name, o.seconds));
                report.check(o.into());
            }
            if level == Level::Full && corrupt_partition.is_none() {
                let golden = golden_check(&report.summary_csv());
                progress(&format!("[{}] golden summary: {}", if golden.pass { "PASS" } else { "FAIL" }, golden.detail));
                report.check(golden);
            }
            report.write(&dir)?;
            Ok(report)
        }
        Err(e) => {
            let e = crate::CliError::from(e);
            report.fail_with(&e);
            report.write(&dir)?;
            Err(e)
        }
    }
}

/// Summary of the full suite on the default seeds at first release.
pub const GOLDEN_SUMMARY: &str = include_str!("../golden/verify-full.csv");

/// Compares a summary against the golden file: same checks, same verdicts,
/// values within a relative `1e-6`.
pub fn golden_check(summary: &str) -> crate::Check {
    let parse = |text: &str| -> Vec<(String, String, f64)> {
        text.lines()
            .skip(1)
            .filter_map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f.len() == 4).then(|| (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap_or(f64::NAN)))
            })
            .collect()
    };
    let want = parse(GOLDEN_SUMMARY);
    let got = parse(summary);
    let mut worst = 0.0_f64;
    let mut mismatches = Vec::new();
    for (name, pass, value) in &want {
        match got.iter().find(|g| &g.0 == name) {
            Some((_, p, v)) => {
                let rel = (v - value).abs() / value.abs().max(1e-300);
                let diff = if *v == *value { 0.0 } else { rel };
                worst = worst.max(diff);
                if p != pass || !(diff <= 1e-6) {
                    mismatches.push(name.clone());
                }
            }
            None => mismatches.push(format!("{name} (missing)")),
        }
    }
    let detail = if mismatches.is_empty() {
        format!("{} checks match the committed summary", want.len())
    } else {
        format!("differs from the committed summary: {}", mismatches.join(", "))
    };
    crate::Check::new("golden summary", mismatches.is_empty(), worst, 1e-6, detail)
}
