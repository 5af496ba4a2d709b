//! Run manifests: TOML documents with one section per module.
//!
//! ```toml
//! kind = "solve"            # solve | particles | estimate-suite | ladder | full-mckean
//! seed = 1
//!
//! [grid]
//! dim = 1
//! n = 512
//! length = 6.283185307179586
//!
//! [time]
//! horizon = 0.25
//! steps = 200
//!
//! [initial]                 # wrapped Gaussian density
//! variance = 0.25
//!
//! [drift]
//! kind = "rough"            # zero | constant | rough
//! regularity = -0.2
//! mollify = 64
//!
//! [nonlinearity]
//! name = "arctan"
//!
//! [solver]
//! alpha = 0.35
//! beta = 0.25
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sfp_core::besov::EstimateKind;
use sfp_core::drift::DriftField;
use sfp_core::solver::{check_regularity, Nonlinearity, SolverParams};
use sfp_core::{mollify, Drift, Grid, MollifiedDrift, SpectralField, TimeGrid, TimeMode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Particles,
    EstimateSuite,
    Ladder,
    FullMckean,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "one")]
    pub dim: usize,
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Defaults to the box centre.
    pub centre: Option<Vec<f64>>,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    Zero,
    Constant,
    Rough,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub kind: DriftKind,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "default_regularity")]
    pub regularity: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Drift seed; defaults to the master seed.
    pub seed: Option<u64>,
    /// Mollification index `n` of `b^n = P_{1/n} b`.
    pub mollify: Option<usize>,
    #[serde(default = "static_mode")]
    pub time_mode: TimeMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_iters")]
    pub picard_max_iters: usize,
    #[serde(default = "yes")]
    pub density_mode: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    pub count: usize,
    /// Defaults to the solver time step.
    pub dt: Option<f64>,
    /// Defaults to `max(2h, N^{-1/(d+4)}·spread)`.
    pub bandwidth: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_interacting")]
    pub interacting_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    #[serde(default = "all_kinds")]
    pub kinds: Vec<EstimateKind>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub levels: Vec<usize>,
    pub reference: usize,
}

/// A complete, seed-closed description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Output directory; defaults to `<output root>/<run id>`.
    pub output: Option<PathBuf>,
    pub run_id: Option<String>,
    pub grid: Option<GridSection>,
    pub time: Option<TimeSection>,
    pub initial: Option<InitialSection>,
    pub drift: Option<DriftSection>,
    pub nonlinearity: Option<Nonlinearity>,
    pub solver: Option<SolverSection>,
    pub particles: Option<ParticleSection>,
    pub estimates: Option<EstimateSection>,
    pub ladder: Option<LadderSection>,
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}
fn default_regularity() -> f64 {
    -0.2
}
fn default_tol() -> f64 {
    1e-8
}
fn default_iters() -> usize {
    200
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_interacting() -> usize {
    0
}
fn static_mode() -> TimeMode {
    TimeMode::Static
}
fn all_kinds() -> Vec<EstimateKind> {
    EstimateKind::ALL.to_vec()
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Validation(msg.into()))
}

fn need<'a, T>(section: &'a Option<T>, name: &str, kind: ExperimentKind) -> Result<&'a T, CliError> {
    section.as_ref().ok_or_else(|| CliError::Validation(format!("[{name}] section is required for {kind:?} runs")))
}

/// Either kind of drift the pipelines consume.
pub enum BuiltDrift {
    Raw(Drift),
    Mollified(MollifiedDrift),
}

impl BuiltDrift {
    pub fn field(&self) -> &dyn DriftField {
        match self {
            BuiltDrift::Raw(d) => d,
            BuiltDrift::Mollified(m) => m,
        }
    }

    pub fn raw(&self) -> &Drift {
        match self {
            BuiltDrift::Raw(d) => d,
            BuiltDrift::Mollified(m) => m.base(),
        }
    }
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("malformed manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut m = Self::parse(&text)?;
        if m.run_id.is_none() {
            m.run_id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifests always serialize")
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| format!("run-{}", self.seed))
    }

    pub fn output_dir(&self, root: &Path) -> PathBuf {
        self.output.clone().unwrap_or_else(|| root.join(self.run_id()))
    }

    /// Checks every section the experiment kind uses against its module's
    /// preconditions, before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.kind;
        if let Some(id) = &self.run_id {
            if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
                return invalid(format!("run id {id:?} must be a plain file name"));
            }
        }
        if kind == ExperimentKind::EstimateSuite {
            if let Some(e) = &self.estimates {
                if e.kinds.is_empty() {
                    return invalid("[estimates] kinds must not be empty");
                }
            }
            return Ok(());
        }
        self.grid()?;
        self.time_grid()?;
        let s = need(&self.solver, "solver", kind)?;
        check_regularity(s.alpha, s.beta).map_err(|e| CliError::Validation(e.to_string()))?;
        self.solver_params()?;
        self.initial_density()?;
        let d = need(&self.drift, "drift", kind)?;
        match d.kind {
            DriftKind::Constant if d.values.len() != self.grid()?.dim() => {
                return invalid(format!("constant drift needs {} values", self.grid()?.dim()))
            }
            DriftKind::Rough if !(d.regularity > -0.5 && d.regularity < 0.0) => {
                return invalid(format!("drift regularity must lie in (−1/2, 0), got {}", d.regularity))
            }
            _ => {}
        }
        if d.mollify == Some(0) {
            return invalid("mollification index must be >= 1");
        }
        match kind {
            ExperimentKind::Particles | ExperimentKind::FullMckean => {
                let p = need(&self.particles, "particles", kind)?;
                if p.count == 0 {
                    return invalid("particle count must be >= 1");
                }
                if kind == ExperimentKind::FullMckean && p.interacting_count == 0 {
                    return invalid("full-mckean runs need [particles] interacting_count >= 1");
                }
                if let Some(dt) = p.dt {
                    let ratio = self.time_grid()?.dt() / dt;
                    if !(dt > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
                        return invalid(format!("particle dt {dt} must divide the solver step"));
                    }
                }
                if !(p.epsilon > 0.0) {
                    return invalid("interaction scale ε must be positive");
                }
            }
            ExperimentKind::Ladder => {
                let l = need(&self.ladder, "ladder", kind)?;
                if l.levels.is_empty() || l.levels.iter().any(|&n| n == 0 || n >= l.reference) {
                    return invalid("ladder levels must be nonzero and below the reference index");
                }
                if d.kind != DriftKind::Rough {
                    return invalid("ladders need a rough drift");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = need(&self.grid, "grid", self.kind)?;
        Grid::new(g.dim, g.n, g.length).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let t = need(&self.time, "time", self.kind)?;
        TimeGrid::new(t.horizon, t.steps).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn solver_params(&self) -> Result<SolverParams, CliError> {
        let s = need(&self.solver, "solver", self.kind)?;
        let mut p =
            SolverParams::new(s.alpha, s.beta, self.time_grid()?).map_err(|e| CliError::Validation(e.to_string()))?;
        p.rho = s.rho;
        p.picard_tol = s.picard_tol;
        p.picard_max_iters = s.picard_max_iters;
        p.density_mode = s.density_mode;
        p.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(p)
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity.unwrap_or(Nonlinearity::Arctan)
    }

    pub fn initial_density(&self) -> Result<SpectralField, CliError> {
        let grid = self.grid()?;
        let i = need(&self.initial, "initial", self.kind)?;
        let half = grid.length() / 2.0;
        let centre = match &i.centre {
            None => [half, if grid.dim() == 2 { half } else { 0.0 }],
            Some(c) if c.len() == grid.dim() => [c[0], c.get(1).copied().unwrap_or(0.0)],
            Some(_) => return invalid(format!("initial centre needs {} coordinates", grid.dim())),
        };
        sfp_core::particles::gaussian_density(grid, centre, i.variance).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn drift_seed(&self) -> u64 {
        self.drift.as_ref().and_then(|d| d.seed).unwrap_or(self.seed)
    }

    /// The unmollified drift.
    pub fn raw_drift(&self) -> Result<Drift, CliError> {
        let grid = self.grid()?;
        let d = need(&self.drift, "drift", self.kind)?;
        let built = match d.kind {
            DriftKind::Zero => Ok(Drift::zero(grid)),
            DriftKind::Constant => Drift::constant(grid, &d.values),
            DriftKind::Rough => {
                Drift::synthesize_scaled(grid, d.regularity, self.drift_seed(), d.time_mode, d.amplitude)
            }
        };
        built.map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn drift(&self) -> Result<BuiltDrift, CliError> {
        let raw = self.raw_drift()?;
        let d = need(&self.drift, "drift", self.kind)?;
        Ok(match d.mollify {
            None => BuiltDrift::Raw(raw),
            Some(n) => BuiltDrift::Mollified(mollify(&raw, n).map_err(|e| CliError::Validation(e.to_string()))?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"
kind = "solve"
seed = 3
[grid]
n = 64
[time]
horizon = 0.1
steps = 10
[initial]
variance = 0.25
[drift]
kind = "zero"
[solver]
alpha = 0.35
beta = 0.25
"#;

    #[test]
    fn parses_and_validates() {
        let m = RunManifest::parse(SOLVE).unwrap();
        m.validate().unwrap();
        assert_eq!(m.kind, ExperimentKind::Solve);
        assert_eq!(m.grid().unwrap().dim(), 1);
        let again = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(again.to_text(), m.to_text());
    }

    #[test]
    fn alpha_window_is_named() {
        let m = RunManifest::parse(&SOLVE.replace("alpha = 0.35", "alpha = 0.2")).unwrap();
        match m.validate() {
            Err(CliError::Validation(msg)) => assert!(msg.contains("α ∈ (β, 1−β)"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunManifest::parse(&SOLVE.replace("seed = 3", "seed = 3\nsede = 4")).is_err());
    }

    #[test]
    fn nonlinearity_sections() {
        let m = RunManifest::parse(&format!("{SOLVE}\n[nonlinearity]\nname = \"constant\"\nkappa = 1.0\n")).unwrap();
        assert_eq!(m.nonlinearity(), Nonlinearity::Constant { kappa: 1.0 });
    }
}
