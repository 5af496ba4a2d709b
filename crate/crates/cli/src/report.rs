use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::criteria::Outcome;
use crate::{CliError, ExitStatus};

/// One verdict with its numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, value, threshold, detail: detail.into() }
    }

    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value <= threshold, value, threshold, detail)
    }
}

impl From<&Outcome> for Check {
    fn from(o: &Outcome) -> Self {
        Check::new(format!("{:02} {}", o.id, o.name), o.pass, o.value, o.threshold, o.detail.clone())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub class: String,
    pub message: String,
}

/// The record every run and verification leaves behind, success or not.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub run_id: String,
    pub kind: String,
    /// Free-form run facts: seeds, fitted constants, iteration counts.
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    pub error: Option<ErrorRecord>,
    /// The manifest as parsed, re-serialised.
    pub manifest: Option<String>,
}

impl Report {
    pub fn new(run_id: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            run_id: run_id.into(),
            kind: kind.into(),
            notes: Vec::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            error: None,
            manifest: None,
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn fail_with(&mut self, e: &CliError) {
        self.error = Some(ErrorRecord { class: e.class().into(), message: e.to_string() });
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn status(&self, err: Option<&CliError>) -> ExitStatus {
        match err {
            Some(e) => e.exit_code(),
            None if self.passed() => ExitStatus::Pass,
            None => ExitStatus::CriterionFailed,
        }
    }

    /// Everything in one human-readable block.
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run {} ({})", self.run_id, self.kind);
        for n in &self.notes {
            let _ = writeln!(s, "  {n}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  [{}] {}: {:.4e} (threshold {:.4e}) {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold,
                c.detail
            );
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "  error [{}]: {}", e.class, e.message);
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "  wrote {}", a.display());
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("check,pass,value,threshold\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{},{:.10e},{:.10e}", c.name, c.pass, c.value, c.threshold);
        }
        s
    }

    /// Writes `report.toml` and `summary.csv` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let report = dir.join("report.toml");
        let summary = dir.join("summary.csv");
        for p in [&report, &summary] {
            if !self.artifacts.contains(p) {
                self.artifacts.push(p.clone());
            }
        }
        let text = toml::to_string(&*self).map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(&report, text).map_err(|e| CliError::io(&report, e))?;
        std::fs::write(&summary, self.summary_csv()).map_err(|e| CliError::io(&summary, e))?;
        Ok(())
    }
}

/// Writes `contents` to `dir/name` and records the artifact.
pub fn write_artifact(report: &mut Report, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    report.artifacts.push(path);
    Ok(())
}
