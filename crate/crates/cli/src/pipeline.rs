//! Manifest pipelines. Every run writes `report.toml` and `summary.csv` into
//! its output directory, also when validation or computation fails.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use sfp_core::besov::{estimate_harness, EstimateKind, EstimateParams};
use sfp_core::particles::{
    default_bandwidth, kde_density, law_csv, law_vs_pde, simulate_frozen, simulate_interacting, InteractionMode,
    LawRow, DIRECT_LIMIT,
};
use sfp_core::solver::{solve_picard, stability_in_b, SolverParams, SolverResult, WorkingConstant};
use sfp_core::spectral::io::write_container;
use sfp_core::{besov, mollify, DriftField, SpectralField};

use crate::manifest::ExperimentKind;
use crate::report::{write_artifact, Check, Report};
use crate::{CliError, RunManifest};

/// Directory of per-node field containers inside a run directory.
pub const FIELDS_DIR: &str = "fields";

/// Runs a manifest and writes its report. The error, if any, is also
/// recorded in the report.
pub fn run(manifest: &RunManifest, root: &Path) -> (Report, Option<CliError>) {
    let dir = manifest.output_dir(root);
    let mut report = Report::new(manifest.run_id(), kind_name(manifest.kind));
    report.manifest = Some(manifest.to_text());
    report.note(format!("master seed {}", manifest.seed));
    let outcome = manifest.validate().and_then(|_| dispatch(manifest, &dir, &mut report));
    let err = outcome.err();
    if let Some(e) = &err {
        report.fail_with(e);
    }
    if let Err(e) = report.write(&dir) {
        return (report, Some(err.unwrap_or(e)));
    }
    (report, err)
}

pub fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Solve => "solve",
        ExperimentKind::Particles => "particles",
        ExperimentKind::EstimateSuite => "estimate-suite",
        ExperimentKind::Ladder => "ladder",
        ExperimentKind::FullMckean => "full-mckean",
    }
}

fn dispatch(m: &RunManifest, dir: &Path, report: &mut Report) -> Result<(), CliError> {
    match m.kind {
        ExperimentKind::Solve => {
            solve(m, dir, report)?;
        }
        ExperimentKind::Particles => particles(m, dir, report, false)?,
        ExperimentKind::FullMckean => particles(m, dir, report, true)?,
        ExperimentKind::EstimateSuite => estimates(m, dir, report)?,
        ExperimentKind::Ladder => ladder(m, dir, report)?,
    }
    Ok(())
}

/// Solver parameters with the working constant fitted by the Schauder harness.
fn fitted_params(m: &RunManifest, report: &mut Report) -> Result<SolverParams, CliError> {
    let mut p = m.solver_params()?;
    let schauder = estimate_harness(&EstimateParams::default_for(EstimateKind::Schauder))?;
    let c = WorkingConstant::from_schauder(&schauder);
    p.working_constant = c.0;
    report.note(format!("working constant c = {:.4} (Schauder harness worst ratio {:.4})", c.0, schauder.worst_ratio));
    Ok(p)
}

fn solve(m: &RunManifest, dir: &Path, report: &mut Report) -> Result<SolverResult, CliError> {
    let p = fitted_params(m, report)?;
    let v0 = m.initial_density()?;
    let drift = m.drift()?;
    let f = m.nonlinearity();
    report.note(format!("drift seed {}, nonlinearity {}", m.drift_seed(), f.label()));
    let r = solve_picard(&v0, drift.field(), f, &p)?;
    record_solution(&r, dir, report)?;
    Ok(r)
}

fn record_solution(r: &SolverResult, dir: &Path, report: &mut Report) -> Result<(), CliError> {
    let p = &r.params;
    let iters = r.iterations();
    report.check(Check::new(
        format!("converged in {iters} iteration{}", if iters == 1 { "" } else { "s" }),
        true,
        r.distances.last().copied().unwrap_or(0.0),
        p.picard_tol,
        format!("contraction factor {:.4}", r.contraction_factor),
    ));
    report.note(format!("‖v0‖_α = {:.4e}, ‖b‖_{{−β}} = {:.4e}, sup_t ‖v‖_α = {:.4e}", r.v0_norm, r.b_norm, r.sup_norm));
    report.check(Check::at_most("mass conservation", r.mass_drift(), 1e-12, "max |mean v(t_k) − mean v0|"));
    match r.apriori_k {
        Some(k) => report.check(Check::at_most("a-priori bound", r.sup_norm, k, "sup_t ‖v(t)‖_α against K")),
        None => report.note("a-priori bound K not evaluated: Mittag-Leffler argument out of range"),
    }
    report.check(Check::at_most("fixed-point residual", r.fixed_point_residual, 2.0 * p.picard_tol, "d_ρ(J(w*), w*)"));
    if p.density_mode {
        report.check(Check::new("positivity", r.min_value() >= -1e-12, r.min_value(), -1e-12, "min over nodes"));
    }
    report.note(format!("max weak residual {:.4e}", r.max_residual()));

    let fields = dir.join(FIELDS_DIR);
    std::fs::create_dir_all(&fields).map_err(|e| CliError::io(&fields, e))?;
    for (k, (vk, t)) in r.v.nodes().iter().zip(p.time_grid.nodes()).enumerate() {
        write_field(&fields.join(format!("v_{k:05}.sfp")), vk, t)?;
    }
    report.artifacts.push(fields);
    write_artifact(report, dir, "distances.csv", &r.distances_csv())?;
    write_artifact(report, dir, "norms.csv", &r.norms_csv()?)?;
    let mut res = String::from("mode,time,residual\n");
    for row in &r.residuals {
        let _ = writeln!(res, "{},{:.10e},{:.10e}", row.mode.label(), row.time, row.residual);
    }
    write_artifact(report, dir, "residuals.csv", &res)
}

fn write_field(path: &Path, field: &SpectralField, t: f64) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_container(BufWriter::new(file), field, t)?;
    Ok(())
}

fn last_l1(rows: &[LawRow]) -> f64 {
    rows.last().map(|r| r.l1).unwrap_or(f64::NAN)
}

fn particles(m: &RunManifest, dir: &Path, report: &mut Report, interacting: bool) -> Result<(), CliError> {
    let section = m.particles.as_ref().expect("validated");
    let p = fitted_params(m, report)?;
    let v0 = m.initial_density()?;
    let drift = m.drift()?;
    let f = m.nonlinearity();
    report.note(format!("drift seed {}, particle seed {}, nonlinearity {}", m.drift_seed(), m.seed, f.label()));
    let r = solve_picard(&v0, drift.field(), f, &p)?;
    record_solution(&r, dir, report)?;

    let dt = section.dt.unwrap_or(p.time_grid.dt());
    let frozen = simulate_frozen(&r, drift.field(), f, section.count, dt, m.seed, &[])?;
    let h = section.bandwidth.unwrap_or_else(|| default_bandwidth(frozen.last()));
    report.note(format!("{} frozen particles, dt {dt:.4e}, bandwidth {h:.4e}", section.count));
    let rows = law_vs_pde(&frozen, &r, h)?;
    write_artifact(report, dir, "law_frozen.csv", &law_csv(&rows))?;
    write_artifact(report, dir, "particles_frozen.csv", &frozen.last().to_csv())?;
    let kde = kde_density(frozen.last(), h)?;
    write_field(&dir.join(FIELDS_DIR).join("kde_frozen.sfp"), &kde.field, frozen.last().t)?;
    report.check(Check::new(
        "frozen law distance at T",
        last_l1(&rows).is_finite(),
        last_l1(&rows),
        f64::INFINITY,
        "L¹ between smoothed empirical and smoothed PDE densities",
    ));
    if !interacting {
        return Ok(());
    }
    let mode =
        if section.interacting_count <= DIRECT_LIMIT { InteractionMode::Direct } else { InteractionMode::Spectral };
    let inter = simulate_interacting(
        &v0,
        drift.field(),
        f,
        section.interacting_count,
        section.epsilon,
        dt,
        p.time_grid.horizon(),
        m.seed,
        mode,
        &[],
    )?;
    let rows_i = law_vs_pde(&inter, &r, h)?;
    write_artifact(report, dir, "law_interacting.csv", &law_csv(&rows_i))?;
    write_artifact(report, dir, "particles_interacting.csv", &inter.last().to_csv())?;
    let ki = kde_density(inter.last(), h)?;
    write_field(&dir.join(FIELDS_DIR).join("kde_interacting.sfp"), &ki.field, inter.last().t)?;
    let gap = ki.field.l1_distance(&kde.field)?;
    report.note(format!(
        "{} interacting particles, ε = {}, {:?} deposit",
        section.interacting_count, section.epsilon, mode
    ));
    report.check(Check::new(
        "interacting law distance at T",
        last_l1(&rows_i).is_finite(),
        last_l1(&rows_i),
        f64::INFINITY,
        "L¹ between smoothed interacting empirical and smoothed PDE densities",
    ));
    report.check(Check::new(
        "interacting vs frozen at T",
        gap.is_finite(),
        gap,
        f64::INFINITY,
        "L¹ between the two kernel density estimates",
    ));
    Ok(())
}

fn estimates(m: &RunManifest, dir: &Path, report: &mut Report) -> Result<(), CliError> {
    let kinds = m.estimates.as_ref().map(|e| e.kinds.clone()).unwrap_or_else(|| EstimateKind::ALL.to_vec());
    for kind in kinds {
        let params = EstimateParams::default_for(kind);
        let rep = estimate_harness(&params)?;
        report.note(format!("{}: {}", kind.name(), rep.parameter_string()));
        report.check(Check::new(
            format!("{} constant", kind.name()),
            rep.pass,
            rep.variation,
            params.stability_tolerance,
            format!("fitted constant {:.4}, worst ratio {:.4}", rep.fitted_constant, rep.worst_ratio),
        ));
        write_artifact(report, dir, &format!("estimates_{}.csv", kind.name()), &rep.to_csv())?;
    }
    Ok(())
}

fn ladder(m: &RunManifest, dir: &Path, report: &mut Report) -> Result<(), CliError> {
    let l = m.ladder.as_ref().expect("validated");
    let p = fitted_params(m, report)?;
    let v0 = m.initial_density()?;
    let raw = m.raw_drift()?;
    let f = m.nonlinearity();
    let top = mollify(&raw, l.reference)?;
    let mut csv = String::from("n,distance,drift_distance_to_reference,drift_distance_to_raw,ratio\n");
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    for &n in &l.levels {
        let bn = mollify(&raw, n)?;
        let (rep, _, _) = stability_in_b(&v0, &bn, &top, f, &p)?;
        let db = besov::norm(&bn.profile().sub(raw.profile())?, -p.beta)?;
        let ratio = rep.distance / db;
        let _ = writeln!(csv, "{n},{:.10e},{:.10e},{:.10e},{:.10e}", rep.distance, rep.drift_distance, db, ratio);
        distances.push(rep.distance);
        ratios.push(ratio);
    }
    write_artifact(report, dir, "ladder.csv", &csv)?;
    let increases = distances.windows(2).filter(|w| w[1] >= w[0]).count();
    report.check(Check::new(
        "distances decrease along the ladder",
        increases == 0,
        increases as f64,
        0.0,
        format!("reference index {}", l.reference),
    ));
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    report.note(format!("ratio spread max/min {spread:.3}"));
    Ok(())
}
