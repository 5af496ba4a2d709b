use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use sfp_core::spectral::io::{read_container, write_container, write_csv};

use crate::pipeline::FIELDS_DIR;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Csv,
    Container,
}

/// Converts every stored field of a run into `<run>/export/<format>/`.
/// Returns the written paths in name order.
pub fn export(root: &Path, run_id: &str, format: ExportFormat) -> Result<Vec<PathBuf>, CliError> {
    if run_id.is_empty() || run_id.contains(['/', '\\']) || run_id.starts_with('.') {
        return Err(CliError::Validation(format!("run id {run_id:?} must be a plain file name")));
    }
    let run = root.join(run_id);
    let fields = run.join(FIELDS_DIR);
    let entries = std::fs::read_dir(&fields).map_err(|e| {
        CliError::Validation(format!("no stored fields for run {run_id:?} in {}: {e}", fields.display()))
    })?;
    let mut inputs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sfp"))
        .collect();
    inputs.sort();
    let (sub, ext) = match format {
        ExportFormat::Csv => ("csv", "csv"),
        ExportFormat::Container => ("container", "sfp"),
    };
    let out_dir = run.join("export").join(sub);
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut written = Vec::with_capacity(inputs.len());
    for input in inputs {
        let file = File::open(&input).map_err(|e| CliError::io(&input, e))?;
        let (field, t) = read_container(BufReader::new(file))?;
        let stem = input.file_stem().expect("listed files have names").to_string_lossy().into_owned();
        let out = out_dir.join(format!("{stem}.{ext}"));
        let w = BufWriter::new(File::create(&out).map_err(|e| CliError::io(&out, e))?);
        match format {
            ExportFormat::Csv => write_csv(w, &field)?,
            ExportFormat::Container => write_container(w, &field, t)?,
        }
        written.push(out);
    }
    Ok(written)
}
