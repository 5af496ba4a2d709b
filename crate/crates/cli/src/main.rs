use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sfp_cli::criteria::{verify, Level};
use sfp_cli::export::{export, ExportFormat};
use sfp_cli::{default_output_root, pipeline, CliError, ExitStatus, RunManifest};

#[derive(Parser)]
#[command(name = "sfp", version, about = "Singular Fokker-Planck experiments and verification suites")]
struct Cli {
    /// Output root; defaults to $SFP_OUTPUT_ROOT or ./sfp-runs.
    #[arg(long, global = true)]
    output_root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a manifest.
    Run { manifest: PathBuf },
    /// Run the verification suites.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: Level,
        /// Fault injection: perturb the partition of unity by this factor.
        #[arg(long, hide = true)]
        corrupt_partition: Option<f64>,
    },
    /// Convert the stored fields of a run.
    Export {
        run_id: String,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },
}

fn code(s: ExitStatus) -> ExitCode {
    ExitCode::from(s as u8)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    code(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = cli.output_root.unwrap_or_else(default_output_root);
    match cli.command {
        Command::Run { manifest } => {
            let m = match RunManifest::load(&manifest) {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            let (report, err) = pipeline::run(&m, &root);
            print!("{}", report.text());
            if let Some(e) = &err {
                eprintln!("error: {e}");
            }
            code(report.status(err.as_ref()))
        }
        Command::Verify { level, corrupt_partition } => {
            match verify(level, corrupt_partition, &root, |line| println!("{line}")) {
                Ok(report) => code(report.status(None)),
                Err(e) => fail(&e),
            }
        }
        Command::Export { run_id, format } => match export(&root, &run_id, format) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                code(ExitStatus::Pass)
            }
            Err(e) => fail(&e),
        },
    }
}
