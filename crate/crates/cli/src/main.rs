//! `twistor`: batch driver for the conformal Killing form verification suites.
//!
//! Exit codes: 0 when every check passes, 1 on a numerical failure, 2 on a
//! usage or configuration error.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    CatalogArgs, ConeArgs, DimensionArgs, Failure, GeodesicArgs, SpinArgs, TransportArgs,
    VerifyArgs,
};
use report::{emit, Format, Report};

#[derive(Parser, Debug)]
#[command(
    name = "twistor",
    version,
    about = "Verify conformal Killing forms on catalog manifolds"
)]
struct Cli {
    /// Worker threads for point-level parallelism.
    #[arg(long, global = true, env = "TWISTOR_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog manifolds and their named forms.
    Catalog(CatalogArgs),
    /// Run twistor-module checks on a catalog form.
    Verify(VerifyArgs),
    /// Lift a form to the metric cone and check that the lift is parallel.
    Cone(ConeArgs),
    /// Transport (ψ, dψ, d*ψ, dd*ψ) along chart segments by the Killing connection.
    Transport(TransportArgs),
    /// Trace the first integrals of a Killing form along geodesics.
    Geodesic(GeodesicArgs),
    /// Numerical dimension of conformal Killing forms against the bound.
    Dimension(DimensionArgs),
    /// Conformal Killing forms built from flat twistor spinors.
    Spin(SpinArgs),
}

fn finish(
    report: &Report,
    format: Format,
    output: Option<&std::path::Path>,
) -> Result<ExitCode, Failure> {
    let text = report
        .render(format)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    emit(&text, output).map_err(|e| Failure::Usage(format!("cannot write report: {e}")))?;
    Ok(exit_for(report))
}

/// Exit code for a finished report; failing checks are listed on stderr.
fn exit_for(report: &Report) -> ExitCode {
    if report.pass() {
        return ExitCode::SUCCESS;
    }
    for c in report.checks.iter().filter(|c| !c.pass()) {
        eprintln!(
            "fail: {} max residual {:e} > tol {:e} at {:?}",
            c.id, c.max_residual, c.tol, c.worst_point
        );
    }
    ExitCode::from(1)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Catalog(a) => {
            emit(&commands::catalog_listing(a)?, None)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => finish(
            &commands::verify(a)?,
            a.common.format,
            a.common.output.as_deref(),
        ),
        Command::Cone(a) => finish(
            &commands::cone(a)?,
            a.common.format,
            a.common.output.as_deref(),
        ),
        Command::Transport(a) => finish(
            &commands::transport(a)?,
            a.common.format,
            a.common.output.as_deref(),
        ),
        Command::Geodesic(a) => {
            let (report, rows) = commands::geodesic(a)?;
            let csv = || commands::trace_csv(&rows).map_err(|e| Failure::Usage(e.to_string()));
            if let Some(path) = &a.trace {
                emit(&csv()?, Some(path)).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            if a.format == Format::Csv {
                emit(&csv()?, a.output.as_deref()).map_err(|e| Failure::Usage(e.to_string()))?;
                return Ok(exit_for(&report));
            }
            finish(&report, Format::Json, a.output.as_deref())
        }
        Command::Dimension(a) => finish(&commands::dimension(a)?, a.format, a.output.as_deref()),
        Command::Spin(a) => finish(
            &commands::spin(a)?,
            a.common.format,
            a.common.output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
