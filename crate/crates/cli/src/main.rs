mod run;

use clap::{Args, Parser, Subcommand, ValueEnum};
use run::{run_checks, RunConfig, RunError};
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Curvature, Gauss-Bonnet and Yamabe-spectrum checks for conformally flat
/// metrics on the unit ball.
#[derive(Debug, Parser)]
#[command(name = "hemicheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one suite, or all of them.
    Verify(Common),
    /// First Robin eigenvalue of the Yamabe operator (suite `spectrum`).
    Spectrum(Common),
    /// The F2 / Yamabe chain over the radial sweep (suite `chain`).
    Chain(Common),
    /// Rigidity probe (suite `probe`).
    Probe(Common),
    /// Re-check a saved JSON report and print it as JSON or CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cgb4,
    Cgb6,
    F2,
    Spectrum,
    Chain,
    Identities,
    Probe,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Model name, e.g. `hemisphere`, `cap(0.6)`, `radial_bump(7,0.2)`.
    #[arg(long, default_value = "hemisphere")]
    model: String,
    /// Dimension, 4 or 6; defaults to 6 for `cgb6` and 4 otherwise.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 64)]
    radial: usize,
    /// Gauss order per polar angle of the full grid.
    #[arg(long, default_value_t = 12)]
    angular: usize,
    #[arg(long, default_value_t = 1e-3)]
    fd_step: f64,
    #[arg(long, default_value_t = 2048)]
    mesh: usize,
    /// Refinement levels, 1 to 3.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    refine: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Basis size of the rigidity probe.
    #[arg(long, default_value_t = 6)]
    basis: usize,
    /// Iterations of the rigidity probe.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn config(verb: &str, forced: Option<Suite>, c: &Common) -> RunConfig {
    let suite = forced.unwrap_or(c.suite);
    RunConfig {
        verb: verb.to_string(),
        suite,
        model: c.model.clone(),
        dim: c.dim.unwrap_or(if suite == Suite::Cgb6 { 6 } else { 4 }),
        radial: c.radial,
        angular: c.angular,
        fd_step: c.fd_step,
        mesh: c.mesh,
        refine: usize::from(c.refine),
        seed: c.seed,
        basis: c.basis,
        iterations: c.iterations,
        format: c.format,
    }
}

fn execute(cfg: RunConfig, out: Option<&Path>) -> Result<bool, RunError> {
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let format = cfg.format;
    let checks = run_checks(&cfg)?;
    let report = hemicheck::report::Report::new(cfg, started_at, checks);
    let mut w = open_out(out)?;
    match format {
        Format::Json => report.write_json(&mut w)?,
        Format::Csv => report.write_csv(&mut w)?,
    }
    w.flush()?;
    let failing = report.failing_ids();
    for id in &failing {
        eprintln!("FAIL {id}");
    }
    Ok(failing.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify(c) => execute(config("verify", None, c), c.out.as_deref()),
        Command::Spectrum(c) => execute(
            config("spectrum", Some(Suite::Spectrum), c),
            c.out.as_deref(),
        ),
        Command::Chain(c) => execute(config("chain", Some(Suite::Chain), c), c.out.as_deref()),
        Command::Probe(c) => execute(config("probe", Some(Suite::Probe), c), c.out.as_deref()),
        Command::Report(r) => run::recheck(&r.input, r.format, r.out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
