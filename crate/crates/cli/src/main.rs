//! `rotns`: experiment driver for the rotating Navier-Stokes spectral library.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rotns_core::Exec;

#[derive(Parser)]
#[command(name = "rotns", version, about = "Spectral experiments for rotating Navier-Stokes flows")]
struct Cli {
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stokes eigenvalues of a lattice and their additive semigroup.
    Spectrum(SpectrumArgs),
    /// Integrate a configured experiment and stream the trajectory.
    Simulate(SimulateArgs),
    /// Fit the asymptotic expansion of a recorded trajectory.
    Expand(ExpandArgs),
    /// Check an explicit solution against solver and equations.
    VerifySpecial(VerifyArgs),
    /// Helicity of a field by spectral sum and by grid quadrature.
    Helicity(HelicityArgs),
    /// Window averages of the leading term across rotation rates.
    SweepOmega(SweepArgs),
    /// Plot series (CSV) of an expansion or sweep report.
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
pub struct SpectrumArgs {
    /// Periods as multiples of 2*pi, e.g. `1,1,1/2`.
    #[arg(long = "L", value_delimiter = ',', default_values = ["1", "1", "1"])]
    pub periods: Vec<String>,
    /// Largest retained eigenvalue.
    #[arg(long, default_value = "12")]
    pub cutoff: String,
    /// Semigroup elements up to this value; defaults to the cutoff.
    #[arg(long)]
    pub semigroup_cutoff: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Trajectory file (JSON lines).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct ExpandArgs {
    #[arg(long)]
    #[serde(skip)]
    pub traj: PathBuf,
    /// Number of orders to build.
    #[arg(long)]
    pub order: usize,
    /// Gevrey index `alpha,sigma` of the remainder norm.
    #[arg(long, value_delimiter = ',', default_values = ["0", "0"])]
    pub norm: Vec<f64>,
    /// Fit window `a,b`; defaults to the last third of the run.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub drift_tol: Option<f64>,
    #[arg(long)]
    pub refine_passes: Option<usize>,
    #[arg(long)]
    pub floor_rel: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Also write the remainder series as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCase {
    /// Zero-mean solution on one direction; closed form.
    #[value(alias = "thm51")]
    ClosedForm,
    /// The same data carried by a rotating mean flow.
    #[value(alias = "thm54")]
    Drifting,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub case: SpecialCase,
    #[arg(long)]
    pub omega: f64,
    /// Data file `{"k": [..], "modes": [{"m", "re", "im"}]}`.
    #[arg(long)]
    #[serde(skip)]
    pub data: PathBuf,
    /// Spatial mean `U0` for the drifting case.
    #[arg(long, value_delimiter = ',')]
    pub mean: Option<Vec<f64>>,
    #[arg(long = "L", value_delimiter = ',', default_values = ["1", "1", "1"])]
    pub periods: Vec<String>,
    /// Defaults to the largest eigenvalue carried by the data.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Solver comparison horizon and step.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Quadrature points per axis; defaults to four times the largest frequency.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct HelicityArgs {
    #[arg(long)]
    #[serde(skip)]
    pub field: PathBuf,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub omegas: Vec<f64>,
    /// Averaging window length.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Window start.
    #[arg(long, default_value_t = 0.0)]
    pub at: f64,
    /// Eigenvalue of the term; defaults to the lowest one carried by the data.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long = "L", value_delimiter = ',', default_values = ["1", "1", "1"])]
    pub periods: Vec<String>,
    #[arg(long)]
    pub cutoff: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = error::CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let result = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Simulate(a) => commands::simulate(a, exec),
        Command::Expand(a) => commands::expand(a, exec),
        Command::VerifySpecial(a) => commands::verify_special(a, exec),
        Command::Helicity(a) => commands::helicity(a, exec),
        Command::SweepOmega(a) => commands::sweep_omega(a, exec),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
