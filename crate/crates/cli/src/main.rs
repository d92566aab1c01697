//! `ckosc`: harmonic oscillator orbits on the two-dimensional Cayley-Klein spaces.

mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{ClassifyArgs, ConvertArgs, OrbitArgs, PeriodArgs, PlotArgs, SimulateArgs, SweepArgs};
use config::{Resolved, SpaceArgs};

/// Error reported to the user; `kind` is stable and machine-readable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

macro_rules! from_module_error {
    ($($ty:ty => $kind:literal),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::new($kind, e.to_string())
            }
        })*
    };
}

from_module_error! {
    ckosc::geometry::GeometryError => "geometry",
    ckosc::dynamics::DynamicsError => "dynamics",
    ckosc::integrator::IntegratorError => "integrator",
    ckosc::orbits::OrbitError => "orbit",
    ckosc::conics::ConicError => "conic",
    ckosc::render::RenderError => "render",
}

impl From<ckosc::sweep::PeriodError> for CliError {
    fn from(e: ckosc::sweep::PeriodError) -> Self {
        match e {
            ckosc::sweep::PeriodError::Orbit(e) => e.into(),
            ckosc::sweep::PeriodError::Integrator(e) => e.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ckosc", version, about = "Harmonic oscillator on the nine Cayley-Klein planes and spacetimes")]
struct Cli {
    #[command(flatten)]
    space: SpaceArgs,
    /// Report errors as JSON on stderr.
    #[arg(long = "json-errors", global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Describe a space: type, metric in both charts, E_inf and J_inf.
    Info,
    /// Integrate the equations of motion; writes trajectory and event CSVs.
    Simulate(SimulateArgs),
    /// Closed-form orbit constants and an orbit table.
    Orbit(OrbitArgs),
    /// Orbit type for an energy and angular momentum.
    Classify(ClassifyArgs),
    /// Closed-form period against the period measured on a simulated orbit.
    Period(PeriodArgs),
    /// Convert a point between polar, parallel and Beltrami coordinates.
    Convert(ConvertArgs),
    /// Write an SVG figure and the CSV of its curves.
    Plot(PlotArgs),
    /// Batch classification or period checks, one CSV row per run.
    Sweep(SweepArgs),
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let r = Resolved::new(cli.space.clone())?;
    match &cli.command {
        Command::Info => commands::info(&r),
        Command::Simulate(a) => commands::simulate_cmd(&r, a),
        Command::Orbit(a) => commands::orbit_cmd(&r, a),
        Command::Classify(a) => commands::classify_cmd(&r, a),
        Command::Period(a) => commands::period_cmd(&r, a),
        Command::Convert(a) => commands::convert_cmd(&r, a),
        Command::Plot(a) => commands::plot_cmd(&r, a),
        Command::Sweep(a) => commands::sweep_cmd(&r, a),
    }
}

fn report(err: &CliError, json: bool) {
    if json {
        let body = serde_json::json!({ "error": err });
        eprintln!("{body}");
    } else {
        eprintln!("error: {err}");
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if json_errors && e.use_stderr() => {
            report(&CliError::new("usage", e.to_string().trim_end()), true);
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            report(&err, cli.json_errors);
            ExitCode::FAILURE
        }
    }
}
