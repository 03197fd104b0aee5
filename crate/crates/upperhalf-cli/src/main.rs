//! Command-line front end for the upper half-space soliton library.
//!
//! Exit codes: 0 on success or a passing verdict, 1 on a failing verdict,
//! 2 on configuration or domain errors (reported on stderr).

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "upperhalf",
    version,
    about = "Numerical soliton verification on the hyperbolic upper half-space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a soliton residual over a grid and emit a JSON report
    Check(commands::CheckArgs),
    /// Print the metric, Christoffel symbols, and curvature at a point
    Curvature(commands::CurvatureArgs),
    /// Evaluate a vector field family at sample points
    Family(commands::FamilyArgs),
    /// Derive the conformal factor from a potential and report its formula
    DeriveG(commands::DeriveGArgs),
    /// Integrate a geodesic and write the trajectory as CSV
    Geodesic(commands::GeodesicArgs),
    /// Compare exact derivatives against finite differences
    AuditAd(commands::AuditAdArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(args) => commands::cmd_check(args),
        Command::Curvature(args) => commands::cmd_curvature(args),
        Command::Family(args) => commands::cmd_family(args),
        Command::DeriveG(args) => commands::cmd_derive_g(args),
        Command::Geodesic(args) => commands::cmd_geodesic(args),
        Command::AuditAd(args) => commands::cmd_audit_ad(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
