//! `chern`: curvature, geodesics, verification runs and flag-curvature
//! tables for pseudo-Finsler metrics given as spec files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "chern", version, about = "Chern connection and flag curvature of pseudo-Finsler metrics")]
struct Cli {
    /// Override every tolerance: integration tolerance for `geodesic`,
    /// identity tolerances for `verify`.
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// g, C, Γ, N, the curvature contraction and flag curvature at one point.
    Curvature(CurvatureArgs),
    /// Integrate a geodesic and write its nodes as CSV.
    Geodesic(GeodesicArgs),
    /// Run a verification plan; exit 0 when every identity passes.
    Verify(VerifyArgs),
    /// Flag curvature on an N×N grid of base points and flagpole angles.
    Table(TableArgs),
}

#[derive(Args, Debug)]
struct CurvatureArgs {
    /// Metric spec file.
    #[arg(long)]
    metric: PathBuf,
    /// Base point, comma separated.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    x: Coords,
    /// Flagpole.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    v: Coords,
    /// Transverse edge of the flag.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    u: Coords,
    /// Third argument of the curvature; defaults to `u`.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    w: Option<Coords>,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    #[arg(long)]
    metric: PathBuf,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    x0: Coords,
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    v0: Coords,
    /// Final time; negative integrates backwards.
    #[arg(long = "T", value_name = "T", allow_hyphen_values = true)]
    t_end: f64,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Plan file, or `default` for the builtin plan.
    #[arg(long)]
    plan: String,
    /// Overrides the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    metric: PathBuf,
    /// Points per axis; the table has N² rows.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=1000))]
    grid: u32,
    /// Centre of the segment of base points; origin when absent.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    center: Option<Coords>,
    /// Half length of the segment of base points along the first axis.
    #[arg(long = "box", default_value_t = 0.5)]
    half: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// A comma separated vector argument. Wrapped so clap takes it as one value.
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn parse_vector(text: &str) -> Result<Coords, String> {
    let out: Result<Vec<f64>, _> = text.split(',').map(|c| c.trim().parse::<f64>()).collect();
    match out {
        Ok(v) if v.iter().all(|c| c.is_finite()) => Ok(Coords(v)),
        Ok(_) => Err(format!("non-finite entry in '{text}'")),
        Err(e) => Err(format!("'{text}': {e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Curvature(a) => commands::curvature(&a),
        Command::Geodesic(a) => commands::geodesic(&a, cli.tol),
        Command::Verify(a) => commands::verify(&a, cli.tol),
        Command::Table(a) => commands::table(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
